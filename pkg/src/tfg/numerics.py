"""Threshold functions and the scalar parameter cascade.

Every sampler and experiment point is described by a :class:`ThresholdParams`
record. The constructors here fill it from the natural window coordinates
(``omega`` for the 3/4 window, ``c`` for the 4/5 window, ``m_edges`` for the
fixed-edge-count model).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

from scipy.optimize import brentq

__all__ = [
    "ThresholdParams",
    "lambert_psi",
    "window3_center",
    "params_for_window3",
    "params_for_window4",
    "lambda_of_m",
    "params_for_fixed_m",
    "chi4_limit_probability",
    "kappa_of",
    "q_from_ratio",
    "q0_of",
    "coupling_lambda0",
    "clause_prob_for_kappa",
]

_TWO_E = 2.0 * math.e


@dataclass
class ThresholdParams:
    """All scalar parameters of one experiment point.

    Fields that do not apply to a given model stay ``None``. ``provenance``
    records which constructor filled the record and how.
    """

    n: int
    fugacity: float
    p: float
    q0: float
    lambda0_coupling: float
    m_edges: Optional[int] = None
    q1: Optional[float] = None
    q2: Optional[float] = None
    q_ell: Optional[float] = None
    q_u: Optional[float] = None
    mu_param: Optional[float] = None
    path_weight_psi: Optional[float] = None
    psi_n: Optional[float] = None
    m_c: Optional[float] = None
    p_c: Optional[float] = None
    omega: Optional[float] = None
    c: Optional[float] = None
    kappa: Optional[float] = None
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def lambert_psi(n: float) -> float:
    """Return the root ``psi >= 1`` of ``psi * exp(-psi) = 2/n``.

    Equivalent to ``-W_{-1}(-2/n)``. Bisection on ``[1, 3 log n]`` followed by
    a Newton polish on the log-form residual.
    """
    n = float(n)
    if not n >= _TWO_E * (1 - 1e-15):
        raise ValueError(f"lambert_psi needs n >= 2e, got {n!r}")
    target = 2.0 / n
    if n <= _TWO_E:
        return 1.0

    # g(x) = x e^{-x} - 2/n is decreasing on [1, inf)
    def g(x):
        return x * math.exp(-x) - target

    lo, hi = 1.0, max(3.0 * math.log(n), 2.0)
    while g(hi) > 0:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-10 * hi:
            break
    x = 0.5 * (lo + hi)
    # Newton on h(x) = log x - x - log(2/n); h'(x) = 1/x - 1
    log_t = math.log(target)
    for _ in range(50):
        h = math.log(x) - x - log_t
        step = h / (1.0 / x - 1.0)
        x_new = x - step
        if not lo <= x_new <= hi:
            break
        x = x_new
        if abs(step) <= 1e-16 * x:
            break
    return x


def window3_center(n: float) -> tuple[float, float]:
    """Return ``(m_c, p_c)`` for the 3/4 chromatic window."""
    psi = lambert_psi(n)
    m_c = n**1.5 * math.sqrt(psi / 8.0)
    p_c = math.sqrt(2.0 * psi / n)
    return m_c, p_c


def q_from_ratio(x: float) -> float:
    """Invert ``r / (1 - r) = x`` exactly."""
    if x < 0:
        raise ValueError("odds ratio must be non-negative")
    if math.isinf(x):
        return 1.0
    return x / (1.0 + x)


def q0_of(fugacity: float, n: float) -> float:
    """Defect edge probability for the first sampler."""
    return q_from_ratio(fugacity * math.exp(-n * fugacity**2 / 2.0))


def coupling_lambda0(fugacity: float) -> float:
    """Independent-clause probability matching the empty C4 mass."""
    return 1.0 - (1.0 + 4.0 * fugacity + 2.0 * fugacity**2) ** -0.25


def _check_prob(name, value, *, closed_top=False):
    ok = 0.0 <= value <= 1.0 if closed_top else 0.0 <= value < 1.0
    if not ok or math.isnan(value):
        raise ValueError(f"{name}={value!r} outside the unit interval")


def params_for_window3(n: int, omega: float) -> ThresholdParams:
    """Parameters at ``p = p_c + n^{-2/3} (log n)^{-1/3} omega``."""
    m_c, p_c = window3_center(n)
    p = p_c + n ** (-2.0 / 3.0) * math.log(n) ** (-1.0 / 3.0) * omega
    if not 0.0 < p < 1.0:
        raise ValueError(f"p={p!r} outside (0,1) for n={n}, omega={omega}")
    lam = p / (1.0 - p)
    return ThresholdParams(
        n=int(n),
        fugacity=lam,
        p=p,
        q0=q0_of(lam, n),
        lambda0_coupling=coupling_lambda0(lam),
        psi_n=lambert_psi(n),
        m_c=m_c,
        p_c=p_c,
        omega=float(omega),
        provenance={"constructor": "params_for_window3"},
    )


def _window4_cascade(n: float, lam: float) -> dict:
    ln_r0 = math.log(lam) - n * lam**2 / 2.0
    ln_r1 = math.log(lam) - lam**2 * n / 2.0 + lam**3 * n - 7.0 * lam**4 * n / 4.0
    q0 = q_from_ratio(math.exp(ln_r0))
    q1 = q_from_ratio(math.exp(ln_r1))
    half = n / 2.0
    mu = half * (half - 1.0) / 2.0 * q1 * math.exp(lam**3 * n**2 * q0)
    ln_r2 = ln_r1 + 4.0 * lam**3 * mu
    q2 = q_from_ratio(math.exp(ln_r2)) if ln_r2 < 700 else 1.0
    return {"q0": q0, "q1": q1, "mu_param": mu, "q2": q2}


def _p_for_target_q2(n: float, q2_target: float) -> float:
    """Solve the cascade for the edge probability producing ``q2_target``.

    ``q2`` is decreasing in ``p`` on the bracket used here.
    """

    def f(p):
        c = _window4_cascade(n, p / (1.0 - p))
        return math.log(max(c["q2"], 1e-300)) - math.log(q2_target)

    lo = 0.25 * math.sqrt(math.log(n) / n)
    hi = min(4.0 * math.sqrt(math.log(n) / n), 0.5)
    while f(lo) < 0 and lo > 1e-12:
        lo *= 0.5
    while f(hi) > 0 and hi < 0.999:
        hi = min(0.5 * (hi + 1.0), 0.999)
    return brentq(f, lo, hi, xtol=1e-15, rtol=1e-14, maxiter=500)


def params_for_window4(n: int, c: float, center: str = "exact") -> ThresholdParams:
    """Parameters for the 4/5 chromatic window at scale ``c`` in (0, 1).

    ``center="exact"`` picks the edge probability whose cascade gives
    ``q2 = 2c/n`` exactly. ``center="asymptotic"`` uses the closed-form
    ``p = sqrt((log n + log log n - 2 log(2c)) / n)``, whose ``q2`` only
    approaches ``2c/n`` slowly in ``n``.
    """
    if not 0.0 < c < 1.0:
        raise ValueError(f"c must lie in (0,1), got {c!r}")
    if n < 3:
        raise ValueError("n must be at least 3")
    if center == "asymptotic":
        p = math.sqrt((math.log(n) + math.log(math.log(n)) - 2.0 * math.log(2.0 * c)) / n)
    elif center == "exact":
        p = _p_for_target_q2(n, 2.0 * c / n)
    else:
        raise ValueError(f"unknown center {center!r}")
    if not 0.0 < p < 1.0:
        raise ValueError(f"p={p!r} outside (0,1)")
    lam = p / (1.0 - p)
    cas = _window4_cascade(n, lam)
    q2 = cas["q2"]
    shift = n ** (-2.0 / 5.0)
    out = ThresholdParams(
        n=int(n),
        fugacity=lam,
        p=p,
        q0=cas["q0"],
        lambda0_coupling=coupling_lambda0(lam),
        q1=cas["q1"],
        q2=q2,
        q_ell=q2 * (1.0 - shift),
        q_u=q2 * (1.0 + shift),
        mu_param=cas["mu_param"],
        path_weight_psi=lam**3 * n / 2.0,
        psi_n=lambert_psi(n) if n > _TWO_E else None,
        c=float(c),
        provenance={"constructor": "params_for_window4", "center": center},
    )
    for name in ("q0", "q1", "q2", "q_ell", "q_u"):
        _check_prob(name, getattr(out, name))
    return out


def lambda_of_m(n: int, m_edges: float) -> float:
    """Fugacity matched to a fixed edge count ``m_edges``."""
    if not 0 < m_edges < n * n / 4.0:
        raise ValueError("need 0 < m_edges < n^2/4")
    l0 = 4.0 * m_edges / n**2
    return l0 + l0**2 + (l0**2 * n - 1.0) * l0 * math.exp(-(l0**2) * n / 2.0)


def params_for_fixed_m(n: int, m_edges: int) -> ThresholdParams:
    """Parameters of the fixed-edge-count sampler."""
    lam = lambda_of_m(n, m_edges)
    p = lam / (1.0 + lam)
    return ThresholdParams(
        n=int(n),
        fugacity=lam,
        p=p,
        q0=q0_of(lam, n),
        lambda0_coupling=coupling_lambda0(lam),
        m_edges=int(m_edges),
        provenance={"constructor": "params_for_fixed_m"},
    )


def chi4_limit_probability(c: float, *, form: str = "stated") -> float:
    """Limiting probability of 4-colorability at window scale ``c``.

    ``form="stated"`` is ``((1-c)/(1+c))^{1/2} exp(-c - c^3/3)``, the closed
    form as published. ``form="poisson"`` is the value obtained from
    independent Poisson odd-cycle counts of means ``c^s/(2s)``, ``s >= 5``, on
    both sides: ``((1-c)/(1+c))^{1/2} exp(c + c^3/3)``. The two differ in the
    sign of the exponent.
    """
    if form not in ("stated", "poisson"):
        raise ValueError(f"unknown form {form!r}")
    if c < 0.0 or c > 1.0 or math.isnan(c):
        raise ValueError(f"c must lie in [0,1], got {c!r}")
    if c == 0.0:
        return 1.0
    if c == 1.0:
        return 0.0
    sign = -1.0 if form == "stated" else 1.0
    return math.sqrt((1.0 - c) / (1.0 + c)) * math.exp(sign * (c + c**3 / 3.0))


def kappa_of(n_vars: int, m_vars: int, clause_prob: float) -> float:
    """Window coordinate of a bipartite 2-SAT instance."""
    nm = float(n_vars) * float(m_vars)
    return (2.0 * math.sqrt(nm) * clause_prob - 1.0) * nm ** (1.0 / 6.0)


def clause_prob_for_kappa(n_vars: int, m_vars: int, kappa: float) -> float:
    """Inverse of :func:`kappa_of` in the clause probability."""
    nm = float(n_vars) * float(m_vars)
    return (1.0 + kappa * nm ** (-1.0 / 6.0)) / (2.0 * math.sqrt(nm))
