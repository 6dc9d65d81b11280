"""Planted samplers for random triangle-free graphs.

Every sampler draws a part size offset ``zeta``, a uniform part ``A``,
defect graphs inside ``A`` and ``B``, and crossing edges from the hard-core
model (or a uniform fixed-size independent set) on ``S□T``.

``crossing`` controls how much of the crossing edge set is materialized:

* ``"full"``: everything, including the isolated pool (Θ(n² λ) edges)
* ``"core"``: only products of two non-trivial defect components; these are
  the only crossing edges that can create 2-SAT clauses
* ``"none"``: no crossing edges
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels as K
from .graphcore import PlantedGraph, write_edgelist
from .hardcore import product_components, sample_hardcore, sample_uniform_indset_fixed_size
from .numerics import ThresholdParams

__all__ = [
    "SamplerConfig",
    "zeta_truncation",
    "sample_zeta",
    "er_pairs",
    "sample_er_triangle_free",
    "sample_mu_lambda_1",
    "sample_mu_lambda_2",
    "sample_mu_m_1",
    "sample_conditioned_oracle",
    "sample",
    "sidecar",
    "OracleBudgetExceeded",
]

MODELS = ("mu_lambda_1", "mu_lambda_2", "mu_m_1", "rejection_oracle")
DEFECT_LAWS = ("er_conditioned", "exponential_mcmc")
CROSSING = ("full", "core", "none")


class OracleBudgetExceeded(RuntimeError):
    pass


def zeta_truncation(fugacity: float) -> int:
    """Cutoff ``T`` with tail mass of ``(1+λ)^{-t^2}`` beyond ``±T`` below ``e^{-30}``."""
    if fugacity <= 0:
        raise ValueError("fugacity must be positive")
    return int(math.ceil(math.sqrt(30.0 / math.log1p(fugacity))))


@dataclass
class SamplerConfig:
    model: str
    params: ThresholdParams
    defect_law: str = "er_conditioned"
    seed: int = 0
    zeta_truncation: Optional[int] = None
    crossing: str = "full"
    max_resample: int = 10_000
    mcmc_steps: Optional[int] = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.defect_law not in DEFECT_LAWS:
            raise ValueError(f"unknown defect law {self.defect_law!r}")
        if self.crossing not in CROSSING:
            raise ValueError(f"unknown crossing mode {self.crossing!r}")
        if self.zeta_truncation is None and self.params.fugacity > 0:
            self.zeta_truncation = zeta_truncation(self.params.fugacity)

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def sample_zeta(fugacity: float, rng: np.random.Generator, truncation: Optional[int] = None) -> int:
    """Draw ``zeta`` with ``P[zeta = t] ∝ (1+λ)^{-t^2}`` on ``[-T, T]``."""
    T = zeta_truncation(fugacity) if truncation is None else int(truncation)
    t = np.arange(-T, T + 1)
    logw = -(t.astype(float) ** 2) * math.log1p(fugacity)
    w = np.exp(logw - logw.max())
    return int(t[np.searchsorted(np.cumsum(w), rng.random() * w.sum(), side="right")])


def _pair_from_index(idx: np.ndarray):
    """Lower-triangular unranking: index -> (i, j) with i < j."""
    j = np.floor((1.0 + np.sqrt(1.0 + 8.0 * idx.astype(float))) / 2.0).astype(np.int64)
    # guard the float sqrt
    j -= (j * (j - 1) // 2) > idx
    j += ((j + 1) * j // 2) <= idx
    i = idx - j * (j - 1) // 2
    return i, j


def er_pairs(k: int, q: float, rng: np.random.Generator, uniforms: bool = False):
    """Edges of ``G(k, q)`` on local labels ``0..k-1`` by geometric skipping.

    Returns ``(i, j)`` arrays with ``i < j``; with ``uniforms`` also a
    ``U(0, q)`` mark per edge, so thinning at ``q' < q`` keeps marks ``< q'``.
    """
    total = k * (k - 1) // 2
    if q <= 0 or total == 0:
        e = np.zeros(0, dtype=np.int64)
        return (e, e, np.zeros(0)) if uniforms else (e, e)
    if q >= 1:
        idx = np.arange(total, dtype=np.int64)
    else:
        chunks = []
        pos = -1
        mean = total * q
        batch = int(mean + 6 * math.sqrt(mean) + 16)
        while True:
            gaps = rng.geometric(q, size=batch)
            cs = pos + np.cumsum(gaps)
            chunks.append(cs[cs < total])
            if cs[-1] >= total:
                break
            pos = int(cs[-1])
        idx = np.concatenate(chunks).astype(np.int64)
    i, j = _pair_from_index(idx)
    if uniforms:
        return i, j, rng.random(len(i)) * q
    return i, j


def _local_triangle_free(k, i, j) -> bool:
    if len(i) < 3:
        return True
    indptr, indices = K.csr_undirected(k, i, j)
    return bool(K.triangle_free_csr(k, indptr, indices))


def sample_er_triangle_free(k: int, q: float, rng: np.random.Generator, max_resample: int = 10_000):
    """``G(k, q)`` conditioned on triangle-freeness by rejection.

    Returns ``(i, j, attempts)``.
    """
    for attempt in range(1, max_resample + 1):
        i, j = er_pairs(k, q, rng)
        if _local_triangle_free(k, i, j):
            return i, j, attempt
    raise OracleBudgetExceeded(f"no triangle-free draw in {max_resample} attempts")


def _draw_parts(n, lam, rng, T):
    zeta = sample_zeta(lam, rng, T) if lam > 0 else 0
    size = n // 2 - zeta
    if zeta > n // 2 or zeta < -((n + 1) // 2):
        return zeta, None, None
    A = np.sort(rng.choice(n, size=size, replace=False)).astype(np.int64)
    mask = np.ones(n, dtype=bool)
    mask[A] = False
    B = np.flatnonzero(mask).astype(np.int64)
    return zeta, A, B


def _globalize(part, i, j):
    return list(zip(part[i].tolist(), part[j].tolist()))


def _crossing(S, T, A, B, lam, rng, mode):
    if mode == "none" or lam == 0:
        return []
    decomp = product_components(S, T, A.tolist(), B.tolist(), include_one_sided=(mode == "full"))
    return sample_hardcore(decomp, lam, rng, include_pool=(mode == "full"))


def _meta(config, zeta, **extra):
    m = {
        "model": config.model,
        "fugacity": config.params.fugacity,
        "zeta": zeta,
        "crossing": config.crossing,
        "seed": config.seed,
    }
    m.update(extra)
    return m


def sample_mu_lambda_1(config: SamplerConfig, rng: Optional[np.random.Generator] = None) -> PlantedGraph:
    """Parts, ``ER(q0)`` defect graphs (abort on a triangle), hard-core crossing edges."""
    rng = config.rng() if rng is None else rng
    P = config.params
    n, lam = P.n, P.fugacity
    zeta, A, B = _draw_parts(n, lam, rng, config.zeta_truncation)
    if A is None:
        return PlantedGraph.empty(n, (), **_meta(config, zeta, abort_reason="zeta"))
    si, sj = er_pairs(len(A), P.q0, rng)
    ti, tj = er_pairs(len(B), P.q0, rng)
    if not (_local_triangle_free(len(A), si, sj) and _local_triangle_free(len(B), ti, tj)):
        return PlantedGraph.empty(n, (), **_meta(config, zeta, abort_reason="triangle"))
    S, T = _globalize(A, si, sj), _globalize(B, ti, tj)
    E = _crossing(S, T, A, B, lam, rng, config.crossing)
    return PlantedGraph.build(n, A.tolist(), S, T, E, meta=_meta(config, zeta), validate=False)


def _degree_cap(q2, n):
    return 50.0 * max(q2 * n, math.log(n))


def _exponential_mcmc(k, q2, psi, cap, start, rng, steps):
    """Metropolis-Hastings on triangle-free graphs with weight
    ``r^{e(H)} exp(psi P2(H))`` and max degree ``<= cap``.

    Proposals: with probability 1/2 remove a uniform edge, otherwise pick a
    uniform vertex pair and try to add it; Hastings ratios correct for the
    different proposal sizes.
    """
    total = k * (k - 1) // 2
    r = q2 / (1.0 - q2)
    adj: list[set[int]] = [set() for _ in range(k)]
    edges = []
    pos = {}
    for a, b in zip(*start):
        a, b = int(a), int(b)
        adj[a].add(b)
        adj[b].add(a)
        pos[(a, b)] = len(edges)
        edges.append((a, b))
    accepted = 0
    p2 = sum(len(s) * (len(s) - 1) // 2 for s in adj)
    trace = []
    every = max(1, steps // 100)
    for step in range(steps):
        e = len(edges)
        if rng.random() < 0.5:
            if e == 0:
                continue
            a, b = edges[int(rng.integers(e))]
            d = (len(adj[a]) - 1) + (len(adj[b]) - 1)
            ratio = math.exp(-psi * d) / r * e / total
            if rng.random() < ratio:
                adj[a].discard(b)
                adj[b].discard(a)
                i = pos.pop((a, b))
                last = edges.pop()
                if i < len(edges):
                    edges[i] = last
                    pos[last] = i
                p2 -= d
                accepted += 1
        else:
            if e == total:
                continue
            ai, bi = _pair_from_index(np.array([rng.integers(total)]))
            a, b = int(ai[0]), int(bi[0])
            if b in adj[a]:
                continue
            if len(adj[a]) + 1 > cap or len(adj[b]) + 1 > cap:
                continue
            if adj[a] & adj[b]:
                continue
            d = len(adj[a]) + len(adj[b])
            ratio = r * math.exp(psi * d) * total / (e + 1)
            if rng.random() < ratio:
                adj[a].add(b)
                adj[b].add(a)
                pos[(a, b)] = len(edges)
                edges.append((a, b))
                p2 += d
                accepted += 1
        if step % every == 0:
            trace.append(p2)
    i = np.array([x for x, _ in edges], dtype=np.int64)
    j = np.array([y for _, y in edges], dtype=np.int64)
    order = np.lexsort((j, i))
    return i[order], j[order], {"acceptance_rate": accepted / max(steps, 1), "p2_trace": trace}


def _defects_mu2(k, config, rng):
    P = config.params
    n = P.n
    i, j, attempts = sample_er_triangle_free(k, P.q2, rng, config.max_resample)
    cap = _degree_cap(P.q2, n)
    diag = {"attempts": attempts}
    if config.defect_law == "exponential_mcmc":
        steps = config.mcmc_steps or int(40 * (k * (k - 1) / 2 * P.q2) + 200)
        i, j, d = _exponential_mcmc(k, P.q2, P.path_weight_psi, cap, (i, j), rng, steps)
        diag.update(d)
    else:
        deg = np.bincount(np.concatenate([i, j]), minlength=k) if len(i) else np.zeros(1)
        diag["degree_cap_violated"] = bool(deg.max() > cap)
    return i, j, diag


def sample_mu_lambda_2(config: SamplerConfig, rng: Optional[np.random.Generator] = None) -> PlantedGraph:
    """Parts, triangle-free defect graphs at ``q2`` (rejection or MCMC),
    hard-core crossing edges."""
    rng = config.rng() if rng is None else rng
    P = config.params
    if P.q2 is None:
        raise ValueError("params lack q2; build them with params_for_window4")
    n, lam = P.n, P.fugacity
    zeta, A, B = _draw_parts(n, lam, rng, config.zeta_truncation)
    if A is None:
        return PlantedGraph.empty(n, (), **_meta(config, zeta, abort_reason="zeta"))
    si, sj, da = _defects_mu2(len(A), config, rng)
    ti, tj, db = _defects_mu2(len(B), config, rng)
    S, T = _globalize(A, si, sj), _globalize(B, ti, tj)
    E = _crossing(S, T, A, B, lam, rng, config.crossing)
    meta = _meta(config, zeta, defect_law=config.defect_law, diagnostics_A=da, diagnostics_B=db)
    return PlantedGraph.build(n, A.tolist(), S, T, E, meta=meta, validate=False)


def sample_mu_m_1(config: SamplerConfig, rng: Optional[np.random.Generator] = None) -> PlantedGraph:
    """Parts, triangle-free ``ER(q0)`` defect graphs, and a uniform crossing
    independent set bringing the edge count to exactly ``m_edges``."""
    rng = config.rng() if rng is None else rng
    P = config.params
    n, m = P.n, P.m_edges
    if m is None:
        raise ValueError("params lack m_edges")
    if m == 0:
        return PlantedGraph.build(n, range(n // 2), meta=_meta(config, 0), validate=False)
    lam = P.fugacity
    zeta, A, B = _draw_parts(n, lam, rng, config.zeta_truncation)
    if A is None:
        return PlantedGraph.empty(n, (), **_meta(config, zeta, abort_reason="zeta"))
    si, sj, _ = sample_er_triangle_free(len(A), P.q0, rng, config.max_resample)
    ti, tj, _ = sample_er_triangle_free(len(B), P.q0, rng, config.max_resample)
    S, T = _globalize(A, si, sj), _globalize(B, ti, tj)
    target = m - len(S) - len(T)
    if target < 0:
        return PlantedGraph.empty(n, (), **_meta(config, zeta, abort_reason="infeasible"))
    decomp = product_components(S, T, A.tolist(), B.tolist())
    try:
        E = sample_uniform_indset_fixed_size(decomp, target, rng)
    except ValueError:
        return PlantedGraph.empty(n, (), **_meta(config, zeta, abort_reason="infeasible"))
    return PlantedGraph.build(n, A.tolist(), S, T, E, meta=_meta(config, zeta), validate=False)


def sample_conditioned_oracle(n: int, p: float, rng: np.random.Generator, max_attempts: int = 1_000_000):
    """``G(n, p)`` conditioned on triangle-freeness, by plain rejection.

    Returns ``(edges, attempts)``.
    """
    if n > 64 and p * n > 1.0:
        raise ValueError("rejection oracle supports n <= 64 or p small")
    iu, ju = np.triu_indices(n, 1)
    for attempt in range(1, max_attempts + 1):
        keep = rng.random(len(iu)) < p
        a = np.zeros((n, n), dtype=np.int64)
        a[iu[keep], ju[keep]] = 1
        a = a + a.T
        if not np.any((a @ a) * a):
            return list(zip(iu[keep].tolist(), ju[keep].tolist())), attempt
    raise OracleBudgetExceeded(f"gave up after {max_attempts} attempts")


def sample(config: SamplerConfig, rng: Optional[np.random.Generator] = None) -> PlantedGraph:
    """Dispatch on ``config.model``."""
    if config.model == "mu_lambda_1":
        return sample_mu_lambda_1(config, rng)
    if config.model == "mu_lambda_2":
        return sample_mu_lambda_2(config, rng)
    if config.model == "mu_m_1":
        return sample_mu_m_1(config, rng)
    rng = config.rng() if rng is None else rng
    edges, attempts = sample_conditioned_oracle(config.params.n, config.params.p, rng)
    return PlantedGraph.build(
        config.params.n, (), (), edges, (), meta={"model": "rejection_oracle", "attempts": attempts}, validate=False
    )


def sidecar(g: PlantedGraph, config: SamplerConfig) -> str:
    """JSON metadata stored next to an edge-list file."""
    rec = {
        "model": config.model,
        "seed": config.seed,
        "defect_law": config.defect_law,
        "crossing": config.crossing,
        "zeta_truncation": config.zeta_truncation,
        "aborted": g.aborted,
        "params": config.params.to_dict(),
        "meta": {k: v for k, v in g.meta.items() if k not in ("diagnostics_A", "diagnostics_B")},
    }
    return json.dumps(rec, indent=2, sort_keys=True, default=float)
