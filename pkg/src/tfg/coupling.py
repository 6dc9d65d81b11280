"""Coupling of hard-core crossing edges with independent clauses on each square.

Vertex offsets of a square component ``(u1, u2) x (w1, w2)`` follow
:mod:`tfg.hardcore`: ``0 = (u1,w1)``, ``1 = (u1,w2)``, ``2 = (u2,w1)``,
``3 = (u2,w2)``. The cycle runs ``0-1-3-2-0``; diagonals are ``{0,3}`` and
``{1,2}``.

The coupling pairs each hard-core outcome with a class of independent
configurations: the empty set with the empty set, a single vertex with
itself or itself plus one designated neighbour, a diagonal with itself.
Mass is matched class by class (maximal overlap), and the leftover masses
are joined independently. Both marginals are exact by construction and are
re-checked numerically when a table is built.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from .hardcore import _SQUARE_OUTCOMES, _square_probs, product_components
from .numerics import coupling_lambda0

__all__ = [
    "C4CouplingOutcome",
    "CouplingTable",
    "coupling_table",
    "couple_c4",
    "couple_c4_batch",
    "coupled_formula_pair",
    "COMPANION",
    "E_MASKS",
]

# designated adjacent companion of each single vertex, one pair per vertex
COMPANION = {0: 1, 1: 3, 3: 2, 2: 0}
E_MASKS = tuple(sum(1 << v for v in o) for o in _SQUARE_OUTCOMES)
_ADJ_PAIRS = {frozenset(p) for p in ((0, 1), (1, 3), (3, 2), (2, 0))}


def _x_class(mask: int) -> int:
    """Hard-core outcome index whose success class contains ``mask``, or -1."""
    if mask == 0:
        return 0
    for o in range(1, 5):
        v = _SQUARE_OUTCOMES[o][0]
        if mask == (1 << v) or mask == (1 << v) | (1 << COMPANION[v]):
            return o
    for o in (5, 6):
        if mask == E_MASKS[o]:
            return o
    return -1


X_CLASS = tuple(_x_class(m) for m in range(16))


@dataclass(frozen=True)
class C4CouplingOutcome:
    hardcore_config: int  # index into the seven outcomes
    independent_config: int  # 4-bit mask
    success: bool

    @property
    def hardcore_mask(self) -> int:
        return E_MASKS[self.hardcore_config]


@dataclass(frozen=True)
class CouplingTable:
    fugacity: float
    lambda0: float
    e_idx: np.ndarray
    x_mask: np.ndarray
    mass: np.ndarray
    cdf: np.ndarray
    success: np.ndarray
    failure_probability: float


def _x_probs(lam0):
    m = np.arange(16)
    k = np.array([bin(x).count("1") for x in m])
    return lam0**k * (1.0 - lam0) ** (4 - k)


@lru_cache(maxsize=64)
def coupling_table(fugacity: float, lambda0: Optional[float] = None) -> CouplingTable:
    lam = float(fugacity)
    lam0 = coupling_lambda0(lam) if lambda0 is None else float(lambda0)
    pe = _square_probs(lam)
    px = _x_probs(lam0)
    entries = []
    re = pe.copy()
    rx = px.copy()
    for o in range(7):
        members = [m for m in range(16) if X_CLASS[m] == o]
        xo = px[members].sum()
        common = min(pe[o], xo)
        if common <= 0:
            continue
        re[o] -= common
        for m in members:
            w = common * px[m] / xo
            rx[m] -= w
            entries.append((o, m, w, True))
    fail = re.sum()
    if abs(fail - rx.sum()) > 1e-12:
        raise ValueError("residual masses disagree")
    if fail > 0:
        for o in range(7):
            if re[o] <= 0:
                continue
            for m in range(16):
                if rx[m] > 0:
                    entries.append((o, m, re[o] * rx[m] / fail, X_CLASS[m] == o))
    e_idx = np.array([e[0] for e in entries])
    x_mask = np.array([e[1] for e in entries])
    mass = np.array([e[2] for e in entries])
    succ = np.array([e[3] for e in entries])
    # marginal check
    me = np.bincount(e_idx, weights=mass, minlength=7)
    mx = np.bincount(x_mask, weights=mass, minlength=16)
    if np.max(np.abs(me - pe)) > 1e-12 or np.max(np.abs(mx - px)) > 1e-12:
        raise ValueError("coupling marginals off by more than 1e-12")
    cdf = np.cumsum(mass)
    cdf /= cdf[-1]
    return CouplingTable(lam, lam0, e_idx, x_mask, mass, cdf, succ, float(mass[~succ].sum()))


def couple_c4_batch(fugacity: float, size: int, rng: np.random.Generator, lambda0: Optional[float] = None):
    """``size`` coupled draws: arrays (hard-core outcome index, X mask, success)."""
    if not 0.0 < fugacity <= 0.2:
        raise ValueError("fugacity must lie in (0, 0.2]")
    tab = coupling_table(float(fugacity), None if lambda0 is None else float(lambda0))
    j = np.searchsorted(tab.cdf, rng.random(size), side="right")
    j = np.minimum(j, len(tab.cdf) - 1)
    return tab.e_idx[j], tab.x_mask[j], tab.success[j]


def couple_c4(fugacity: float, lambda0: Optional[float], rng: np.random.Generator) -> C4CouplingOutcome:
    e, x, s = couple_c4_batch(fugacity, 1, rng, lambda0)
    return C4CouplingOutcome(int(e[0]), int(x[0]), bool(s[0]))


def _maximal_pair(pa: np.ndarray, pb: np.ndarray, rng, size):
    """Maximal coupling of two laws on the same finite outcome set."""
    common = np.minimum(pa, pb)
    c = common.sum()
    ra, rb = pa - common, pb - common
    same = rng.random(size) < c
    a = np.empty(size, dtype=np.int64)
    b = np.empty(size, dtype=np.int64)
    ns = int(same.sum())
    if ns:
        v = rng.choice(len(pa), size=ns, p=common / c)
        a[same] = v
        b[same] = v
    nd = size - ns
    if nd:
        a[~same] = rng.choice(len(pa), size=nd, p=ra / ra.sum())
        b[~same] = rng.choice(len(pb), size=nd, p=rb / rb.sum())
    return a, b


def coupled_formula_pair(g, rng: np.random.Generator, fugacity: Optional[float] = None):
    """Coupled formulas from ``g``'s defect matchings.

    A fresh pair (hard-core crossing set, independent set X) is drawn: squares
    through the coupling table, single-edge and point components through
    maximal couplings whose disagreements are only counted. Returns
    ``(phi_E, phi_X, success, diagnostics)`` with ``success`` one flag per
    square component.
    """
    from .graphcore import PlantedGraph
    from .twosat import formula_from_graph

    lam = float(fugacity if fugacity is not None else g.meta["fugacity"])
    lam0 = coupling_lambda0(lam)
    decomp = product_components(g.S, g.T, g.part_A, g.part_B, include_one_sided=True)
    squares = [c for c in decomp.components if c.kind == "square"]
    edges_k = [c for c in decomp.components if c.kind == "single-edge"]
    others = [c for c in decomp.components if c.kind == "general-grid"]
    if others:
        raise ValueError("defect components larger than an edge")
    e_edges, x_edges = [], []
    success = np.zeros(len(squares), dtype=bool)
    if squares:
        eo, xm, success = couple_c4_batch(lam, len(squares), rng)
        for comp, o, m in zip(squares, eo, xm):
            for v in _SQUARE_OUTCOMES[o]:
                e_edges.append(_edge(comp, v))
            for v in range(4):
                if (m >> v) & 1:
                    x_edges.append(_edge(comp, v))
    diag = {"squares": len(squares), "square_failures": int((~success).sum())}
    # single-edge components: 3 hard-core outcomes vs 4 independent ones
    if edges_k:
        pe = np.array([1.0, lam, lam, 0.0]) / (1.0 + 2.0 * lam)
        px = np.array([(1 - lam0) ** 2, lam0 * (1 - lam0), lam0 * (1 - lam0), lam0**2])
        a, b = _maximal_pair(pe, px, rng, len(edges_k))
        diag["edge_disagreements"] = int((a != b).sum())
    else:
        diag["edge_disagreements"] = 0
    pool = decomp.pool.count
    p_point = lam / (1.0 + lam)
    diag["point_disagreements"] = int(rng.binomial(pool, abs(p_point - lam0))) if pool else 0
    n = g.n_vertices
    gE = PlantedGraph.build(n, g.part_A, g.S, g.T, e_edges, validate=False)
    gX = PlantedGraph.build(n, g.part_A, g.S, g.T, x_edges, validate=False)
    phiE, _ = formula_from_graph(gE)
    phiX, _ = formula_from_graph(gX)
    return phiE, phiX, success, diag


def _edge(comp, v):
    a = comp.factor_a[v // 2]
    b = comp.factor_b[v % 2]
    return (a, b) if a < b else (b, a)
