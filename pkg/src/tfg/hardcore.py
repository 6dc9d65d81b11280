"""Exact hard-core sampling on the Cartesian product S□T.

A product vertex ``(a, b)`` with ``a in A`` and ``b in B`` is the crossing
edge ``ab``; independent sets of S□T are exactly the crossing-edge sets that
create no triangle with the defect edges.

Components of S□T are products of a component of ``(A, S)`` with a component
of ``(B, T)``. Products of two isolated vertices are never materialized: they
form one pool of ``|iso A| * |iso B|`` independent points.
"""

from __future__ import annotations

import bisect
import itertools
import math
import random
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
from scipy.special import gammaln, logsumexp

from .graphcore import components

__all__ = [
    "HardCoreComponent",
    "IsolatedPool",
    "ProductDecomposition",
    "product_components",
    "independence_polynomial",
    "sample_hardcore",
    "sample_uniform_indset_fixed_size",
    "FixedSizeSampler",
    "StateCapError",
    "ENUMERATE_CAP",
]

STATE_CAP = 1 << 20
# total states over all positions of one transfer DP
TOTAL_STATE_CAP = 1 << 21
# fugacity sampling prefers coupling from the past above this DP work estimate
DP_SAMPLE_COST = 1 << 14
ENUMERATE_CAP = 16
# products above this many vertices skip the transfer DP
CFTP_SIZE = 400
SQUARE_POLY = (1, 4, 2)


class StateCapError(ValueError):
    """A product component is too wide for the exact transfer DP."""


@dataclass(frozen=True)
class HardCoreComponent:
    """One connected component of S□T: ``factor_a`` × ``factor_b``.

    ``edges_a``/``edges_b`` are the defect edges inside each factor.
    """

    factor_a: tuple[int, ...]
    factor_b: tuple[int, ...]
    edges_a: tuple[tuple[int, int], ...] = ()
    edges_b: tuple[tuple[int, int], ...] = ()

    @property
    def kind(self) -> str:
        na, nb = len(self.factor_a), len(self.factor_b)
        if na == 1 and nb == 1:
            return "isolated-point"
        if na * nb == 2:
            return "single-edge"
        if na == 2 and nb == 2:
            return "square"
        return "general-grid"

    @property
    def product_vertices(self) -> list[tuple[int, int]]:
        return [(a, b) for a in self.factor_a for b in self.factor_b]

    @property
    def shape_key(self):
        ia = {v: i for i, v in enumerate(self.factor_a)}
        ib = {v: i for i, v in enumerate(self.factor_b)}
        ea = tuple(sorted((ia[u], ia[v]) for u, v in self.edges_a))
        eb = tuple(sorted((ib[u], ib[v]) for u, v in self.edges_b))
        return (len(self.factor_a), ea, len(self.factor_b), eb)

    @cached_property
    def independence_polynomial(self) -> list[int]:
        return independence_polynomial(self)


@dataclass(frozen=True)
class IsolatedPool:
    """Product of the isolated vertices of both sides, kept implicit."""

    iso_a: tuple[int, ...]
    iso_b: tuple[int, ...]

    @property
    def count(self) -> int:
        return len(self.iso_a) * len(self.iso_b)

    def pair(self, idx: np.ndarray) -> np.ndarray:
        a = np.asarray(self.iso_a, dtype=np.int64)[idx // len(self.iso_b)]
        b = np.asarray(self.iso_b, dtype=np.int64)[idx % len(self.iso_b)]
        return np.stack([a, b], axis=1)


@dataclass
class ProductDecomposition:
    components: list[HardCoreComponent]
    pool: IsolatedPool
    meta: dict = field(default_factory=dict)

    def kinds(self) -> dict[str, int]:
        out: dict[str, int] = defaultdict(int)
        for c in self.components:
            out[c.kind] += 1
        if self.pool.count:
            out["isolated-point"] += self.pool.count
        return dict(out)


def _factor_list(vertices, edges):
    comps = components(vertices, edges)
    where = {}
    for i, c in enumerate(comps):
        for v in c:
            where[v] = i
    ce: list[list] = [[] for _ in comps]
    for u, v in edges:
        ce[where[u]].append((u, v) if u < v else (v, u))
    return [(tuple(c), tuple(sorted(e))) for c, e in zip(comps, ce)]


def product_components(S, T, A, B, *, include_one_sided: bool = True) -> ProductDecomposition:
    """Decompose S□T into components.

    With ``include_one_sided=False`` only products of two non-trivial factors
    are returned (the ones that can carry a 2-SAT clause); the pool is then
    still reported but components with one isolated factor are omitted.
    """
    fa = _factor_list(A, S)
    fb = _factor_list(B, T)
    iso_a = tuple(c[0][0] for c in fa if len(c[0]) == 1)
    iso_b = tuple(c[0][0] for c in fb if len(c[0]) == 1)
    big_a = [c for c in fa if len(c[0]) > 1]
    big_b = [c for c in fb if len(c[0]) > 1]
    comps = []
    for va, ea in big_a:
        for vb, eb in big_b:
            comps.append(HardCoreComponent(va, vb, ea, eb))
    if include_one_sided:
        for va, ea in big_a:
            for b in iso_b:
                comps.append(HardCoreComponent(va, (b,), ea, ()))
        for vb, eb in big_b:
            for a in iso_a:
                comps.append(HardCoreComponent((a,), vb, (), eb))
    return ProductDecomposition(
        comps, IsolatedPool(iso_a, iso_b), {"include_one_sided": include_one_sided}
    )


# ---------------------------------------------------------------------------
# transfer DP over a vertex ordering of the product graph


def _product_adjacency(comp: HardCoreComponent):
    """Bitmask adjacency of the product graph; vertex ``i*nb + j`` is (a_i, b_j)."""
    na, nb = len(comp.factor_a), len(comp.factor_b)
    ia = {v: i for i, v in enumerate(comp.factor_a)}
    ib = {v: i for i, v in enumerate(comp.factor_b)}
    adj = [0] * (na * nb)
    for u, v in comp.edges_a:
        i, k = ia[u], ia[v]
        for j in range(nb):
            adj[i * nb + j] |= 1 << (k * nb + j)
            adj[k * nb + j] |= 1 << (i * nb + j)
    for u, v in comp.edges_b:
        j, k = ib[u], ib[v]
        for i in range(na):
            adj[i * nb + j] |= 1 << (i * nb + k)
            adj[i * nb + k] |= 1 << (i * nb + j)
    return adj


def _boundary_sizes(adj, order):
    pos = {v: i for i, v in enumerate(order)}
    last = [pos[v] for v in order]
    for v in order:
        m = adj[v]
        while m:
            w = (m & -m).bit_length() - 1
            m &= m - 1
            if pos[w] > last[pos[v]]:
                last[pos[v]] = pos[w]
    # vertex at position i stays on the boundary for steps i+1..last[i]
    sizes = [0] * (len(order) + 1)
    for i, li in enumerate(last):
        for t in range(i + 1, li + 1):
            sizes[t] += 1
    return sizes


def _candidate_orders(comp: HardCoreComponent):
    """Layered orders: walk the larger factor, sweep the smaller one inside."""
    na, nb = len(comp.factor_a), len(comp.factor_b)
    big_is_a = na >= nb
    nbig, nsmall = (na, nb) if big_is_a else (nb, na)
    fbig = comp.factor_a if big_is_a else comp.factor_b
    ebig = comp.edges_a if big_is_a else comp.edges_b
    idx = {v: i for i, v in enumerate(fbig)}
    nbrs: list[list[int]] = [[] for _ in range(nbig)]
    for u, v in ebig:
        nbrs[idx[u]].append(idx[v])
        nbrs[idx[v]].append(idx[u])
    walks = []
    for root in range(nbig):
        seen = [False] * nbig
        seq = []
        stack = [root]
        while stack:  # DFS preorder keeps the live boundary near one branch
            x = stack.pop()
            if seen[x]:
                continue
            seen[x] = True
            seq.append(x)
            stack.extend(sorted(nbrs[x], reverse=True))
        walks.append(seq)
        seen = [False] * nbig
        seen[root] = True
        seq, q = [root], [root]
        while q:
            x = q.pop(0)
            for y in sorted(nbrs[x]):
                if not seen[y]:
                    seen[y] = True
                    seq.append(y)
                    q.append(y)
        walks.append(seq)
    orders = []
    for w in walks:
        if big_is_a:
            orders.append([i * nb + j for i in w for j in range(nsmall)])
        else:
            orders.append([i * nb + j for j in w for i in range(nsmall)])
    return orders


class _TransferDP:
    """Backward messages over a vertex order, with polynomial values.

    ``msgs[i][s]`` is the size-generating polynomial of the independent
    configurations of ``order[i:]`` compatible with the chosen boundary set
    ``s`` (a bitmask of already-placed vertices still adjacent to the rest).
    """

    def __init__(self, adj: Sequence[int], order: Sequence[int]):
        self.adj = list(adj)
        self.order = list(order)
        n = len(order)
        pos = {v: i for i, v in enumerate(order)}
        last = [i for i in range(n)]
        for i, v in enumerate(order):
            m = adj[v]
            while m:
                w = (m & -m).bit_length() - 1
                m &= m - 1
                last[i] = max(last[i], pos[w])
        self.bmask = [0] * (n + 1)
        for i, v in enumerate(order):
            for t in range(i + 1, last[i] + 1):
                self.bmask[t] |= 1 << v
        # forward pass over reachable boundary states
        states = [{0}]
        total = 1
        for i, v in enumerate(order):
            nxt = set()
            keep = self.bmask[i + 1]
            for s in states[i]:
                nxt.add(s & keep)
                if not (adj[v] & s):
                    nxt.add((s | (1 << v)) & keep)
            total += len(nxt)
            if len(nxt) > STATE_CAP or total > TOTAL_STATE_CAP:
                raise StateCapError(f"transfer DP needs more than {STATE_CAP} states")
            states.append(nxt)
        # backward messages
        msgs: list[dict[int, list[int]]] = [dict() for _ in range(n + 1)]
        msgs[n] = {s: [1] for s in states[n]}
        for i in range(n - 1, -1, -1):
            v = order[i]
            keep = self.bmask[i + 1]
            nxt = msgs[i + 1]
            cur = {}
            for s in states[i]:
                out = list(nxt[s & keep])
                if not (adj[v] & s):
                    inc = nxt[(s | (1 << v)) & keep]
                    if len(out) < len(inc) + 1:
                        out.extend([0] * (len(inc) + 1 - len(out)))
                    for k, c in enumerate(inc):
                        out[k + 1] += c
                cur[s] = out
            msgs[i] = cur
        self.msgs = msgs

    @property
    def polynomial(self) -> list[int]:
        return list(self.msgs[0][0])

    def sample_fugacity(self, lam: float, rng: np.random.Generator, count: int = 1):
        """Draw ``count`` independent configurations at fugacity ``lam``."""
        cache: list[dict[int, float]] = [dict() for _ in self.msgs]

        def val(i, s):
            d = cache[i]
            if s not in d:
                d[s] = _polyval(self.msgs[i][s], lam)
            return d[s]

        out = []
        n = len(self.order)
        us = rng.random((count, n)) if n else np.zeros((count, 0))
        for c in range(count):
            s, chosen = 0, 0
            for i, v in enumerate(self.order):
                keep = self.bmask[i + 1]
                if self.adj[v] & s:
                    s &= keep
                    continue
                w_in = lam * val(i + 1, (s | (1 << v)) & keep)
                w_tot = val(i, s)
                if us[c, i] * w_tot < w_in:
                    chosen |= 1 << v
                    s = (s | (1 << v)) & keep
                else:
                    s &= keep
            out.append(chosen)
        return out

    def sample_size(self, k: int, pyrng: random.Random) -> int:
        """Uniform configuration with exactly ``k`` vertices (exact integers)."""
        s, chosen, r = 0, 0, k
        top = self.msgs[0][0]
        if k >= len(top) or top[k] == 0:
            raise ValueError(f"no independent set of size {k}")
        for i, v in enumerate(self.order):
            keep = self.bmask[i + 1]
            if r == 0:
                break
            tot = _coef(self.msgs[i][s], r)
            inc = 0
            if not (self.adj[v] & s):
                inc = _coef(self.msgs[i + 1][(s | (1 << v)) & keep], r - 1)
            if inc and pyrng.randrange(tot) < inc:
                chosen |= 1 << v
                s = (s | (1 << v)) & keep
                r -= 1
            else:
                s &= keep
        return chosen


def _coef(poly, k):
    return poly[k] if 0 <= k < len(poly) else 0


def _polyval(poly, x):
    acc = 0.0
    for c in reversed(poly):
        acc = acc * x + c
    return acc


def _polymul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


_DP_CACHE: dict = {}
_PLAN_CACHE: dict = {}


def _dp_plan(comp: HardCoreComponent):
    """``(adjacency, order, max boundary, sum of 2^boundary)`` for the best
    candidate order; the last entry estimates the DP's work."""
    key = comp.shape_key
    plan = _PLAN_CACHE.get(key)
    if plan is None:
        adj = _product_adjacency(comp)
        best, best_cost = None, None
        for order in _candidate_orders(comp):
            sizes = _boundary_sizes(adj, order)
            cost = (max(sizes), sum(1 << min(b, 40) for b in sizes))
            if best_cost is None or cost < best_cost:
                best, best_cost = order, cost
        plan = (adj, best, best_cost[0], best_cost[1])
        if len(_PLAN_CACHE) > 4096:
            _PLAN_CACHE.clear()
        _PLAN_CACHE[key] = plan
    return plan


def _dp_for(comp: HardCoreComponent) -> _TransferDP:
    key = comp.shape_key
    dp = _DP_CACHE.get(key)
    if isinstance(dp, StateCapError):
        raise dp
    if dp is None:
        if min(len(comp.factor_a), len(comp.factor_b)) > 20:
            _DP_CACHE[key] = StateCapError("both factors exceed 20 vertices")
            raise _DP_CACHE[key]
        adj, order, width, _ = _dp_plan(comp)
        if width > 40:
            _DP_CACHE[key] = StateCapError(f"boundary width {width} too large")
            raise _DP_CACHE[key]
        try:
            dp = _TransferDP(adj, order)
        except StateCapError as exc:
            _DP_CACHE[key] = exc
            raise
        if len(_DP_CACHE) > 1024:
            _DP_CACHE.clear()
        _DP_CACHE[key] = dp
    return dp


def _use_cftp(comp: HardCoreComponent, nv: int) -> bool:
    if nv > CFTP_SIZE:
        return True
    return _dp_plan(comp)[3] > DP_SAMPLE_COST


class _MonotoneCFTP:
    """Coupling from the past for the hard-core model on a bipartite product.

    With color classes ``V0``, ``V1`` the order "more of ``V0``, less of
    ``V1``" is preserved by heat-bath sweeps that update all of ``V0`` and
    then all of ``V1`` (each class is independent, so a whole class can be
    updated at once). The top chain starts at ``(V0, {})``, the bottom at
    ``({}, V1)``; the start time is doubled until they meet, reusing the
    randomness of the later sweeps.
    """

    def __init__(self, comp: HardCoreComponent):
        from scipy.sparse import csr_matrix

        from .graphcore import is_bipartite

        ok_a, ca = is_bipartite(comp.edges_a, comp.factor_a)
        ok_b, cb = is_bipartite(comp.edges_b, comp.factor_b)
        if not (ok_a and ok_b):
            raise StateCapError("product with an odd cycle is too large for exact sampling")
        na, nb = len(comp.factor_a), len(comp.factor_b)
        color = np.array([ca[a] ^ cb[b] for a in comp.factor_a for b in comp.factor_b], dtype=np.int8)
        self.v0 = np.flatnonzero(color == 0)
        self.v1 = np.flatnonzero(color == 1)
        pos = np.empty(na * nb, dtype=np.int64)
        pos[self.v0] = np.arange(len(self.v0))
        pos[self.v1] = np.arange(len(self.v1))
        ia = {v: i for i, v in enumerate(comp.factor_a)}
        ib = {v: i for i, v in enumerate(comp.factor_b)}
        rows, cols = [], []
        for u, v in comp.edges_a:
            for j in range(nb):
                x, y = ia[u] * nb + j, ia[v] * nb + j
                rows.append(x)
                cols.append(y)
        for u, v in comp.edges_b:
            for i in range(na):
                rows.append(i * nb + ib[u])
                cols.append(i * nb + ib[v])
        rows = np.array(rows, dtype=np.int64)
        cols = np.array(cols, dtype=np.int64)
        # orient every product edge from V0 to V1
        flip = color[rows] == 1
        r0 = np.where(flip, cols, rows)
        r1 = np.where(flip, rows, cols)
        self.B = csr_matrix(
            (np.ones(len(r0), dtype=np.int32), (pos[r0], pos[r1])), shape=(len(self.v0), len(self.v1))
        )
        self.Bt = self.B.T.tocsr()

    def sample(self, lam: float, rng: np.random.Generator, max_sweeps: int = 1 << 16) -> int:
        p = lam / (1.0 + lam)
        n0, n1 = len(self.v0), len(self.v1)
        sweeps: list[tuple[np.ndarray, np.ndarray]] = []
        T = 4
        while True:
            while len(sweeps) < T:
                sweeps.append((rng.random(n0) < p, rng.random(n1) < p))
            up0, up1 = np.ones(n0, dtype=np.int32), np.zeros(n1, dtype=np.int32)
            lo0, lo1 = np.zeros(n0, dtype=np.int32), np.ones(n1, dtype=np.int32)
            for t in range(T - 1, -1, -1):
                a0, a1 = sweeps[t]
                up0 = (a0 & (self.B @ up1 == 0)).astype(np.int32)
                lo0 = (a0 & (self.B @ lo1 == 0)).astype(np.int32)
                up1 = (a1 & (self.Bt @ up0 == 0)).astype(np.int32)
                lo1 = (a1 & (self.Bt @ lo0 == 0)).astype(np.int32)
            if np.array_equal(up0, lo0) and np.array_equal(up1, lo1):
                break
            if T >= max_sweeps:
                raise RuntimeError("coupling from the past did not coalesce")
            T *= 2
        mask = 0
        for v in np.concatenate([self.v0[up0 == 1], self.v1[up1 == 1]]).tolist():
            mask |= 1 << v
        return mask


_CFTP_CACHE: dict = {}


def _cftp_for(comp: HardCoreComponent) -> _MonotoneCFTP:
    key = comp.shape_key
    cf = _CFTP_CACHE.get(key)
    if cf is None:
        cf = _MonotoneCFTP(comp)
        if len(_CFTP_CACHE) > 1024:
            _CFTP_CACHE.clear()
        _CFTP_CACHE[key] = cf
    return cf


def independence_polynomial(comp: HardCoreComponent) -> list[int]:
    """Coefficients ``i_k`` = number of independent sets of size ``k``."""
    kind = comp.kind
    if kind == "isolated-point":
        return [1, 1]
    if kind == "single-edge":
        return [1, 2]
    if kind == "square":
        return list(SQUARE_POLY)
    return _dp_for(comp).polynomial


_ENUM_CACHE: dict = {}


def _enumerated(comp: HardCoreComponent):
    key = comp.shape_key
    hit = _ENUM_CACHE.get(key)
    if hit is None:
        adj = _product_adjacency(comp)
        nv = len(adj)
        sets = []
        for m in range(1 << nv):
            ok = True
            mm = m
            while mm:
                v = (mm & -mm).bit_length() - 1
                mm &= mm - 1
                if adj[v] & m:
                    ok = False
                    break
            if ok:
                sets.append(m)
        sets = np.array(sets, dtype=np.int64)
        sizes = np.array([bin(int(s)).count("1") for s in sets])
        hit = (sets, sizes)
        _ENUM_CACHE[key] = hit
    return hit


# closed-form laws; outcome index -> product-vertex offsets (a_i*2 + b_j)
_EDGE_OUTCOMES = [(), (0,), (1,)]
_SQUARE_OUTCOMES = [(), (0,), (1,), (2,), (3,), (0, 3), (1, 2)]


def _square_probs(lam):
    z = 1.0 + 4.0 * lam + 2.0 * lam * lam
    return np.array([1.0, lam, lam, lam, lam, lam * lam, lam * lam]) / z


def _edge_probs(lam):
    z = 1.0 + 2.0 * lam
    return np.array([1.0, lam, lam]) / z


def _mask_to_edges(comp, mask):
    nb = len(comp.factor_b)
    out = []
    while mask:
        v = (mask & -mask).bit_length() - 1
        mask &= mask - 1
        a, b = comp.factor_a[v // nb], comp.factor_b[v % nb]
        out.append((a, b) if a < b else (b, a))
    return out


def _offsets_to_edges(comp, offs):
    nb = len(comp.factor_b)
    out = []
    for v in offs:
        a, b = comp.factor_a[v // nb], comp.factor_b[v % nb]
        out.append((a, b) if a < b else (b, a))
    return out


def sample_hardcore(
    decomp: ProductDecomposition,
    fugacity: float,
    rng: np.random.Generator,
    *,
    include_pool: bool = True,
    return_by_component: bool = False,
):
    """Exact hard-core sample on S□T; returns crossing edges ``(u, v)``, ``u < v``.

    With ``return_by_component`` a second value maps component index to the
    chosen product vertices as offsets ``i * |factor_b| + j``.
    """
    lam = float(fugacity)
    if lam < 0:
        raise ValueError("fugacity must be non-negative")
    edges: list[tuple[int, int]] = []
    by_comp: dict[int, tuple[int, ...]] = {}
    if lam == 0.0:
        return (edges, by_comp) if return_by_component else edges

    groups: dict = defaultdict(list)
    for idx, comp in enumerate(decomp.components):
        k = comp.kind
        groups[k if k != "general-grid" else ("grid", comp.shape_key)].append(idx)

    for key in sorted(groups, key=str):
        idxs = groups[key]
        if key == "square" or key == "single-edge":
            probs = _square_probs(lam) if key == "square" else _edge_probs(lam)
            table = _SQUARE_OUTCOMES if key == "square" else _EDGE_OUTCOMES
            draws = rng.choice(len(probs), size=len(idxs), p=probs)
            for idx, o in zip(idxs, draws):
                offs = table[o]
                if offs:
                    comp = decomp.components[idx]
                    edges.extend(_offsets_to_edges(comp, offs))
                    by_comp[idx] = offs
            continue
        if key == "isolated-point":
            p1 = lam / (1.0 + lam)
            hits = rng.random(len(idxs)) < p1
            for idx, h in zip(idxs, hits):
                if h:
                    comp = decomp.components[idx]
                    edges.extend(_offsets_to_edges(comp, (0,)))
                    by_comp[idx] = (0,)
            continue
        first = decomp.components[idxs[0]]
        nv = len(first.factor_a) * len(first.factor_b)
        if nv <= ENUMERATE_CAP:
            sets, sizes = _enumerated(first)
            logw = sizes * math.log(lam)
            w = np.exp(logw - logw.max())
            draws = rng.choice(len(sets), size=len(idxs), p=w / w.sum())
            masks = [int(sets[d]) for d in draws]
        else:
            cf = None
            if _use_cftp(first, nv):
                try:
                    cf = _cftp_for(first)
                except StateCapError:
                    cf = None  # odd cycle in a factor: only the DP applies
            if cf is not None:
                masks = [cf.sample(lam, rng) for _ in idxs]
            else:
                masks = _dp_for(first).sample_fugacity(lam, rng, len(idxs))
        for idx, m in zip(idxs, masks):
            if m:
                comp = decomp.components[idx]
                edges.extend(_mask_to_edges(comp, m))
                by_comp[idx] = tuple(_bits(m))

    if include_pool and decomp.pool.count:
        k = int(rng.binomial(decomp.pool.count, lam / (1.0 + lam)))
        if k:
            idx = rng.choice(decomp.pool.count, size=k, replace=False)
            pairs = decomp.pool.pair(np.sort(idx))
            lo = np.minimum(pairs[:, 0], pairs[:, 1])
            hi = np.maximum(pairs[:, 0], pairs[:, 1])
            edges.extend(zip(lo.tolist(), hi.tolist()))
    return (edges, by_comp) if return_by_component else edges


def _bits(m):
    out = []
    while m:
        v = (m & -m).bit_length() - 1
        m &= m - 1
        out.append(v)
    return out


# ---------------------------------------------------------------------------
# fixed-size uniform independent sets


def _log_binom(n, k):
    n = np.asarray(n, dtype=float)
    k = np.asarray(k, dtype=float)
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def sample_uniform_indset_fixed_size(
    decomp: ProductDecomposition,
    target_size: int,
    rng: np.random.Generator,
):
    """Uniform independent set of S□T with exactly ``target_size`` vertices.

    Exact integer arithmetic is used for the non-trivial components; the
    split between single-edge components and the isolated pool uses
    double-precision log weights (``lgamma``). For many draws from one
    decomposition build a :class:`FixedSizeSampler` once instead.
    """
    return FixedSizeSampler(decomp, target_size).draw(rng)


class _Choice:
    """Exact integer-weighted choice with the cumulative sums kept."""

    __slots__ = ("keys", "cum", "total")

    def __init__(self, options):
        self.keys = [k for k, w in options if w]
        self.cum = list(itertools.accumulate(w for _, w in options if w))
        self.total = self.cum[-1] if self.cum else 0

    def pick(self, pyrng: random.Random):
        return self.keys[bisect.bisect_right(self.cum, pyrng.randrange(self.total))]


class FixedSizeSampler:
    """Size allocation tables for uniform fixed-size independent sets,
    computed once per ``(decomp, target_size)``."""

    def __init__(self, decomp: ProductDecomposition, target_size: int):
        t = int(target_size)
        if t < 0:
            raise ValueError(f"target size {t} is negative")
        self.decomp = decomp
        self.edges_kind, self.squares, self.general, self.points = [], [], [], []
        for idx, comp in enumerate(decomp.components):
            k = comp.kind
            if k == "single-edge":
                self.edges_kind.append(idx)
            elif k == "square":
                self.squares.append(idx)
            elif k == "isolated-point":
                self.points.append(idx)
            else:
                self.general.append(idx)
        self.P = P = decomp.pool.count + len(self.points)
        self.E = E = len(self.edges_kind)
        self.Q = len(self.squares)

        self.gpolys = [decomp.components[i].independence_polynomial for i in self.general]
        G = [1]
        for gp in self.gpolys:
            G = _polymul(G, gp)
        # squares: coefficient of x^j in (1+4x+2x^2)^Q
        self.G, self.sq = G, _power_poly(SQUARE_POLY, self.Q)
        H = _polymul(G, self.sq)
        max_total = (len(H) - 1) + E + P
        if t > max_total:
            raise ValueError(f"target size {t} exceeds the maximum independent set {max_total}")

        # weight of leaving r for the edge components plus the pool
        self.hs = [h for h in range(min(len(H) - 1, t) + 1) if H[h]]
        rs = [t - h for h in self.hs]
        ks = np.arange(0, E + 1)
        log_e = _log_binom(E, ks) + ks * math.log(2.0)
        self._rest: dict[int, np.ndarray] = {}
        log_r = []
        for r in rs:
            if r > E + P:
                log_r.append(-np.inf)
                continue
            kk = ks[ks <= r]
            lw = log_e[: len(kk)] + _log_binom(P, r - kk)
            lw = np.where((r - kk) <= P, lw, -np.inf)
            self._rest[r] = _log_cdf(lw)
            log_r.append(logsumexp(lw))
        log_h = np.array([math.log(H[h]) if H[h] < 1e300 else _biglog(H[h]) for h in self.hs])
        self._h_cdf = _log_cdf(log_h + np.array(log_r))
        self.t = t
        self._splits: dict[int, list] = {}
        self._square_opts: dict[int, list] = {}
        self._suffix = None
        self._alloc: dict[tuple[int, int], _Choice] = {}

    def _general_split(self, pos, remaining):
        key = (pos, remaining)
        ch = self._alloc.get(key)
        if ch is None:
            if self._suffix is None:
                suffix = [[1]]
                for gp in reversed(self.gpolys):
                    suffix.append(_polymul(suffix[-1], gp))
                self._suffix = suffix[::-1]
            gp, rest = self.gpolys[pos], self._suffix[pos + 1]
            ch = _Choice([(a, gp[a] * _coef(rest, remaining - a)) for a in range(min(remaining, len(gp) - 1) + 1)])
            self._alloc[key] = ch
        return ch

    def _split(self, h):
        opts = self._splits.get(h)
        if opts is None:
            lo = max(0, h - (len(self.sq) - 1))
            opts = _Choice([(g, _coef(self.G, g) * _coef(self.sq, h - g)) for g in range(lo, min(h, len(self.G) - 1) + 1)])
            self._splits[h] = opts
        return opts

    def _square_split(self, jq):
        opts = self._square_opts.get(jq)
        if opts is None:
            Q = self.Q
            opts = []
            for d in range(0, jq // 2 + 1):
                s = jq - 2 * d
                if d + s <= Q:
                    opts.append((d, math.comb(Q, d) * math.comb(Q - d, s) * 4**s * 2**d))
            opts = _Choice(opts)
            self._square_opts[jq] = opts
        return opts

    def draw(self, rng: np.random.Generator) -> list[tuple[int, int]]:
        decomp = self.decomp
        pyrng = random.Random(int(rng.integers(0, 2**63 - 1)))
        j = _draw_cdf(self._h_cdf, rng)
        h = self.hs[j]
        r = self.t - h
        k_edges = _draw_cdf(self._rest[r], rng)
        k_pool = r - k_edges

        # split h between general components and squares, exactly
        g_size = self._split(h).pick(pyrng)
        out_edges: list[tuple[int, int]] = []
        # general components: sequential allocation via suffix products
        remaining = g_size
        for pos, idx in enumerate(self.general):
            if not remaining:
                break
            a = self._general_split(pos, remaining).pick(pyrng)
            remaining -= a
            if a:
                comp = decomp.components[idx]
                mask = _dp_for(comp).sample_size(a, pyrng)
                out_edges.extend(_mask_to_edges(comp, mask))

        # squares: d diagonals and s singles with d*2 + s = h - g_size
        jq = h - g_size
        if jq:
            d = self._square_split(jq).pick(pyrng)
            s = jq - 2 * d
            picked = pyrng.sample(self.squares, d + s)
            for idx in picked[:d]:
                comp = decomp.components[idx]
                out_edges.extend(_offsets_to_edges(comp, _SQUARE_OUTCOMES[5 + pyrng.randrange(2)]))
            for idx in picked[d:]:
                comp = decomp.components[idx]
                out_edges.extend(_offsets_to_edges(comp, _SQUARE_OUTCOMES[1 + pyrng.randrange(4)]))

        if k_edges:
            for idx in pyrng.sample(self.edges_kind, k_edges):
                comp = decomp.components[idx]
                out_edges.extend(_offsets_to_edges(comp, (pyrng.randrange(2),)))

        if k_pool:
            pool_n = decomp.pool.count
            picks = np.sort(rng.choice(self.P, size=k_pool, replace=False))
            in_pool = picks[picks < pool_n]
            if len(in_pool):
                pairs = decomp.pool.pair(in_pool)
                lo_ = np.minimum(pairs[:, 0], pairs[:, 1])
                hi_ = np.maximum(pairs[:, 0], pairs[:, 1])
                out_edges.extend(zip(lo_.tolist(), hi_.tolist()))
            for pi in picks[picks >= pool_n]:
                comp = decomp.components[self.points[int(pi) - pool_n]]
                out_edges.extend(_offsets_to_edges(comp, (0,)))
        return out_edges


def _log_cdf(logw: np.ndarray) -> np.ndarray:
    ok = np.isfinite(logw)
    if not ok.any():
        raise ValueError("all weights vanish")
    w = np.where(ok, np.exp(logw - logw[ok].max()), 0.0)
    return np.cumsum(w)


def _draw_cdf(cdf: np.ndarray, rng: np.random.Generator) -> int:
    return int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))


def _biglog(x: int) -> float:
    b = x.bit_length() - 60
    return math.log(x >> b) + b * math.log(2.0)


def _power_poly(poly, k):
    out = [1]
    base = list(poly)
    while k:
        if k & 1:
            out = _polymul(out, base)
        k >>= 1
        if k:
            base = _polymul(base, base)
    return out
