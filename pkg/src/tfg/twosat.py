"""Bipartite 2-SAT: formulas, implication digraphs, SCC decisions, spines,
trimmed outgraphs, cluster-law estimators and hourglass detection.

Clauses are stored as signed 1-based pairs ``(±(i+1), ±(j+1))``: the first
entry is a literal over the X bank, the second over the Y bank, and a minus
sign means negation. Internally literals are numbered as in
:mod:`tfg._kernels` (X variable ``i`` -> ``2i``/``2i+1``, Y variable ``j``
-> ``2N+2j``/``2N+2j+1``).
"""

from __future__ import annotations

import io
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional

import numpy as np

from . import _kernels as K

__all__ = [
    "BipartiteFormula",
    "ImplicationDigraph",
    "SatResult",
    "TrimmedOutgraph",
    "Hourglass",
    "ClusterTables",
    "gen_formula",
    "gen_formula_codes",
    "formula_from_graph",
    "GreenLiteralMap",
    "decide_sat",
    "brute_force_sat",
    "spine",
    "is_strictly_distinct",
    "trimmed_outgraph",
    "trimmed_ingraph",
    "cluster_law_estimators",
    "find_hourglasses",
    "defect_clause_set",
    "write_formula",
    "read_formula",
    "lit_name",
]


@dataclass(frozen=True)
class BipartiteFormula:
    n_vars_x: int
    n_vars_y: int
    clauses: tuple[tuple[int, int], ...]

    def __post_init__(self):
        seen = set()
        for a, b in self.clauses:
            if not (1 <= abs(a) <= self.n_vars_x and 1 <= abs(b) <= self.n_vars_y):
                raise ValueError(f"clause {(a, b)} out of range")
            if (a, b) in seen:
                raise ValueError(f"duplicate clause {(a, b)}")
            seen.add((a, b))

    @classmethod
    def from_clauses(cls, N: int, M: int, clauses: Iterable[tuple[int, int]]) -> "BipartiteFormula":
        return cls(N, M, tuple(sorted(set((int(a), int(b)) for a, b in clauses), key=_clause_key)))

    @classmethod
    def from_codes(cls, N: int, M: int, codes) -> "BipartiteFormula":
        """Build from clause codes ``((i*M + j) << 2) | pattern``; pattern bit 0
        negates the X literal and bit 1 the Y literal."""
        codes = np.sort(np.asarray(codes, dtype=np.int64))
        pair, pat = codes >> 2, codes & 3
        i, j = pair // M + 1, pair % M + 1
        a = np.where(pat & 1, -i, i)
        b = np.where(pat & 2, -j, j)
        return cls(N, M, tuple(sorted(zip(a.tolist(), b.tolist()), key=_clause_key)))

    @property
    def n_literals(self) -> int:
        return 2 * (self.n_vars_x + self.n_vars_y)

    def lit_id(self, signed: int, bank: str) -> int:
        """Internal literal id of a signed 1-based literal in ``bank`` ('x'/'y')."""
        v = abs(signed) - 1
        base = 0 if bank == "x" else 2 * self.n_vars_x
        return base + 2 * v + (1 if signed < 0 else 0)

    def clause_literals(self) -> np.ndarray:
        """``(K, 2)`` array of internal literal ids."""
        if not self.clauses:
            return np.zeros((0, 2), dtype=np.int64)
        c = np.asarray(self.clauses, dtype=np.int64)
        a = 2 * (np.abs(c[:, 0]) - 1) + (c[:, 0] < 0)
        b = 2 * self.n_vars_x + 2 * (np.abs(c[:, 1]) - 1) + (c[:, 1] < 0)
        return np.stack([a, b], axis=1)

    def codes(self) -> np.ndarray:
        c = np.asarray(self.clauses, dtype=np.int64).reshape(-1, 2)
        i, j = np.abs(c[:, 0]) - 1, np.abs(c[:, 1]) - 1
        pat = (c[:, 0] < 0).astype(np.int64) | ((c[:, 1] < 0).astype(np.int64) << 1)
        return ((i * self.n_vars_y + j) << 2) | pat

    def satisfied_by(self, x_vals, y_vals) -> bool:
        for a, b in self.clauses:
            va = bool(x_vals[abs(a) - 1]) == (a > 0)
            vb = bool(y_vals[abs(b) - 1]) == (b > 0)
            if not (va or vb):
                return False
        return True

    def add(self, extra: Iterable[tuple[int, int]]) -> "BipartiteFormula":
        return BipartiteFormula.from_clauses(self.n_vars_x, self.n_vars_y, list(self.clauses) + list(extra))

    @cached_property
    def digraph(self) -> "ImplicationDigraph":
        return ImplicationDigraph.from_formula(self)


def _clause_key(c):
    return (abs(c[0]), c[0] < 0, abs(c[1]), c[1] < 0)


def lit_name(F: BipartiteFormula, z: int) -> str:
    """Readable name of an internal literal id, e.g. ``x3`` or ``~y1``."""
    if z < 2 * F.n_vars_x:
        bank, v = "x", z // 2
    else:
        bank, v = "y", (z - 2 * F.n_vars_x) // 2
    return ("~" if z & 1 else "") + f"{bank}{v + 1}"


@dataclass(frozen=True)
class ImplicationDigraph:
    """Arc ``z -> z'`` for every clause ``(~z or z')``, in CSR form."""

    n_vertices: int
    n_x_literals: int
    indptr: np.ndarray
    indices: np.ndarray

    @classmethod
    def from_formula(cls, F: BipartiteFormula) -> "ImplicationDigraph":
        lits = F.clause_literals()
        a, b = lits[:, 0], lits[:, 1]
        src = np.concatenate([a ^ 1, b ^ 1])
        dst = np.concatenate([b, a])
        return cls.from_arcs(F.n_literals, 2 * F.n_vars_x, src, dst)

    @classmethod
    def from_arcs(cls, nv, nx, src, dst) -> "ImplicationDigraph":
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(nv + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        np.cumsum(indptr, out=indptr)
        return cls(nv, nx, indptr, dst)

    def successors(self, z: int) -> np.ndarray:
        return self.indices[self.indptr[z] : self.indptr[z + 1]]

    @property
    def n_arcs(self) -> int:
        return int(self.indptr[-1])

    def arcs(self) -> np.ndarray:
        src = np.repeat(np.arange(self.n_vertices), np.diff(self.indptr))
        return np.stack([src, self.indices], axis=1)

    def reversed(self) -> "ImplicationDigraph":
        a = self.arcs()
        return ImplicationDigraph.from_arcs(self.n_vertices, self.n_x_literals, a[:, 1], a[:, 0])

    def is_skew_symmetric(self) -> bool:
        a = self.arcs()
        fwd = set(map(tuple, a.tolist()))
        return all((w ^ 1, v ^ 1) in fwd for v, w in fwd)

    def is_bank_bipartite(self) -> bool:
        a = self.arcs()
        return bool(np.all((a[:, 0] < self.n_x_literals) != (a[:, 1] < self.n_x_literals)))

    @cached_property
    def scc(self) -> tuple[np.ndarray, int]:
        return K.tarjan_scc(self.n_vertices, self.indptr, self.indices)

    def reach(self, z: int) -> np.ndarray:
        seen = np.zeros(self.n_vertices, dtype=bool)
        seen[z] = True
        dq = deque([z])
        while dq:
            v = dq.popleft()
            for w in self.successors(v):
                if not seen[w]:
                    seen[w] = True
                    dq.append(int(w))
        return seen

    def path(self, s: int, t: int) -> Optional[list[int]]:
        """Shortest directed path ``s ~> t`` as a list of literal ids."""
        parent = {s: -1}
        dq = deque([s])
        while dq:
            v = dq.popleft()
            if v == t and v != s:
                break
            for w in self.successors(v):
                w = int(w)
                if w not in parent:
                    parent[w] = v
                    dq.append(w)
        if t not in parent or (t == s):
            return None if t != s else [s]
        out = [t]
        while out[-1] != s:
            out.append(parent[out[-1]])
        return out[::-1]


@dataclass
class SatResult:
    sat: bool
    x_values: Optional[np.ndarray] = None
    y_values: Optional[np.ndarray] = None
    witness: Optional[dict] = None

    def to_dict(self) -> dict:
        d = {"sat": self.sat}
        if self.sat:
            d["x"] = [bool(v) for v in self.x_values]
            d["y"] = [bool(v) for v in self.y_values]
        else:
            d["witness"] = self.witness
        return d


def decide_sat(F: BipartiteFormula, *, with_witness_paths: bool = True) -> SatResult:
    """SCC decision; returns a satisfying assignment or a contradictory variable."""
    D = F.digraph
    comp, _ = D.scc
    pos, neg = comp[0::2], comp[1::2]
    bad = np.flatnonzero(pos == neg)
    N = F.n_vars_x
    if len(bad):
        v = int(bad[0])
        bank, idx = ("x", v) if v < N else ("y", v - N)
        w = {"bank": bank, "index": idx + 1}
        if with_witness_paths:
            z = 2 * v
            w["path_to_negation"] = [lit_name(F, t) for t in D.path(z, z ^ 1)]
            w["path_back"] = [lit_name(F, t) for t in D.path(z ^ 1, z)]
        return SatResult(False, witness=w)
    # completion order of Tarjan is reverse topological: pick the later literal
    vals = pos < neg
    res = SatResult(True, vals[:N].copy(), vals[N:].copy())
    assert F.satisfied_by(res.x_values, res.y_values)
    return res


def brute_force_sat(F: BipartiteFormula) -> bool:
    """Exhaustive search over all ``2^(N+M)`` assignments (``N+M <= 24``)."""
    N, M = F.n_vars_x, F.n_vars_y
    if N + M > 24:
        raise ValueError("brute force limited to N+M <= 24")
    if not F.clauses:
        return True
    masks = np.arange(1 << (N + M), dtype=np.int64)
    ok = np.ones(len(masks), dtype=bool)
    for a, b in F.clauses:
        va = ((masks >> (abs(a) - 1)) & 1).astype(bool)
        vb = ((masks >> (N + abs(b) - 1)) & 1).astype(bool)
        if a < 0:
            va = ~va
        if b < 0:
            vb = ~vb
        ok &= va | vb
        if not ok.any():
            return False
    return bool(ok.any())


def gen_formula_codes(N: int, M: int, q: float, rng: np.random.Generator) -> np.ndarray:
    """Clause codes of a random formula: ``Binomial(4NM, q)`` distinct codes."""
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must lie in [0,1]")
    total = 4 * N * M
    k = int(rng.binomial(total, q))
    if k == total:
        return np.arange(total, dtype=np.int64)
    return np.sort(rng.choice(total, size=k, replace=False)).astype(np.int64)


def gen_formula(N: int, M: int, q: float, rng: np.random.Generator) -> BipartiteFormula:
    """Each of the ``4NM`` bipartite clauses present independently with probability ``q``."""
    return BipartiteFormula.from_codes(N, M, gen_formula_codes(N, M, q, rng))


# ---------------------------------------------------------------------------
# reduction from planted graphs


@dataclass
class GreenLiteralMap:
    """Variables of the formula built from a planted graph.

    ``x_vars``/``y_vars`` list the defect components (as vertex tuples) behind
    each variable. ``lit`` maps a defect-incident vertex to the signed
    literal meaning "this vertex is not green"; ``base_class`` maps it to 0
    if it keeps its base color when its variable is TRUE, else 1.
    """

    x_vars: list[tuple[int, ...]]
    y_vars: list[tuple[int, ...]]
    lit: dict[int, int]
    mode: str


def _component_literals(verts, edges, order_offset=0):
    from .graphcore import components, is_bipartite

    comps = [c for c in components(verts, edges) if len(c) > 1]
    lit, vars_ = {}, []
    bad = None
    by_comp_edges: dict = {}
    where = {v: i for i, c in enumerate(comps) for v in c}
    for u, v in edges:
        by_comp_edges.setdefault(where[u], []).append((u, v))
    for i, c in enumerate(comps):
        ok, col = is_bipartite(by_comp_edges.get(i, []), c)
        if not ok:
            bad = col if bad is None else bad
            continue
        vars_.append(tuple(c))
        var = len(vars_)
        base = col[c[0]]  # class of the smallest vertex keeps its base color on TRUE
        for v in c:
            lit[v] = var if col[v] == base else -var
    return vars_, lit, bad


def formula_from_graph(g, *, mode: str = "matching"):
    """Bipartite 2-SAT formula whose models are the green-edge colorings of ``g``.

    ``mode="matching"`` requires every defect component to be a single edge and
    uses one variable per defect edge ``uv`` (``u < v``): TRUE keeps ``u`` at
    its base color and makes ``v`` green. ``mode="components"`` allows any
    bipartite defect component and uses one variable per component, TRUE
    keeping the color class of its smallest vertex at the base color. A
    non-bipartite defect component raises ``ValueError`` (no green-edge
    coloring can exist).

    Every crossing edge between two defect-incident vertices ``a``, ``b``
    becomes the clause "``a`` not green or ``b`` not green".
    """
    from .graphcore import components

    if mode not in ("matching", "components"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "matching":
        for side, verts, es in (("A", g.part_A, g.S), ("B", g.part_B, g.T)):
            deg: dict[int, int] = {}
            for u, v in es:
                deg[u] = deg.get(u, 0) + 1
                deg[v] = deg.get(v, 0) + 1
            if any(d > 1 for d in deg.values()):
                raise ValueError(f"defect component of size > 2 on side {side}")
        x_vars = [tuple(e) for e in g.S]
        y_vars = [tuple(e) for e in g.T]
        lit = {}
        for i, (u, v) in enumerate(x_vars):
            lit[u], lit[v] = i + 1, -(i + 1)
        ylit = {}
        for j, (u, v) in enumerate(y_vars):
            ylit[u], ylit[v] = j + 1, -(j + 1)
    else:
        x_vars, lit, bad_a = _component_literals(g.part_A, g.S)
        y_vars, ylit, bad_b = _component_literals(g.part_B, g.T)
        if bad_a is not None or bad_b is not None:
            raise ValueError("non-bipartite defect component")
    clauses = set()
    for u, v in g.E_cr:
        a, b = (u, v) if u in lit else (v, u)
        if a in lit and b in ylit:
            clauses.add((lit[a], ylit[b]))
    F = BipartiteFormula.from_clauses(len(x_vars), len(y_vars), clauses)
    merged = dict(lit)
    merged.update(ylit)
    return F, GreenLiteralMap(x_vars, y_vars, merged, mode)


# ---------------------------------------------------------------------------
# spine, trimmed outgraphs


def is_strictly_distinct(lits: Iterable[int]) -> bool:
    s = set(int(z) for z in lits)
    return all((z ^ 1) not in s for z in s)


def spine(F: BipartiteFormula, size_cap: int = 20000) -> set[int]:
    """Literals ``z`` with a directed path ``z ~> ~z``.

    Reachability is propagated over the condensation with integer bitsets.
    """
    if F.n_literals > size_cap:
        raise ValueError(f"spine needs 2(N+M) <= {size_cap}")
    D = F.digraph
    comp, nc = D.scc
    arcs = D.arcs()
    cu, cv = comp[arcs[:, 0]], comp[arcs[:, 1]]
    keep = cu != cv
    pairs = np.unique(np.stack([cu[keep], cv[keep]], axis=1), axis=0) if keep.any() else np.zeros((0, 2), int)
    succ: list[list[int]] = [[] for _ in range(nc)]
    for a, b in pairs.tolist():
        succ[a].append(b)
    reach = [0] * nc
    for c in range(nc):  # completion order: successors finish first
        r = 1 << c
        for d in succ[c]:
            r |= reach[d]
        reach[c] = r
    out = set()
    for z in range(F.n_literals):
        if (reach[comp[z]] >> int(comp[z ^ 1])) & 1:
            out.add(z)
    return out


@dataclass(frozen=True)
class TrimmedOutgraph:
    literals: tuple[int, ...]
    k_x: int
    k_y: int


def _trimmed(D: ImplicationDigraph, z: int, banned: frozenset = frozenset()) -> TrimmedOutgraph:
    collected: list[int] = []
    have = set()
    dq = deque([z])
    while dq:
        t = dq.popleft()
        if t in have or (t ^ 1) in have or (t >> 1) in banned:
            continue
        have.add(t)
        collected.append(t)
        dq.extend(int(w) for w in D.successors(t))
    kx = sum(1 for t in collected if t < D.n_x_literals)
    return TrimmedOutgraph(tuple(collected), kx, len(collected) - kx)


def trimmed_outgraph(F: BipartiteFormula, z: int) -> TrimmedOutgraph:
    """Worklist-trimmed reachable set of literal ``z`` (FIFO order)."""
    return _trimmed(F.digraph, z)


def trimmed_ingraph(F: BipartiteFormula, z: int) -> TrimmedOutgraph:
    """The same construction on reversed arcs."""
    return _trimmed(F.digraph.reversed(), z)


@dataclass
class ClusterTables:
    """Empirical cluster laws from ``trials`` runs; arrays indexed ``[k, l]``."""

    N: int
    M: int
    q: float
    trials: int
    Q: np.ndarray
    P: np.ndarray
    R: np.ndarray
    hits: int

    def freq(self, name: str) -> np.ndarray:
        return getattr(self, name) / self.trials


def cluster_law_estimators(N: int, M: int, q: float, trials: int, rng: np.random.Generator) -> ClusterTables:
    """Counts of trimmed-outgraph sizes from a generic X literal.

    ``Q`` counts every trial, ``P`` only trials with no path to the negation,
    ``R`` those among ``P`` whose collected set spans a directed tree.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    seed = int(rng.integers(0, 2**62))
    ks, ls, hit, tree = K.cluster_mc(N, M, float(q), int(trials), seed)
    shape = (N + 1, M + 1)
    Q = np.zeros(shape, dtype=np.int64)
    P = np.zeros(shape, dtype=np.int64)
    R = np.zeros(shape, dtype=np.int64)
    np.add.at(Q, (ks, ls), 1)
    ok = ~hit
    np.add.at(P, (ks[ok], ls[ok]), 1)
    ok_t = ok & tree
    np.add.at(R, (ks[ok_t], ls[ok_t]), 1)
    return ClusterTables(N, M, float(q), int(trials), Q, P, R, int(hit.sum()))


# ---------------------------------------------------------------------------
# hourglasses and the defect clause set


@dataclass
class Hourglass:
    center: int
    in_portion: tuple[int, ...]
    out_portion: tuple[int, ...]
    balance_in: float
    balance_out: float

    def literals(self) -> set[int]:
        return {self.center, *self.in_portion, *self.out_portion}


def _ratio(lits, nx):
    kx = sum(1 for t in lits if t < nx)
    ky = len(lits) - kx
    return kx / ky if ky else float("inf")


def find_hourglasses(
    F: BipartiteFormula,
    min_portion: int = 1,
    balance_window: tuple[float, float] = (0.2, 5.0),
    max_centers: Optional[int] = None,
) -> list[Hourglass]:
    """Greedy detector of disjoint, mutually strictly distinct hourglasses."""
    D = F.digraph
    R = D.reversed()
    lo, hi = balance_window
    nx = D.n_x_literals
    used_vars: set[int] = set()
    union: set[int] = set()
    found = []
    centers = range(F.n_literals) if max_centers is None else range(min(max_centers, F.n_literals))
    for v in centers:
        if (v >> 1) in used_vars:
            continue
        tin = _trimmed(R, v, frozenset(used_vars))
        I = tuple(t for t in tin.literals if t != v)
        banned = frozenset(used_vars | {t >> 1 for t in I})
        tout = _trimmed(D, v, banned)
        O = tuple(t for t in tout.literals if t != v)
        if len(I) < min_portion or len(O) < min_portion:
            continue
        allv = {v, *I, *O}
        if not is_strictly_distinct(allv):
            continue
        bi, bo = _ratio(I, nx), _ratio(O, nx)
        if not (lo < bi < hi and lo < bo < hi):
            continue
        if not is_strictly_distinct(union | allv):
            continue
        found.append(Hourglass(v, I, O, bi, bo))
        used_vars |= {t >> 1 for t in allv}
        union |= allv
    return found


def defect_clause_set(F: BipartiteFormula) -> set[int]:
    """Literals with in-arcs from both polarities of some variable."""
    arcs = F.digraph.arcs()
    ins: dict[int, set[int]] = {}
    for a, b in arcs.tolist():
        ins.setdefault(b, set()).add(a)
    return {z for z, s in ins.items() if any((a ^ 1) in s for a in s)}


# ---------------------------------------------------------------------------
# file format


def write_formula(F: BipartiteFormula, fh=None) -> str:
    lines = [f"p bisat {F.n_vars_x} {F.n_vars_y} {len(F.clauses)}"]
    lines += [f"{a:+d} {b:+d}" for a, b in sorted(F.clauses, key=_clause_key)]
    text = "\n".join(lines) + "\n"
    if fh is not None:
        fh.write(text)
    return text


def read_formula(src) -> BipartiteFormula:
    text = src.read() if hasattr(src, "read") else str(src)
    lines = [ln for ln in io.StringIO(text).read().splitlines() if ln.strip()]
    head = lines[0].split()
    if head[:2] != ["p", "bisat"] or len(head) != 5:
        raise ValueError(f"bad header {lines[0]!r}")
    N, M, Kc = map(int, head[2:])
    clauses = [tuple(map(int, ln.split())) for ln in lines[1:]]
    if len(clauses) != Kc:
        raise ValueError("clause count mismatch")
    return BipartiteFormula.from_clauses(N, M, clauses)
