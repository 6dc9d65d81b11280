"""Undirected simple graphs with a planted bipartition.

Vertices are the integers ``0..n-1``. Edges are stored as sorted ``(u, v)``
tuples with ``u < v``; adjacency lists are built on demand.
"""

from __future__ import annotations

import io
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional

import numpy as np

__all__ = [
    "PlantedGraph",
    "Graph",
    "norm_edge",
    "is_triangle_free",
    "is_bipartite",
    "defect_components",
    "components",
    "max_cut_exact",
    "cut_value",
    "write_edgelist",
    "read_edgelist",
]

MAX_CUT_CAP = 28


def norm_edge(u: int, v: int) -> tuple[int, int]:
    if u == v:
        raise ValueError(f"self-loop at {u}")
    return (u, v) if u < v else (v, u)


def _adjacency(n: int, edges: Iterable[tuple[int, int]]) -> list[set[int]]:
    adj: list[set[int]] = [set() for _ in range(n)]
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    return adj


@dataclass(frozen=True)
class Graph:
    """Plain undirected simple graph."""

    n_vertices: int
    edges: tuple[tuple[int, int], ...]

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        es = sorted({norm_edge(int(u), int(v)) for u, v in edges})
        for u, v in es:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge {(u, v)} out of range for n={n}")
        return cls(n, tuple(es))

    @cached_property
    def adj(self) -> list[set[int]]:
        return _adjacency(self.n_vertices, self.edges)


@dataclass(frozen=True)
class PlantedGraph:
    """Output of every sampler: a graph plus its planted split.

    ``S`` and ``T`` are the defect edges inside ``part_A`` and ``part_B``;
    ``E_cr`` are the crossing edges. ``aborted`` marks the empty graph
    returned by the sampler's abort branch. ``meta`` carries free-form
    sampler diagnostics.
    """

    n_vertices: int
    part_A: tuple[int, ...]
    part_B: tuple[int, ...]
    S: tuple[tuple[int, int], ...]
    T: tuple[tuple[int, int], ...]
    E_cr: tuple[tuple[int, int], ...]
    aborted: bool = False
    meta: dict = field(default_factory=dict, compare=False)

    @classmethod
    def build(
        cls,
        n: int,
        part_A: Iterable[int],
        S: Iterable[tuple[int, int]] = (),
        T: Iterable[tuple[int, int]] = (),
        E_cr: Iterable[tuple[int, int]] = (),
        *,
        aborted: bool = False,
        meta: Optional[dict] = None,
        validate: bool = True,
    ) -> "PlantedGraph":
        A = tuple(sorted(set(int(a) for a in part_A)))
        inA = np.zeros(n, dtype=bool)
        inA[list(A)] = True
        B = tuple(int(v) for v in np.flatnonzero(~inA))
        S_ = tuple(sorted({norm_edge(int(u), int(v)) for u, v in S}))
        T_ = tuple(sorted({norm_edge(int(u), int(v)) for u, v in T}))
        E_ = tuple(sorted({norm_edge(int(u), int(v)) for u, v in E_cr}))
        g = cls(n, A, B, S_, T_, E_, aborted, dict(meta or {}))
        if validate:
            g.check()
        return g

    @classmethod
    def empty(cls, n: int, part_A: Iterable[int] = (), **meta) -> "PlantedGraph":
        return cls.build(n, part_A, aborted=True, meta=meta)

    def check(self) -> None:
        n = self.n_vertices
        inA = np.zeros(n, dtype=bool)
        inA[list(self.part_A)] = True
        if len(self.part_A) + len(self.part_B) != n:
            raise ValueError("parts do not cover the vertex set")
        for u, v in self.S:
            if not (inA[u] and inA[v]):
                raise ValueError(f"S edge {(u, v)} leaves part A")
        for u, v in self.T:
            if inA[u] or inA[v]:
                raise ValueError(f"T edge {(u, v)} leaves part B")
        for u, v in self.E_cr:
            if inA[u] == inA[v]:
                raise ValueError(f"crossing edge {(u, v)} does not cross")
        for u, v in self.S + self.T + self.E_cr:
            if not (0 <= u < v < n):
                raise ValueError(f"bad edge {(u, v)}")

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(self.S + self.T + self.E_cr))

    @property
    def n_edges(self) -> int:
        return len(self.S) + len(self.T) + len(self.E_cr)

    @cached_property
    def adj(self) -> list[set[int]]:
        return _adjacency(self.n_vertices, self.S + self.T + self.E_cr)

    @cached_property
    def in_A(self) -> np.ndarray:
        m = np.zeros(self.n_vertices, dtype=bool)
        m[list(self.part_A)] = True
        return m

    def as_graph(self) -> Graph:
        return Graph(self.n_vertices, self.edges)


def _edges_adj(g):
    if isinstance(g, (Graph, PlantedGraph)):
        return g.n_vertices, g.edges, g.adj
    n, edges = g
    edges = [norm_edge(u, v) for u, v in edges]
    return n, edges, _adjacency(n, edges)


def is_triangle_free(g) -> bool:
    """True iff ``g`` has no 3-clique.

    Accepts a :class:`Graph`, :class:`PlantedGraph` or ``(n, edges)`` pair.
    """
    _, edges, adj = _edges_adj(g)
    for u, v in edges:
        a, b = adj[u], adj[v]
        if len(a) > len(b):
            a, b = b, a
        for w in a:
            if w in b:
                return False
    return True


def is_bipartite(edges: Iterable[tuple[int, int]], vertices: Optional[Iterable[int]] = None):
    """BFS 2-coloring of the graph spanned by ``edges`` on ``vertices``.

    Returns ``(True, coloring)`` with ``coloring`` a dict vertex -> {0,1}, or
    ``(False, cycle)`` where ``cycle`` is a list of vertices forming an odd
    cycle (consecutive entries adjacent, last adjacent to first).
    """
    adj: dict[int, list[int]] = {}
    for u, v in edges:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    verts = list(vertices) if vertices is not None else sorted(adj)
    color: dict[int, int] = {}
    parent: dict[int, int] = {}
    depth: dict[int, int] = {}
    for s in verts:
        if s in color:
            continue
        color[s] = 0
        depth[s] = 0
        parent[s] = -1
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for w in adj.get(u, ()):
                if w not in color:
                    color[w] = 1 - color[u]
                    depth[w] = depth[u] + 1
                    parent[w] = u
                    queue.append(w)
                elif color[w] == color[u]:
                    return False, _odd_cycle(u, w, parent, depth)
    return True, color


def _odd_cycle(u, w, parent, depth):
    # walk both BFS-tree paths up to their lowest common ancestor
    left, right = [u], [w]
    a, b = u, w
    while depth[a] > depth[b]:
        a = parent[a]
        left.append(a)
    while depth[b] > depth[a]:
        b = parent[b]
        right.append(b)
    while a != b:
        a = parent[a]
        b = parent[b]
        left.append(a)
        right.append(b)
    # left ends at lca, right ends at lca
    return left + right[-2::-1]


def components(vertices: Iterable[int], edges: Iterable[tuple[int, int]]) -> list[list[int]]:
    """Connected components of the graph ``(vertices, edges)``, each sorted."""
    verts = sorted(set(vertices))
    index = {v: i for i, v in enumerate(verts)}
    parent = list(range(len(verts)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for u, v in edges:
        ru, rv = find(index[u]), find(index[v])
        if ru != rv:
            parent[max(ru, rv)] = min(ru, rv)
    groups: dict[int, list[int]] = {}
    for v in verts:
        groups.setdefault(find(index[v]), []).append(v)
    return sorted(groups.values(), key=lambda c: (c[0]))


def defect_components(g: PlantedGraph, side: str):
    """Components of ``(A, S)`` or ``(B, T)`` plus a size histogram."""
    if side not in ("A", "B"):
        raise ValueError("side must be 'A' or 'B'")
    verts, es = (g.part_A, g.S) if side == "A" else (g.part_B, g.T)
    comps = components(verts, es)
    hist: dict[int, int] = {}
    for c in comps:
        hist[len(c)] = hist.get(len(c), 0) + 1
    return comps, dict(sorted(hist.items()))


def cut_value(edges: Iterable[tuple[int, int]], side_mask) -> int:
    return sum(1 for u, v in edges if bool(side_mask[u]) != bool(side_mask[v]))


def max_cut_exact(g) -> dict:
    """Exhaustive maximum cut for ``n <= 28``.

    Vertex 0 is pinned to side 0 to quotient out the swap symmetry. Returns a
    dict with the best ``value``, one maximizing side-0 vertex set ``part``,
    and ``unique`` (whether the maximizer is unique up to swapping).
    """
    n, edges, _ = _edges_adj(g)
    if n > MAX_CUT_CAP:
        raise ValueError(f"max_cut_exact supports n <= {MAX_CUT_CAP}, got {n}")
    if n <= 1 or not edges:
        return {"value": 0, "part": tuple(range(n)), "unique": n <= 1}
    e = np.asarray(edges, dtype=np.int64)
    best_val, best_masks = -1, []
    # masks over vertices 1..n-1; vertex 0 on side 0
    total = 1 << (n - 1)
    chunk = 1 << 18
    eu, ev = e[:, 0], e[:, 1]
    for start in range(0, total, chunk):
        masks = np.arange(start, min(start + chunk, total), dtype=np.int64) << 1
        side_u = (masks[:, None] >> eu[None, :]) & 1
        side_v = (masks[:, None] >> ev[None, :]) & 1
        vals = (side_u != side_v).sum(axis=1)
        mx = int(vals.max())
        if mx > best_val:
            best_val = mx
            best_masks = list(masks[vals == mx][:2])
        elif mx == best_val and len(best_masks) < 2:
            best_masks += list(masks[vals == mx][: 2 - len(best_masks)])
    m0 = int(best_masks[0])
    part = tuple(v for v in range(n) if not (m0 >> v) & 1)
    return {"value": best_val, "part": part, "unique": len(best_masks) == 1}


def write_edgelist(g: PlantedGraph, fh=None) -> str:
    """Serialize ``g`` in the planted edge-list text format.

    Format: ``n <n> A <|A|>``, then ``P <A indices>``, then one ``u v`` per
    edge in sorted order.
    """
    lines = [f"n {g.n_vertices} A {len(g.part_A)}", "P " + " ".join(map(str, g.part_A))]
    lines += [f"{u} {v}" for u, v in g.edges]
    text = "\n".join(lines) + "\n"
    if fh is not None:
        fh.write(text)
    return text


def read_edgelist(src) -> PlantedGraph:
    """Parse the planted edge-list format; edges are split into S/T/E_cr."""
    text = src.read() if hasattr(src, "read") else str(src)
    lines = io.StringIO(text).read().splitlines()
    head = lines[0].split()
    if len(head) != 4 or head[0] != "n" or head[2] != "A":
        raise ValueError(f"bad header {lines[0]!r}")
    n, a_size = int(head[1]), int(head[3])
    plist = lines[1].split()
    if not plist or plist[0] != "P":
        raise ValueError("missing partition line")
    A = [int(x) for x in plist[1:]]
    if len(A) != a_size:
        raise ValueError("partition size mismatch")
    inA = np.zeros(n, dtype=bool)
    inA[A] = True
    S, T, E = [], [], []
    for ln in lines[2:]:
        if not ln.strip():
            continue
        u, v = map(int, ln.split())
        if inA[u] and inA[v]:
            S.append((u, v))
        elif not inA[u] and not inA[v]:
            T.append((u, v))
        else:
            E.append((u, v))
    return PlantedGraph.build(n, A, S, T, E)
