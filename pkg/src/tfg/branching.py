"""Karp-style exploration of a cluster in a random bipartite graph.

Vertex 0 of ``A`` (size ``n``) is the root; ``B`` has size ``m``. The
exploration keeps two thinning chains: ``N_r`` counts ``A`` vertices still
unseen after ``r`` explorations of ``B`` vertices (``N_0 = n - 1``) and
``M_s`` counts ``B`` vertices unseen after ``s`` explorations of ``A``
vertices (``M_0 = m``). With ``X_{r,s} = n - N_r - s`` and
``Y_{r,s} = m - M_s - r`` the active counts, the cluster is exhausted at the
first ``(r, s)`` with ``X = Y = 0``; then ``s`` vertices of ``A`` and ``r``
of ``B`` were explored.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _kernels as K

__all__ = [
    "ExplorationTrace",
    "run_exploration",
    "run_exploration_coupled",
    "hitting_pair",
    "exploration_batch",
    "cluster_side_sizes_bfs",
    "bfs_batch",
    "histogram_csv",
]


@dataclass(frozen=True)
class ExplorationTrace:
    n: int
    m: int
    N: np.ndarray  # N_0..N_m
    M: np.ndarray  # M_0..M_n
    r_star: Optional[int]
    s_star: Optional[int]

    def X(self, r: int, s: int) -> int:
        return self.n - int(self.N[r]) - s

    def Y(self, r: int, s: int) -> int:
        return self.m - int(self.M[s]) - r

    @property
    def a_count(self) -> int:
        """``|C ∩ A|``: explored ``A`` vertices."""
        return self.s_star

    @property
    def b_count(self) -> int:
        """``|C ∩ B|``: explored ``B`` vertices."""
        return self.r_star


def hitting_pair(n: int, m: int, N: Sequence[int], M: Sequence[int]) -> tuple[Optional[int], Optional[int]]:
    """Scan anti-diagonals ``r + s = 0, 1, ...`` (smallest ``r`` first) for
    the first ``(r, s)`` with ``X = Y = 0``."""
    for d in range(n + m + 1):
        for r in range(max(0, d - n), min(d, m) + 1):
            s = d - r
            if n - N[r] - s == 0 and m - M[s] - r == 0:
                return r, s
    return None, None


def _chain(start: int, length: int, p: float, rng: np.random.Generator) -> np.ndarray:
    out = np.empty(length + 1, dtype=np.int64)
    out[0] = start
    for t in range(1, length + 1):
        out[t] = rng.binomial(out[t - 1], 1.0 - p) if out[t - 1] else 0
    return out


def run_exploration(n: int, m: int, p_tilde: float, rng: np.random.Generator) -> ExplorationTrace:
    if not 0.0 <= p_tilde <= 1.0:
        raise ValueError("p_tilde must lie in [0, 1]")
    N = _chain(n - 1, m, p_tilde, rng)
    M = _chain(m, n, p_tilde, rng)
    r, s = hitting_pair(n, m, N, M)
    return ExplorationTrace(n, m, N, M, r, s)


def run_exploration_coupled(n: int, m: int, p_values: Sequence[float], rng: np.random.Generator) -> list[ExplorationTrace]:
    """Traces for several ``p_tilde`` from shared uniforms.

    Each unseen vertex carries one uniform per exploration step and survives
    the step when its uniform is at least ``p_tilde``; this realizes the
    Binomial thinning and is monotone in ``p_tilde``.
    """
    ua = rng.random((m, n - 1))
    ub = rng.random((n, m))
    out = []
    for p in p_values:
        alive_a = np.cumprod(ua >= p, axis=0).sum(axis=1)
        alive_b = np.cumprod(ub >= p, axis=0).sum(axis=1)
        N = np.concatenate([[n - 1], alive_a]).astype(np.int64)
        M = np.concatenate([[m], alive_b]).astype(np.int64)
        r, s = hitting_pair(n, m, N, M)
        out.append(ExplorationTrace(n, m, N, M, r, s))
    return out


def _seed_from(rng: np.random.Generator) -> int:
    return int(rng.integers(0, 2**62))


def exploration_batch(n: int, m: int, p_tilde: float, trials: int, rng: np.random.Generator):
    """``(a_counts, b_counts)`` over ``trials`` explorations (compiled)."""
    rs, ss = K.karp_batch(n, m, float(p_tilde), int(trials), _seed_from(rng))
    return ss, rs


def cluster_side_sizes_bfs(n: int, m: int, p_tilde: float, rng: np.random.Generator) -> tuple[int, int]:
    """Sample bipartite ``G(n, m, p_tilde)`` and return the side sizes of the
    component of ``A``-vertex 0."""
    adj = rng.random((n, m)) < p_tilde
    seen_a = np.zeros(n, dtype=bool)
    seen_b = np.zeros(m, dtype=bool)
    seen_a[0] = True
    frontier_a = np.array([0])
    while len(frontier_a):
        nb = adj[frontier_a].any(axis=0) & ~seen_b
        seen_b |= nb
        na = adj[:, nb].any(axis=1) & ~seen_a
        seen_a |= na
        frontier_a = np.flatnonzero(na)
    return int(seen_a.sum()), int(seen_b.sum())


def bfs_batch(n: int, m: int, p_tilde: float, trials: int, rng: np.random.Generator):
    """``(a_counts, b_counts)`` over ``trials`` BFS samples (compiled)."""
    return K.bfs_cluster_batch(n, m, float(p_tilde), int(trials), _seed_from(rng))


def histogram_csv(a_counts, b_counts) -> str:
    """Joint histogram of side sizes as CSV lines ``a,b,count``."""
    pairs, counts = np.unique(np.stack([a_counts, b_counts], axis=1), axis=0, return_counts=True)
    lines = ["a,b,count"] + [f"{a},{b},{c}" for (a, b), c in zip(pairs.tolist(), counts.tolist())]
    return "\n".join(lines) + "\n"
