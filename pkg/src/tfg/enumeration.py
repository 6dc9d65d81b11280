"""Connected spanning subgraphs of complete bipartite graphs and the
closed-form cluster laws built from them.

``C(k, l, s)`` counts connected spanning subgraphs of ``K_{k,l}`` with
``k + l - 1 + s`` edges (excess ``s``). Two independent routes compute it:
exhaustive subset enumeration (``k*l <= 24``) and a rooted
inclusion-exclusion recursion on edge-count polynomials (any size).
"""

from __future__ import annotations

import csv
import itertools
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Optional

import numpy as np
from scipy.special import gammaln

from . import _kernels as K

__all__ = [
    "BipConnTable",
    "count_connected_bipartite",
    "count_connected_bipartite_ie",
    "conn_table",
    "moon_forest_count",
    "moon_forest_bruteforce",
    "connectivity_probability",
    "exact_P_formula",
    "exact_Q_formula",
    "exact_R_formula",
    "cluster_law_bruteforce",
    "sp_value",
    "sp_leading_order",
    "bound_lower",
    "bound_upper",
    "fit_bound_constants",
    "save_tables",
    "load_tables",
    "export_csv",
    "RHO",
]

ENUM_CAP = 24
CACHE_VERSION = 1
RHO = {0: 1.0, 1: math.sqrt(math.pi / 8.0)}


@dataclass(frozen=True)
class BipConnTable:
    k: int
    l: int
    counts: tuple[int, ...]  # index s

    def __getitem__(self, s: int) -> int:
        return self.counts[s] if 0 <= s < len(self.counts) else 0

    @property
    def max_excess(self) -> int:
        return len(self.counts) - 1

    @property
    def total(self) -> int:
        return sum(self.counts)

    def as_dict(self) -> dict[int, int]:
        return {s: c for s, c in enumerate(self.counts)}


def _check_kl(k, l):
    if k < 0 or l < 0 or k + l == 0:
        raise ValueError(f"invalid part sizes ({k}, {l})")


def _trivial_table(k, l):
    # one part empty: connected only for a single vertex
    if k + l == 1:
        return BipConnTable(k, l, (1,))
    return BipConnTable(k, l, ())


@lru_cache(maxsize=None)
def count_connected_bipartite(k: int, l: int) -> BipConnTable:
    """Exhaustive enumeration over all edge subsets of ``K_{k,l}``."""
    _check_kl(k, l)
    if k * l > ENUM_CAP:
        raise ValueError(f"exhaustive enumeration needs k*l <= {ENUM_CAP}")
    if k == 0 or l == 0:
        return _trivial_table(k, l)
    if k > l:  # symmetric; enumerate the orientation with fewer row masks
        t = count_connected_bipartite(l, k)
        return BipConnTable(k, l, t.counts)
    arr = K.count_connected_subsets(k, l)
    return BipConnTable(k, l, tuple(int(x) for x in arr))


def _poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


@lru_cache(maxsize=None)
def _binom_poly(e: int) -> tuple[int, ...]:
    return tuple(math.comb(e, i) for i in range(e + 1))


@lru_cache(maxsize=None)
def _conn_poly(k: int, l: int) -> tuple[int, ...]:
    """Edge-count generating polynomial of connected spanning subgraphs.

    Rooted at an A vertex: all graphs = sum over the root's component
    ``(a, b)`` of ``C(k-1, a-1) C(l, b) conn(a, b) * all(rest)``, with no
    edges between the component and the rest.
    """
    if k + l == 1:
        return (1,)
    if k == 0 or l == 0:
        return (0,)
    total = list(_binom_poly(k * l))
    for a in range(1, k + 1):
        for b in range(0, l + 1):
            if a == k and b == l:
                continue
            c = _conn_poly(a, b)
            if not any(c):
                continue
            rest = _binom_poly((k - a) * (l - b))
            mult = math.comb(k - 1, a - 1) * math.comb(l, b)
            term = _poly_mul(list(c), list(rest))
            for i, x in enumerate(term):
                total[i] -= mult * x
    return tuple(total)


@lru_cache(maxsize=None)
def count_connected_bipartite_ie(k: int, l: int) -> BipConnTable:
    """Inclusion-exclusion route to the same table, valid for any size."""
    _check_kl(k, l)
    if k == 0 or l == 0:
        return _trivial_table(k, l)
    poly = _conn_poly(k, l)
    base = k + l - 1
    counts = tuple(poly[base:]) if len(poly) > base else ()
    if any(poly[:base]):
        raise AssertionError("connected graph with fewer than k+l-1 edges")
    return BipConnTable(k, l, counts)


def conn_table(k: int, l: int) -> BipConnTable:
    """Exhaustive table within the cap, inclusion-exclusion beyond it."""
    if k * l <= ENUM_CAP and k * l <= 16:
        return count_connected_bipartite(k, l)
    return count_connected_bipartite_ie(k, l)


# ---------------------------------------------------------------------------
# Moon's forest count


def moon_forest_count(k: int, l: int, a: int, b: int) -> int:
    """Spanning forests of ``K_{k,l}`` with ``a + b`` trees, where ``a``
    fixed A-vertices and ``b`` fixed B-vertices lie in distinct trees."""
    if not (0 <= a <= k and 0 <= b <= l) or a + b == 0:
        raise ValueError(f"need 0 <= a <= k, 0 <= b <= l, a + b >= 1; got {(k, l, a, b)}")
    val = Fraction(k) ** (l - b - 1) * Fraction(l) ** (k - a - 1) * (a * l + b * k - a * b)
    if val.denominator != 1:
        raise ArithmeticError(f"non-integral forest count {val}")
    return int(val)


def moon_forest_bruteforce(k: int, l: int, a: int, b: int) -> int:
    """Direct enumeration of all edge subsets (small ``k*l`` only)."""
    if k * l > 16:
        raise ValueError("brute force limited to k*l <= 16")
    nv = k + l
    roots = list(range(a)) + [k + j for j in range(b)]
    edges = [(i, k + j) for i in range(k) for j in range(l)]
    want = a + b
    count = 0
    for r in range(len(edges) + 1):
        if nv - r != want:
            continue
        for sub in itertools.combinations(edges, r):
            parent = list(range(nv))

            def find(x):
                while parent[x] != x:
                    parent[x] = parent[parent[x]]
                    x = parent[x]
                return x

            acyclic = True
            for u, v in sub:
                ru, rv = find(u), find(v)
                if ru == rv:
                    acyclic = False
                    break
                parent[ru] = rv
            if not acyclic:
                continue
            if len({find(x) for x in roots}) == len(roots):
                count += 1
    return count


# ---------------------------------------------------------------------------
# probabilities


def connectivity_probability(k: int, l: int, p):
    """P(G_{k,l,p} is connected). Exact if ``p`` is a ``Fraction``."""
    t = conn_table(k, l)
    if not t.counts:
        return 0 if not isinstance(p, Fraction) else Fraction(0)
    base = k + l - 1
    ne = k * l
    one = Fraction(1) if isinstance(p, Fraction) else 1.0
    q = one - p
    if isinstance(p, Fraction):
        return sum(c * p ** (base + s) * q ** (ne - base - s) for s, c in enumerate(t.counts))
    if p == 0.0:
        return 1.0 if k + l == 1 else 0.0
    if p == 1.0:
        return 1.0
    # log-space terms to avoid underflow for large tables
    lp, lq = math.log(p), math.log1p(-p)
    terms = [math.log(c) + (base + s) * lp + (ne - base - s) * lq for s, c in enumerate(t.counts) if c]
    mx = max(terms)
    return math.exp(mx) * math.fsum(math.exp(x - mx) for x in terms)


def _log_comb(n, k):
    if k < 0 or k > n:
        return -math.inf
    return float(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))


def _log_or_inf(x):
    return math.log(x) if x > 0 else -math.inf


def exact_P_formula(n: int, m: int, p: float, k: int, l: int) -> float:
    """Probability that a generic X literal does not reach its negation and its
    trimmed outgraph has ``k`` X literals and ``l`` Y literals."""
    if not (1 <= k <= n and 0 <= l <= m):
        return 0.0
    expo = k * (2 * m - l) + l * (2 * n - k) - k * l
    conn = connectivity_probability(k, l, p)
    if conn <= 0:
        return 0.0
    lq = math.log1p(-p) if p < 1 else (-math.inf if expo else 0.0)
    lv = (k + l - 1) * math.log(2.0) + _log_comb(n - 1, k - 1) + _log_comb(m, l) + expo * lq + math.log(conn)
    return math.exp(lv)


def exact_R_formula(n: int, m: int, p: float, k: int, l: int) -> float:
    """As :func:`exact_P_formula` restricted to outgraphs spanning a tree."""
    if not (1 <= k <= n and 0 <= l <= m):
        return 0.0
    if l == 0:
        return exact_P_formula(n, m, p, k, l)
    if p <= 0:
        return 0.0
    expo = k * (2 * m - l) + l * (2 * n - k) - k * l
    base = k + l - 1
    lq = math.log1p(-p)
    lv = (
        base * math.log(2.0)
        + _log_comb(n - 1, k - 1)
        + _log_comb(m, l)
        + expo * lq
        + (l - 1) * math.log(k)
        + (k - 1) * math.log(l)
        + base * math.log(p)
        + (k * l - base) * lq
    )
    return math.exp(lv)


def exact_Q_formula(n: int, m: int, p, k: int, l: int):
    """Cluster law of the X-variable of a generic literal (side sizes of its
    component in bipartite ``G(n, m, 2p - p^2)``). Exact for ``Fraction`` p."""
    if not (1 <= k <= n and 0 <= l <= m):
        return Fraction(0) if isinstance(p, Fraction) else 0.0
    pp = 2 * p - p * p
    expo = k * (m - l) + l * (n - k)
    conn = connectivity_probability(k, l, pp)
    if isinstance(p, Fraction):
        return math.comb(n - 1, k - 1) * math.comb(m, l) * (1 - pp) ** expo * conn
    if conn <= 0:
        return 0.0
    lq = math.log1p(-pp) if pp < 1 else (-math.inf if expo else 0.0)
    return math.exp(_log_comb(n - 1, k - 1) + _log_comb(m, l) + expo * lq + math.log(conn))


def cluster_law_bruteforce(n: int, m: int, p) -> dict[tuple[int, int], Fraction]:
    """Side sizes of the component of A-vertex 0 in bipartite ``G(n, m, p)``,
    by enumerating all ``2^(nm)`` graphs (``nm <= 16``)."""
    if n * m > 16:
        raise ValueError("brute force limited to n*m <= 16")
    p = Fraction(p)
    ne = n * m
    out: dict[tuple[int, int], Fraction] = {}
    pw = [p**e * (1 - p) ** (ne - e) for e in range(ne + 1)]
    for mask in range(1 << ne):
        adj_a = [(mask >> (i * m)) & ((1 << m) - 1) for i in range(n)]
        ra, rb = 1, 0
        while True:
            nb = 0
            for i in range(n):
                if (ra >> i) & 1:
                    nb |= adj_a[i]
            na = ra
            for i in range(n):
                if adj_a[i] & nb:
                    na |= 1 << i
            if na == ra and nb == rb:
                break
            ra, rb = na, nb
        key = (bin(ra).count("1"), bin(rb).count("1"))
        out[key] = out.get(key, Fraction(0)) + pw[bin(mask).count("1")]
    return out


def sp_value(k: int, l: int, p):
    """``S_p(k, l) = sum_s C(k,l,s) / (k^(l-1) l^(k-1)) * (p/(1-p))^s``."""
    t = conn_table(k, l)
    trees = k ** (l - 1) * l ** (k - 1) if k and l else 1
    if isinstance(p, Fraction):
        r = p / (1 - p)
        return sum(Fraction(c, trees) * r**s for s, c in enumerate(t.counts))
    r = p / (1.0 - p)
    return math.fsum(c / trees * r**s for s, c in enumerate(t.counts))


def sp_leading_order(k: int, l: int, p: float) -> float:
    """Two-term asymptotic comparison curve (excess 0 and 1 only)."""
    return RHO[0] + RHO[1] * math.sqrt(k * l * (k + l)) * p / (1.0 - p)


def _bound(k, l, s, c):
    if s <= 0:
        raise ValueError("bounds need s >= 1")
    return k ** (l - 1) * l ** (k - 1) * (k + l) ** (1.5 * s) * (c / s) ** (s / 2.0)


def bound_lower(k: int, l: int, s: int, c1: float) -> float:
    if s > (k + l) / 4.0:
        raise ValueError("lower bound needs s <= (k+l)/4")
    if not 0.2 < k / l < 5.0:
        raise ValueError("bounds need k/l in (1/5, 5)")
    return _bound(k, l, s, c1)


def bound_upper(k: int, l: int, s: int, c2: float) -> float:
    if not 0.2 < k / l < 5.0:
        raise ValueError("bounds need k/l in (1/5, 5)")
    return _bound(k, l, s, c2)


def fit_bound_constants(tables: Iterable[BipConnTable]) -> dict:
    """Tightest constants making the lower/upper envelopes hold on ``tables``."""
    c1, c2 = math.inf, 0.0
    for t in tables:
        k, l = t.k, t.l
        if not (k and l and 0.2 < k / l < 5.0):
            continue
        trees = k ** (l - 1) * l ** (k - 1)
        for s, c in enumerate(t.counts):
            if s == 0 or c == 0:
                continue
            # solve c = trees (k+l)^{3s/2} (x/s)^{s/2} for x
            x = s * (c / (trees * (k + l) ** (1.5 * s))) ** (2.0 / s)
            c2 = max(c2, x)
            if s <= (k + l) / 4.0:
                c1 = min(c1, x)
    return {"c1": c1, "c2": c2}


# ---------------------------------------------------------------------------
# cache and export


def _default_cache() -> Path:
    root = os.environ.get("TFG_CACHE_DIR") or os.path.join(os.path.expanduser("~"), ".cache", "tfg")
    return Path(root) / f"conn_tables_v{CACHE_VERSION}.npz"


def save_tables(tables: Iterable[BipConnTable], path: Optional[os.PathLike] = None) -> Path:
    """Binary cache: one int64 array per ``(k, l)`` plus a version stamp."""
    path = Path(path) if path is not None else _default_cache()
    path.parent.mkdir(parents=True, exist_ok=True)
    arrays = {f"t_{t.k}_{t.l}": np.asarray(t.counts, dtype=np.int64) for t in tables}
    arrays["version"] = np.array([CACHE_VERSION])
    np.savez(path, **arrays)
    return path


def load_tables(path: Optional[os.PathLike] = None) -> dict[tuple[int, int], BipConnTable]:
    path = Path(path) if path is not None else _default_cache()
    with np.load(path) as z:
        if int(z["version"][0]) != CACHE_VERSION:
            raise ValueError("cache version mismatch")
        out = {}
        for name in z.files:
            if name.startswith("t_"):
                _, k, l = name.split("_")
                k, l = int(k), int(l)
                out[(k, l)] = BipConnTable(k, l, tuple(int(x) for x in z[name]))
    return out


def export_csv(tables: Iterable[BipConnTable], fh) -> None:
    w = csv.writer(fh)
    w.writerow(["k", "l", "s", "count"])
    for t in sorted(tables, key=lambda t: (t.k, t.l)):
        for s, c in enumerate(t.counts):
            w.writerow([t.k, t.l, s, c])
