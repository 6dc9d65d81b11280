"""Compiled inner loops (numba).

Literal numbering used throughout: X variable ``i`` gives literals ``2i``
(positive) and ``2i+1`` (negated); Y variable ``j`` gives ``2N+2j`` and
``2N+2j+1``. Negation is ``z ^ 1``.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True)
def tarjan_scc(n, indptr, indices):
    """Iterative Tarjan. Components are numbered in completion order,
    which is a reverse topological order of the condensation."""
    index = np.full(n, -1, np.int64)
    low = np.zeros(n, np.int64)
    onstack = np.zeros(n, np.bool_)
    comp = np.full(n, -1, np.int64)
    stack = np.empty(n, np.int64)
    sp = 0
    cstack = np.empty(n, np.int64)  # call stack of vertices
    cpos = np.empty(n, np.int64)  # next edge offset per frame
    counter = 0
    ncomp = 0
    for root in range(n):
        if index[root] >= 0:
            continue
        depth = 0
        cstack[0] = root
        cpos[0] = indptr[root]
        index[root] = counter
        low[root] = counter
        counter += 1
        stack[sp] = root
        sp += 1
        onstack[root] = True
        while depth >= 0:
            v = cstack[depth]
            e = cpos[depth]
            if e < indptr[v + 1]:
                w = indices[e]
                cpos[depth] = e + 1
                if index[w] < 0:
                    index[w] = counter
                    low[w] = counter
                    counter += 1
                    stack[sp] = w
                    sp += 1
                    onstack[w] = True
                    depth += 1
                    cstack[depth] = w
                    cpos[depth] = indptr[w]
                elif onstack[w]:
                    if index[w] < low[v]:
                        low[v] = index[w]
            else:
                if low[v] == index[v]:
                    while True:
                        sp -= 1
                        w = stack[sp]
                        onstack[w] = False
                        comp[w] = ncomp
                        if w == v:
                            break
                    ncomp += 1
                depth -= 1
                if depth >= 0:
                    u = cstack[depth]
                    if low[v] < low[u]:
                        low[u] = low[v]
    return comp, ncomp


@njit(cache=True)
def _seed(seed):
    np.random.seed(seed)


@njit(cache=True)
def _draw_clauses(total, q, buf):
    """Indices of a Bernoulli(q) subset of range(total) by geometric skipping."""
    k = 0
    if q <= 0.0:
        return 0
    if q >= 1.0:
        for i in range(total):
            buf[i] = i
        return total
    lq = math.log1p(-q)
    pos = -1
    while True:
        u = np.random.random()
        gap = int(math.floor(math.log(1.0 - u) / lq))
        pos += gap + 1
        if pos >= total:
            break
        buf[k] = pos
        k += 1
    return k


@njit(cache=True)
def _clause_arcs(N, M, cl, k, src, dst):
    """Each clause (a or b) yields arcs not-a -> b and not-b -> a."""
    for t in range(k):
        c = cl[t]
        pat = c & 3
        pair = c >> 2
        i = pair // M
        j = pair % M
        a = 2 * i + (pat & 1)
        b = 2 * N + 2 * j + ((pat >> 1) & 1)
        src[2 * t] = a ^ 1
        dst[2 * t] = b
        src[2 * t + 1] = b ^ 1
        dst[2 * t + 1] = a
    return 2 * k


@njit(cache=True)
def _csr(nv, src, dst, na, indptr, indices):
    for v in range(nv + 1):
        indptr[v] = 0
    for e in range(na):
        indptr[src[e] + 1] += 1
    for v in range(nv):
        indptr[v + 1] += indptr[v]
    fill = indptr[:nv].copy()
    for e in range(na):
        s = src[e]
        indices[fill[s]] = dst[e]
        fill[s] += 1


@njit(cache=True)
def cluster_mc(N, M, q, trials, seed):
    """Trimmed-outgraph statistics from literal 0 on random bipartite formulas.

    Returns per-trial arrays (k, l, hits_negation, is_tree).
    """
    _seed(seed)
    nv = 2 * (N + M)
    total = 4 * N * M
    cl = np.empty(total, np.int64)
    src = np.empty(2 * total, np.int64)
    dst = np.empty(2 * total, np.int64)
    indptr = np.empty(nv + 1, np.int64)
    indices = np.empty(2 * total, np.int64)
    ks = np.empty(trials, np.int64)
    ls = np.empty(trials, np.int64)
    hit = np.empty(trials, np.bool_)
    tree = np.empty(trials, np.bool_)
    seen = np.zeros(nv, np.int64)
    coll = np.zeros(nv, np.int64)
    queue = np.empty(2 * total + 2, np.int64)
    members = np.empty(nv, np.int64)
    for tr in range(trials):
        stamp = tr + 1
        k = _draw_clauses(total, q, cl)
        na = _clause_arcs(N, M, cl, k, src, dst)
        _csr(nv, src, dst, na, indptr, indices)
        # full reachability from literal 0
        head = 0
        tail = 0
        queue[tail] = 0
        tail += 1
        seen[0] = stamp
        while head < tail:
            v = queue[head]
            head += 1
            for e in range(indptr[v], indptr[v + 1]):
                w = indices[e]
                if seen[w] != stamp:
                    seen[w] = stamp
                    queue[tail] = w
                    tail += 1
        hit[tr] = seen[1] == stamp
        # trimmed outgraph, FIFO worklist
        head = 0
        tail = 0
        queue[tail] = 0
        tail += 1
        nm = 0
        kx = 0
        ly = 0
        while head < tail:
            t = queue[head]
            head += 1
            if coll[t] == stamp or coll[t ^ 1] == stamp:
                continue
            coll[t] = stamp
            members[nm] = t
            nm += 1
            if t < 2 * N:
                kx += 1
            else:
                ly += 1
            for e in range(indptr[t], indptr[t + 1]):
                queue[tail] = indices[e]
                tail += 1
        ks[tr] = kx
        ls[tr] = ly
        arcs = 0
        for a in range(nm):
            v = members[a]
            for e in range(indptr[v], indptr[v + 1]):
                if coll[indices[e]] == stamp:
                    arcs += 1
        tree[tr] = arcs == nm - 1
    return ks, ls, hit, tree


@njit(cache=True)
def sat_flags_nested(N, M, qs, clauses, us, ncl):
    """SAT verdicts for nested formulas: clause ``c`` is kept at level ``i``
    iff ``us[c] < qs[i]``. ``qs`` must be increasing."""
    nv = 2 * (N + M)
    out = np.empty(len(qs), np.bool_)
    src = np.empty(2 * ncl, np.int64)
    dst = np.empty(2 * ncl, np.int64)
    indptr = np.empty(nv + 1, np.int64)
    indices = np.empty(2 * ncl + 1, np.int64)
    sel = np.empty(ncl, np.int64)
    for lvl in range(len(qs)):
        k = 0
        for c in range(ncl):
            if us[c] < qs[lvl]:
                sel[k] = clauses[c]
                k += 1
        na = _clause_arcs(N, M, sel, k, src, dst)
        _csr(nv, src, dst, na, indptr, indices)
        comp, _ = tarjan_scc(nv, indptr, indices)
        ok = True
        for v in range(N + M):
            if comp[2 * v] == comp[2 * v + 1]:
                ok = False
                break
        out[lvl] = ok
    return out


@njit(cache=True)
def count_connected_subsets(k, l):
    """Connected spanning edge subsets of K_{k,l}, histogrammed by excess."""
    ne = k * l
    nv = k + l
    base = nv - 1
    out = np.zeros(ne - base + 1 if ne >= base else 1, np.int64)
    if nv == 1:
        out[0] = 1
        return out
    full = (1 << nv) - 1
    lmask = (1 << l) - 1
    nbr = np.zeros(nv, np.int64)
    for mask in range(1 << ne):
        pc = 0
        mm = mask
        while mm:
            mm &= mm - 1
            pc += 1
        if pc < base:
            continue
        for v in range(nv):
            nbr[v] = 0
        for i in range(k):
            row = (mask >> (i * l)) & lmask
            nbr[i] = row << k
            r = row
            while r:
                j = 0
                low = r & (-r)
                while (1 << j) != low:
                    j += 1
                nbr[k + j] |= 1 << i
                r &= r - 1
        reach = 1
        frontier = 1
        while frontier:
            new = 0
            f = frontier
            while f:
                low = f & (-f)
                v = 0
                while (1 << v) != low:
                    v += 1
                new |= nbr[v]
                f &= f - 1
            new &= ~reach
            reach |= new
            frontier = new
        if reach == full:
            out[pc - base] += 1
    return out


@njit(cache=True)
def karp_batch(n, m, p, trials, seed):
    """Least fixed point of r -> m - M_{n - N_r}; returns (r*, s*) per trial."""
    _seed(seed)
    rs = np.empty(trials, np.int64)
    ss = np.empty(trials, np.int64)
    Nc = np.empty(m + 1, np.int64)
    Mc = np.empty(n + 1, np.int64)
    for tr in range(trials):
        Nc[0] = n - 1
        Mc[0] = m
        nn = 0  # highest generated index
        mm = 0
        r = 0
        while True:
            while nn < r:
                Nc[nn + 1] = np.random.binomial(Nc[nn], 1.0 - p) if Nc[nn] > 0 else 0
                nn += 1
            s = n - Nc[r]
            while mm < s:
                Mc[mm + 1] = np.random.binomial(Mc[mm], 1.0 - p) if Mc[mm] > 0 else 0
                mm += 1
            r2 = m - Mc[s]
            if r2 == r:
                break
            r = r2
        rs[tr] = r
        ss[tr] = s
    return rs, ss


@njit(cache=True)
def bfs_cluster_batch(n, m, p, trials, seed):
    """Side sizes of the component of A-vertex 0 in bipartite G(n, m, p)."""
    _seed(seed)
    a_out = np.empty(trials, np.int64)
    b_out = np.empty(trials, np.int64)
    adj = np.zeros((n, m), np.bool_)
    seen_a = np.zeros(n, np.bool_)
    seen_b = np.zeros(m, np.bool_)
    qa = np.empty(n, np.int64)
    qb = np.empty(m, np.int64)
    for tr in range(trials):
        for i in range(n):
            for j in range(m):
                adj[i, j] = np.random.random() < p
            seen_a[i] = False
        for j in range(m):
            seen_b[j] = False
        ha = 0
        ta = 1
        hb = 0
        tb = 0
        qa[0] = 0
        seen_a[0] = True
        while ha < ta or hb < tb:
            while ha < ta:
                u = qa[ha]
                ha += 1
                for j in range(m):
                    if adj[u, j] and not seen_b[j]:
                        seen_b[j] = True
                        qb[tb] = j
                        tb += 1
            while hb < tb:
                w = qb[hb]
                hb += 1
                for i in range(n):
                    if adj[i, w] and not seen_a[i]:
                        seen_a[i] = True
                        qa[ta] = i
                        ta += 1
        a_out[tr] = ta
        b_out[tr] = tb
    return a_out, b_out


@njit(cache=True)
def triangle_free_csr(n, indptr, indices):
    """Adjacency lists must be sorted; merge-intersect along each edge."""
    for u in range(n):
        for e in range(indptr[u], indptr[u + 1]):
            v = indices[e]
            if v <= u:
                continue
            a = indptr[u]
            b = indptr[v]
            while a < indptr[u + 1] and b < indptr[v + 1]:
                x = indices[a]
                y = indices[b]
                if x == y:
                    return False
                if x < y:
                    a += 1
                else:
                    b += 1
    return True


@njit(cache=True)
def bipartite_csr(n, indptr, indices):
    color = np.full(n, -1, np.int64)
    queue = np.empty(n, np.int64)
    for s in range(n):
        if color[s] >= 0 or indptr[s] == indptr[s + 1]:
            continue
        color[s] = 0
        h = 0
        t = 1
        queue[0] = s
        while h < t:
            u = queue[h]
            h += 1
            for e in range(indptr[u], indptr[u + 1]):
                w = indices[e]
                if color[w] < 0:
                    color[w] = 1 - color[u]
                    queue[t] = w
                    t += 1
                elif color[w] == color[u]:
                    return False
    return True


def csr_undirected(n: int, u: np.ndarray, v: np.ndarray):
    """Sorted symmetric CSR arrays for an undirected edge list."""
    src = np.concatenate([u, v]).astype(np.int64)
    dst = np.concatenate([v, u]).astype(np.int64)
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    indptr = np.zeros(n + 1, np.int64)
    np.add.at(indptr, src + 1, 1)
    np.cumsum(indptr, out=indptr)
    return indptr, dst
