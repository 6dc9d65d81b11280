import itertools
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tfg.hardcore import (
    HardCoreComponent,
    _MonotoneCFTP,
    _SQUARE_OUTCOMES,
    _square_probs,
    independence_polynomial,
    product_components,
    sample_hardcore,
    sample_uniform_indset_fixed_size,
)
from tfg.graphcore import is_triangle_free, PlantedGraph
from tfg.stats import chi2_gof


def path(vs):
    return tuple(zip(vs, vs[1:]))


def product_adj(comp):
    """Adjacency bitmasks of the product, vertex ``i*nb + j``, built directly."""
    na, nb = len(comp.factor_a), len(comp.factor_b)
    ea = {frozenset(e) for e in comp.edges_a}
    eb = {frozenset(e) for e in comp.edges_b}
    adj = [0] * (na * nb)
    for x, (a1, b1) in enumerate(itertools.product(comp.factor_a, comp.factor_b)):
        for y, (a2, b2) in enumerate(itertools.product(comp.factor_a, comp.factor_b)):
            if (a1 == a2 and frozenset((b1, b2)) in eb) or (b1 == b2 and frozenset((a1, a2)) in ea):
                adj[x] |= 1 << y
    return adj


def brute_indsets(comp):
    adj = product_adj(comp)
    nv = len(adj)
    masks = np.arange(1 << nv, dtype=np.int64)
    ok = np.ones(len(masks), dtype=bool)
    for v in range(nv):
        has_v = (masks >> v) & 1 == 1
        ok &= ~(has_v & ((masks & adj[v]) != 0))
    good = masks[ok]
    sizes = np.array([bin(int(m)).count("1") for m in good])
    return good, sizes


def poly_from(sizes):
    return np.bincount(sizes).tolist()


def test_polynomial_examples():
    assert independence_polynomial(HardCoreComponent((0,), (1,))) == [1, 1]
    assert independence_polynomial(HardCoreComponent((0, 1), (2,), ((0, 1),))) == [1, 2]
    assert independence_polynomial(HardCoreComponent((0, 1), (2, 3), ((0, 1),), ((2, 3),))) == [1, 4, 2]


SHAPES = [
    ((0, 1, 2), (3, 4), path((0, 1, 2)), ((3, 4),)),
    ((0, 1, 2), (3, 4, 5), path((0, 1, 2)), path((3, 4, 5))),
    ((0, 1, 2, 3), (4, 5, 6, 7), path((0, 1, 2, 3)), ((4, 5), (4, 6), (4, 7))),
    ((0, 1, 2, 3, 4), (5, 6, 7, 8), path((0, 1, 2, 3, 4)), path((5, 6, 7, 8))),
    # odd cycle factor
    ((0, 1, 2, 3, 4), (5, 6, 7), path((0, 1, 2, 3, 4)) + ((4, 0),), path((5, 6, 7))),
]


@pytest.mark.parametrize("shape", SHAPES)
def test_polynomial_matches_enumeration(shape):
    comp = HardCoreComponent(*shape)
    _, sizes = brute_indsets(comp)
    assert independence_polynomial(comp) == poly_from(sizes)


def test_decomposition_kinds():
    d = product_components([(0, 1), (2, 3)], [(4, 5)], [0, 1, 2, 3], [4, 5, 6])
    assert set(d.kinds()) <= {"isolated-point", "single-edge", "square"}
    assert d.kinds()["square"] == 2
    d = product_components([(0, 1), (1, 2)], [(4, 5)], [0, 1, 2], [4, 5])
    assert [c.kind for c in d.components] == ["general-grid"]
    assert len(d.components[0].product_vertices) == 6
    d = product_components([(0, 1), (1, 2), (2, 3)], [(4, 5)], [0, 1, 2, 3], [4, 5])
    assert len(d.components[0].product_vertices) == 8
    d = product_components([], [], [0, 1, 2], [3, 4])
    assert d.components == [] and d.pool.count == 6 and d.kinds() == {"isolated-point": 6}


def test_zero_fugacity_is_empty(rng):
    d = product_components([(0, 1)], [(2, 3)], [0, 1], [2, 3, 4])
    assert sample_hardcore(d, 0.0, rng) == []


def test_negative_fugacity_rejected(rng):
    d = product_components([], [], [0], [1])
    with pytest.raises(ValueError):
        sample_hardcore(d, -0.1, rng)


def test_square_probabilities():
    lam = 0.3
    z = 1 + 4 * lam + 2 * lam**2
    p = _square_probs(lam)
    sizes = [len(o) for o in _SQUARE_OUTCOMES]
    assert p == pytest.approx([lam ** s / z for s in sizes])
    assert sorted(sizes) == [0, 1, 1, 1, 1, 2, 2]


@pytest.mark.parametrize("lam", [0.1, 0.5])
def test_square_law_chi2(lam, rng):
    d = product_components([(0, 1)], [(2, 3)], [0, 1], [2, 3])
    index = {tuple(o): i for i, o in enumerate(_SQUARE_OUTCOMES)}
    counts = np.zeros(7)
    for _ in range(20_000):
        _, by = sample_hardcore(d, lam, rng, return_by_component=True)
        counts[index[tuple(by.get(0, ()))]] += 1
    assert chi2_gof(counts, _square_probs(lam)) > 1e-4


def test_single_edge_law(rng):
    lam = 0.4
    d = product_components([(0, 1)], [], [0, 1], [2])
    empty = sum(not sample_hardcore(d, lam, rng) for _ in range(20_000))
    assert chi2_gof([empty, 20_000 - empty], [1, 2 * lam]) > 1e-4


@pytest.mark.parametrize("shape", SHAPES[1:4])
def test_general_grid_law(shape, rng):
    """Enumeration (<= 16 vertices) and the transfer DP (larger) are exact."""
    comp = HardCoreComponent(*shape)
    A, B = comp.factor_a, comp.factor_b
    dec = product_components(comp.edges_a, comp.edges_b, A, B, include_one_sided=False)
    sets, sizes = brute_indsets(comp)
    index = {int(m): i for i, m in enumerate(sets)}
    lam = 0.7
    counts = np.zeros(len(sets))
    for _ in range(20_000):
        _, by = sample_hardcore(dec, lam, rng, include_pool=False, return_by_component=True)
        m = sum(1 << v for v in by.get(0, ()))
        counts[index[m]] += 1
    assert chi2_gof(counts, lam ** sizes.astype(float)) > 1e-4


def test_cftp_exact_on_small_product(rng):
    comp = HardCoreComponent(*SHAPES[1])
    sets, sizes = brute_indsets(comp)
    index = {int(m): i for i, m in enumerate(sets)}
    cf = _MonotoneCFTP(comp)
    lam = 1.5
    counts = np.zeros(len(sets))
    for _ in range(20_000):
        counts[index[cf.sample(lam, rng)]] += 1
    assert chi2_gof(counts, lam ** sizes.astype(float)) > 1e-4


def test_cftp_refuses_odd_cycles():
    from tfg.hardcore import StateCapError

    with pytest.raises(StateCapError):
        _MonotoneCFTP(HardCoreComponent(*SHAPES[4]))


@st.composite
def defect_instances(draw):
    a = draw(st.integers(min_value=2, max_value=7))
    b = draw(st.integers(min_value=2, max_value=7))
    A, B = list(range(a)), list(range(a, a + b))

    def forest(vs):
        es = []
        for i in range(1, len(vs)):
            if draw(st.booleans()):
                es.append((vs[draw(st.integers(0, i - 1))], vs[i]))
        return es

    return A, B, forest(A), forest(B)


@settings(max_examples=60, deadline=None)
@given(defect_instances(), st.floats(min_value=0.05, max_value=3.0), st.integers(0, 2**32 - 1))
def test_samples_independent_and_triangle_free(inst, lam, seed):
    A, B, S, T = inst
    rng = np.random.default_rng(seed)
    dec = product_components(S, T, A, B)
    E = sample_hardcore(dec, lam, rng)
    g = PlantedGraph.build(len(A) + len(B), A, S, T, E)
    assert is_triangle_free(g)
    # independence in S□T: no two crossing edges differ by one defect edge
    Es = set(E)
    adjA = {frozenset(e) for e in S}
    adjB = {frozenset(e) for e in T}
    for (a1, b1), (a2, b2) in itertools.combinations(E, 2):
        assert not (a1 == a2 and frozenset((b1, b2)) in adjB)
        assert not (b1 == b2 and frozenset((a1, a2)) in adjA)


def test_fixed_size_zero(rng):
    dec = product_components([(0, 1)], [(2, 3)], [0, 1], [2, 3, 4])
    assert sample_uniform_indset_fixed_size(dec, 0, rng) == []


def test_fixed_size_two_edges_uniform(rng):
    dec = product_components([(0, 1)], [], [0, 1], [3, 4])
    assert dec.kinds() == {"single-edge": 2}
    c = Counter(tuple(sample_uniform_indset_fixed_size(dec, 1, rng)) for _ in range(8000))
    assert len(c) == 4
    assert chi2_gof(list(c.values()), [1] * 4) > 1e-4


def test_fixed_size_square_diagonals(rng):
    dec = product_components([(0, 1)], [(2, 3)], [0, 1], [2, 3])
    c = Counter(tuple(sorted(sample_uniform_indset_fixed_size(dec, 2, rng))) for _ in range(4000))
    assert set(c) == {((0, 2), (1, 3)), ((0, 3), (1, 2))}
    assert chi2_gof(list(c.values()), [1, 1]) > 1e-4


def test_fixed_size_infeasible(rng):
    dec = product_components([(0, 1)], [(2, 3)], [0, 1], [2, 3])
    with pytest.raises(ValueError):
        sample_uniform_indset_fixed_size(dec, 3, rng)
    with pytest.raises(ValueError):
        sample_uniform_indset_fixed_size(dec, -1, rng)


def test_fixed_size_mixed_uniform(rng):
    """Square, grid, edge and pool components together: uniform over all size-k sets."""
    A, B = [0, 1, 2, 3, 4, 5], [6, 7, 8, 9]
    S, T = [(0, 1), (2, 3), (3, 4)], [(6, 7)]
    dec = product_components(S, T, A, B)
    # brute-force oracle over crossing-edge subsets of size k
    pairs = [(a, b) for a in A for b in B]
    adjA = {frozenset(e) for e in S}
    adjB = {frozenset(e) for e in T}

    def conflict(p, q):
        return (p[0] == q[0] and frozenset((p[1], q[1])) in adjB) or (p[1] == q[1] and frozenset((p[0], q[0])) in adjA)

    k = 3
    sets = [c for c in itertools.combinations(pairs, k) if not any(conflict(p, q) for p, q in itertools.combinations(c, 2))]
    index = {frozenset(s): i for i, s in enumerate(sets)}
    counts = np.zeros(len(sets))
    draws = 30 * len(sets)
    for _ in range(draws):
        counts[index[frozenset(sample_uniform_indset_fixed_size(dec, k, rng))]] += 1
    assert chi2_gof(counts, np.ones(len(sets))) > 1e-4
