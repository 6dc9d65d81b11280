import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tfg.coupling import E_MASKS, couple_c4, couple_c4_batch, coupled_formula_pair, coupling_table
from tfg.graphcore import PlantedGraph
from tfg.hardcore import _square_probs
from tfg.numerics import coupling_lambda0
from tfg.stats import chi2_gof
from tfg.twosat import decide_sat

ADJ = {frozenset(p) for p in ((0, 1), (1, 3), (3, 2), (2, 0))}


def x_probs(l0):
    k = np.array([bin(m).count("1") for m in range(16)])
    return l0**k * (1 - l0) ** (4 - k)


@pytest.mark.parametrize("lam", [0.01, 0.05, 0.1, 0.2])
def test_table_marginals_exact(lam):
    t = coupling_table(lam)
    me = np.bincount(t.e_idx, weights=t.mass, minlength=7)
    mx = np.bincount(t.x_mask, weights=t.mass, minlength=16)
    assert np.allclose(me, _square_probs(lam), atol=1e-14)
    assert np.allclose(mx, x_probs(coupling_lambda0(lam)), atol=1e-14)
    assert t.failure_probability == pytest.approx(t.mass[~t.success].sum())


def test_empty_masses_aligned():
    lam = 0.1
    l0 = coupling_lambda0(lam)
    assert (1 - l0) ** 4 == pytest.approx(_square_probs(lam)[0], rel=1e-14)


def test_success_probability_tends_to_one():
    assert coupling_table(1e-4).failure_probability < 1e-10


def test_failure_is_cubic():
    ks = [coupling_table(lam).failure_probability / lam**3 for lam in (0.005, 0.01, 0.02, 0.05, 0.1)]
    assert max(ks) / min(ks) < 2.0


@pytest.mark.parametrize("lam", [0.05, 0.1])
def test_batch_marginals_chi2(lam, rng):
    e, x, s = couple_c4_batch(lam, 200_000, rng)
    assert chi2_gof(np.bincount(e, minlength=7), _square_probs(lam)) > 1e-4
    assert chi2_gof(np.bincount(x, minlength=16), x_probs(coupling_lambda0(lam))) > 1e-4


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=0.01, max_value=0.2), st.integers(0, 2**32 - 1))
def test_subset_and_discrepancy_channel(lam, seed):
    e, x, s = couple_c4_batch(lam, 2000, np.random.default_rng(seed))
    em = np.array(E_MASKS)[e]
    ok = s
    assert np.all((em[ok] & ~x[ok]) == 0)
    strict = ok & (em != x)
    for m in x[strict].tolist():
        bits = [v for v in range(4) if (m >> v) & 1]
        assert len(bits) == 2 and frozenset(bits) in ADJ


def test_fugacity_range(rng):
    with pytest.raises(ValueError):
        couple_c4_batch(0.3, 1, rng)
    out = couple_c4(0.1, None, rng)
    assert 0 <= out.hardcore_config < 7 and 0 <= out.independent_config < 16


def matching_graph(rng, k):
    n = 4 * k
    A = list(range(2 * k))
    S = [(2 * i, 2 * i + 1) for i in range(k)]
    T = [(2 * k + 2 * i, 2 * k + 2 * i + 1) for i in range(k)]
    return PlantedGraph.build(n, A, S, T, meta={"fugacity": 0.1})


def test_no_squares_identical_formulas(rng):
    g = PlantedGraph.build(6, [0, 1, 2], S=[(0, 1)], meta={"fugacity": 0.1})
    phiE, phiX, success, diag = coupled_formula_pair(g, rng)
    assert phiE == phiX and len(success) == 0 and diag["squares"] == 0


def test_coupled_pair_inclusion(rng):
    g = matching_graph(rng, 6)
    seen_all = 0
    for _ in range(200):
        phiE, phiX, success, diag = coupled_formula_pair(g, rng)
        assert len(success) == 36
        if success.all():
            seen_all += 1
            assert set(phiE.clauses) <= set(phiX.clauses)
            if decide_sat(phiX).sat:
                assert decide_sat(phiE).sat
    assert seen_all > 100


def test_coupled_pair_rejects_large_components(rng):
    g = PlantedGraph.build(6, [0, 1, 2], S=[(0, 1), (1, 2)], T=[(3, 4)], meta={"fugacity": 0.1})
    with pytest.raises(ValueError):
        coupled_formula_pair(g, rng)
