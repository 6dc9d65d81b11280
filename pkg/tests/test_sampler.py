import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tfg.graphcore import is_triangle_free, write_edgelist
from tfg.numerics import ThresholdParams, coupling_lambda0, params_for_fixed_m, params_for_window3, params_for_window4, q0_of
from tfg.sampler import (
    OracleBudgetExceeded,
    SamplerConfig,
    _pair_from_index,
    er_pairs,
    sample,
    sample_conditioned_oracle,
    sample_er_triangle_free,
    sample_zeta,
    sidecar,
    zeta_truncation,
)
from tfg.stats import chi2_gof


def small_params(n, lam):
    return ThresholdParams(n=n, fugacity=lam, p=lam / (1 + lam), q0=q0_of(lam, n), lambda0_coupling=coupling_lambda0(lam))


def test_zeta_law_at_one(rng):
    draws = np.array([sample_zeta(1.0, rng) for _ in range(20_000)])
    t = np.arange(-3, 4)
    counts = [(draws == v).sum() for v in t]
    assert chi2_gof(counts, 2.0 ** -(t.astype(float) ** 2)) > 1e-4


def test_zeta_concentrates_for_large_fugacity(rng):
    assert all(sample_zeta(1e6, rng) == 0 for _ in range(1000))


def test_zeta_symmetric(rng):
    lam = 0.01
    draws = np.array([sample_zeta(lam, rng) for _ in range(20_000)], dtype=float)
    assert abs(draws.mean()) < 3 * draws.std() / math.sqrt(len(draws))


def test_zeta_truncation_tail():
    for lam in (1e-4, 0.01, 0.3, 5.0):
        T = zeta_truncation(lam)
        assert (1 + lam) ** (-((T + 1) ** 2)) < math.exp(-30)
    with pytest.raises(ValueError):
        zeta_truncation(0.0)


@given(st.integers(min_value=0, max_value=10**9))
def test_pair_unranking(idx):
    i, j = _pair_from_index(np.array([idx]))
    i, j = int(i[0]), int(j[0])
    assert 0 <= i < j and j * (j - 1) // 2 + i == idx


def test_er_pairs_extremes(rng):
    i, j = er_pairs(10, 0.0, rng)
    assert len(i) == 0
    i, j = er_pairs(10, 1.0, rng)
    assert len(i) == 45 and len(set(zip(i.tolist(), j.tolist()))) == 45


def test_er_pairs_edge_count(rng):
    k, q = 200, 0.01
    counts = np.array([len(er_pairs(k, q, rng)[0]) for _ in range(2000)])
    total = k * (k - 1) // 2
    assert abs(counts.mean() - total * q) < 4 * math.sqrt(total * q * (1 - q) / len(counts))


def test_er_pairs_uniform_marks_thin_monotonically(rng):
    i, j, u = er_pairs(300, 0.02, rng, uniforms=True)
    assert np.all((u >= 0) & (u < 0.02))
    low = set(zip(i[u < 0.01].tolist(), j[u < 0.01].tolist()))
    assert low <= set(zip(i.tolist(), j.tolist()))


def test_triangle_free_rejection(rng):
    i, j, attempts = sample_er_triangle_free(30, 0.1, rng)
    assert is_triangle_free((30, list(zip(i.tolist(), j.tolist()))))
    assert attempts >= 1
    with pytest.raises(OracleBudgetExceeded):
        sample_er_triangle_free(10, 1.0, rng, max_resample=3)


def test_oracle_p_zero(rng):
    edges, attempts = sample_conditioned_oracle(8, 0.0, rng)
    assert edges == [] and attempts == 1


def test_oracle_three_vertices_uniform(rng):
    # every triangle-free graph on 3 labelled vertices has weight 1/8 at p = 1/2
    c = Counter(tuple(sample_conditioned_oracle(3, 0.5, rng)[0]) for _ in range(14_000))
    assert len(c) == 7
    assert chi2_gof(list(c.values()), [1] * 7) > 1e-4


def test_oracle_budget(rng):
    with pytest.raises(OracleBudgetExceeded):
        sample_conditioned_oracle(6, 1.0, rng, max_attempts=5)


def test_zero_fugacity_gives_empty_graph():
    par = ThresholdParams(n=20, fugacity=0.0, p=0.0, q0=0.0, lambda0_coupling=0.0)
    g = sample(SamplerConfig("mu_lambda_1", par, seed=1, zeta_truncation=0))
    assert g.n_edges == 0 and not g.aborted


def test_mu1_samples_valid():
    par = small_params(40, 0.3)
    for seed in range(50):
        g = sample(SamplerConfig("mu_lambda_1", par, seed=seed))
        g.check()
        assert is_triangle_free(g)
        if g.aborted:
            assert g.n_edges == 0


def test_mu1_mean_defect_size():
    n = 2000
    par = params_for_window3(n, 0.0)
    sizes = []
    for seed in range(200):
        g = sample(SamplerConfig("mu_lambda_1", par, seed=seed, crossing="none"))
        assert is_triangle_free(g)
        if not g.aborted:
            sizes.append(len(g.S))
    sizes = np.array(sizes, dtype=float)
    target = par.q0 * n * n / 8
    assert abs(sizes.mean() - target) < 3 * sizes.std() / math.sqrt(len(sizes)) + 1.0


def test_seed_determinism():
    par = params_for_window3(500, 2.0)
    cfg = SamplerConfig("mu_lambda_1", par, seed=7)
    assert write_edgelist(sample(cfg)) == write_edgelist(sample(cfg))
    cfg2 = SamplerConfig("mu_lambda_2", params_for_window4(500, 0.5), seed=7)
    assert write_edgelist(sample(cfg2)) == write_edgelist(sample(cfg2))


def test_mu2_samples():
    par = params_for_window4(2000, 0.5)
    for seed in range(4):
        g = sample(SamplerConfig("mu_lambda_2", par, seed=seed))
        assert is_triangle_free(g)
        assert g.meta["diagnostics_A"]["attempts"] >= 1


def test_mu2_part_sizes():
    n = 10_000
    par = params_for_window4(n, 0.5)
    dev = []
    for seed in range(20):
        g = sample(SamplerConfig("mu_lambda_2", par, seed=seed, crossing="none"))
        dev.append(abs(len(g.part_A) - n / 2))
    assert max(dev) <= 5 * (n * math.log(n)) ** 0.25


def test_mu2_mcmc_diagnostics():
    par = params_for_window4(400, 0.5)
    g = sample(SamplerConfig("mu_lambda_2", par, seed=3, defect_law="exponential_mcmc", mcmc_steps=2000, crossing="none"))
    assert is_triangle_free(g)
    d = g.meta["diagnostics_A"]
    assert 0.0 <= d["acceptance_rate"] <= 1.0 and len(d["p2_trace"]) > 0


def test_mu2_requires_q2():
    with pytest.raises(ValueError):
        sample(SamplerConfig("mu_lambda_2", small_params(50, 0.2)))


def test_fixed_m_exact_edge_count():
    n, m = 200, 2000
    par = params_for_fixed_m(n, m)
    for seed in range(20):
        g = sample(SamplerConfig("mu_m_1", par, seed=seed))
        assert is_triangle_free(g)
        if not g.aborted:
            assert g.n_edges == m


def test_fixed_m_zero():
    par = params_for_fixed_m(50, 10)
    par.m_edges = 0
    g = sample(SamplerConfig("mu_m_1", par))
    assert g.n_edges == 0


def test_rejection_oracle_model():
    par = ThresholdParams(n=10, fugacity=0.25, p=0.2, q0=0.0, lambda0_coupling=0.0)
    g = sample(SamplerConfig("rejection_oracle", par, seed=2))
    assert is_triangle_free(g) and g.meta["attempts"] >= 1


def test_config_validation():
    par = small_params(10, 0.2)
    for kw in ({"model": "nope"}, {"defect_law": "nope"}, {"crossing": "nope"}):
        args = {"model": "mu_lambda_1", "params": par, **kw}
        with pytest.raises(ValueError):
            SamplerConfig(**args)


def test_sidecar_is_json():
    import json

    cfg = SamplerConfig("mu_lambda_1", params_for_window3(300, 0.0), seed=5)
    rec = json.loads(sidecar(sample(cfg), cfg))
    assert rec["seed"] == 5 and rec["model"] == "mu_lambda_1" and "params" in rec
