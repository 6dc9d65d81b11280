"""Acceptance criteria, one test per criterion.

Each test records a single PASS/FAIL line (printed in the terminal summary)
and asserts both the statistical threshold and the wall-clock budget.
Seeds are fixed, so every run reproduces the same numbers.
"""

import itertools
import math
import time

import numpy as np
import pytest
from scipy import stats

from tfg.branching import bfs_batch, exploration_batch
from tfg.coloring import GreenEdgeColoring, decide_green_edge_coloring, gec_brute_force
from tfg.coupling import _x_probs, couple_c4_batch
from tfg.enumeration import count_connected_bipartite, exact_P_formula, moon_forest_bruteforce, moon_forest_count
from tfg.experiments import ExperimentSpec, _random_matching_instance, run_sat_window, run_window3, run_window4
from tfg.hardcore import _SQUARE_OUTCOMES, FixedSizeSampler, _square_probs, product_components, sample_hardcore
from tfg.numerics import coupling_lambda0
from tfg.stats import chi2_gof, two_sample_chi2
from tfg.twosat import brute_force_sat, cluster_law_estimators, decide_sat, gen_formula, is_strictly_distinct, spine

pytestmark = [pytest.mark.acceptance, pytest.mark.slow]


def _small_formula(rng, max_total=16):
    N = int(rng.integers(1, max_total))
    M = int(rng.integers(1, max_total - N + 1))
    q = float(rng.choice([0.05, 0.1, 0.3]))
    return gen_formula(N, M, q, rng)


def test_c01_sat_matches_exhaustive_search(report):
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    bad = 0
    for _ in range(10_000):
        F = _small_formula(rng)
        bad += decide_sat(F, with_witness_paths=False).sat != brute_force_sat(F)
    wall = time.perf_counter() - t0
    ok = bad == 0 and wall < 60
    report(1, ok, f"decide_sat vs exhaustive: {bad} disagreements / 10000, {wall:.1f}s")
    assert bad == 0
    assert wall < 60


def test_c02_gec_equals_sat(report):
    rng = np.random.default_rng(202)
    t0 = time.perf_counter()
    bad = 0
    for _ in range(10_000):
        g = _random_matching_instance(rng)
        bad += isinstance(decide_green_edge_coloring(g), GreenEdgeColoring) != gec_brute_force(g)
    wall = time.perf_counter() - t0
    ok = bad == 0 and wall < 120
    report(2, ok, f"GEC brute force vs 2-SAT: {bad} disagreements / 10000, {wall:.1f}s")
    assert bad == 0
    assert wall < 120


def test_c03_cluster_law_monte_carlo(report):
    n, m, p, trials = 8, 8, 0.05, 10**7
    t0 = time.perf_counter()
    T = cluster_law_estimators(n, m, p, trials, np.random.default_rng(303))
    wall = time.perf_counter() - t0
    worst, cells, failing = 0.0, 0, []
    for k in range(n + 1):
        for l in range(m + 1):
            ex = exact_P_formula(n, m, p, k, l)
            if ex < 1e-4:
                continue
            cells += 1
            z = (T.P[k, l] / trials - ex) / math.sqrt(ex * (1 - ex) / trials)
            worst = max(worst, abs(z))
            if abs(z) > 3:
                failing.append((k, l, round(z, 2)))
    ok = not failing and wall < 600
    report(3, ok, f"trimmed outgraph vs closed form: {cells} cells, max |z| = {worst:.2f}, {wall:.1f}s")
    assert not failing
    assert wall < 600


def test_c04_counting_ground_truth(report):
    t0 = time.perf_counter()
    cayley_bad = [
        (k, l)
        for k in range(1, 25)
        for l in range(1, 25)
        if k * l <= 24 and count_connected_bipartite(k, l).counts[0] != k ** (l - 1) * l ** (k - 1)
    ]
    moon_bad, moon_checked = [], 0
    for k, l in itertools.product(range(1, 4), repeat=2):
        for a in range(k + 1):
            for b in range(l + 1):
                if a + b == 0:
                    continue
                moon_checked += 1
                if moon_forest_count(k, l, a, b) != moon_forest_bruteforce(k, l, a, b):
                    moon_bad.append((k, l, a, b))
    wall = time.perf_counter() - t0
    ok = not cayley_bad and not moon_bad and wall < 300
    report(4, ok, f"spanning-tree counts mismatches {cayley_bad}, Moon {len(moon_bad)}/{moon_checked} mismatches, {wall:.1f}s")
    assert not cayley_bad
    assert not moon_bad
    assert wall < 300


def test_c05_hardcore_exactness(report):
    t0 = time.perf_counter()
    lam = 0.1
    # 500 disjoint squares per call, 2000 calls: 10^6 C4 outcomes
    S = [(2 * i, 2 * i + 1) for i in range(500)]
    dec = product_components(S, [(1000, 1001)], list(range(1000)), [1000, 1001])
    index = {tuple(o): i for i, o in enumerate(_SQUARE_OUTCOMES)}
    counts = np.zeros(7)
    rng = np.random.default_rng(505)
    for _ in range(2000):
        _, by = sample_hardcore(dec, lam, rng, return_by_component=True)
        for c in range(len(dec.components)):
            counts[index[tuple(by.get(c, ()))]] += 1
    p_c4 = stats.chisquare(counts, _square_probs(lam) * counts.sum()).pvalue

    # fixed size 3 on a square, a grid, an edge and a pool, against enumeration
    A, B = [0, 1, 2, 3, 4, 5], [6, 7, 8, 9]
    S2, T2 = [(0, 1), (2, 3), (3, 4)], [(6, 7)]
    adjA, adjB = {frozenset(e) for e in S2}, {frozenset(e) for e in T2}

    def conflict(p, q):
        return (p[0] == q[0] and frozenset((p[1], q[1])) in adjB) or (p[1] == q[1] and frozenset((p[0], q[0])) in adjA)

    pairs = [(a, b) for a in A for b in B]
    sets = [c for c in itertools.combinations(pairs, 3) if not any(conflict(p, q) for p, q in itertools.combinations(c, 2))]
    where = {frozenset(s): i for i, s in enumerate(sets)}
    fs = FixedSizeSampler(product_components(S2, T2, A, B), 3)
    fixed = np.zeros(len(sets))
    for _ in range(10**6):
        fixed[where[frozenset(fs.draw(rng))]] += 1
    p_fixed = chi2_gof(fixed, np.ones(len(sets)))
    wall = time.perf_counter() - t0
    ok = p_c4 > 1e-4 and p_fixed > 1e-4 and wall < 120
    report(5, ok, f"C4 law p = {p_c4:.3g}, fixed-size law p = {p_fixed:.3g} ({len(sets)} sets), {wall:.1f}s")
    assert p_c4 > 1e-4 and p_fixed > 1e-4
    assert wall < 120


def test_c06_coupling(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(606)
    pvals, K = {}, {}
    for lam in (0.05, 0.1):
        e, x, s = couple_c4_batch(lam, 10**7, rng)
        pe = stats.chisquare(np.bincount(e, minlength=7), _square_probs(lam) * len(e)).pvalue
        px = stats.chisquare(np.bincount(x, minlength=16), _x_probs(coupling_lambda0(lam)) * len(x)).pvalue
        pvals[lam] = (pe, px)
        K[lam] = (1 - s.mean()) / lam**3
    wall = time.perf_counter() - t0
    ratio = max(K.values()) / min(K.values())
    marg_ok = all(min(v) > 1e-4 for v in pvals.values())
    ok = marg_ok and ratio <= 2 and wall < 300
    pv = ", ".join(f"lambda={l}: p=({a:.3g}, {b:.3g})" for l, (a, b) in pvals.items())
    report(6, ok, f"marginals {pv}; K = {K[0.05]:.3f}, {K[0.1]:.3f} (ratio {ratio:.2f}), {wall:.1f}s")
    assert marg_ok
    assert ratio <= 2
    assert wall < 300


def test_c07_four_colorability_window(report):
    t0 = time.perf_counter()
    rows = run_window4(ExperimentSpec("window4", n=10**4, values=[0.2, 0.5, 0.8], trials=10**4, seed=707))
    wall = time.perf_counter() - t0
    parts, stated_ok, poisson_ok = [], True, True
    for r in rows:
        half = (r["ci_high"] - r["ci_low"]) / 2
        slack = 0.05 + 3 * half
        d_stated = abs(r["estimate"] - r["formula"])
        d_poisson = abs(r["estimate"] - r["formula_poisson"])
        stated_ok &= d_stated <= slack
        poisson_ok &= d_poisson <= slack
        parts.append(
            f"c={r['c']}: est {r['estimate']:.4f} stated {r['formula']:.4f} poisson-form {r['formula_poisson']:.4f}"
        )
    ok = stated_ok and wall < 1800
    report(7, ok, "; ".join(parts) + f"; poisson-form within slack: {poisson_ok}; {wall:.0f}s")
    assert stated_ok, "stated limit formula outside 0.05 + 3 CI"
    assert wall < 1800


def test_c08_sat_window(report):
    t0 = time.perf_counter()
    rows = run_sat_window(ExperimentSpec("sat-window", nm=(10**4, 10**4), values=[-6, 0, 6], trials=2000, seed=808))
    wall = time.perf_counter() - t0
    est = {r["kappa"]: r["estimate"] for r in rows}
    monotone = all(r["coupled_monotone"] for r in rows)
    checks = est[-6.0] > 0.9, est[6.0] < 0.2, monotone, 0.05 < est[0.0] < 0.95
    ok = all(checks) and wall < 1800
    report(8, ok, f"P[SAT] kappa=-6: {est[-6.0]:.4f}, 0: {est[0.0]:.4f}, +6: {est[6.0]:.4f}; monotone {monotone}; {wall:.0f}s")
    assert checks[0] and checks[1] and checks[2]
    assert checks[3], f"P[SAT] at kappa=0 is {est[0.0]}"
    assert wall < 1800


def test_c09_three_colorability_window(report):
    t0 = time.perf_counter()
    rows = run_window3(ExperimentSpec("window3", n=10**4, values=[-10, 0, 10], trials=200, seed=909))
    wall = time.perf_counter() - t0
    by = {r["omega"]: r for r in rows}
    viol = max(r["assumption_violation_rate"] for r in rows)
    loose = max(r["large_defect_component_rate"] for r in rows)
    lo, mid, hi = by[-10.0]["estimate"], by[0.0]["estimate"], by[10.0]["estimate"]
    checks = hi >= 0.9, lo <= 0.1, viol < 0.01, 0.05 < mid < 0.95
    ok = all(checks) and wall < 3600
    report(
        9,
        ok,
        f"colorable fraction omega=-10: {lo:.3f}, 0: {mid:.3f}, +10: {hi:.3f}; "
        f"violation rate {viol:.3f} (large defect components {loose:.3f}); {wall:.0f}s",
    )
    assert checks[0] and checks[1] and checks[2]
    assert checks[3], f"fraction at omega=0 is {mid}"
    assert wall < 3600


def test_c10_exploration_law(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1010)
    pv, swapped = {}, {}
    for p in (0.02, 1 / 30, 0.05):
        a1, b1 = exploration_batch(30, 30, p, 10**6, rng)
        a2, b2 = bfs_batch(30, 30, p, 10**6, rng)
        pv[p] = two_sample_chi2(np.stack([a1, b1], 1), np.stack([a2, b2], 1))
        swapped[p] = two_sample_chi2(np.stack([b1, a1], 1), np.stack([a2, b2], 1))
    wall = time.perf_counter() - t0
    ok = min(pv.values()) > 1e-4 and wall < 900
    txt = ", ".join(f"p~={p:.4f}: {v:.3g}" for p, v in pv.items())
    txt_s = ", ".join(f"{v:.3g}" for v in swapped.values())
    report(10, ok, f"exploration vs BFS p-values {txt} (swapped pairing: {txt_s}); {wall:.0f}s")
    assert min(pv.values()) > 1e-4
    assert wall < 900


def test_c11_spine_criterion(report):
    rng = np.random.default_rng(1111)
    t0 = time.perf_counter()
    bad = 0
    for _ in range(10_000):
        F = _small_formula(rng)
        bad += is_strictly_distinct(spine(F)) != decide_sat(F, with_witness_paths=False).sat
    wall = time.perf_counter() - t0
    ok = bad == 0 and wall < 120
    report(11, ok, f"spine strict distinctness vs SAT: {bad} disagreements / 10000, {wall:.1f}s")
    assert bad == 0
    assert wall < 120
