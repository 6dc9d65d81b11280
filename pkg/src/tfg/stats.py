"""Small statistical helpers shared by experiments and tests."""

from __future__ import annotations

import numpy as np
from scipy import stats

__all__ = ["wilson_ci", "chi2_gof", "two_sample_chi2"]


def wilson_ci(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    if trials <= 0:
        return (0.0, 1.0)
    ci = stats.binomtest(int(successes), int(trials)).proportion_ci(confidence, method="wilson")
    return float(ci.low), float(ci.high)


def _pool(expected: np.ndarray, *observed: np.ndarray, min_expected: float = 5.0):
    """Merge cells with expected count below ``min_expected`` into one."""
    small = expected < min_expected
    if not small.any():
        return (expected,) + observed
    out = [np.append(expected[~small], expected[small].sum())]
    for o in observed:
        out.append(np.append(o[~small], o[small].sum()))
    if out[0][-1] < min_expected and len(out[0]) > 1:
        out = [np.append(x[:-2], x[-2:].sum()) for x in out]
    return tuple(out)


def chi2_gof(observed, probs, min_expected: float = 5.0) -> float:
    """Goodness-of-fit p-value of counts against cell probabilities."""
    observed = np.asarray(observed, dtype=float)
    probs = np.asarray(probs, dtype=float)
    expected = probs / probs.sum() * observed.sum()
    expected, observed = _pool(expected, observed, min_expected=min_expected)
    if len(expected) < 2:
        return 1.0
    return float(stats.chisquare(observed, expected).pvalue)


def two_sample_chi2(keys_a, keys_b, min_expected: float = 5.0) -> float:
    """Homogeneity p-value for two samples of hashable cell labels (ints or
    rows of an integer array)."""
    a = np.asarray(keys_a)
    b = np.asarray(keys_b)
    if a.ndim == 1:
        a = a[:, None]
        b = b[:, None]
    cells, inv = np.unique(np.concatenate([a, b]), axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    ca = np.bincount(inv[: len(a)], minlength=len(cells)).astype(float)
    cb = np.bincount(inv[len(a):], minlength=len(cells)).astype(float)
    tot = ca + cb
    ea = tot * len(a) / (len(a) + len(b))
    _, ca, cb, tot = _pool(np.minimum(ea, tot - ea), ca, cb, tot, min_expected=min_expected)
    if len(tot) < 2:
        return 1.0
    return float(stats.chi2_contingency(np.stack([ca, cb]), correction=False)[1])
