"""One-sided Wilcoxon signed-rank test for paired error-rate differences."""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import norm, rankdata

from .exceptions import InputError

EXACT_MAX_N = 25


@dataclass(frozen=True)
class TestResult:
    """Outcome of :func:`wilcoxon_one_sided`.

    ``statistic`` is ``W+``, the sum of the (tie-averaged) ranks of the
    positive differences.
    """

    __test__ = False  # not a pytest class

    statistic: float
    p_value: float
    n_effective: int
    method: str
    alternative: str


def _exact_cdf_counts(doubled_ranks):
    """Number of sign patterns reaching each value of ``2 W+``."""
    total = int(doubled_ranks.sum())
    counts = np.zeros(total + 1, dtype=np.int64)
    counts[0] = 1
    for r in doubled_ranks:
        counts[r:] = counts[r:] + counts[: total + 1 - r]
    return counts


def wilcoxon_one_sided(deltas, alternative="less", method="auto"):
    """Signed-rank test of ``H0: delta = 0`` against a one-sided alternative.

    Zero differences are dropped and tied ``|delta|`` receive average ranks.
    With at most 25 nonzero differences the p-value is exact: the null
    distribution of ``W+`` is obtained by counting all ``2^n`` sign patterns
    (by dynamic programming over the doubled ranks).  Larger samples use the
    normal approximation with tie and continuity corrections.

    Parameters
    ----------
    deltas : array-like
    alternative : {'less', 'greater'}
        ``'less'`` tests ``delta < 0``; small ``W+`` is evidence for it.
    method : {'auto', 'exact', 'approx'}

    Returns
    -------
    TestResult
    """
    if alternative not in ("less", "greater"):
        raise InputError(f"alternative must be 'less' or 'greater', got {alternative!r}")
    d = np.asarray(deltas, dtype=float).ravel()
    if not np.all(np.isfinite(d)):
        raise InputError("deltas must be finite")
    d = d[d != 0]
    n = d.size
    if n == 0:
        raise InputError("all differences are zero; the test is undefined")
    ranks = rankdata(np.abs(d), method="average")
    w_plus = float(ranks[d > 0].sum())

    if method == "auto":
        method = "exact" if n <= EXACT_MAX_N else "approx"
    if method == "exact":
        doubled = np.rint(2 * ranks).astype(np.int64)
        counts = _exact_cdf_counts(doubled)
        w2 = int(round(2 * w_plus))
        if alternative == "less":
            hits = counts[: w2 + 1].sum()
        else:
            hits = counts[w2:].sum()
        p = float(hits) / float(2 ** n)
    elif method == "approx":
        _, ties = np.unique(ranks, return_counts=True)
        mean = n * (n + 1) / 4.0
        var = n * (n + 1) * (2 * n + 1) / 24.0 - np.sum(ties ** 3 - ties) / 48.0
        if alternative == "less":
            p = float(norm.cdf((w_plus + 0.5 - mean) / np.sqrt(var)))
        else:
            p = float(norm.sf((w_plus - 0.5 - mean) / np.sqrt(var)))
    else:
        raise InputError(f"method must be 'auto', 'exact' or 'approx', got {method!r}")
    return TestResult(w_plus, min(1.0, p), n, method, alternative)


@dataclass(frozen=True)
class Comparison:
    """Two-step comparison of method A against method B on ``delta = e_A - e_B``.

    ``outcome`` is ``'better'`` (A has significantly lower error),
    ``'worse'`` or ``'not significant'``.
    """

    outcome: str
    first: TestResult
    second: Optional[TestResult]
    alpha: float


def two_step_test(deltas, alpha=0.05, method="auto"):
    """Test ``delta < 0``; if not rejected test ``delta > 0``; else not significant."""
    first = wilcoxon_one_sided(deltas, "less", method)
    if first.p_value < alpha:
        return Comparison("better", first, None, alpha)
    second = wilcoxon_one_sided(deltas, "greater", method)
    if second.p_value < alpha:
        return Comparison("worse", first, second, alpha)
    return Comparison("not significant", first, second, alpha)
