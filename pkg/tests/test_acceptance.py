"""Acceptance suite: one test per criterion, reported as PASS/FAIL lines.

Run alone with ``pytest tests/test_acceptance.py -v``; the terminal summary
lists every criterion with its outcome.
"""

import os
import time

import numpy as np
import pytest

from matrixda import MtsDataset
from matrixda.dataio import load_mts, synth_separable
from matrixda.experiment import ExperimentConfig, run_bench, run_experiment
from matrixda.features import nn1_error, project
from matrixda.matalg import count_svd_calls, max_projector_distance
from matrixda.modelsel import DEFAULT_GRID, cross_validate, stratified_folds
from matrixda.rblda import rblda_fit_v1, rblda_fit_v2
from matrixda.rlda import regularized_scatters, rlda_direct, rlda_fast, t_to_w
from matrixda.scatter import bilinear_scatters, vector_scatters
from matrixda.stats import two_step_test, wilcoxon_one_sided
from helpers import make_dataset

R_VALUES = (1e-6, 0.1, 0.5, 0.99)
BRANCH_COMBOS = (("R1", "R1"), ("R2", "R1"), ("R1", "R2"), ("R2", "R2"))


def rlda_config(i):
    rng = np.random.default_rng(1000 + i)
    d, n, c = int(rng.integers(3, 61)), int(rng.integers(6, 41)), int(rng.integers(2, 6))
    labels = np.arange(n) % c
    X = rng.standard_normal((d, c))[:, labels] + rng.standard_normal((d, n))
    return X, labels, R_VALUES[i % 4]


def rblda_config(i):
    """Shapes that select each branch pair on their own where that is possible.

    ``d2 c < d1`` and ``d1 c < d2`` cannot hold together, so the last pair is
    reached only by forcing the branches on an ordinary shape.
    """
    rng = np.random.default_rng(2000 + i)
    combo = BRANCH_COMBOS[i % 4]
    c, n_per = int(rng.integers(2, 5)), int(rng.integers(2, 6))
    if combo == ("R1", "R1"):
        d1, d2 = int(rng.integers(2, 8)), int(rng.integers(2, 8))
    elif combo == ("R2", "R1"):
        d2 = int(rng.integers(1, 4))
        d1 = d2 * c + int(rng.integers(1, 20))
    elif combo == ("R1", "R2"):
        d1 = int(rng.integers(1, 4))
        d2 = d1 * c + int(rng.integers(1, 20))
    else:
        d1, d2 = int(rng.integers(2, 15)), int(rng.integers(2, 15))
    data = make_dataset(rng, n_per, d1, d2, c)
    return data, combo, R_VALUES[i % 4], R_VALUES[(i // 4) % 4]


def pairwise(model, data):
    F = project(model, data).flat()
    return np.linalg.norm(F[:, None] - F[None], axis=2)


def numerical_rank(S):
    s = np.linalg.svd(S, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > max(S.shape) * np.finfo(float).eps * s[0] * 10))


@pytest.mark.acceptance("RLDA oracle equivalence")
def test_rlda_oracle_equivalence():
    start = time.perf_counter()
    worst_value = worst_projector = 0.0
    for i in range(50):
        X, labels, r = rlda_config(i)
        fast = rlda_fast(X, labels, r, "t_orthogonal")
        direct = rlda_direct(X, labels, r, "t_orthogonal")
        assert fast.n_components == direct.n_components
        worst_value = max(worst_value,
                          np.max(np.abs(fast.values - direct.values) / direct.values))
        worst_projector = max(worst_projector, max_projector_distance(
            fast.basis, fast.values, direct.basis, direct.values))
    elapsed = time.perf_counter() - start
    assert worst_value <= 1e-8
    assert worst_projector <= 1e-7
    assert elapsed < 10.0


@pytest.mark.acceptance("RBLDA dual-implementation equivalence")
def test_rblda_dual_implementation():
    start = time.perf_counter()
    seen = set()
    for i in range(30):
        data, combo, r1, r2 = rblda_config(i)
        seen.add(combo)
        for scaling in ("w", "t", "unit"):
            a = rblda_fit_v1(data, r1, r2, scaling, branches=combo)
            b = rblda_fit_v2(data, r1, r2, scaling, branches=combo)
            for x, y in ((a.basis.values1, b.basis.values1),
                         (a.basis.values2, b.basis.values2)):
                assert x.shape == y.shape
                np.testing.assert_allclose(x, y, rtol=1e-9, atol=0)
            np.testing.assert_allclose(pairwise(a, data), pairwise(b, data),
                                       rtol=1e-8, atol=0)
    assert seen == set(BRANCH_COMBOS)
    assert time.perf_counter() - start < 20.0


@pytest.mark.acceptance("Constraint residuals")
def test_constraint_residuals():
    for i in range(50):
        X, labels, r = rlda_config(i)
        _, Swr, Str, _ = regularized_scatters(X, labels, r)
        basis = rlda_fast(X, labels, r, "t_orthogonal")
        q = basis.n_components
        V = basis.basis
        assert np.max(np.abs(V.T @ Str @ V - np.eye(q))) <= 1e-8
        W = t_to_w(basis).basis
        assert np.max(np.abs(W.T @ Swr @ W - np.eye(q))) <= 1e-8
    for i in range(30):
        data, combo, r1, r2 = rblda_config(i)
        sc = bilinear_scatters(data)
        for fit in (rblda_fit_v1, rblda_fit_v2):
            for scaling in ("t", "w"):
                basis = fit(data, r1, r2, scaling, branches=combo).original_basis()
                for l, r in ((1, r1), (2, r2)):
                    S_w, _, S_t, sigma_sq = sc.direction(l)
                    metric = S_t if scaling == "t" else S_w
                    V, _ = basis.direction(l)
                    S_r = (1 - r) * metric + r * sigma_sq * np.eye(metric.shape[0])
                    residual = V.T @ S_r @ V - np.eye(V.shape[1])
                    assert np.max(np.abs(residual), initial=0.0) <= 1e-8


@pytest.mark.acceptance("Identity suite")
def test_identity_suite():
    rng = np.random.default_rng(31)
    for _ in range(100):
        c = int(rng.integers(1, 5))
        d1, d2 = int(rng.integers(1, 12)), int(rng.integers(1, 12))
        counts = rng.integers(2, 6, size=c)
        n = int(counts.sum())
        data = make_dataset(rng, counts, d1, d2, c)
        X = data.observations.reshape(n, -1).T
        Sb, Sw, St = vector_scatters(X, data.labels, c)
        assert np.max(np.abs(St - Sb - Sw)) <= 1e-10
        r = float(rng.choice(R_VALUES))
        Sb, Swr, Str, _ = regularized_scatters(X, data.labels, r, c)
        assert np.max(np.abs(Str - Swr - (1 - r) * Sb)) <= 1e-10
        sc = bilinear_scatters(data)
        for l, (d_l, d_other) in ((1, (d1, d2)), (2, (d2, d1))):
            S_w, S_b, S_t, _ = sc.direction(l)
            assert np.max(np.abs(S_t - S_b - S_w)) <= 1e-10
            assert numerical_rank(S_w) <= min(d_l, d_other * (n - c))
            assert numerical_rank(S_b) <= min(d_l, d_other * (c - 1))
            assert numerical_rank(S_t) <= min(d_l, d_other * (n - 1))


@pytest.mark.acceptance("CV amortization contract")
def test_cv_amortization():
    data = synth_separable(40, 5, 12, 3, mean_gap=1.0, noise_sigma=1.0, seed=11)
    folds, seed = 3, 0
    start = time.perf_counter()
    with count_svd_calls() as counter:
        report = cross_validate(data, grid1=DEFAULT_GRID, grid2=DEFAULT_GRID,
                                folds=folds, seed=seed)
    assert counter.calls == 2 * folds
    assert report.error_grid.shape == (13, 13)

    assignment = stratified_folds(data.labels, folds, seed)
    naive = np.zeros_like(report.per_fold)
    for v in range(folds):
        train = data.subset(np.flatnonzero(assignment != v))
        val = data.subset(np.flatnonzero(assignment == v))
        for i, r1 in enumerate(DEFAULT_GRID):
            for j, r2 in enumerate(DEFAULT_GRID):
                model = rblda_fit_v2(train, r1, r2)
                naive[v, i, j] = nn1_error(project(model, train), project(model, val))
    np.testing.assert_array_equal(report.per_fold, naive)
    np.testing.assert_array_equal(report.error_grid, naive.mean(axis=0))
    assert time.perf_counter() - start < 30.0


@pytest.mark.acceptance("Benchmark scaling")
def test_benchmark_scaling():
    data = synth_separable(500, 28, 158, 2, mean_gap=1.0, noise_sigma=1.0, seed=3)
    assert data.n == 316
    report = run_bench(data, grid_sizes=(1, 2, 5, 10), proportion="1/16", folds=5,
                       repeats=5, workers=1)
    assert report.m_values == [1, 2, 5, 10]
    assert all(t > 0 for t in report.times)
    assert report.ratios[-1] <= 25.0
    assert all(b >= a for a, b in zip(report.ratios, report.ratios[1:]))


@pytest.mark.acceptance("Pipeline sanity")
def test_pipeline_sanity():
    data = synth_separable(8, 6, 10, 3, mean_gap=10.0, noise_sigma=1.0, seed=5)
    result = run_experiment(ExperimentConfig(data_path=None, method="rblda",
                                             n_splits=10, seed=1), data=data)
    assert result.available
    assert result.best.split_errors == [0.0] * 10

    # 6 training observations per class: d2 (n - c) = 2 * 10 < d1 = 30
    rng = np.random.default_rng(0)
    small = MtsDataset(rng.standard_normal((16, 30, 2)), np.repeat([0, 1], 8))
    result = run_experiment(ExperimentConfig(data_path=None, method="blda", n_splits=2,
                                             seed=0), data=small)
    assert not result.available
    assert result.best.status == "unavailable"


@pytest.mark.acceptance("Wilcoxon")
def test_wilcoxon():
    result = wilcoxon_one_sided([-0.1, -0.2, -0.3, -0.4, -0.5], alternative="less")
    assert result.method == "exact"
    assert result.p_value == pytest.approx(0.03125, abs=1e-15)
    assert two_step_test([-1.0, 1.0, -1.0, 1.0]).outcome == "not significant"


@pytest.mark.acceptance("ECG check (optional, non-gating)")
def test_ecg_optional():
    path = os.environ.get("MATRIXDA_ECG")
    if not path:
        pytest.skip("set MATRIXDA_ECG to an .mts file to run this check")
    data = load_mts(path)
    result = run_experiment(ExperimentConfig(data_path=path, method="rblda",
                                             train_proportion="4/5", n_splits=10, seed=0),
                            data=data)
    assert abs(100 * result.best.mean_error - 14.9) <= 5.0
    q1, q2 = result.best.dims
    assert q1 <= 2 and q2 <= 2
