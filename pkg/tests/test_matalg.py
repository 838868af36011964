import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matrixda.exceptions import InputError, NotPositiveDefiniteError
from matrixda.matalg import (cluster_projectors, condensed_svd, count_svd_calls,
                             eigenvalue_clusters, fix_signs, gen_eig_oracle,
                             max_projector_distance, sym_psd_eig)
from oracles import gram_full_svd, jacobi_eigh


def random_psd_pair(rng, d, rank_b=None):
    A = rng.standard_normal((d, rank_b or d))
    B = rng.standard_normal((d, d + 3))
    return A @ A.T, B @ B.T / d + 0.1 * np.eye(d)


class TestCondensedSvd:
    def test_rank_one(self):
        svd = condensed_svd(np.array([[1.0, 2.0], [2.0, 4.0]]))
        assert svd.rank == 1
        np.testing.assert_allclose(svd.spectrum, [25.0])
        np.testing.assert_allclose(svd.left_basis[:, 0], np.array([1, 2]) / np.sqrt(5))

    def test_zero_matrix(self):
        svd = condensed_svd(np.zeros((3, 3)))
        assert svd.rank == 0
        assert svd.spectrum.shape == (0,)
        assert svd.left_basis.shape == (3, 0)

    def test_matches_explicit_gram_oracle(self):
        M = np.random.default_rng(7).standard_normal((8, 50))
        svd = condensed_svd(M)
        G = M @ M.T
        assert np.linalg.norm(svd.reconstruct() - G) <= 1e-9 * np.linalg.norm(G)
        U, values = gram_full_svd(M)
        np.testing.assert_allclose(svd.spectrum, values, rtol=1e-10)
        np.testing.assert_allclose(np.abs(svd.left_basis.T @ U), np.eye(8), atol=1e-8)

    def test_wide_and_tall_blocks_have_orthonormal_bases(self):
        rng = np.random.default_rng(3)
        for shape in ((50, 7), (7, 50)):
            svd = condensed_svd(rng.standard_normal(shape))
            assert svd.rank == 7
            U = svd.left_basis
            assert np.max(np.abs(U.T @ U - np.eye(U.shape[1]))) <= 1e-10

    def test_drops_numerically_zero_directions(self):
        rng = np.random.default_rng(5)
        M = rng.standard_normal((10, 3)) @ rng.standard_normal((3, 40))
        assert condensed_svd(M).rank == 3

    def test_non_finite_rejected(self):
        with pytest.raises(InputError):
            condensed_svd(np.array([[1.0, np.nan]]))

    def test_counter(self):
        with count_svd_calls() as counter:
            condensed_svd(np.eye(2))
            condensed_svd(np.eye(3))
        assert counter.calls == 2
        condensed_svd(np.eye(2))
        assert counter.calls == 2

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2 ** 32 - 1), d=st.integers(1, 12), m=st.integers(1, 30))
    def test_reconstruction_property(self, seed, d, m):
        M = np.random.default_rng(seed).standard_normal((d, m))
        G = M @ M.T
        svd = condensed_svd(M)
        assert np.linalg.norm(G - svd.reconstruct()) <= 1e-9 * np.linalg.norm(G)


class TestSymPsdEig:
    def test_diagonal(self):
        pairs = sym_psd_eig(np.diag([3.0, 1.0]))
        np.testing.assert_allclose(pairs.values, [3.0, 1.0])
        np.testing.assert_allclose(pairs.vectors, np.eye(2))

    def test_identity_any_basis(self):
        pairs = sym_psd_eig(np.eye(4))
        np.testing.assert_allclose(pairs.values, np.ones(4))
        V = pairs.vectors
        np.testing.assert_allclose(V @ np.diag(pairs.values) @ V.T, np.eye(4), atol=1e-14)

    def test_matches_jacobi_oracle(self):
        A = np.random.default_rng(11).standard_normal((9, 6))
        S = A.T @ A
        values, _ = jacobi_eigh(S)
        np.testing.assert_allclose(sym_psd_eig(S).values, values, rtol=0, atol=1e-9)

    def test_rejects_asymmetric(self):
        with pytest.raises(InputError):
            sym_psd_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_fix_signs_largest_entry_positive():
    V = fix_signs(np.array([[0.1, -0.2], [-0.9, 0.1]]))
    np.testing.assert_allclose(V, [[-0.1, 0.2], [0.9, -0.1]])


class TestGenEigOracle:
    def test_identity_metric(self):
        pairs = gen_eig_oracle(np.diag([1.0, 0.0]), np.eye(2))
        np.testing.assert_allclose(pairs.values, [1.0])
        np.testing.assert_allclose(pairs.vectors[:, 0], [1.0, 0.0])

    def test_scalar_metric(self):
        pairs = gen_eig_oracle(np.diag([2.0, 2.0]), np.diag([2.0, 2.0]))
        np.testing.assert_allclose(pairs.values, [1.0, 1.0])
        np.testing.assert_allclose(np.linalg.norm(pairs.vectors, axis=0),
                                   [1 / np.sqrt(2)] * 2)

    def test_seeded_residuals(self):
        Sb, Sreg = random_psd_pair(np.random.default_rng(2), 5)
        pairs = gen_eig_oracle(Sb, Sreg)
        V = pairs.vectors
        np.testing.assert_allclose(V.T @ Sreg @ V, np.eye(5), atol=1e-8)
        np.testing.assert_allclose(V.T @ Sb @ V, np.diag(pairs.values), atol=1e-8)

    def test_not_positive_definite(self):
        with pytest.raises(NotPositiveDefiniteError):
            gen_eig_oracle(np.eye(2), np.diag([1.0, 0.0]))

    def test_shape_mismatch(self):
        with pytest.raises(InputError):
            gen_eig_oracle(np.eye(2), np.eye(3))

    @settings(max_examples=100, deadline=None)
    @given(seed=st.integers(0, 2 ** 32 - 1), d=st.integers(1, 12))
    def test_constraints_property(self, seed, d):
        rng = np.random.default_rng(seed)
        Sb, Sreg = random_psd_pair(rng, d, rank_b=int(rng.integers(1, d + 1)))
        pairs = gen_eig_oracle(Sb, Sreg)
        V = pairs.vectors
        q = V.shape[1]
        np.testing.assert_allclose(V.T @ Sreg @ V, np.eye(q), atol=1e-8)
        B = V.T @ Sb @ V
        off = B - np.diag(np.diag(B))
        assert np.max(np.abs(off), initial=0.0) <= 1e-8 * max(pairs.values.max(initial=0), 1)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2 ** 32 - 1), d=st.integers(1, 8))
    def test_congruence_invariance(self, seed, d):
        rng = np.random.default_rng(seed)
        Sb, Sreg = random_psd_pair(rng, d)
        A = rng.standard_normal((d, d)) + 3 * np.eye(d)
        base = gen_eig_oracle(Sb, Sreg).values
        moved = gen_eig_oracle(A.T @ Sb @ A, A.T @ Sreg @ A, rank=base.size).values
        np.testing.assert_allclose(moved, base, rtol=1e-9, atol=1e-12 * base.max())


class TestProjectors:
    def test_clusters(self):
        clusters = eigenvalue_clusters([3.0, 3.0 + 1e-9, 1.0, 0.5])
        assert [c.tolist() for c in clusters] == [[0, 1], [2], [3]]

    def test_rotation_within_cluster_is_invisible(self):
        V = np.eye(3)
        theta = 0.3
        R = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
        W = V.copy()
        W[:, :2] = V[:, :2] @ R
        values = np.array([2.0, 2.0, 1.0])
        assert max_projector_distance(V, values, W, values) < 1e-12
        assert len(cluster_projectors(V, values)) == 2

    def test_different_spans_detected(self):
        values = np.array([2.0, 1.0])
        V = np.eye(2)
        assert max_projector_distance(V, values, V[:, ::-1], values) > 1
