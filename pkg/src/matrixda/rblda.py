"""Regularized bilinear discriminant analysis.

For each direction ``l`` the problem ``inv(S_lt^{r_l}) S_lb V_l = V_l Lambda_l``
is solved independently, with ``S_lt^{r} = (1-r) S_lt + r sigma_l^2 I``.

Two implementations are provided:

``rblda_fit_v1``
    works in the original ``d_l``-dimensional space.  When ``d_other c >= d_l``
    it whitens with the condensed SVD of ``S_lt`` (matrix ``R_l1``); otherwise
    it forms ``G = inv(S_lw^r) F_lb`` directly or through the
    ``X_(l)' X_(l)`` side (Woodbury) and decomposes ``F_lb' G``.  Its
    eigenvalues ``Lambda_w`` map to ``Lambda_t = Lambda_w / (1 + (1-r) Lambda_w)``;
    the detour keeps the basis accurate when ``Lambda_t`` crowds next to
    ``1/(1-r)`` for small ``r``.
``rblda_fit_v2``
    projects the data once onto the range ``U_lt`` of ``S_lt``
    (:func:`rblda_precompute`) where the regularized metric is the diagonal
    ``Gamma_lt^r``; each value of ``r`` then costs only a small
    eigenproblem (:func:`rblda_direction`).  This is what makes a grid search
    over ``(r1, r2)`` cheap.

Bases found in U-space are never mapped back for classification: nearest
neighbour distances are unchanged by the orthonormal map ``U_lt``.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bilinear import BilinearBasis
from .exceptions import DegenerateDataError, InputError
from .matalg import condensed_svd, fix_signs
from .rlda import (W_ORTHOGONAL, between_rank, check_r, check_scaling, rescale,
                   top_pairs, w_factor)
from .scatter import between_factor, center_dataset, scaled_unfolding


@dataclass(frozen=True)
class DirectionCache:
    """Per-direction quantities shared by every regularization candidate.

    Attributes
    ----------
    direction : int
        1 for the column direction (``d1 x d1`` scatters), 2 for rows.
    u_basis : ndarray of shape (d_l, t_l)
        Orthonormal range of ``S_lt``.
    gamma : ndarray of shape (t_l,)
        Nonzero eigenvalues of ``S_lt``, descending.
    sigma_sq : float
        ``tr(S_lt) / d_l``.
    projected_data : ndarray of shape (t_l, d_other n)
        ``X_(lu) = U_lt' X_(l)`` (scaled so that its Gram matrix is ``Gamma``).
    between_factor : ndarray of shape (t_l, d_other c)
        ``F_lbu = U_lt' F_lb``; ``F_lbu F_lbu' = U_lt' S_lb U_lt``.
    n_between : int
        Numerical rank of ``F_lbu``: the number of discriminant directions.
    dims : tuple
        ``(d_l, d_other, c)``, used by the branch predicate.
    """

    direction: int
    u_basis: np.ndarray
    gamma: np.ndarray
    sigma_sq: float
    projected_data: np.ndarray
    between_factor: np.ndarray
    n_between: int
    dims: tuple

    @property
    def rank(self):
        return self.gamma.shape[0]

    @property
    def uses_r1_branch(self):
        """True when ``d_other c >= d_l`` (whitened ``t x t`` eigenproblem)."""
        d_l, d_other, c = self.dims
        return d_other * c >= d_l


def direction_cache(centered, labels, n_classes, direction):
    """Build the :class:`DirectionCache` of one direction.

    ``centered`` is an ``(n, d1, d2)`` array with zero mean.  Exactly one
    condensed SVD is performed.
    """
    n, d1, d2 = centered.shape
    d_l, d_other = (d1, d2) if direction == 1 else (d2, d1)
    X_l = scaled_unfolding(centered, direction)
    norm = float(np.linalg.norm(X_l))
    if norm == 0.0:
        raise DegenerateDataError(
            f"total scatter in direction {direction} is zero (constant data)")
    svd = condensed_svd(X_l)
    if svd.rank == 0:
        raise DegenerateDataError(
            f"total scatter in direction {direction} has numerical rank zero")
    U = svd.left_basis
    F_u = U.T @ between_factor(centered, labels, n_classes, direction)
    return DirectionCache(
        direction=direction,
        u_basis=U,
        gamma=svd.spectrum,
        sigma_sq=norm ** 2 / d_l,
        projected_data=U.T @ X_l,
        between_factor=F_u,
        n_between=between_rank(F_u, norm, X_l.shape),
        dims=(d_l, d_other, n_classes),
    )


def rblda_precompute(data):
    """Center ``data`` and build both direction caches.

    Returns
    -------
    cache1, cache2 : DirectionCache
    mean : ndarray of shape (d1, d2)
        The mean that was removed; apply it to held-out data.
    """
    data.require_nonempty_classes()
    centered, mean = center_dataset(data)
    X = centered.observations
    caches = tuple(direction_cache(X, data.labels, data.n_classes, l) for l in (1, 2))
    return caches[0], caches[1], mean


def rblda_direction(cache, r, scaling=W_ORTHOGONAL, branch="auto", n_components=None):
    """Discriminant basis of one direction in U-space for a given ``r``.

    Parameters
    ----------
    cache : DirectionCache
    r : float in (0, 1]
    scaling : str, default 'w_orthogonal'
        Applied identically in both branches.
    branch : {'auto', 'R1', 'R2'}
        ``'R1'`` decomposes ``Gamma^{-1/2} F F' Gamma^{-1/2}`` (``t x t``);
        ``'R2'`` decomposes ``F' Gamma^{-1} F`` (``d_other c`` square).
        ``'auto'`` follows ``d_other c >= d_l``.

    Returns
    -------
    basis : ndarray of shape (t_l, q)
    values : ndarray of shape (q,)
        Eigenvalues ``Lambda_t`` of the regularized problem.
    """
    r = check_r(r)
    gamma_r = (1.0 - r) * cache.gamma + r * cache.sigma_sq
    F = cache.between_factor
    q = cache.n_between if n_components is None else min(cache.n_between, int(n_components))
    if branch == "auto":
        branch = "R1" if cache.uses_r1_branch else "R2"
    if branch == "R1":
        root = np.sqrt(gamma_r)[:, None]
        Fs = F / root
        V_R, values = top_pairs(Fs @ Fs.T, q)
        V_t = V_R / root
    elif branch == "R2":
        G = F / gamma_r[:, None]
        V_R, values = top_pairs(F.T @ G, q)
        V_t = G @ V_R / np.sqrt(values)
    else:
        raise InputError(f"branch must be 'auto', 'R1' or 'R2', got {branch!r}")
    w_factor(values, r)
    return rescale(fix_signs(V_t), values, r, scaling), values


@dataclass(frozen=True)
class RbldaModel:
    """A fitted RBLDA model.

    When ``in_u_space`` is true, ``basis.v1``/``basis.v2`` have ``t_l`` rows and
    act on ``U_1t' (X - mean) U_2t``; :meth:`original_basis` gives
    ``U_lt v_l``.
    """

    basis: BilinearBasis
    r1: float
    r2: float
    scaling: str
    in_u_space: bool
    mean: np.ndarray
    u1: Optional[np.ndarray] = None
    u2: Optional[np.ndarray] = None

    def original_basis(self):
        if not self.in_u_space:
            return self.basis
        b = self.basis
        return BilinearBasis(self.u1 @ b.v1, self.u2 @ b.v2, b.values1, b.values2, "rblda")

    @property
    def n_components(self):
        return self.basis.n_components

    @property
    def w_values(self):
        """Fisher eigenvalues ``Lambda_w`` of both directions."""
        b = self.basis
        return (b.values1 / w_factor(b.values1, self.r1),
                b.values2 / w_factor(b.values2, self.r2))


def rblda_fit_v2(data, r1, r2, scaling=W_ORTHOGONAL, n_components=None,
                 branches=("auto", "auto")):
    """RBLDA through the U-space implementation.

    Parameters
    ----------
    data : MtsDataset
    r1, r2 : float in (0, 1]
    scaling : str, default 'w_orthogonal'
    n_components : tuple of int, optional
        Upper bounds ``(q1, q2)``.
    branches : tuple of {'auto', 'R1', 'R2'}
        Eigenproblem used per direction (see :func:`rblda_direction`).

    Returns
    -------
    RbldaModel
    """
    cache1, cache2, mean = rblda_precompute(data)
    return model_from_caches(cache1, cache2, mean, r1, r2, scaling, n_components, branches)


def model_from_caches(cache1, cache2, mean, r1, r2, scaling=W_ORTHOGONAL, n_components=None,
                      branches=("auto", "auto")):
    q1, q2 = n_components if n_components is not None else (None, None)
    v1, values1 = rblda_direction(cache1, r1, scaling, branches[0], n_components=q1)
    v2, values2 = rblda_direction(cache2, r2, scaling, branches[1], n_components=q2)
    return RbldaModel(
        basis=BilinearBasis(v1, v2, values1, values2, "rblda"),
        r1=check_r(r1), r2=check_r(r2), scaling=check_scaling(scaling),
        in_u_space=True, mean=mean, u1=cache1.u_basis, u2=cache2.u_basis,
    )


def _original_direction(centered, labels, n_classes, l, r, scaling, g_side, branch):
    n, d1, d2 = centered.shape
    d_l, d_other = (d1, d2) if l == 1 else (d2, d1)
    X_l = scaled_unfolding(centered, l)
    norm = float(np.linalg.norm(X_l))
    if norm == 0.0:
        raise DegenerateDataError(f"total scatter in direction {l} is zero (constant data)")
    sigma_sq = norm ** 2 / d_l
    F = between_factor(centered, labels, n_classes, l)
    q = between_rank(F, norm, X_l.shape)

    if branch == "auto":
        branch = "R1" if d_other * n_classes >= d_l else "R2"
    if branch not in ("R1", "R2"):
        raise InputError(f"branch must be 'auto', 'R1' or 'R2', got {branch!r}")
    if branch == "R1":
        svd = condensed_svd(X_l)
        gamma_r = (1.0 - r) * svd.spectrum + r * sigma_sq
        S_b = F @ F.T
        W = svd.left_basis / np.sqrt(gamma_r)
        V_R, values = top_pairs(W.T @ S_b @ W, q)
        V_t = W @ V_R
    else:
        # reduce against S_lw^r; Lambda_t near 1/(1-r) is badly separated
        means = np.zeros((n_classes, d1, d2))
        np.add.at(means, labels, centered)
        means /= np.bincount(labels, minlength=n_classes)[:, None, None]
        X_w = scaled_unfolding(centered - means[labels], l)
        alpha, beta = r * sigma_sq, 1.0 - r
        if g_side == "auto":
            g_side = "T" if d_other * n < d_l else "S"
        if g_side == "S":
            S_r = beta * (X_w @ X_w.T)
            S_r[np.diag_indices(d_l)] += alpha
            G = np.linalg.solve(S_r, F)
        elif g_side == "T":
            T_r = beta * (X_w.T @ X_w)
            T_r[np.diag_indices(T_r.shape[0])] += alpha
            G = (F - beta * (X_w @ np.linalg.solve(T_r, X_w.T @ F))) / alpha
        else:
            raise InputError(f"g_side must be 'auto', 'S' or 'T', got {g_side!r}")
        V_R, fisher = top_pairs(F.T @ G, q)
        values = fisher / (1.0 + beta * fisher)
        V_t = G @ V_R / np.sqrt(fisher * (1.0 + beta * fisher))
        return rescale(fix_signs(V_t), values, r, scaling, fisher), values
    w_factor(values, r)
    return rescale(fix_signs(V_t), values, r, scaling), values


def rblda_fit_v1(data, r1, r2, scaling=W_ORTHOGONAL, g_side="auto",
                 branches=("auto", "auto")):
    """RBLDA in the original space (no shared cache).

    Parameters
    ----------
    data : MtsDataset
    r1, r2 : float in (0, 1]
    scaling : str, default 'w_orthogonal'
    g_side : {'auto', 'S', 'T'}
        How ``G`` is formed in the ``d_other c < d_l`` branch: by solving
        with ``S_lw^r`` (``d_l x d_l``) or with the ``d_other n`` square
        Gram side.  ``'auto'`` uses ``T`` when ``d_other n < d_l``.
    branches : tuple of {'auto', 'R1', 'R2'}
        Per direction: whiten with the condensed SVD of ``S_lt`` (``'R1'``)
        or go through ``G_l2`` (``'R2'``).  ``'auto'`` picks ``'R1'`` when
        ``d_other c >= d_l``.

    Returns
    -------
    RbldaModel
    """
    r1, r2 = check_r(r1), check_r(r2)
    data.require_nonempty_classes()
    centered, mean = center_dataset(data)
    X = centered.observations
    v1, values1 = _original_direction(X, data.labels, data.n_classes, 1, r1, scaling, g_side,
                                      branches[0])
    v2, values2 = _original_direction(X, data.labels, data.n_classes, 2, r2, scaling, g_side,
                                      branches[1])
    return RbldaModel(
        basis=BilinearBasis(v1, v2, values1, values2, "rblda"),
        r1=r1, r2=r2, scaling=check_scaling(scaling), in_u_space=False, mean=mean,
    )
