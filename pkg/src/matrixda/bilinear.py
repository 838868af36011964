"""Non-regularized bilinear baselines: BLDA, PBLDA and BPCA.

Each direction is solved on its own (the "separate" solution): the column
basis ``V_1`` from ``(S_1w, S_1b)`` and the row basis ``V_2`` from
``(S_2w, S_2b)``.  Features are ``Y = V_1' X V_2``.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import InputError, SingularWithinClassError
from .matalg import condensed_svd, fix_signs, sym_psd_eig
from .rlda import between_rank, unit_columns
from .scatter import between_factor, center_dataset, class_stats, scaled_unfolding, unfold

_EPS = np.finfo(float).eps

METHODS = ("blda", "pblda", "bpca", "rblda")


@dataclass(frozen=True)
class BilinearBasis:
    """Column basis ``v1`` (d1 x q1) and row basis ``v2`` (d2 x q2)."""

    v1: np.ndarray
    v2: np.ndarray
    values1: np.ndarray
    values2: np.ndarray
    method: str

    def __post_init__(self):
        if self.method not in METHODS:
            raise InputError(f"unknown method {self.method!r}")
        if self.v1.shape[1] != self.values1.shape[0] or self.v2.shape[1] != self.values2.shape[0]:
            raise InputError("basis and eigenvalue counts differ")

    @property
    def n_components(self):
        return self.v1.shape[1], self.v2.shape[1]

    def direction(self, l):
        return (self.v1, self.values1) if l == 1 else (self.v2, self.values2)


def _whitened_direction(D, F, data_norm, data_shape, direction, strict):
    """Solve ``max tr(V' S_b V)`` s.t. ``V' S_w V = I`` by whitening ``S_w``.

    ``D`` and ``F`` are factors with ``D D' = S_w`` and ``F F' = S_b``.
    """
    d = D.shape[0]
    within = condensed_svd(D)
    if strict and within.rank < d:
        raise SingularWithinClassError(direction, d, within.rank)
    if within.rank == 0:
        return np.zeros((d, 0)), np.zeros(0)
    whiten = within.left_basis / np.sqrt(within.spectrum)
    q = between_rank(F, data_norm, data_shape)
    B = whiten.T @ F
    pairs = sym_psd_eig(B @ B.T)
    if q and pairs.values[0] > 0:
        # pseudo mode: part of the between scatter may fall outside range(S_w)
        q = min(q, int(np.sum(pairs.values > B.shape[0] * _EPS * pairs.values[0])))
    else:
        q = 0
    V = fix_signs(whiten @ pairs.vectors[:, :q])
    return V, pairs.values[:q]


def blda_fit(data, mode="strict", scaling="w"):
    """Bilinear LDA with the within-class whitening solution.

    Parameters
    ----------
    data : MtsDataset
    mode : {'strict', 'pseudo'}
        ``'strict'`` is BLDA and requires nonsingular ``S_1w`` and ``S_2w``.
        ``'pseudo'`` (PBLDA) whitens with the pseudo-inverse of ``S_lw``, i.e.
        only on its numerical range.
    scaling : {'w', 'unit'}
        ``'w'`` keeps ``V' S_lw V = I``; ``'unit'`` normalizes columns.

    Returns
    -------
    BilinearBasis

    Raises
    ------
    SingularWithinClassError
        In strict mode when a within-class scatter matrix is singular, which
        is unavoidable when ``d1 > d2 (n - c)`` or ``d2 > d1 (n - c)``.
    """
    if mode not in ("strict", "pseudo"):
        raise InputError(f"mode must be 'strict' or 'pseudo', got {mode!r}")
    if scaling not in ("w", "w_orthogonal", "unit", "unit_column"):
        raise InputError(f"BLDA supports 'w' and 'unit' scalings, not {scaling!r}")
    stats = class_stats(data)
    n = data.n
    d1, d2 = data.shape
    centered = data.observations - stats.global_mean
    within = data.observations - stats.class_means[data.labels]
    out = []
    for l in (1, 2):
        other = d2 if l == 1 else d1
        D = unfold(within, l) / np.sqrt(n * other)
        X_l = scaled_unfolding(centered, l)
        F = between_factor(centered, data.labels, data.n_classes, l)
        V, values = _whitened_direction(D, F, float(np.linalg.norm(X_l)),
                                        X_l.shape, l, mode == "strict")
        if scaling.startswith("unit"):
            V = unit_columns(V)
        out.append((V, values))
    (v1, w1), (v2, w2) = out
    return BilinearBasis(v1, v2, w1, w2, "blda" if mode == "strict" else "pblda")


def bpca_fit(data, q1=None, q2=None):
    """Bilinear PCA: leading eigenvectors of ``S_1t`` and ``S_2t``.

    ``q1``/``q2`` default to the numerical ranks of the total scatters.
    """
    centered, _ = center_dataset(data)
    out = []
    for l, q in ((1, q1), (2, q2)):
        svd = condensed_svd(scaled_unfolding(centered.observations, l))
        if q is None:
            q = svd.rank
        if q < 0 or q > svd.rank:
            raise InputError(
                f"requested {q} components in direction {l} but rank(S_{l}t) = {svd.rank}")
        out.append((svd.left_basis[:, :q], svd.spectrum[:q]))
    (v1, g1), (v2, g2) = out
    return BilinearBasis(v1, v2, g1, g2, "bpca")
