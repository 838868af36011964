"""Feature extraction ``Y = V1' X V2`` and the 1-nearest-neighbour rule."""

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .bilinear import BilinearBasis
from .exceptions import InputError
from .rblda import RbldaModel
from .rlda import RldaBasis
from .scatter import MtsDataset, vectorize


@dataclass(frozen=True)
class FeatureBlock:
    """Projected observations, ``(n, q1, q2)`` for bilinear and ``(n, q)`` for
    vector methods, with their labels."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        if self.features.shape[0] != self.labels.shape[0]:
            raise InputError("features and labels disagree on n")

    @property
    def n(self):
        return self.features.shape[0]

    @property
    def is_bilinear(self):
        return self.features.ndim == 3

    def flat(self):
        return self.features.reshape(self.n, -1)


def dense_map(observations, A, B):
    """``A' X_i B`` for every matrix in the stack, as two batched products."""
    return np.matmul(np.matmul(A.T, observations), B)


def left_map(observations, A):
    """``A' X_i`` computed one column of ``A`` at a time.

    Each output row depends only on its own column of ``A``, so dropping
    trailing columns of ``A`` leaves the remaining entries bit-identical.
    """
    n, _, d2 = observations.shape
    T = np.empty((n, A.shape[1], d2))
    for a in range(A.shape[1]):
        T[:, a, :] = np.tensordot(A[:, a], observations, axes=(0, 1))
    return T


def right_map(T, B):
    """``T_i B`` computed one column of ``B`` at a time (see :func:`left_map`)."""
    Y = np.empty(T.shape[:2] + (B.shape[1],))
    for b in range(B.shape[1]):
        Y[:, :, b] = T @ B[:, b]
    return Y


def bilinear_map(observations, A, B):
    """``A' X_i B`` for every matrix in the stack ``observations``.

    Truncating the bases commutes exactly with this map:
    ``bilinear_map(X, A[:, :k], B[:, :m])`` equals
    ``bilinear_map(X, A, B)[:, :k, :m]`` bit for bit.
    """
    return right_map(left_map(observations, A), B)


def _check_rows(V, d, name):
    if V.shape[0] != d:
        raise InputError(f"{name} has {V.shape[0]} rows but the data dimension is {d}")


def project(basis, data):
    """Project a dataset with a fitted basis.

    Parameters
    ----------
    basis : RbldaModel, BilinearBasis or RldaBasis
        ``RldaBasis`` acts on ``vec(X)`` (column stacking).
    data : MtsDataset

    Returns
    -------
    FeatureBlock
    """
    if not isinstance(data, MtsDataset):
        raise InputError("project expects an MtsDataset")
    d1, d2 = data.shape
    X = data.observations
    if isinstance(basis, RbldaModel):
        X = X - basis.mean
        if basis.in_u_space:
            _check_rows(basis.u1, d1, "U_1t")
            _check_rows(basis.u2, d2, "U_2t")
            X = dense_map(X, basis.u1, basis.u2)
        basis = basis.basis
    if isinstance(basis, BilinearBasis):
        _check_rows(basis.v1, X.shape[1], "V1")
        _check_rows(basis.v2, X.shape[2], "V2")
        Y = bilinear_map(X, basis.v1, basis.v2)
    elif isinstance(basis, RldaBasis):
        x = vectorize(X)
        _check_rows(basis.basis, x.shape[1], "V")
        Y = right_map(x[:, None, :], basis.basis)[:, 0, :]
    else:
        raise InputError(f"cannot project with {type(basis).__name__}")
    return FeatureBlock(Y, data.labels)


def truncate(block, q1, q2=None):
    """Keep the upper-left ``q1 x q2`` part (or first ``q1`` entries)."""
    F = block.features
    if block.is_bilinear:
        if q2 is None:
            raise InputError("bilinear features need both q1 and q2")
        if not (0 <= q1 <= F.shape[1] and 0 <= q2 <= F.shape[2]):
            raise InputError(f"cannot truncate {F.shape[1:]} features to ({q1}, {q2})")
        return FeatureBlock(F[:, :q1, :q2], block.labels)
    if not 0 <= q1 <= F.shape[1]:
        raise InputError(f"cannot truncate {F.shape[1]} features to {q1}")
    return FeatureBlock(F[:, :q1], block.labels)


def nn1_predict(train, test):
    """Labels of the nearest training item (ties: smallest training index)."""
    if train.n == 0:
        raise InputError("1-NN needs a non-empty training set")
    if train.features.shape[1:] != test.features.shape[1:]:
        raise InputError("train and test features have different shapes")
    if test.n == 0:
        return np.zeros(0, dtype=train.labels.dtype)
    a, b = test.flat(), train.flat()
    if a.shape[1] == 0:
        return np.full(test.n, train.labels[0])
    D = cdist(a, b, "sqeuclidean")
    return train.labels[np.argmin(D, axis=1)]


def nn1_error(train, test):
    """Misclassification rate of 1-NN on ``test``; 0.0 when ``test`` is empty."""
    pred = nn1_predict(train, test)
    if test.n == 0:
        return 0.0
    return float(np.mean(pred != test.labels))


def sweep_errors(train, test):
    """1-NN error for every truncation of the features.

    Returns an array ``E`` where ``E[i, j]`` is the error using the upper-left
    ``(i+1) x (j+1)`` block (bilinear) or ``E[i]`` using the first ``i+1``
    features (vector).  Distances for all truncations are obtained from one
    cumulative sum per test item.
    """
    if train.n == 0:
        raise InputError("1-NN needs a non-empty training set")
    Ftr, Fte = train.features, test.features
    if Ftr.shape[1:] != Fte.shape[1:]:
        raise InputError("train and test features have different shapes")
    wrong = np.zeros(Ftr.shape[1:])
    for x, label in zip(Fte, test.labels):
        D = (Ftr - x) ** 2
        D = np.cumsum(D, axis=1)
        if train.is_bilinear:
            D = np.cumsum(D, axis=2)
        nearest = np.argmin(D, axis=0)
        wrong += train.labels[nearest] != label
    return wrong / max(test.n, 1)
