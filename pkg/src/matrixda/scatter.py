"""Matrix-valued datasets and their scatter matrices.

Scatter matrices carry the ``1/n`` (vector case) and ``1/(n d_2)``,
``1/(n d_1)`` (bilinear case) scalings, so that total = between + within
holds exactly.  Block indicator matrices are never formed; class sums are
accumulated group by group instead.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import InputError


@dataclass(frozen=True, eq=False)
class MtsDataset:
    """``n`` labelled observations, each a ``d1 x d2`` matrix.

    Rows of an observation index time points and columns index variables,
    matching the layout of a multivariate time series.

    Parameters
    ----------
    observations : array-like of shape (n, d1, d2)
    labels : array-like of shape (n,)
        Integer class indices in ``[0, n_classes)``.
    n_classes : int, optional
        Defaults to ``max(labels) + 1``.
    """

    observations: np.ndarray
    labels: np.ndarray
    n_classes: int = field(default=None)

    def __post_init__(self):
        X = np.array(self.observations, dtype=float)
        if X.ndim == 2:
            X = X[:, :, None]
        if X.ndim != 3:
            raise InputError(
                f"observations must have shape (n, d1, d2), got {X.shape}")
        y = np.asarray(self.labels)
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise InputError("labels must be a vector with one entry per observation")
        if y.size and not np.issubdtype(y.dtype, np.integer):
            if not np.all(np.equal(np.mod(y, 1), 0)):
                raise InputError("labels must be integers")
        y = y.astype(np.int64, copy=True)
        c = self.n_classes
        if c is None:
            c = int(y.max()) + 1 if y.size else 0
        c = int(c)
        if y.size and (y.min() < 0 or y.max() >= c):
            raise InputError(f"labels must lie in [0, {c})")
        if not np.all(np.isfinite(X)):
            raise InputError("observations contain non-finite values")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "observations", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "n_classes", c)

    @property
    def n(self):
        return self.observations.shape[0]

    @property
    def shape(self):
        """Observation size ``(d1, d2)``."""
        return self.observations.shape[1:]

    @property
    def class_counts(self):
        return np.bincount(self.labels, minlength=self.n_classes)

    def require_nonempty_classes(self):
        empty = np.flatnonzero(self.class_counts == 0)
        if empty.size:
            raise InputError(f"class {int(empty[0])} has no observations")
        return self

    def subset(self, index):
        index = np.asarray(index)
        return MtsDataset(self.observations[index], self.labels[index],
                          self.n_classes)

    def with_observations(self, observations):
        return MtsDataset(observations, self.labels, self.n_classes)

    def equals(self, other):
        return (self.n_classes == other.n_classes
                and np.array_equal(self.labels, other.labels)
                and np.array_equal(self.observations, other.observations))

    def __len__(self):
        return self.n


@dataclass(frozen=True)
class ClassStats:
    """Global mean ``W``, class means ``W_k`` and class sizes ``n_k``."""

    global_mean: np.ndarray
    class_means: np.ndarray
    counts: np.ndarray


@dataclass(frozen=True)
class BilinearScatter:
    """Column-column (``1``) and row-row (``2``) scatter matrices.

    ``sigma1_sq`` and ``sigma2_sq`` are ``tr(S_lt) / d_l``, the shrinkage
    targets of the regularized problems.
    """

    s1w: np.ndarray
    s1b: np.ndarray
    s1t: np.ndarray
    s2w: np.ndarray
    s2b: np.ndarray
    s2t: np.ndarray
    sigma1_sq: float
    sigma2_sq: float

    def direction(self, l):
        """``(S_lw, S_lb, S_lt, sigma_l^2)`` for direction ``l`` in {1, 2}."""
        if l == 1:
            return self.s1w, self.s1b, self.s1t, self.sigma1_sq
        if l == 2:
            return self.s2w, self.s2b, self.s2t, self.sigma2_sq
        raise InputError(f"direction must be 1 or 2, got {l}")


def center_dataset(data):
    """Subtract the global mean; return ``(centered, mean)``."""
    if data.n < 1:
        raise InputError("cannot center an empty dataset")
    mean = data.observations.mean(axis=0)
    return data.with_observations(data.observations - mean), mean


def class_stats(data):
    data.require_nonempty_classes()
    counts = data.class_counts
    d1, d2 = data.shape
    sums = np.zeros((data.n_classes, d1, d2))
    np.add.at(sums, data.labels, data.observations)
    class_means = sums / counts[:, None, None]
    global_mean = np.tensordot(counts, class_means, axes=1) / data.n
    return ClassStats(global_mean, class_means, counts)


def _check_vector_labels(X, labels, n_classes):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise InputError("X must be a d x n matrix of column observations")
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (X.shape[1],):
        raise InputError("need exactly one label per column of X")
    if n_classes is None:
        n_classes = int(labels.max()) + 1
    if labels.min() < 0 or labels.max() >= n_classes:
        raise InputError("labels out of range")
    counts = np.bincount(labels, minlength=n_classes)
    if np.any(counts == 0):
        raise InputError(f"class {int(np.argmin(counts))} has no observations")
    return X, labels, n_classes, counts


def vector_scatters(X, labels, n_classes=None):
    """Between, within and total scatter of column observations ``X`` (d x n).

    Returns
    -------
    Sb, Sw, St : ndarray of shape (d, d)
        Each carries the ``1/n`` factor, so ``St = Sb + Sw``.
    """
    X, labels, c, counts = _check_vector_labels(X, labels, n_classes)
    n = X.shape[1]
    m = X.mean(axis=1)
    means = np.stack([X[:, labels == k].mean(axis=1) for k in range(c)], axis=1)
    B = (means - m[:, None]) * np.sqrt(counts / n)
    Sb = B @ B.T
    Dw = (X - means[:, labels]) / np.sqrt(n)
    Sw = Dw @ Dw.T
    Dt = (X - m[:, None]) / np.sqrt(n)
    St = Dt @ Dt.T
    return Sb, Sw, St


def unfold(observations, direction):
    """Mode unfolding of a stack of matrices.

    ``direction=1`` gives ``X_(1) = [X_1, ..., X_n]`` of shape
    ``(d1, d2 n)``; ``direction=2`` gives ``X_(2) = [X_1', ..., X_n']`` of
    shape ``(d2, d1 n)``.
    """
    observations = np.asarray(observations)
    n, d1, d2 = observations.shape
    if direction == 1:
        return observations.transpose(1, 0, 2).reshape(d1, n * d2)
    if direction == 2:
        return observations.transpose(2, 0, 1).reshape(d2, n * d1)
    raise InputError(f"direction must be 1 or 2, got {direction}")


def scaled_unfolding(centered, direction):
    """``X_(l)`` scaled so that ``X_(l) X_(l)' = S_lt`` on centered data."""
    n, d1, d2 = centered.shape
    other = d2 if direction == 1 else d1
    return unfold(centered, direction) / np.sqrt(n * other)


def between_factor(centered, labels, n_classes, direction):
    """Between-class factor ``F_lb`` with ``F_lb F_lb' = S_lb``.

    Block ``k`` equals ``sqrt(n_k) (W_k - W) / sqrt(n d_other)`` (or its
    transpose for direction 2); ``centered`` must already have zero mean.
    """
    n, d1, d2 = centered.shape
    counts = np.bincount(labels, minlength=n_classes)
    sums = np.zeros((n_classes, d1, d2))
    np.add.at(sums, labels, centered)
    with np.errstate(invalid="ignore", divide="ignore"):
        weights = np.where(counts > 0, 1.0 / np.sqrt(counts), 0.0)
    blocks = sums * weights[:, None, None]
    other = d2 if direction == 1 else d1
    return unfold(blocks, direction) / np.sqrt(n * other)


def bilinear_scatters(data):
    """All six bilinear scatter matrices of ``data``.

    Parameters
    ----------
    data : MtsDataset
        Centered or not; the global mean is removed here.

    Returns
    -------
    BilinearScatter
    """
    stats = class_stats(data)
    n = data.n
    d1, d2 = data.shape
    X = data.observations - stats.global_mean
    D = data.observations - stats.class_means[data.labels]
    M = (stats.class_means - stats.global_mean) * np.sqrt(stats.counts)[:, None, None]

    def pair(A):
        A1 = unfold(A, 1)
        A2 = unfold(A, 2)
        return A1 @ A1.T / (n * d2), A2 @ A2.T / (n * d1)

    s1t, s2t = pair(X)
    s1w, s2w = pair(D)
    s1b, s2b = pair(M)
    return BilinearScatter(
        s1w=s1w, s1b=s1b, s1t=s1t, s2w=s2w, s2b=s2b, s2t=s2t,
        sigma1_sq=float(np.trace(s1t) / d1),
        sigma2_sq=float(np.trace(s2t) / d2),
    )


def vectorize(observations):
    """Column-stacking ``vec`` of each observation, shape ``(n, d1 d2)``."""
    observations = np.asarray(observations)
    n = observations.shape[0]
    return observations.transpose(0, 2, 1).reshape(n, -1)
