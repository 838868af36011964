"""scikit-learn compatible wrappers.

Inputs are arrays of shape ``(n_samples, d1, d2)``; a 2-D array is read as
``d1 x 1`` matrices.  ``transform`` returns the flattened features
``vec(V1' (X - mean) V2)`` and ``predict`` applies 1-NN to the training
features.
"""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .bilinear import blda_fit, bpca_fit
from .exceptions import InputError
from .features import FeatureBlock, nn1_predict, project, truncate
from .modelsel import DEFAULT_GRID, cross_validate
from .rblda import rblda_fit_v2
from .rlda import check_scaling, rlda_fast
from .scatter import MtsDataset, vectorize


def _as_stack(X):
    X = check_array(X, allow_nd=True, ensure_2d=False, dtype=np.float64)
    if X.ndim == 2:
        X = X[:, :, None]
    if X.ndim != 3:
        raise InputError(f"expected (n, d1, d2) observations, got shape {X.shape}")
    return X


def _as_dataset(X, y):
    X = _as_stack(X)
    X, y = check_X_y(X, y, allow_nd=True, dtype=np.float64)
    classes, labels = np.unique(y, return_inverse=True)
    if classes.size < 2:
        raise InputError("at least two classes are needed")
    return MtsDataset(X, labels, classes.size), classes


class _MatrixDiscriminant(TransformerMixin, ClassifierMixin, BaseEstimator):
    """Shared fit/transform/predict logic; subclasses supply ``_fit_basis``."""

    def _fit_basis(self, data):
        raise NotImplementedError

    def _truncate(self, block):
        q = getattr(self, "n_components", None)
        if q is None:
            return block
        if block.is_bilinear:
            q1, q2 = (q, q) if np.isscalar(q) else q
            return truncate(block, min(q1, block.features.shape[1]),
                            min(q2, block.features.shape[2]))
        return truncate(block, min(int(np.ravel(q)[0]), block.features.shape[1]))

    def _features(self, X):
        X = _as_stack(X)
        if X.shape[1:] != self.input_shape_:
            raise InputError(f"expected observations of shape {self.input_shape_}, "
                             f"got {X.shape[1:]}")
        dummy = np.zeros(X.shape[0], dtype=np.int64)
        block = project(self.basis_, MtsDataset(X, dummy, 1))
        return self._truncate(block).features

    def fit(self, X, y):
        data, self.classes_ = _as_dataset(X, y)
        self.input_shape_ = data.shape
        self.basis_ = self._fit_basis(data)
        self.train_features_ = self._truncate(project(self.basis_, data)).features
        self.train_labels_ = data.labels
        return self

    def transform(self, X):
        check_is_fitted(self, "basis_")
        F = self._features(X)
        return F.reshape(F.shape[0], -1)

    def predict(self, X):
        check_is_fitted(self, "basis_")
        test = FeatureBlock(self._features(X), np.zeros(len(X), dtype=np.int64))
        train = FeatureBlock(self.train_features_, self.train_labels_)
        return self.classes_[nn1_predict(train, test)]


class RBLDA(_MatrixDiscriminant):
    """Regularized bilinear discriminant analysis.

    Parameters
    ----------
    r1, r2 : float in (0, 1]
        Shrinkage of the column and row scatter matrices.
    scaling : {'w', 't', 'unit'}
    n_components : int or (int, int), optional
        Keep the leading ``q1 x q2`` features.
    """

    def __init__(self, r1=0.5, r2=0.5, scaling="w", n_components=None):
        self.r1 = r1
        self.r2 = r2
        self.scaling = scaling
        self.n_components = n_components

    def _fit_basis(self, data):
        return rblda_fit_v2(data, self.r1, self.r2, check_scaling(self.scaling))


class RBLDACV(_MatrixDiscriminant):
    """RBLDA with ``(r1, r2)`` chosen by stratified V-fold cross-validation.

    Attributes
    ----------
    cv_report_ : CvReport
    r1_, r2_ : float
        Selected parameters.
    """

    def __init__(self, grid1=DEFAULT_GRID, grid2=None, folds=5, seed=0, scaling="w",
                 n_components=None, n_jobs=1):
        self.grid1 = grid1
        self.grid2 = grid2
        self.folds = folds
        self.seed = seed
        self.scaling = scaling
        self.n_components = n_components
        self.n_jobs = n_jobs

    def _fit_basis(self, data):
        scaling = check_scaling(self.scaling)
        self.cv_report_ = cross_validate(data, "rblda", self.grid1, self.grid2,
                                         folds=self.folds, seed=self.seed,
                                         scaling=scaling, n_jobs=self.n_jobs)
        self.r1_, self.r2_ = self.cv_report_.best_r1, self.cv_report_.best_r2
        return rblda_fit_v2(data, self.r1_, self.r2_, scaling)


class RLDA(_MatrixDiscriminant):
    """Regularized LDA on ``vec(X)``.

    Parameters
    ----------
    r : float in (0, 1]
    scaling : {'w', 't', 'unit'}
    n_components : int, optional
    """

    def __init__(self, r=0.5, scaling="w", n_components=None):
        self.r = r
        self.scaling = scaling
        self.n_components = n_components

    def _fit_basis(self, data):
        return rlda_fast(vectorize(data.observations).T, data.labels, self.r,
                         check_scaling(self.scaling), n_classes=data.n_classes)


class BLDA(_MatrixDiscriminant):
    """Bilinear LDA without regularization.

    ``mode='strict'`` raises :class:`SingularWithinClassError` when a
    within-class scatter is singular; ``mode='pseudo'`` whitens on its range.
    """

    def __init__(self, mode="strict", scaling="w", n_components=None):
        self.mode = mode
        self.scaling = scaling
        self.n_components = n_components

    def _fit_basis(self, data):
        return blda_fit(data, self.mode, self.scaling)


class BPCA(_MatrixDiscriminant):
    """Bilinear PCA; labels are used only by ``predict``."""

    def __init__(self, n_components=None):
        self.n_components = n_components

    def _fit_basis(self, data):
        return bpca_fit(data)
