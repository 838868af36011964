"""Regularized LDA for vector observations.

The regularized total scatter is ``S_t^r = (1 - r) S_t + r sigma^2 I`` with
``sigma^2 = tr(S_t) / d``.  Two solvers are provided:

* :func:`rlda_direct` forms ``S_t^r`` and ``S_b`` explicitly and calls the
  dense reference solver (``O(d^2 n + d^3)``);
* :func:`rlda_fast` never forms a ``d x d`` inverse when ``n < d``: it builds
  ``G = inv(S^r) F_b`` from whichever side is smaller and decomposes the
  ``c x c`` matrix ``R = F_b' G``.  ``S^r`` is the regularized within-class
  scatter by default, the regularized total scatter on request.

Observations are the *columns* of ``X`` (``d x n``) throughout this module.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import DegeneracyError, InputError
from .matalg import fix_signs, gen_eig_oracle, numerical_rank_psd, sym_psd_eig
from .scatter import _check_vector_labels, vector_scatters

_EPS = np.finfo(float).eps

T_ORTHOGONAL = "t_orthogonal"
W_ORTHOGONAL = "w_orthogonal"
UNIT_COLUMN = "unit_column"
SCALINGS = (T_ORTHOGONAL, W_ORTHOGONAL, UNIT_COLUMN)
_SCALING_ALIASES = {"t": T_ORTHOGONAL, "w": W_ORTHOGONAL, "unit": UNIT_COLUMN,
                    "u": UNIT_COLUMN}

# smallest admissible diagonal entry of I - (1 - r) Lambda
DEGENERACY_FLOOR = 1e-12


def check_scaling(scaling):
    """Normalize a scaling name; accepts the short forms ``t``, ``w``, ``unit``."""
    name = _SCALING_ALIASES.get(scaling, scaling)
    if name not in SCALINGS:
        raise InputError(f"unknown scaling {scaling!r}; choose from {SCALINGS}")
    return name


def check_r(r):
    r = float(r)
    if not (0.0 < r <= 1.0):
        raise InputError(f"regularization r must lie in (0, 1], got {r}")
    return r


def w_factor(values, r, fisher=None):
    """Diagonal of ``I - (1 - r) Lambda_t``; raises if not strictly positive.

    When the Fisher eigenvalues ``Lambda_w`` are known the diagonal is
    evaluated as ``Lambda_t / Lambda_w``, which avoids the cancellation in
    ``1 - (1 - r) Lambda_t`` for ``Lambda_t`` close to ``1 / (1 - r)``.
    """
    values = np.asarray(values, dtype=float)
    if fisher is None:
        factor = 1.0 - (1.0 - r) * values
    else:
        factor = 1.0 / (1.0 + (1.0 - r) * np.asarray(fisher, dtype=float))
    if factor.size and np.min(factor) <= DEGENERACY_FLOOR:
        raise DegeneracyError(
            "I - (1 - r) Lambda has a non-positive diagonal entry "
            f"({np.min(factor):.3e}); the regularized within-class scatter is "
            "not positive definite")
    return factor


def unit_columns(V):
    norms = np.linalg.norm(V, axis=0)
    norms[norms == 0] = 1.0
    return V / norms


def rescale(V_t, values, r, scaling, fisher=None):
    """Turn an ``S_t^r``-orthonormal basis into the requested scaling."""
    scaling = check_scaling(scaling)
    if scaling == T_ORTHOGONAL:
        return V_t
    V_w = V_t / np.sqrt(w_factor(values, r, fisher))
    if scaling == W_ORTHOGONAL:
        return V_w
    return unit_columns(V_w)


@dataclass(frozen=True)
class RldaBasis:
    """Discriminant basis of regularized LDA.

    Attributes
    ----------
    basis : ndarray of shape (d, q)
    values : ndarray of shape (q,)
        Eigenvalues ``Lambda_t`` of ``inv(S_t^r) S_b``; they do not depend on
        the column scaling.
    scaling : str
        ``'t_orthogonal'`` (``V' S_t^r V = I``), ``'w_orthogonal'``
        (``V' S_w^r V = I``) or ``'unit_column'``.
    r : float
    """

    basis: np.ndarray
    values: np.ndarray
    scaling: str
    r: float
    fisher: np.ndarray = None

    @property
    def n_components(self):
        return self.values.shape[0]

    @property
    def w_values(self):
        """Fisher eigenvalues ``Lambda_w = Lambda_t (I - (1-r) Lambda_t)^{-1}``."""
        if self.fisher is not None:
            return self.fisher
        return self.values / w_factor(self.values, self.r)


def shrink(S, r, sigma_sq):
    """``(1 - r) S + r sigma_sq I``."""
    r = check_r(r)
    if not sigma_sq > 0:
        raise InputError(f"sigma_sq must be positive, got {sigma_sq}")
    S = np.asarray(S, dtype=float)
    out = (1.0 - r) * S
    out[np.diag_indices_from(out)] += r * sigma_sq
    return 0.5 * (out + out.T)


def regularized_scatters(X, labels, r, n_classes=None):
    """``(S_b, S_w^r, S_t^r, sigma^2)`` sharing ``sigma^2 = tr(S_t)/d``."""
    Sb, Sw, St = vector_scatters(X, labels, n_classes)
    sigma_sq = float(np.trace(St) / St.shape[0])
    if sigma_sq <= 0:
        raise DegeneracyError("total scatter is zero: all observations are equal")
    return Sb, shrink(Sw, r, sigma_sq), shrink(St, r, sigma_sq), sigma_sq


def rlda_direct(X, labels, r, scaling=T_ORTHOGONAL, n_classes=None):
    """Regularized LDA by the explicit generalized eigenproblem.

    Parameters
    ----------
    X : array-like of shape (d, n)
        Column observations.
    labels : array-like of shape (n,)
    r : float in (0, 1]
    scaling : str, default 't_orthogonal'

    Returns
    -------
    RldaBasis
    """
    r = check_r(r)
    Sb, _, Str, _ = regularized_scatters(X, labels, r, n_classes)
    pairs = gen_eig_oracle(Sb, Str, rank=numerical_rank_psd(Sb, reference=Str))
    basis = rescale(pairs.vectors, pairs.values, r, scaling)
    return RldaBasis(basis, pairs.values, check_scaling(scaling), r)


def between_rank(F, data_norm, data_shape):
    """Numerical rank of a between-class factor.

    Singular values of ``F`` are compared with ``max(shape) eps ||X||_F`` where
    ``X`` is the (scaled) data block ``F`` was built from, so that exactly
    coinciding class means give rank zero.
    """
    if F.size == 0:
        return 0
    s = np.linalg.svd(F, compute_uv=False)
    return int(np.sum(s > max(data_shape) * _EPS * data_norm))


def top_pairs(R, q):
    """Largest ``q`` eigenpairs of a symmetric PSD matrix ``R``."""
    pairs = sym_psd_eig(0.5 * (R + R.T))
    values = pairs.values[:q]
    if q and values[-1] <= 0:
        raise DegeneracyError("between-class eigenvalue collapsed to zero")
    return pairs.vectors[:, :q], values


def rlda_fast(X, labels, r, scaling=W_ORTHOGONAL, branch="auto",
              n_components=None, n_classes=None, metric="within"):
    """Regularized LDA through the ``c x c`` reduced eigenproblem.

    With ``metric='total'`` the solver builds
    ``G = ((1-r) X X' + r sigma^2 I_d)^{-1} F_b`` on the ``d``-side, or as
    ``X ((1-r) X' X + r sigma^2 I_n)^{-1} E Pi^{-1/2}`` on the ``n``-side, and
    decomposes ``R = F_b' G``.  The default ``metric='within'`` runs the same
    reduction against ``S_w^r`` instead, which yields ``Lambda_w`` and
    ``V_w`` directly; ``Lambda_t = Lambda_w / (1 + (1-r) Lambda_w)`` and
    ``V_t = V_w (I + (1-r) Lambda_w)^{-1/2}`` follow without cancellation.
    For small ``r`` the total-scatter route has to recover
    ``I - (1-r) Lambda_t`` from eigenvalues clustered next to ``1/(1-r)``,
    which loses most significant digits of the ``w``-orthogonal basis.

    Parameters
    ----------
    X : array-like of shape (d, n)
        Column observations; centered internally.
    labels : array-like of shape (n,)
    r : float in (0, 1]
    scaling : str, default 'w_orthogonal'
    branch : {'auto', 'd', 'n'}
        Side used for ``G``; ``'auto'`` picks ``'n'`` exactly when ``n < d``.
    n_components : int, optional
        Keep at most this many directions.
    metric : {'within', 'total'}
        Regularized scatter inverted in the reduction.

    Returns
    -------
    RldaBasis
    """
    r = check_r(r)
    X, labels, c, counts = _check_vector_labels(X, labels, n_classes)
    d, n = X.shape
    Xs = (X - X.mean(axis=1, keepdims=True)) / np.sqrt(n)
    norm = float(np.linalg.norm(Xs))
    sigma_sq = norm ** 2 / d
    if sigma_sq <= 0:
        raise DegeneracyError("total scatter is zero: all observations are equal")

    onehot = np.zeros((n, c))
    onehot[np.arange(n), labels] = 1.0
    E_pi = onehot / np.sqrt(counts)
    F_b = Xs @ E_pi
    if metric == "within":
        means = Xs @ (onehot / counts)
        Xm = Xs - means[:, labels]
    elif metric == "total":
        Xm = Xs
    else:
        raise InputError(f"metric must be 'within' or 'total', got {metric!r}")

    alpha, beta = r * sigma_sq, 1.0 - r
    if branch == "auto":
        branch = "n" if n < d else "d"
    if branch == "d":
        A = beta * (Xm @ Xm.T)
        A[np.diag_indices(d)] += alpha
        G = np.linalg.solve(A, F_b)
    elif branch == "n":
        B = beta * (Xm.T @ Xm)
        B[np.diag_indices(n)] += alpha
        if metric == "total":
            G = Xs @ np.linalg.solve(B, E_pi)
        else:
            # Woodbury; F_b need not lie in the span of Xm
            G = (F_b - beta * (Xm @ np.linalg.solve(B, Xm.T @ F_b))) / alpha
    else:
        raise InputError(f"branch must be 'auto', 'd' or 'n', got {branch!r}")

    q = between_rank(F_b, norm, X.shape)
    if n_components is not None:
        q = min(q, int(n_components))
    V_R, values = top_pairs(F_b.T @ G, q)
    V = G @ V_R / np.sqrt(values)
    if metric == "total":
        w_factor(values, r)
        basis = rescale(fix_signs(V), values, r, scaling)
        return RldaBasis(basis, values, check_scaling(scaling), r)

    fisher = values
    values = fisher / (1.0 + beta * fisher)
    V_t = fix_signs(V / np.sqrt(1.0 + beta * fisher))
    basis = rescale(V_t, values, r, scaling, fisher)
    return RldaBasis(basis, values, check_scaling(scaling), r, fisher)


def t_to_w(basis):
    """Map a ``t``-orthogonal basis to the ``w``-orthogonal one.

    ``V_w = V_t (I - (1-r) Lambda_t)^{-1/2}``; the Fisher eigenvalues are
    available afterwards as ``RldaBasis.w_values``.
    """
    if basis.scaling != T_ORTHOGONAL:
        raise InputError("t_to_w expects a t_orthogonal basis")
    V_w = basis.basis / np.sqrt(w_factor(basis.values, basis.r, basis.fisher))
    return RldaBasis(V_w, basis.values, W_ORTHOGONAL, basis.r, basis.fisher)


def to_unit_columns(basis):
    """Scale every column of ``basis`` to unit Euclidean length."""
    return RldaBasis(unit_columns(basis.basis), basis.values, UNIT_COLUMN, basis.r,
                     basis.fisher)
