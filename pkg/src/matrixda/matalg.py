"""Dense decomposition helpers shared by every solver.

Three operations live here:

* :func:`condensed_svd` -- left singular basis and squared spectrum of a data
  block ``M``, i.e. the condensed eigendecomposition of ``M M'``.
* :func:`sym_psd_eig` -- eigendecomposition of a symmetric PSD matrix, sorted
  in descending order.
* :func:`gen_eig_oracle` -- slow reference solver of ``inv(Sreg) Sb v = lam v``
  with ``V' Sreg V = I``.

All basis columns follow one sign convention: the entry of largest magnitude
is positive.  Every call to :func:`condensed_svd` is counted so the
cross-validation code can prove its amortization contract (see
:func:`svd_call_count` and :func:`count_svd_calls`).
"""

import threading
from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np

from .exceptions import InputError, NotPositiveDefiniteError

_EPS = np.finfo(float).eps

_svd_lock = threading.Lock()
_svd_calls = 0


def svd_call_count():
    """Number of :func:`condensed_svd` calls made by this process so far."""
    return _svd_calls


class _SvdCounter:
    def __init__(self):
        self._start = svd_call_count()
        self._stop = None

    @property
    def calls(self):
        stop = svd_call_count() if self._stop is None else self._stop
        return stop - self._start


@contextmanager
def count_svd_calls():
    """Context manager exposing the number of condensed SVDs run inside it.

    >>> with count_svd_calls() as counter:  # doctest: +SKIP
    ...     cross_validate(...)
    >>> counter.calls  # doctest: +SKIP
    10
    """
    counter = _SvdCounter()
    try:
        yield counter
    finally:
        counter._stop = svd_call_count()


def fix_signs(basis):
    """Flip columns so that each column's largest-magnitude entry is positive."""
    basis = np.array(basis, dtype=float, copy=True)
    if basis.size == 0:
        return basis
    idx = np.argmax(np.abs(basis), axis=0)
    signs = np.sign(basis[idx, np.arange(basis.shape[1])])
    signs[signs == 0] = 1.0
    return basis * signs


@dataclass(frozen=True)
class CondensedSvd:
    """Condensed decomposition ``M M' = U diag(spectrum) U'``.

    Attributes
    ----------
    left_basis : ndarray of shape (d, t)
        Orthonormal columns spanning the numerical range of ``M``.
    spectrum : ndarray of shape (t,)
        Squared singular values of ``M``, strictly positive, non-increasing.
    """

    left_basis: np.ndarray
    spectrum: np.ndarray

    @property
    def rank(self):
        return self.spectrum.shape[0]

    @property
    def singular_values(self):
        return np.sqrt(self.spectrum)

    def reconstruct(self):
        return (self.left_basis * self.spectrum) @ self.left_basis.T


@dataclass(frozen=True)
class EigPairs:
    """Eigenpairs sorted by non-increasing eigenvalue."""

    vectors: np.ndarray
    values: np.ndarray

    def __len__(self):
        return self.values.shape[0]

    def top(self, q):
        return EigPairs(self.vectors[:, :q], self.values[:q])


def _check_finite(M, name):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise InputError(f"{name} must be a 2-D matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InputError(f"{name} contains non-finite entries")
    return M


def rank_tolerance(singular_values, shape):
    """Cut-off below which a singular value is treated as zero."""
    if singular_values.size == 0:
        return 0.0
    return max(shape) * _EPS * float(singular_values[0])


def condensed_svd(M):
    """Condensed SVD of a data block.

    Returns the orthonormal left basis ``U`` and the squared singular values
    ``Gamma`` of ``M``, so that ``M M' = U Gamma U'``.  Components with
    ``sigma_i <= max(d, m) * eps * sigma_max`` are dropped.

    LAPACK's thin SVD reduces a tall or wide block to its short side before
    the iterative phase, so the work is ``O(d m min(d, m))`` -- the same cost
    as decomposing the smaller of the two Gram matrices -- without squaring the
    condition number.

    Parameters
    ----------
    M : array-like of shape (d, m)

    Returns
    -------
    CondensedSvd
    """
    global _svd_calls
    M = _check_finite(M, "M")
    with _svd_lock:
        _svd_calls += 1
    d, m = M.shape
    if d == 0 or m == 0:
        return CondensedSvd(np.zeros((d, 0)), np.zeros(0))
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    keep = s > rank_tolerance(s, M.shape)
    if not np.any(keep) or s[0] == 0.0:
        return CondensedSvd(np.zeros((d, 0)), np.zeros(0))
    U = fix_signs(U[:, keep])
    return CondensedSvd(U, s[keep] ** 2)


def check_symmetric(S, name="S", tol=1e-8):
    S = _check_finite(S, name)
    if S.shape[0] != S.shape[1]:
        raise InputError(f"{name} must be square, got shape {S.shape}")
    scale = np.max(np.abs(S)) if S.size else 0.0
    if np.max(np.abs(S - S.T), initial=0.0) > tol * scale:
        raise InputError(f"{name} is not symmetric within tolerance")
    return 0.5 * (S + S.T)


def sym_psd_eig(S):
    """Eigendecomposition of a symmetric PSD matrix, largest eigenvalue first.

    Rounding-level negative eigenvalues are clipped to zero.
    """
    S = check_symmetric(S)
    values, vectors = np.linalg.eigh(S)
    values = np.clip(values[::-1], 0.0, None)
    vectors = fix_signs(vectors[:, ::-1])
    return EigPairs(vectors, values)


def numerical_rank_psd(S, reference=None):
    """Numerical rank of a symmetric PSD matrix from its eigenvalues.

    Eigenvalues are compared with ``d eps lambda_max``; with ``reference``
    (e.g. the total scatter when ``S`` is the between-class part) the scale
    is taken from that matrix instead, so a pure round-off ``S`` has rank 0.
    """
    values = np.linalg.eigvalsh(check_symmetric(S))[::-1]
    scale = values[0] if values.size else 0.0
    if reference is not None:
        scale = max(scale, float(np.linalg.eigvalsh(check_symmetric(reference))[-1]))
    if values.size == 0 or scale <= 0:
        return 0
    return int(np.sum(values > S.shape[0] * _EPS * scale))


def gen_eig_oracle(Sb, Sreg, rank=None):
    """Reference solver of the generalized problem ``inv(Sreg) Sb V = V Lambda``.

    The metric is whitened through an explicitly inverted Cholesky factor
    ``L^{-1}``; the symmetric problem ``L^{-1} Sb L^{-T}`` is then solved
    densely and mapped back, which gives ``V' Sreg V = I`` and
    ``V' Sb V = Lambda``.  Meant as a slow, transparent reference.

    Parameters
    ----------
    Sb : array-like of shape (d, d)
        Symmetric PSD matrix (the between-class scatter).
    Sreg : array-like of shape (d, d)
        Symmetric positive definite metric.
    rank : int, optional
        Number of pairs to return.  Defaults to the numerical rank of ``Sb``.

    Returns
    -------
    EigPairs
    """
    Sb = check_symmetric(Sb, "Sb")
    Sreg = check_symmetric(Sreg, "Sreg")
    if Sb.shape != Sreg.shape:
        raise InputError("Sb and Sreg must have the same shape")
    d = Sb.shape[0]
    metric_values = np.linalg.eigvalsh(Sreg)
    if d and not metric_values[0] > 1e-12 * max(metric_values[-1], 0.0):
        raise NotPositiveDefiniteError(metric_values[0], metric_values[-1])
    if rank is None:
        rank = numerical_rank_psd(Sb)
    L = np.linalg.cholesky(Sreg)
    L_inv = np.linalg.inv(L)
    C = L_inv @ Sb @ L_inv.T
    C = 0.5 * (C + C.T)
    values, W = np.linalg.eigh(C)
    values = values[::-1][:rank]
    W = W[:, ::-1][:, :rank]
    V = fix_signs(L_inv.T @ W)
    return EigPairs(V, np.clip(values, 0.0, None))


def eigenvalue_clusters(values, rtol=1e-6):
    """Split descending ``values`` into runs of (relatively) equal eigenvalues.

    Returns a list of index arrays.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return []
    scale = max(float(np.max(np.abs(values))), np.finfo(float).tiny)
    clusters = [[0]]
    for i in range(1, values.size):
        if abs(values[i - 1] - values[i]) <= rtol * scale:
            clusters[-1].append(i)
        else:
            clusters.append([i])
    return [np.asarray(c) for c in clusters]


def span_projector(V):
    """Orthogonal projector ``V V^+`` onto the column span of ``V``."""
    V = np.asarray(V, dtype=float)
    if V.shape[1] == 0:
        return np.zeros((V.shape[0], V.shape[0]))
    Q, _ = np.linalg.qr(V)
    return Q @ Q.T


def cluster_projectors(V, values, rtol=1e-6):
    """Span projectors of ``V`` restricted to each eigenvalue cluster.

    Eigenvectors inside a cluster of equal eigenvalues are not unique, so two
    solvers are compared through these projectors instead of column by column.
    """
    return [span_projector(V[:, idx]) for idx in eigenvalue_clusters(values, rtol)]


def max_projector_distance(V_a, values_a, V_b, values_b, rtol=1e-6):
    """Largest Frobenius distance between matching cluster projectors.

    Clusters are taken from ``values_a``; ``values_b`` must be of equal length.
    """
    if len(values_a) != len(values_b):
        return np.inf
    worst = 0.0
    for idx in eigenvalue_clusters(values_a, rtol):
        P_a = span_projector(V_a[:, idx])
        P_b = span_projector(V_b[:, idx])
        worst = max(worst, float(np.linalg.norm(P_a - P_b)))
    return worst
