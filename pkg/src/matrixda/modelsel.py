"""Cross-validated choice of the regularization parameters.

Per fold, each direction's total scatter is decomposed once
(:func:`rblda_precompute`); every ``(r1, r2)`` candidate then reuses the cached
U-space quantities.  Validation data are centered with the training-fold
mean and projected once onto ``U_1t, U_2t`` before the candidate loops.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dataio import SplitMix64
from .exceptions import FoldDegeneracyError, InputError
from .features import FeatureBlock, dense_map, left_map, nn1_error, right_map
from .rblda import direction_cache, rblda_direction, rblda_precompute
from .rlda import W_ORTHOGONAL, check_r, check_scaling
from .scatter import MtsDataset, center_dataset, vectorize

DEFAULT_GRID = (1e-6, 0.001, 0.01, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99)
TIE_POLICY = "lexicographically smallest (i, j) among minimal mean errors"


@dataclass(frozen=True)
class RegGrid:
    """Strictly increasing regularization candidates in (0, 1]."""

    candidates: tuple

    def __post_init__(self):
        values = tuple(check_r(r) for r in self.candidates)
        if not values:
            raise InputError("a regularization grid needs at least one candidate")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise InputError("regularization candidates must be strictly increasing")
        object.__setattr__(self, "candidates", values)

    def __len__(self):
        return len(self.candidates)

    def __iter__(self):
        return iter(self.candidates)


def _as_grid(grid):
    return grid if isinstance(grid, RegGrid) else RegGrid(tuple(grid))


@dataclass(frozen=True)
class CvReport:
    """Fold-averaged validation errors over the ``(r1, r2)`` grid.

    ``per_fold[v, i, j]`` is the 1-NN error of fold ``v`` with ``r1 = grid1[i]``
    and ``r2 = grid2[j]``; ``error_grid`` is its mean over folds.  For RLDA the
    second axis has length one.
    """

    error_grid: np.ndarray
    per_fold: np.ndarray
    selected: tuple
    folds: int
    seed: int
    grid1: tuple
    grid2: tuple
    method: str
    scaling: str
    tie_policy: str = field(default=TIE_POLICY)

    @property
    def best_r1(self):
        return self.grid1[self.selected[0]]

    @property
    def best_r2(self):
        return self.grid2[self.selected[1]] if self.grid2 else None

    @property
    def best_error(self):
        return float(self.error_grid[self.selected])


def stratified_folds(labels, n_folds, seed):
    """Assign each observation to one of ``n_folds`` folds, class by class.

    Members of each class are shuffled with :class:`SplitMix64` and dealt
    round-robin; the dealing position carries over from one class to the
    next, so fold sizes are balanced within each class and overall.

    Raises
    ------
    InputError
        If ``n_folds < 2`` or a class has fewer than two observations (some
        training fold would then miss the class).
    """
    labels = np.asarray(labels, dtype=np.int64)
    if n_folds < 2:
        raise InputError("cross-validation needs at least two folds")
    rng = SplitMix64(seed)
    assignment = np.empty(labels.shape[0], dtype=np.int64)
    position = 0
    for k in np.unique(labels):
        members = list(np.flatnonzero(labels == k))
        if len(members) < 2:
            raise InputError(
                f"class {int(k)} has {len(members)} observation(s); it would be "
                "absent from a training fold")
        rng.shuffle(members)
        for idx in members:
            assignment[idx] = position % n_folds
            position += 1
    return assignment


def _split_fold(data, assignment, v):
    train = data.subset(np.flatnonzero(assignment != v))
    val = data.subset(np.flatnonzero(assignment == v))
    present = np.unique(train.labels)
    if present.size < 2:
        raise FoldDegeneracyError(
            f"training part of fold {v} contains a single class")
    if present.size < data.n_classes:
        raise FoldDegeneracyError(
            f"training part of fold {v} misses class(es) "
            f"{sorted(set(range(data.n_classes)) - set(present.tolist()))}")
    return train, val


def _rblda_fold(train, val, grid1, grid2, scaling):
    cache1, cache2, mean = rblda_precompute(train)
    Z_tr = dense_map(train.observations - mean, cache1.u_basis, cache2.u_basis)
    Z_va = dense_map(val.observations - mean, cache1.u_basis, cache2.u_basis)
    bases1 = [rblda_direction(cache1, r, scaling)[0] for r in grid1]
    bases2 = [rblda_direction(cache2, r, scaling)[0] for r in grid2]
    errors = np.empty((len(bases1), len(bases2)))
    for i, v1 in enumerate(bases1):
        A_tr = left_map(Z_tr, v1)
        A_va = left_map(Z_va, v1)
        for j, v2 in enumerate(bases2):
            errors[i, j] = nn1_error(FeatureBlock(right_map(A_tr, v2), train.labels),
                                     FeatureBlock(right_map(A_va, v2), val.labels))
    return errors


def vector_dataset(data):
    """``data`` with every observation replaced by ``vec(X)`` as a ``d x 1`` matrix."""
    return data.with_observations(vectorize(data.observations)[:, :, None])


def _rlda_fold(train, val, grid1, scaling):
    centered, mean = center_dataset(train)
    cache = direction_cache(centered.observations, train.labels, train.n_classes, 1)
    Z_tr = centered.observations[:, :, 0] @ cache.u_basis
    Z_va = (val.observations - mean)[:, :, 0] @ cache.u_basis
    errors = np.empty((len(grid1), 1))
    for i, r in enumerate(grid1):
        V = rblda_direction(cache, r, scaling)[0]
        errors[i, 0] = nn1_error(FeatureBlock(Z_tr @ V, train.labels),
                                 FeatureBlock(Z_va @ V, val.labels))
    return errors


def cross_validate(data, method="rblda", grid1=DEFAULT_GRID, grid2=None, folds=5,
                   seed=0, scaling=W_ORTHOGONAL, n_jobs=1):
    """V-fold cross-validation over the regularization grid.

    Parameters
    ----------
    data : MtsDataset
    method : {'rblda', 'rlda'}
        ``'rlda'`` works on ``vec(X)`` with a single parameter ``r``.
    grid1, grid2 : sequence of float
        Candidates for ``r1`` and ``r2``; ``grid2`` defaults to ``grid1`` and
        is ignored for RLDA.
    folds : int
    seed : int
        Seed of the stratified fold assignment.
    scaling : str
        Basis scaling used for the 1-NN features.
    n_jobs : int
        Folds processed concurrently (threads); results do not depend on it.

    Returns
    -------
    CvReport
    """
    if not isinstance(data, MtsDataset):
        raise InputError("cross_validate expects an MtsDataset")
    data.require_nonempty_classes()
    scaling = check_scaling(scaling)
    grid1 = _as_grid(grid1)
    if method == "rblda":
        grid2 = _as_grid(grid1 if grid2 is None else grid2)
    elif method == "rlda":
        grid2 = None
        data = vector_dataset(data)
    else:
        raise InputError(f"cross_validate supports 'rblda' and 'rlda', not {method!r}")
    assignment = stratified_folds(data.labels, folds, seed)
    splits = [_split_fold(data, assignment, v) for v in range(folds)]

    def run(split):
        train, val = split
        if method == "rblda":
            return _rblda_fold(train, val, grid1.candidates, grid2.candidates, scaling)
        return _rlda_fold(train, val, grid1.candidates, scaling)

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            per_fold = np.stack(list(pool.map(run, splits)))
    else:
        per_fold = np.stack([run(split) for split in splits])
    error_grid = per_fold.mean(axis=0)
    flat = int(np.argmin(error_grid))
    selected = tuple(int(i) for i in np.unravel_index(flat, error_grid.shape))
    return CvReport(
        error_grid=error_grid, per_fold=per_fold, selected=selected, folds=folds,
        seed=seed, grid1=grid1.candidates,
        grid2=grid2.candidates if grid2 is not None else (),
        method=method, scaling=scaling,
    )
