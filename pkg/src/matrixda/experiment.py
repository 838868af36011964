"""Evaluation protocol and model-selection benchmark.

``run_experiment`` repeats, for each random split: per-class split, 5-fold
cross-validation of the regularization parameters on the training part
(RBLDA/RLDA only), a refit on the whole training part, and 1-NN test errors
for every truncation ``(q1', q2')`` of the features.  The dimension with the
lowest error averaged over splits is reported with its mean and standard
deviation, in the style ``mean +- std (q1, q2)``.
"""

import csv
import io
import logging
import time
from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np
from threadpoolctl import threadpool_limits

from .bilinear import BilinearBasis, blda_fit, bpca_fit
from .dataio import SplitMix64, SplitSpec, as_fraction, load_mts, random_split
from .exceptions import InputError, MethodUnavailableError
from .features import project, sweep_errors
from .modelsel import DEFAULT_GRID, cross_validate
from .rblda import RbldaModel, rblda_fit_v2
from .rlda import RldaBasis, check_scaling, rlda_fast
from .scatter import vectorize

log = logging.getLogger(__name__)

METHODS = ("rblda", "rlda", "blda", "pblda", "bpca")
SCALING_POLICIES = ("best", "w", "t", "unit")
CSV_COLUMNS = ("kind", "method", "scaling", "proportion", "split", "error",
               "mean_error", "std_error", "q1", "q2", "r1", "r2", "status")


@dataclass
class ExperimentConfig:
    """Settings of one ``evaluate`` run.

    ``scaling='best'`` evaluates the ``w``-orthogonal and the unit-column
    bases and keeps the one with the lower mean error.  ``dims='full'``
    skips the dimension sweep and uses every extracted feature.
    """

    data_path: Optional[str] = None
    method: str = "rblda"
    train_proportion: str = "4/5"
    n_splits: int = 10
    cv_folds: int = 5
    grid1: tuple = DEFAULT_GRID
    grid2: Optional[tuple] = None
    seed: int = 0
    scaling: str = "best"
    output: Optional[str] = None
    test_path: Optional[str] = None
    dims: str = "sweep"

    def __post_init__(self):
        if self.method not in METHODS:
            raise InputError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.scaling not in SCALING_POLICIES:
            raise InputError(f"scaling policy must be one of {SCALING_POLICIES}")
        if self.dims not in ("sweep", "full"):
            raise InputError("dims must be 'sweep' or 'full'")
        if self.n_splits < 1:
            raise InputError("n_splits must be positive")
        self.train_proportion = str(as_fraction(self.train_proportion))
        self.grid1 = tuple(float(r) for r in self.grid1)
        if self.grid2 is not None:
            self.grid2 = tuple(float(r) for r in self.grid2)

    @classmethod
    def from_mapping(cls, mapping):
        known = {f.name for f in fields(cls)}
        unknown = set(mapping) - known
        if unknown:
            raise InputError(f"unknown configuration keys: {sorted(unknown)}")
        return cls(**mapping)

    def scalings(self):
        if self.method == "bpca":
            return ("w",)
        if self.scaling == "best":
            return ("w", "unit")
        if self.scaling == "t" and self.method in ("blda", "pblda"):
            raise InputError("BLDA/PBLDA bases have no t-orthogonal scaling")
        return (self.scaling,)


def fit_method(train, method, r1=None, r2=None, scaling="w"):
    """Fit one of the five methods on ``train``; returns something ``project`` accepts."""
    if method == "rblda":
        return rblda_fit_v2(train, r1, r2, scaling)
    if method == "rlda":
        return rlda_fast(vectorize(train.observations).T, train.labels, r1, scaling,
                         n_classes=train.n_classes)
    if method in ("blda", "pblda"):
        return blda_fit(train, "strict" if method == "blda" else "pseudo", scaling)
    if method == "bpca":
        return bpca_fit(train)
    raise InputError(f"unknown method {method!r}")


@dataclass
class MethodSummary:
    method: str
    scaling: str
    proportion: str
    status: str
    split_errors: list = field(default_factory=list)
    dims: tuple = ()
    r_selected: list = field(default_factory=list)
    mean_error: float = float("nan")
    std_error: float = float("nan")


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    summaries: list
    best: MethodSummary

    @property
    def available(self):
        return self.best.status == "ok"

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for summary in self.summaries:
            for row in _summary_rows(summary, "summary"):
                writer.writerow(row)
        for row in _summary_rows(self.best, "best"):
            writer.writerow(row)
        return buf.getvalue()


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _summary_rows(s, kind):
    q = s.dims if s.dims else ("", "")
    if kind == "summary":
        for k, err in enumerate(s.split_errors):
            r1, r2 = s.r_selected[k] if k < len(s.r_selected) else (None, None)
            yield ("split", s.method, s.scaling, s.proportion, k, _fmt(err), "", "",
                   q[0], q[1], _fmt(r1), _fmt(r2), s.status)
    yield (kind, s.method, s.scaling, s.proportion, "", "", _fmt(s.mean_error),
           _fmt(s.std_error), q[0], q[1], "", "", s.status)


def _features_dims(basis):
    if isinstance(basis, RldaBasis):
        return (basis.n_components,)
    if isinstance(basis, RbldaModel):
        basis = basis.basis
    return basis.n_components


def _evaluate_split(config, train, test, scaling, cv_seed):
    r1 = r2 = None
    if config.method in ("rblda", "rlda"):
        report = cross_validate(train, config.method, config.grid1, config.grid2,
                                folds=config.cv_folds, seed=cv_seed,
                                scaling=check_scaling(scaling))
        r1, r2 = report.best_r1, report.best_r2
    basis = fit_method(train, config.method, r1, r2, scaling)
    errors = sweep_errors(project(basis, train), project(basis, test))
    shape = errors.shape
    if config.dims == "full":
        # a single cell holding the error with every feature kept
        errors = errors[(slice(-1, None),) * errors.ndim]
    return errors, (r1, r2), shape


def _splits(config, data, test_data):
    rng = SplitMix64(config.seed)
    for _ in range(config.n_splits):
        split_seed = rng.next()
        cv_seed = rng.next()
        train, test = random_split(data, SplitSpec(config.train_proportion, split_seed))
        if test_data is not None:
            test = test_data
        yield train, test, cv_seed


def _aggregate(summary, grids, full_dims=None):
    shape = tuple(min(g.shape[a] for g in grids) for a in range(grids[0].ndim))
    if any(s == 0 for s in shape):
        raise MethodUnavailableError("no discriminant directions were found")
    if full_dims is None:
        index = tuple(slice(0, s) for s in shape)
    else:
        index = (slice(None),) * grids[0].ndim
    stacked = np.stack([g[index] for g in grids])
    mean = stacked.mean(axis=0)
    best = np.unravel_index(int(np.argmin(mean)), mean.shape)
    per_split = stacked[(slice(None),) + best]
    summary.split_errors = [float(e) for e in per_split]
    if full_dims is None:
        summary.dims = tuple(int(b) + 1 for b in best)
    else:
        summary.dims = tuple(full_dims)
    summary.mean_error = float(mean[best])
    summary.std_error = float(np.std(per_split, ddof=1)) if len(per_split) > 1 else 0.0


def run_experiment(config, data=None, test_data=None):
    """Run the evaluation protocol for one method and one training proportion.

    Parameters
    ----------
    config : ExperimentConfig
    data : MtsDataset, optional
        Loaded from ``config.data_path`` when omitted.
    test_data : MtsDataset, optional
        Fixed test set (e.g. a standard test partition); when given, only the
        training part of each random split is used.

    Returns
    -------
    ExperimentResult
        ``best.status`` is ``'unavailable'`` when the method could not run
        (strict BLDA with a singular within-class scatter).
    """
    if data is None:
        data = load_mts(config.data_path)
    if test_data is None and config.test_path:
        test_data = load_mts(config.test_path)
    summaries = []
    for scaling in config.scalings():
        summary = MethodSummary(config.method, scaling, config.train_proportion, "ok")
        grids, shapes = [], set()
        try:
            for train, test, cv_seed in _splits(config, data, test_data):
                errors, rs, shape = _evaluate_split(config, train, test, scaling,
                                                    cv_seed)
                grids.append(errors)
                shapes.add(shape)
                summary.r_selected.append(rs)
            if config.dims == "full" and len(shapes) > 1:
                raise MethodUnavailableError("feature dimensions differ between splits")
            _aggregate(summary, grids, shapes.pop() if config.dims == "full" else None)
        except MethodUnavailableError as exc:
            log.info("%s unavailable: %s", config.method, exc)
            summary = MethodSummary(config.method, scaling, config.train_proportion,
                                    "unavailable")
        summaries.append(summary)
    ok = [s for s in summaries if s.status == "ok"]
    best = min(ok, key=lambda s: s.mean_error) if ok else summaries[0]
    return ExperimentResult(config, summaries, best)


@dataclass
class BenchReport:
    """Wall time of the cross-validated grid search against the grid size."""

    m_values: list
    candidates: list
    times: list
    ratios: list
    shape: tuple

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("m", "candidates", "seconds", "ratio"))
        for row in zip(self.m_values, self.candidates, self.times, self.ratios):
            writer.writerow((row[0], row[1], f"{row[2]:.6f}", f"{row[3]:.4f}"))
        return buf.getvalue()


def bench_grid(m):
    """``m`` distinct regularization candidates spread over (0, 1)."""
    if m == 1:
        return (0.5,)
    return tuple(float(r) for r in np.linspace(0.01, 0.99, m))


def replicate_rows(data, k):
    """Stack every observation ``k`` times along its rows (time axis)."""
    if k < 1:
        raise InputError("replication factor must be at least 1")
    return data.with_observations(np.tile(data.observations, (1, k, 1)))


def run_bench(data, grid_sizes=(1, 2, 5, 10, 50, 100), replicate=1, proportion="1/16",
              folds=5, seed=0, repeats=3, workers=1):
    """Time RBLDA model selection for ``m x m`` grids.

    The data are replicated along rows, split per class with ``proportion``
    for training, and the training part is cross-validated.  After one
    untimed warm-up run, the grids are timed round-robin ``repeats`` times so
    that slow drifts of the machine hit every size alike; the minimum is
    kept and ``ratio`` is relative to the ``1 x 1`` grid.
    """
    sizes = sorted(set(int(m) for m in grid_sizes) | {1})
    if sizes[0] < 1:
        raise InputError("grid sizes must be positive")
    data = replicate_rows(data, replicate)
    train, _ = random_split(data, SplitSpec(proportion, seed))
    grids = [bench_grid(m) for m in sizes]
    times = [np.inf] * len(sizes)
    with threadpool_limits(limits=workers):
        cross_validate(train, "rblda", grids[0], grids[0], folds=folds, seed=seed)
        for _ in range(max(1, repeats)):
            for k, grid in enumerate(grids):
                start = time.perf_counter()
                cross_validate(train, "rblda", grid, grid, folds=folds, seed=seed)
                times[k] = min(times[k], time.perf_counter() - start)
    ratios = [t / times[0] for t in times]
    return BenchReport(sizes, [m * m for m in sizes], times, ratios, data.shape)


def save_model(path, model, method):
    """Store a fitted basis in a NumPy ``.npz`` archive."""
    arrays = {"method": np.array(method)}
    if isinstance(model, RbldaModel):
        b = model.basis
        arrays.update(v1=b.v1, v2=b.v2, values1=b.values1, values2=b.values2,
                      r1=model.r1, r2=model.r2, scaling=np.array(model.scaling),
                      mean=model.mean, in_u_space=model.in_u_space)
        if model.in_u_space:
            arrays.update(u1=model.u1, u2=model.u2)
    elif isinstance(model, BilinearBasis):
        arrays.update(v1=model.v1, v2=model.v2, values1=model.values1,
                      values2=model.values2)
    elif isinstance(model, RldaBasis):
        arrays.update(basis=model.basis, values=model.values, r=model.r,
                      scaling=np.array(model.scaling))
        if model.fisher is not None:
            arrays.update(fisher=model.fisher)
    else:
        raise InputError(f"cannot save {type(model).__name__}")
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_model(path):
    """Inverse of :func:`save_model`."""
    with np.load(path, allow_pickle=False) as z:
        method = str(z["method"])
        if method == "rblda":
            basis = BilinearBasis(z["v1"], z["v2"], z["values1"], z["values2"], "rblda")
            u_space = bool(z["in_u_space"])
            return RbldaModel(basis, float(z["r1"]), float(z["r2"]), str(z["scaling"]),
                              u_space, z["mean"],
                              z["u1"] if u_space else None, z["u2"] if u_space else None)
        if method == "rlda":
            fisher = z["fisher"] if "fisher" in z.files else None
            return RldaBasis(z["basis"], z["values"], str(z["scaling"]), float(z["r"]),
                             fisher)
        return BilinearBasis(z["v1"], z["v2"], z["values1"], z["values2"], method)


__all__ = ["ExperimentConfig", "ExperimentResult", "BenchReport", "run_experiment",
           "run_bench", "fit_method", "save_model", "load_model", "replicate_rows",
           "bench_grid"]
