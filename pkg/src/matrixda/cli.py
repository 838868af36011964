"""Command line interface.

Exit codes: 0 success, 2 input or parse error, 3 numerical degeneracy,
4 method unavailable.
"""

import argparse
import csv
import io
import logging
import sys

from .dataio import load_mts, save_mts, synth_separable
from .exceptions import DegeneracyError, InputError, MethodUnavailableError
from .experiment import (ExperimentConfig, fit_method, run_bench, run_experiment,
                         save_model)
from .modelsel import DEFAULT_GRID, cross_validate

EXIT_OK, EXIT_INPUT, EXIT_DEGENERATE, EXIT_UNAVAILABLE = 0, 2, 3, 4

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib


def _floats(text):
    try:
        return tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of floats: {text!r}")


def _ints(text):
    try:
        return tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {text!r}")


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def cmd_fit(args):
    data = load_mts(args.data)
    model = fit_method(data, args.method, args.r1, args.r2, args.scaling)
    save_model(args.out, model, args.method)
    return EXIT_OK


def cmd_crossval(args):
    data = load_mts(args.data)
    report = cross_validate(data, args.method, args.grid, args.grid2, folds=args.folds,
                            seed=args.seed, scaling=args.scaling)
    rows = [("i", "j", "r1", "r2", "mean_error", "selected")
            + tuple(f"fold_{v}" for v in range(report.folds))]
    grid2 = report.grid2 or (None,)
    for i, r1 in enumerate(report.grid1):
        for j, r2 in enumerate(grid2):
            rows.append((i, j, repr(r1), "" if r2 is None else repr(r2),
                         repr(float(report.error_grid[i, j])),
                         int((i, j) == report.selected))
                        + tuple(repr(float(e)) for e in report.per_fold[:, i, j]))
    _write(args.out, _csv(rows))
    return EXIT_OK


def _csv(rows):
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def cmd_evaluate(args):
    settings = {}
    if args.config:
        try:
            with open(args.config, "rb") as fh:
                settings = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise InputError(f"{args.config}: {exc}") from None
    overrides = {"data_path": args.data, "method": args.method,
                 "train_proportion": args.proportion, "n_splits": args.splits,
                 "cv_folds": args.folds, "grid1": args.grid, "grid2": args.grid2,
                 "seed": args.seed, "scaling": args.scaling, "output": args.out,
                 "test_path": args.test_data, "dims": args.dims}
    settings.update({k: v for k, v in overrides.items() if v is not None})
    if "data_path" not in settings:
        raise InputError("no dataset given (--data or data_path in the config)")
    config = ExperimentConfig.from_mapping(settings)
    result = run_experiment(config)
    _write(config.output, result.to_csv())
    return EXIT_OK if result.available else EXIT_UNAVAILABLE


def cmd_bench(args):
    data = load_mts(args.data)
    report = run_bench(data, args.grids, replicate=args.replicate,
                       proportion=args.proportion, folds=args.folds, seed=args.seed,
                       repeats=args.repeats, workers=args.workers)
    _write(args.out, report.to_csv())
    return EXIT_OK


def cmd_synth(args):
    data = synth_separable(args.d1, args.d2, args.per_class, args.classes, args.gap,
                           args.sigma, args.seed)
    save_mts(args.out, data)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="matrixda",
        description="Regularized bilinear discriminant analysis for matrix-valued data.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit one model and save it as .npz")
    p.add_argument("--data", required=True)
    p.add_argument("--method", default="rblda",
                   choices=("rblda", "rlda", "blda", "pblda", "bpca"))
    p.add_argument("--r1", type=float, default=0.5)
    p.add_argument("--r2", type=float, default=0.5)
    p.add_argument("--scaling", default="w", choices=("w", "t", "unit"))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("crossval", help="cross-validated error over a parameter grid")
    p.add_argument("--data", required=True)
    p.add_argument("--method", default="rblda", choices=("rblda", "rlda"))
    p.add_argument("--grid", type=_floats, default=DEFAULT_GRID)
    p.add_argument("--grid2", type=_floats)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scaling", default="w", choices=("w", "t", "unit"))
    p.add_argument("--out")
    p.set_defaults(func=cmd_crossval)

    p = sub.add_parser("evaluate", help="repeated random-split evaluation")
    p.add_argument("--data")
    p.add_argument("--config", help="TOML file with ExperimentConfig fields")
    p.add_argument("--method", choices=("rblda", "rlda", "blda", "pblda", "bpca"))
    p.add_argument("--proportion")
    p.add_argument("--splits", type=int)
    p.add_argument("--folds", type=int)
    p.add_argument("--grid", type=_floats)
    p.add_argument("--grid2", type=_floats)
    p.add_argument("--seed", type=int)
    p.add_argument("--scaling", choices=("best", "w", "t", "unit"))
    p.add_argument("--test-data")
    p.add_argument("--dims", choices=("sweep", "full"))
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", help="time model selection against the grid size")
    p.add_argument("--data", required=True)
    p.add_argument("--replicate", type=int, default=1)
    p.add_argument("--grids", type=_ints, default=(1, 2, 5, 10, 50, 100))
    p.add_argument("--proportion", default="1/16")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("synth", help="write a synthetic separable dataset")
    p.add_argument("--d1", type=int, required=True)
    p.add_argument("--d2", type=int, required=True)
    p.add_argument("--classes", type=int, required=True)
    p.add_argument("--per-class", type=int, required=True)
    p.add_argument("--gap", type=float, default=10.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except MethodUnavailableError as exc:
        print(f"method unavailable: {exc}", file=sys.stderr)
        return EXIT_UNAVAILABLE
    except DegeneracyError as exc:
        print(f"numerical degeneracy: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (InputError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
