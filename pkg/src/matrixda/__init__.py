"""Regularized bilinear discriminant analysis for matrix-valued observations."""

from .bilinear import BilinearBasis, blda_fit, bpca_fit
from .dataio import SplitMix64, SplitSpec, load_mts, random_split, save_mts, synth_separable
from .estimators import BLDA, BPCA, RBLDA, RBLDACV, RLDA
from .exceptions import (DegeneracyError, DegenerateDataError, FoldDegeneracyError,
                         InputError, MethodUnavailableError, MtsParseError,
                         NotPositiveDefiniteError, SingularWithinClassError)
from .experiment import (BenchReport, ExperimentConfig, run_bench, run_experiment)
from .features import FeatureBlock, nn1_error, nn1_predict, project, sweep_errors, truncate
from .matalg import condensed_svd, count_svd_calls, gen_eig_oracle
from .modelsel import DEFAULT_GRID, CvReport, RegGrid, cross_validate, stratified_folds
from .rblda import RbldaModel, rblda_fit_v1, rblda_fit_v2, rblda_precompute
from .rlda import RldaBasis, rlda_direct, rlda_fast
from .scatter import MtsDataset, bilinear_scatters, vector_scatters
from .stats import two_step_test, wilcoxon_one_sided

__version__ = "0.1.0"

__all__ = [
    "BLDA", "BPCA", "RBLDA", "RBLDACV", "RLDA",
    "BilinearBasis", "blda_fit", "bpca_fit",
    "SplitMix64", "SplitSpec", "load_mts", "random_split", "save_mts", "synth_separable",
    "DegeneracyError", "DegenerateDataError", "FoldDegeneracyError", "InputError",
    "MethodUnavailableError", "MtsParseError", "NotPositiveDefiniteError",
    "SingularWithinClassError",
    "BenchReport", "ExperimentConfig", "run_bench", "run_experiment",
    "FeatureBlock", "nn1_error", "nn1_predict", "project", "sweep_errors", "truncate",
    "condensed_svd", "count_svd_calls", "gen_eig_oracle",
    "DEFAULT_GRID", "CvReport", "RegGrid", "cross_validate", "stratified_folds",
    "RbldaModel", "rblda_fit_v1", "rblda_fit_v2", "rblda_precompute",
    "RldaBasis", "rlda_direct", "rlda_fast",
    "MtsDataset", "bilinear_scatters", "vector_scatters",
    "two_step_test", "wilcoxon_one_sided",
]
