"""Split conformal quantile regression with pluggable black-box regressors.

The pieces compose in the usual order: fit a quantile regressor on a training
split, calibrate a conformalization method on a disjoint calibration split,
then predict intervals whose marginal coverage is guaranteed at the requested
level for exchangeable data.
"""

from .bench import (
    CsvSource,
    ExperimentConfig,
    ExperimentResult,
    SyntheticSource,
    emit,
    evaluate,
    run_experiment,
)
from .conformal import (
    DEFAULT_EPS,
    ConformalPredictor,
    calibrate,
    predict_interval,
    predict_interval_batch,
    score_cqr,
    score_cqr_m,
    score_cqr_r,
)
from .core import (
    Dataset,
    Interval,
    MethodTag,
    QuantileLevels,
    Sample,
    empirical_conformal_quantile,
)
from .data import SplitConfig, StandardizationParams, load_csv, save_csv, split, standardize_response
from .regressors import (
    FittedQuantileModel,
    QuantileRegressorSpec,
    RegressorKind,
    fit,
    pinball_loss,
    predict_median,
    predict_pair,
    tune_nominal_levels,
)
from .synthetic import SyntheticConfig, generate, oracle_expected_width, oracle_quantile

__version__ = "0.1.0"

__all__ = [
    "ConformalPredictor",
    "CsvSource",
    "Dataset",
    "DEFAULT_EPS",
    "ExperimentConfig",
    "ExperimentResult",
    "FittedQuantileModel",
    "Interval",
    "MethodTag",
    "QuantileLevels",
    "QuantileRegressorSpec",
    "RegressorKind",
    "Sample",
    "SplitConfig",
    "StandardizationParams",
    "SyntheticConfig",
    "SyntheticSource",
    "calibrate",
    "emit",
    "empirical_conformal_quantile",
    "evaluate",
    "fit",
    "generate",
    "load_csv",
    "oracle_expected_width",
    "oracle_quantile",
    "pinball_loss",
    "predict_interval",
    "predict_interval_batch",
    "predict_median",
    "predict_pair",
    "run_experiment",
    "save_csv",
    "split",
    "standardize_response",
    "tune_nominal_levels",
    "__version__",
]
