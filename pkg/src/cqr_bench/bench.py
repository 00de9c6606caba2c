"""Repeated-split benchmark harness.

One experiment fixes a data source, a regressor, and a set of
conformalization methods, then for every training fraction gamma and every
repetition: derives a repetition seed, splits the data, fits the regressor
once, calibrates each method on the same split and fit, and evaluates
coverage and average width on the held-out test part. Because every method
within a repetition shares the split and the fitted quantile pair, width
differences isolate the conformalization step itself.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import data as data_mod
from . import synthetic
from .conformal import DEFAULT_EPS, ConformalPredictor, calibrate, predict_interval_batch
from .core import Dataset, MethodTag, QuantileLevels
from .regressors import QuantileRegressorSpec, fit, tune_nominal_levels

__all__ = [
    "SyntheticSource",
    "CsvSource",
    "ExperimentConfig",
    "RepetitionRecord",
    "AggregateRecord",
    "ExperimentResult",
    "run_experiment",
    "evaluate",
    "emit",
]


@dataclass(frozen=True)
class SyntheticSource:
    cfg: synthetic.SyntheticConfig
    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("synthetic source needs n >= 1")


@dataclass(frozen=True)
class CsvSource:
    path: str
    target: str | int


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a benchmark run depends on, seeds included."""

    source: SyntheticSource | CsvSource
    regressor: QuantileRegressorSpec
    methods: tuple[MethodTag, ...]
    alpha: float = 0.1
    gammas: tuple[float, ...] = (0.75,)
    repetitions: int = 10
    seed: int = 0
    eps: float = DEFAULT_EPS
    tune: bool = False
    tune_target: float | None = None
    tune_folds: int = 5
    test_fraction: float = 0.2
    standardize: bool | None = None  # None: yes for CSV sources, no for synthetic

    def __post_init__(self) -> None:
        if not self.methods:
            raise ValueError("at least one conformalization method is required")
        if len(set(self.methods)) != len(self.methods):
            raise ValueError("duplicate methods in config")
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.gammas:
            raise ValueError("at least one gamma is required")
        for g in self.gammas:
            if not 0.0 < g < 1.0:
                raise ValueError(f"gamma must lie in (0, 1), got {g}")
        if self.eps < 0.0:
            raise ValueError("eps must be non-negative")
        if self.tune_target is not None and not 0.0 < self.tune_target < 1.0:
            raise ValueError("tuning target must lie in (0, 1)")

    @property
    def effective_standardize(self) -> bool:
        if self.standardize is None:
            return isinstance(self.source, CsvSource)
        return self.standardize


@dataclass(frozen=True)
class RepetitionRecord:
    method: str
    gamma: float
    repetition: int
    coverage: float
    avg_width: float | None  # None when every test interval was infinite
    n_infinite: int


@dataclass(frozen=True)
class AggregateRecord:
    method: str
    gamma: float
    coverage_mean: float
    coverage_std: float
    width_mean: float | None
    width_std: float | None


@dataclass(frozen=True)
class ExperimentResult:
    config: Mapping[str, object]
    records: tuple[RepetitionRecord, ...]
    aggregates: tuple[AggregateRecord, ...] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.aggregates is None:
            object.__setattr__(self, "aggregates", _aggregate(self.records))

    def to_json_dict(self) -> dict:
        return {
            "config": _jsonify(self.config),
            "results": [
                {
                    "method": r.method,
                    "gamma": r.gamma,
                    "repetition": r.repetition,
                    "coverage": r.coverage,
                    "avg_width": r.avg_width,
                    "n_infinite": r.n_infinite,
                }
                for r in self.records
            ],
            "aggregates": [
                {
                    "method": a.method,
                    "gamma": a.gamma,
                    "coverage_mean": a.coverage_mean,
                    "coverage_std": a.coverage_std,
                    "width_mean": a.width_mean,
                    "width_std": a.width_std,
                }
                for a in self.aggregates
            ],
        }


def _aggregate(records: Sequence[RepetitionRecord]) -> tuple[AggregateRecord, ...]:
    """Population-convention mean/std over repetitions per (method, gamma)."""
    keys: list[tuple[str, float]] = []
    for r in records:
        key = (r.method, r.gamma)
        if key not in keys:
            keys.append(key)
    out = []
    for method, gamma in keys:
        group = [r for r in records if (r.method, r.gamma) == (method, gamma)]
        cov = np.array([r.coverage for r in group])
        widths = np.array([r.avg_width for r in group if r.avg_width is not None])
        out.append(
            AggregateRecord(
                method=method,
                gamma=gamma,
                coverage_mean=float(cov.mean()),
                coverage_std=float(cov.std()),
                width_mean=float(widths.mean()) if widths.size else None,
                width_std=float(widths.std()) if widths.size else None,
            )
        )
    return tuple(out)


def evaluate(
    predictor: ConformalPredictor, test: Dataset
) -> tuple[float, float | None, int]:
    """Coverage, mean finite width, and infinite-interval count on ``test``.

    Infinite intervals trivially cover, so they count toward coverage but are
    excluded from the width average and reported separately.
    """
    if len(test) == 0:
        raise ValueError("test set is empty")
    lo, hi = predict_interval_batch(predictor, test.x)
    covered = (test.y >= lo) & (test.y <= hi)
    infinite = np.isinf(lo)
    n_inf = int(np.sum(infinite))
    finite_widths = (hi - lo)[~infinite]
    avg_width = float(finite_widths.mean()) if finite_widths.size else None
    return float(covered.mean()), avg_width, n_inf


def _derived_seeds(rep_seed: int) -> tuple[int, int]:
    """Independent integer sub-seeds (data draw, split) for one repetition."""
    state = np.random.SeedSequence(rep_seed).generate_state(2, dtype=np.uint64)
    return int(state[0]), int(state[1])


def _dataset_for_rep(cfg: ExperimentConfig, gen_seed: int, csv_cache: Dataset | None) -> Dataset:
    if isinstance(cfg.source, SyntheticSource):
        scfg = replace(cfg.source.cfg, seed=gen_seed)
        return synthetic.generate(scfg, cfg.source.n)
    assert csv_cache is not None
    return csv_cache


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Run the full (gamma x repetition x method) grid described by ``cfg``."""
    csv_cache = None
    if isinstance(cfg.source, CsvSource):
        csv_cache = data_mod.load_csv(cfg.source.path, cfg.source.target)
    need_median = MethodTag.CQR_M in cfg.methods
    records: list[RepetitionRecord] = []
    for gamma in cfg.gammas:
        for rep in range(cfg.repetitions):
            rep_seed = cfg.seed + rep
            gen_seed, split_seed = _derived_seeds(rep_seed)
            ds = _dataset_for_rep(cfg, gen_seed, csv_cache)
            train, calib, test = data_mod.split(
                ds,
                data_mod.SplitConfig(
                    gamma=gamma, test_fraction=cfg.test_fraction, seed=split_seed
                ),
            )
            if cfg.effective_standardize:
                train, calib, test, _ = data_mod.standardize_response(
                    train, calib, test
                )
            rep_spec = replace(cfg.regressor, seed=cfg.regressor.seed + rep)
            if cfg.tune:
                levels = tune_nominal_levels(
                    rep_spec,
                    train,
                    cfg.alpha,
                    folds=cfg.tune_folds,
                    target=cfg.tune_target,
                    with_median=need_median,
                )
            else:
                levels = QuantileLevels.symmetric(cfg.alpha, with_median=need_median)
            model = fit(rep_spec, train, levels)
            for method in cfg.methods:
                predictor = calibrate(method, model, calib, cfg.alpha, cfg.eps)
                coverage, avg_width, n_inf = evaluate(predictor, test)
                records.append(
                    RepetitionRecord(
                        method=method.value,
                        gamma=gamma,
                        repetition=rep,
                        coverage=coverage,
                        avg_width=avg_width,
                        n_infinite=n_inf,
                    )
                )
    return ExperimentResult(config=_config_echo(cfg), records=tuple(records))


def _config_echo(cfg: ExperimentConfig) -> dict:
    if isinstance(cfg.source, SyntheticSource):
        source: dict[str, object] = {
            "kind": "synthetic",
            "n": cfg.source.n,
            "d": cfg.source.cfg.d,
            "beta": list(map(float, cfg.source.cfg.beta)),
            "seed": cfg.source.cfg.seed,
        }
    else:
        source = {"kind": "csv", "path": str(cfg.source.path), "target": cfg.source.target}
    return {
        "source": source,
        "regressor": {
            "kind": cfg.regressor.kind.value,
            "hyperparameters": dict(cfg.regressor.hyperparameters),
            "seed": cfg.regressor.seed,
        },
        "methods": [m.value for m in cfg.methods],
        "alpha": cfg.alpha,
        "gammas": list(cfg.gammas),
        "repetitions": cfg.repetitions,
        "seed": cfg.seed,
        "eps": cfg.eps,
        "tune": {
            "enabled": cfg.tune,
            "target": cfg.tune_target,
            "folds": cfg.tune_folds,
        },
        "test_fraction": cfg.test_fraction,
        "standardize": cfg.effective_standardize,
    }


def _jsonify(value: object) -> object:
    if isinstance(value, Mapping):
        return {str(k): _jsonify(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonify(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonify(v) for v in value.tolist()]
    if isinstance(value, synthetic.SyntheticConfig):
        return {"d": value.d, "beta": list(map(float, value.beta)), "seed": value.seed}
    if isinstance(value, (MethodTag,)):
        return value.value
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def emit(result: ExperimentResult, format: str, path: str | Path) -> Path:
    """Write the result as JSON or aggregate-rows CSV; bytes are deterministic."""
    path = Path(path)
    if format == "json":
        payload = json.dumps(_jsonify(result.to_json_dict()), indent=2, allow_nan=False)
        path.write_text(payload + "\n")
    elif format == "csv":
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["method", "gamma", "coverage_mean", "coverage_std", "width_mean", "width_std"]
            )
            for a in result.aggregates:
                writer.writerow(
                    [
                        a.method,
                        repr(a.gamma),
                        repr(a.coverage_mean),
                        repr(a.coverage_std),
                        "" if a.width_mean is None else repr(a.width_mean),
                        "" if a.width_std is None else repr(a.width_std),
                    ]
                )
    else:
        raise ValueError(f"unknown output format: {format!r}")
    return path
