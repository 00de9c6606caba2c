import numpy as np
import pytest

from cqr_bench.core import Dataset, QuantileLevels
from cqr_bench.regressors import FittedQuantileModel, QuantileRegressorSpec, RegressorKind


def dummy_spec() -> QuantileRegressorSpec:
    return QuantileRegressorSpec(RegressorKind.KNN, {"k": 1})


class ArrayState:
    """Fitted-state stand-in with preset per-row raw predictions.

    Feature vectors are single-column integer row indices into the preset
    arrays, so tests can force any raw (lo, mid, hi) pattern, including
    crossed or zero-width bands.
    """

    d = 1

    def __init__(self, by_tau: dict[float, np.ndarray]):
        self.by_tau = {t: np.asarray(v, dtype=float) for t, v in by_tau.items()}

    def predict_quantiles(self, x, taus):
        idx = x[:, 0].astype(int)
        return np.column_stack([self.by_tau[t][idx] for t in taus])


def array_model(lo, hi, mid=None, levels=None) -> FittedQuantileModel:
    levels = levels or QuantileLevels(0.05, 0.95, 0.5 if mid is not None else None)
    by_tau = {levels.alpha_lo: np.asarray(lo), levels.alpha_up: np.asarray(hi)}
    if mid is not None:
        by_tau[0.5] = np.asarray(mid)
    return FittedQuantileModel(spec=dummy_spec(), levels=levels, state=ArrayState(by_tau))


def band_model(lo: float, hi: float, mid: float | None = None, n: int = 1) -> FittedQuantileModel:
    """Model predicting the same raw band everywhere (n index rows)."""
    ones = np.ones(n)
    return array_model(lo * ones, hi * ones, None if mid is None else mid * ones)


def index_dataset(y) -> Dataset:
    """Dataset whose feature column is the row index, for use with ArrayState."""
    y = np.asarray(y, dtype=float)
    return Dataset(np.arange(len(y), dtype=float)[:, None], y)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
