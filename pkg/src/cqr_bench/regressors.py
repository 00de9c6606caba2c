"""Pluggable black-box quantile regression behind one fit/predict surface.

Four regressors are provided:

* ``LINEAR_PINBALL`` -- one linear model per level, trained by full-batch
  subgradient descent on the pinball loss with internally standardized
  features.
* ``QRF`` -- the from-scratch quantile regression forest in :mod:`.forest`.
* ``KNN`` -- empirical quantiles over the k nearest training responses.
* ``ORACLE`` -- exact conditional quantiles of the synthetic generator,
  useful as a consistency benchmark (it ignores the training data).

Whatever the regressor, :func:`predict_pair` repairs quantile crossing by
swapping an inverted pair, and :func:`predict_median` clamps the raw median
into the (post-swap) pair so the three levels are always ordered.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Mapping

import numpy as np

from . import synthetic
from .core import Dataset, QuantileLevels
from .forest import QuantileForest

__all__ = [
    "RegressorKind",
    "QuantileRegressorSpec",
    "FittedQuantileModel",
    "fit",
    "predict_pair",
    "predict_pair_batch",
    "predict_median",
    "predict_median_batch",
    "tune_nominal_levels",
    "pinball_loss",
    "TUNING_GRID_FACTORS",
]


class RegressorKind(Enum):
    LINEAR_PINBALL = "linear"
    QRF = "qrf"
    KNN = "knn"
    ORACLE = "oracle"

    def __str__(self) -> str:
        return self.value


_DEFAULTS: dict[RegressorKind, dict] = {
    RegressorKind.LINEAR_PINBALL: {"epochs": 2000, "learning_rate": 0.1},
    RegressorKind.QRF: {"n_trees": 100, "min_leaf": 5, "mtry": None},
    RegressorKind.KNN: {"k": None},  # None: ceil(sqrt(n)) at fit time
    RegressorKind.ORACLE: {"config": None},  # None: default synthetic config
}


@dataclass(frozen=True)
class QuantileRegressorSpec:
    """Which regressor to fit, with kind-specific hyperparameters and a seed."""

    kind: RegressorKind
    hyperparameters: Mapping[str, object] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self) -> None:
        allowed = _DEFAULTS[self.kind]
        unknown = set(self.hyperparameters) - set(allowed)
        if unknown:
            raise ValueError(
                f"unknown hyperparameters for {self.kind.value}: {sorted(unknown)}"
            )
        merged = {**allowed, **dict(self.hyperparameters)}
        object.__setattr__(self, "hyperparameters", merged)
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")
        k = self.kind
        h = merged
        if k is RegressorKind.LINEAR_PINBALL:
            if int(h["epochs"]) < 1:
                raise ValueError("epochs must be at least 1")
            if not float(h["learning_rate"]) > 0:
                raise ValueError("learning rate must be positive")
        elif k is RegressorKind.QRF:
            if int(h["n_trees"]) < 1:
                raise ValueError("tree count must be at least 1")
            if int(h["min_leaf"]) < 1:
                raise ValueError("min_leaf must be at least 1")
            if h["mtry"] is not None and int(h["mtry"]) < 1:
                raise ValueError("mtry must be at least 1")
        elif k is RegressorKind.KNN:
            if h["k"] is not None and int(h["k"]) < 1:
                raise ValueError("k must be at least 1")
        elif k is RegressorKind.ORACLE:
            cfg = h["config"]
            if cfg is not None and not isinstance(cfg, synthetic.SyntheticConfig):
                raise ValueError("oracle config must be a SyntheticConfig")


@dataclass(frozen=True)
class FittedQuantileModel:
    """A trained regressor bound to its levels; ``state`` is the fitted core."""

    spec: QuantileRegressorSpec
    levels: QuantileLevels
    state: object

    @property
    def d(self) -> int:
        return self.state.d  # type: ignore[attr-defined]


def pinball_loss(y_true: np.ndarray, y_pred: np.ndarray, tau: float) -> float:
    """Mean pinball (quantile) loss; minimized by the tau-quantile."""
    u = np.asarray(y_true, dtype=float) - np.asarray(y_pred, dtype=float)
    return float(np.mean(np.where(u >= 0, tau * u, (tau - 1.0) * u)))


class _LinearPinball:
    """Per-level linear quantile fits, subgradient-trained.

    Features are standardized internally; ``coef_`` and ``intercept_`` are
    reported in the original feature space. The parameters kept per level are
    the best iterate seen during training, the usual safeguard for
    subgradient methods whose last iterate oscillates.
    """

    def __init__(self, x: np.ndarray, y: np.ndarray, taus: tuple[float, ...],
                 epochs: int, lr: float) -> None:
        self.d = x.shape[1]
        mu = x.mean(axis=0)
        sd = x.std(axis=0)
        sd[sd == 0.0] = 1.0  # constant features carry no signal but must not blow up
        self._mu, self._sd = mu, sd
        xs = (x - mu) / sd
        n = x.shape[0]
        self._params: dict[float, tuple[np.ndarray, float]] = {}
        self.coef_: dict[float, np.ndarray] = {}
        self.intercept_: dict[float, float] = {}
        for tau in taus:
            w = np.zeros(self.d)
            b = 0.0
            best = (math.inf, w, b)
            for t in range(1, epochs + 1):
                resid = y - (xs @ w + b)
                loss = float(
                    np.mean(np.where(resid >= 0, tau * resid, (tau - 1.0) * resid))
                )
                if loss < best[0]:
                    best = (loss, w.copy(), b)
                g = (resid < 0).astype(float) - tau  # d pinball / d prediction
                step = lr / math.sqrt(t)
                w = w - step * (xs.T @ g) / n
                b = b - step * float(np.mean(g))
            resid = y - (xs @ w + b)
            loss = float(np.mean(np.where(resid >= 0, tau * resid, (tau - 1.0) * resid)))
            if loss < best[0]:
                best = (loss, w, b)
            _, w, b = best
            self._params[tau] = (w, b)
            self.coef_[tau] = w / sd
            self.intercept_[tau] = float(b - np.sum(w * mu / sd))

    def predict_quantiles(self, x: np.ndarray, taus: tuple[float, ...]) -> np.ndarray:
        xs = (x - self._mu) / self._sd
        cols = [xs @ self._params[tau][0] + self._params[tau][1] for tau in taus]
        return np.column_stack(cols)


class _KNN:
    """Empirical quantiles over the k nearest neighbors (Euclidean)."""

    def __init__(self, x: np.ndarray, y: np.ndarray, k: int) -> None:
        self.d = x.shape[1]
        self._x = x
        self._y = y
        self.k = k

    def predict_quantiles(self, x: np.ndarray, taus: tuple[float, ...]) -> np.ndarray:
        # squared distances via expansion; stable argsort makes ties deterministic
        d2 = (
            np.sum(x * x, axis=1)[:, None]
            - 2.0 * x @ self._x.T
            + np.sum(self._x * self._x, axis=1)[None, :]
        )
        nearest = np.argsort(d2, axis=1, kind="stable")[:, : self.k]
        neigh = np.sort(self._y[nearest], axis=1)
        out = np.empty((x.shape[0], len(taus)))
        for t, tau in enumerate(taus):
            r = min(max(math.ceil(tau * self.k), 1), self.k)
            out[:, t] = neigh[:, r - 1]
        return out


class _ForestState:
    def __init__(self, forest: QuantileForest, d: int) -> None:
        self._forest = forest
        self.d = d

    def predict_quantiles(self, x: np.ndarray, taus: tuple[float, ...]) -> np.ndarray:
        return self._forest.predict_quantiles(x, taus)


class _OracleState:
    def __init__(self, cfg: synthetic.SyntheticConfig) -> None:
        self._cfg = cfg
        self.d = cfg.d

    def predict_quantiles(self, x: np.ndarray, taus: tuple[float, ...]) -> np.ndarray:
        cols = [synthetic.oracle_quantile_batch(self._cfg, x, tau) for tau in taus]
        return np.column_stack(cols)


def fit(
    spec: QuantileRegressorSpec, train: Dataset, levels: QuantileLevels
) -> FittedQuantileModel:
    """Train the regressor described by ``spec`` at the requested levels.

    Fitting is sequential and deterministic: the same spec, seed, and data
    produce identical prediction functions.
    """
    if len(train) == 0:
        raise ValueError("training set is empty")
    h = spec.hyperparameters
    taus = levels.taus
    if spec.kind is RegressorKind.LINEAR_PINBALL:
        state: object = _LinearPinball(
            train.x, train.y, taus, int(h["epochs"]), float(h["learning_rate"])
        )
    elif spec.kind is RegressorKind.QRF:
        forest = QuantileForest(
            n_trees=int(h["n_trees"]),
            min_leaf=int(h["min_leaf"]),
            mtry=None if h["mtry"] is None else int(h["mtry"]),
            seed=spec.seed,
        ).fit(train.x, train.y)
        state = _ForestState(forest, train.d)
    elif spec.kind is RegressorKind.KNN:
        k = h["k"]
        k = math.ceil(math.sqrt(len(train))) if k is None else int(k)
        k = min(k, len(train))
        state = _KNN(train.x, train.y, k)
    else:
        cfg = h["config"]
        if cfg is None:
            cfg = synthetic.SyntheticConfig(d=train.d)
        if cfg.d != train.d:
            raise ValueError(
                f"oracle config dimension {cfg.d} does not match data dimension {train.d}"
            )
        state = _OracleState(cfg)
    return FittedQuantileModel(spec=spec, levels=levels, state=state)


def _check_dim(model: FittedQuantileModel, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != model.d:
        raise ValueError(f"expected feature dimension {model.d}, got shape {x.shape}")
    return x


def predict_pair_batch(
    model: FittedQuantileModel, x: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Lower/upper predictions for every row of ``x``, crossing-repaired."""
    x = _check_dim(model, x)
    raw = model.state.predict_quantiles(  # type: ignore[attr-defined]
        x, (model.levels.alpha_lo, model.levels.alpha_up)
    )
    lo, hi = raw[:, 0], raw[:, 1]
    return np.minimum(lo, hi), np.maximum(lo, hi)


def predict_pair(model: FittedQuantileModel, x: np.ndarray) -> tuple[float, float]:
    """Predictions at (alpha_lo, alpha_up) for one point; swapped if inverted."""
    lo, hi = predict_pair_batch(model, np.asarray(x, dtype=float)[None, :])
    return float(lo[0]), float(hi[0])


def predict_median_batch(model: FittedQuantileModel, x: np.ndarray) -> np.ndarray:
    """Median predictions clamped into the (post-swap) pair for every row."""
    if model.levels.median is None:
        raise ValueError("model was fitted without a median level")
    x = _check_dim(model, x)
    raw = model.state.predict_quantiles(  # type: ignore[attr-defined]
        x, (model.levels.alpha_lo, model.levels.median, model.levels.alpha_up)
    )
    lo = np.minimum(raw[:, 0], raw[:, 2])
    hi = np.maximum(raw[:, 0], raw[:, 2])
    return np.clip(raw[:, 1], lo, hi)


def predict_median(model: FittedQuantileModel, x: np.ndarray) -> float:
    return float(predict_median_batch(model, np.asarray(x, dtype=float)[None, :])[0])


# nominal miscoverage candidates, as multiples of the target alpha
TUNING_GRID_FACTORS = (0.25, 0.5, 1.0, 1.5, 2.0, 3.0)


def tune_nominal_levels(
    spec: QuantileRegressorSpec,
    train: Dataset,
    alpha: float,
    folds: int,
    target: float | None = None,
    with_median: bool = False,
    fit_function: Callable[..., FittedQuantileModel] = fit,
) -> QuantileLevels:
    """Pick symmetric nominal levels by cross-validated raw coverage.

    Grid-searches a nominal miscoverage beta over ``alpha`` times
    :data:`TUNING_GRID_FACTORS` and returns the levels (beta/2, 1 - beta/2)
    whose K-fold raw (unconformalized) coverage is closest to ``target``.
    Asking the black box for a band narrower than the final level and letting
    calibration widen it often beats requesting the final level directly, so
    the default target is 1 - 2*alpha. Ties keep the first candidate in grid
    order.
    """
    if folds < 2:
        raise ValueError("folds must be at least 2")
    n = len(train)
    if n < folds:
        raise ValueError(f"insufficient data for folding: {n} samples, {folds} folds")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if target is None:
        target = 1.0 - 2.0 * alpha
    betas = [f * alpha for f in TUNING_GRID_FACTORS if 0.0 < f * alpha < 1.0]

    rng = np.random.default_rng(spec.seed)
    perm = rng.permutation(n)
    fold_parts = np.array_split(perm, folds)

    best_beta = betas[0]
    best_gap = math.inf
    for beta in betas:
        levels = QuantileLevels(beta / 2.0, 1.0 - beta / 2.0)
        covered = 0
        for i, heldout in enumerate(fold_parts):
            rest = np.concatenate([p for j, p in enumerate(fold_parts) if j != i])
            fold_spec = replace(spec, seed=spec.seed + i + 1)
            model = fit_function(fold_spec, train.subset(rest), levels)
            lo, hi = predict_pair_batch(model, train.x[heldout])
            yh = train.y[heldout]
            covered += int(np.sum((yh >= lo) & (yh <= hi)))
        gap = abs(covered / n - target)
        if gap < best_gap:
            best_gap = gap
            best_beta = beta
    return QuantileLevels.symmetric(best_beta, with_median=with_median)
