"""Split-conformal calibration of black-box quantile bands.

Each variant scores how far a calibration response sits outside (negative:
inside) the predicted band, takes the finite-sample-corrected empirical
quantile of those scores, and widens or shrinks the band at prediction time
by the same rule in reverse:

* ``CQR``    score  max(lo - y, y - hi);          interval  [lo - Q, hi + Q]
* ``CQR_M``  the two exceedances divided by their half-widths to the median;
             interval endpoints move by Q times the matching half-width
* ``CQR_R``  exceedance divided by the band width; endpoints move by Q times
             the width

A small ``eps`` guards the CQR_M and CQR_R denominators against zero-width
raw bands; the same eps is used at calibration and prediction time so that a
calibration point is inside its own interval exactly when its score is at or
below the threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Dataset, Interval, MethodTag, empirical_conformal_quantile
from .regressors import FittedQuantileModel, predict_median_batch, predict_pair_batch

__all__ = [
    "DEFAULT_EPS",
    "ConformalPredictor",
    "score_cqr",
    "score_cqr_m",
    "score_cqr_r",
    "calibrate",
    "predict_interval",
    "predict_interval_batch",
]

DEFAULT_EPS = 1e-6


def _check_finite(**values: float) -> None:
    for name, v in values.items():
        if not math.isfinite(v):
            raise ValueError(f"non-finite input: {name}={v}")


def score_cqr(y: float, lo: float, hi: float) -> float:
    """Signed distance of ``y`` outside [lo, hi]; negative strictly inside."""
    _check_finite(y=y, lo=lo, hi=hi)
    return max(lo - y, y - hi)


def score_cqr_m(y: float, lo: float, mid: float, hi: float, eps: float) -> float:
    """Band exceedance normalized by the half-width on the violated side."""
    _check_finite(y=y, lo=lo, mid=mid, hi=hi, eps=eps)
    return max((lo - y) / (mid - lo + eps), (y - hi) / (hi - mid + eps))


def score_cqr_r(y: float, lo: float, hi: float, eps: float) -> float:
    """Band exceedance normalized by the full band width."""
    _check_finite(y=y, lo=lo, hi=hi, eps=eps)
    return max(lo - y, y - hi) / (hi - lo + eps)


@dataclass(frozen=True)
class ConformalPredictor:
    """A fitted model plus the calibrated threshold for one method.

    ``threshold`` is +inf when the calibration set was too small for the
    requested level; intervals are then (-inf, +inf).
    """

    method: MethodTag
    model: FittedQuantileModel
    threshold: float
    alpha: float
    eps: float = DEFAULT_EPS


def _scores(
    method: MethodTag,
    model: FittedQuantileModel,
    x: np.ndarray,
    y: np.ndarray,
    eps: float,
) -> np.ndarray:
    lo, hi = predict_pair_batch(model, x)
    if method is MethodTag.CQR:
        return np.maximum(lo - y, y - hi)
    if method is MethodTag.CQR_M:
        mid = predict_median_batch(model, x)
        return np.maximum((lo - y) / (mid - lo + eps), (y - hi) / (hi - mid + eps))
    return np.maximum(lo - y, y - hi) / (hi - lo + eps)


def calibrate(
    method: MethodTag,
    model: FittedQuantileModel,
    calib: Dataset,
    alpha: float,
    eps: float = DEFAULT_EPS,
) -> ConformalPredictor:
    """Score every calibration sample and fix the method's threshold."""
    if len(calib) == 0:
        raise ValueError("empty calibration set")
    if method is MethodTag.CQR_M and model.levels.median is None:
        raise ValueError("CQR-m requires a model fitted with a median level")
    scores = _scores(method, model, calib.x, calib.y, eps)
    threshold = empirical_conformal_quantile(scores, alpha)
    return ConformalPredictor(
        method=method, model=model, threshold=threshold, alpha=alpha, eps=eps
    )


def predict_interval_batch(
    p: ConformalPredictor, x: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Interval endpoints for every row of ``x``.

    An infinite threshold yields (-inf, +inf) rows. A negative threshold can
    shrink the band past its own midpoint, in which case the interval
    collapses to a point at that midpoint.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    n = x.shape[0]
    if math.isinf(p.threshold):
        return np.full(n, -np.inf), np.full(n, np.inf)
    lo, hi = predict_pair_batch(p.model, x)
    q = p.threshold
    if p.method is MethodTag.CQR:
        l, h = lo - q, hi + q
    elif p.method is MethodTag.CQR_M:
        mid = predict_median_batch(p.model, x)
        l = lo - q * (mid - lo + p.eps)
        h = hi + q * (hi - mid + p.eps)
    else:
        w = hi - lo + p.eps
        l, h = lo - q * w, hi + q * w
    inverted = l > h
    if np.any(inverted):
        mid_pt = 0.5 * (l[inverted] + h[inverted])
        l[inverted] = mid_pt
        h[inverted] = mid_pt
    return l, h


def predict_interval(p: ConformalPredictor, x: np.ndarray) -> Interval:
    """Conformal prediction interval for a single feature vector."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"x must be a single feature vector, got shape {x.shape}")
    lo, hi = predict_interval_batch(p, x[None, :])
    return Interval(float(lo[0]), float(hi[0]))
