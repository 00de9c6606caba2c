"""Shared domain types and the finite-sample calibration quantile.

Everything in this module is immutable after construction and safe to share
between threads. The one nontrivial computation is
:func:`empirical_conformal_quantile`, the order statistic that turns a set of
calibration scores into an interval-adjustment threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Sequence

import numpy as np

__all__ = [
    "Sample",
    "Dataset",
    "QuantileLevels",
    "Interval",
    "MethodTag",
    "empirical_conformal_quantile",
]


class MethodTag(Enum):
    """Conformalization variant.

    CQR shifts both interval endpoints by a constant, CQR_M rescales the two
    half-widths around an estimated median, and CQR_R rescales proportionally
    to the full interval width. CQR_M is the only variant that needs a model
    exposing a median prediction.
    """

    CQR = "cqr"
    CQR_M = "cqr-m"
    CQR_R = "cqr-r"

    def __str__(self) -> str:  # serialization-friendly
        return self.value


def _require_finite_vector(x: np.ndarray, what: str) -> None:
    if x.ndim != 1:
        raise ValueError(f"{what} must be one-dimensional, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{what} contains non-finite values")


@dataclass(frozen=True)
class Sample:
    """One observation: a feature vector ``x`` and a scalar response ``y``."""

    x: np.ndarray
    y: float

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float)
        x.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", float(self.y))
        _require_finite_vector(x, "sample features")
        if not math.isfinite(self.y):
            raise ValueError("sample response must be finite")


class Dataset:
    """A feature matrix ``x`` of shape (n, d) with responses ``y`` of shape (n,).

    Arrays are copied, validated to be finite, and frozen, so a Dataset can be
    handed to concurrent tasks without defensive copies.
    """

    __slots__ = ("x", "y")

    def __init__(self, x: np.ndarray, y: np.ndarray) -> None:
        x = np.array(x, dtype=float)
        y = np.array(y, dtype=float)
        if x.ndim != 2:
            raise ValueError(f"feature matrix must be 2-d, got shape {x.shape}")
        if y.ndim != 1 or y.shape[0] != x.shape[0]:
            raise ValueError(
                f"response vector shape {y.shape} does not match {x.shape[0]} rows"
            )
        if not np.all(np.isfinite(x)):
            raise ValueError("feature matrix contains non-finite values")
        if not np.all(np.isfinite(y)):
            raise ValueError("response vector contains non-finite values")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("Dataset is immutable")

    @classmethod
    def from_samples(cls, samples: Sequence[Sample]) -> "Dataset":
        if not samples:
            raise ValueError("cannot build a Dataset from zero samples")
        d = samples[0].x.shape[0]
        for s in samples:
            if s.x.shape[0] != d:
                raise ValueError("samples have inconsistent feature dimensions")
        return cls(np.stack([s.x for s in samples]), np.array([s.y for s in samples]))

    @property
    def d(self) -> int:
        return self.x.shape[1]

    def __len__(self) -> int:
        return self.x.shape[0]

    def samples(self) -> Iterator[Sample]:
        for i in range(len(self)):
            yield Sample(self.x[i], float(self.y[i]))

    def subset(self, indices: np.ndarray) -> "Dataset":
        return Dataset(self.x[indices], self.y[indices])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return np.array_equal(self.x, other.x) and np.array_equal(self.y, other.y)

    def __repr__(self) -> str:
        return f"Dataset(n={len(self)}, d={self.d})"


@dataclass(frozen=True)
class QuantileLevels:
    """The quantile levels a black-box regressor is asked to estimate.

    ``median`` is optional; when present it must be exactly 0.5 (the model
    then additionally estimates a conditional median, which CQR_M requires).
    """

    alpha_lo: float
    alpha_up: float
    median: float | None = None

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha_lo < 1.0 and 0.0 < self.alpha_up < 1.0):
            raise ValueError("quantile levels must lie in (0, 1)")
        if not self.alpha_lo < self.alpha_up:
            raise ValueError(
                f"alpha_lo must be below alpha_up, got ({self.alpha_lo}, {self.alpha_up})"
            )
        if self.median is not None:
            if self.median != 0.5:
                raise ValueError("the median level, when present, must be 0.5")
            if not (self.alpha_lo < 0.5 < self.alpha_up):
                raise ValueError("median level requires alpha_lo < 0.5 < alpha_up")

    @classmethod
    def symmetric(cls, alpha: float, with_median: bool = False) -> "QuantileLevels":
        """Equal-tail levels (alpha/2, 1 - alpha/2) for miscoverage ``alpha``."""
        if not 0.0 < alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        return cls(alpha / 2.0, 1.0 - alpha / 2.0, 0.5 if with_median else None)

    @property
    def taus(self) -> tuple[float, ...]:
        if self.median is None:
            return (self.alpha_lo, self.alpha_up)
        return (self.alpha_lo, self.median, self.alpha_up)


@dataclass(frozen=True)
class Interval:
    """A closed prediction interval [lo, hi].

    The only admissible non-finite form is (-inf, +inf), the sentinel produced
    when the calibration set is too small to support a finite threshold.
    """

    lo: float
    hi: float

    def __post_init__(self) -> None:
        lo, hi = float(self.lo), float(self.hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if math.isnan(lo) or math.isnan(hi):
            raise ValueError("interval endpoints must not be NaN")
        if math.isinf(lo) or math.isinf(hi):
            if not (lo == -math.inf and hi == math.inf):
                raise ValueError(
                    "only the degenerate (-inf, +inf) interval may be non-finite"
                )
        elif lo > hi:
            raise ValueError(f"interval endpoints out of order: ({lo}, {hi})")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.lo)

    def contains(self, y: float) -> bool:
        return self.lo <= y <= self.hi


def empirical_conformal_quantile(
    scores: Sequence[float] | np.ndarray, alpha: float
) -> float:
    """Finite-sample-corrected empirical (1 - alpha) quantile of ``scores``.

    Returns the k-th smallest score (duplicates kept) with

        k = ceil((1 - alpha) * (m + 1)),   m = len(scores).

    The +1 is the usual split-conformal correction: calibrating an interval
    with this threshold guarantees marginal coverage at least 1 - alpha. When
    k exceeds m the calibration set cannot support the level at all and +inf
    is returned, which downstream turns into a (-inf, +inf) interval.

    Raises
    ------
    ValueError
        On an empty score sequence ("empty calibration set"), any non-finite
        score ("invalid score"), or alpha outside (0, 1).
    """
    arr = np.asarray(scores, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"scores must be one-dimensional, got shape {arr.shape}")
    m = arr.shape[0]
    if m == 0:
        raise ValueError("empty calibration set")
    if not np.all(np.isfinite(arr)):
        raise ValueError("invalid score: scores must be finite")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    k = math.ceil((1.0 - alpha) * (m + 1))
    if k > m:
        return math.inf
    # k >= 1 always since (1 - alpha) * (m + 1) > 0
    return float(np.partition(arr, k - 1)[k - 1])
