"""Dataset ingestion and the train / calibration / test split protocol."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import Dataset

__all__ = [
    "SplitConfig",
    "StandardizationParams",
    "load_csv",
    "save_csv",
    "split",
    "standardize_response",
]


@dataclass(frozen=True)
class SplitConfig:
    """How to partition a dataset.

    ``test_fraction`` of the data is held out first, then ``gamma`` of the
    remainder goes to training and the rest to calibration. ``fixed_counts``
    = (train_n, calib_n, test_n) overrides both fractions; the counts must
    sum to the dataset size so the three parts partition the input.
    """

    gamma: float
    test_fraction: float = 0.2
    seed: int = 0
    fixed_counts: tuple[int, int, int] | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        if not 0.0 <= self.test_fraction < 1.0:
            raise ValueError(
                f"test_fraction must lie in [0, 1), got {self.test_fraction}"
            )
        if self.fixed_counts is not None:
            if len(self.fixed_counts) != 3 or any(c < 1 for c in self.fixed_counts):
                raise ValueError("fixed_counts must be three positive integers")


@dataclass(frozen=True)
class StandardizationParams:
    """Response scale: the mean absolute response of the training part."""

    scale: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise ValueError("scale must be a positive finite number")


def load_csv(path: str | Path, target_column: str | int) -> Dataset:
    """Read a headered numeric CSV into a Dataset.

    ``target_column`` selects the response by header name or 0-based column
    index; all remaining columns become features in header order. Every cell
    must parse as a finite number; offenders are reported with their data row
    and column name.
    """
    path = Path(path)
    if not path.exists():
        raise ValueError(f"no such file: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"empty file: {path}") from None
        header = [h.strip() for h in header]
        if isinstance(target_column, int):
            if not 0 <= target_column < len(header):
                raise ValueError(
                    f"target column index {target_column} out of range for {len(header)} columns"
                )
            t_idx = target_column
        else:
            if target_column not in header:
                raise ValueError(f"target column {target_column!r} not found in header")
            t_idx = header.index(target_column)
        rows: list[list[float]] = []
        for r, row in enumerate(reader, start=1):
            if len(row) != len(header):
                raise ValueError(
                    f"row {r}: expected {len(header)} cells, got {len(row)}"
                )
            parsed = []
            for c, cell in enumerate(row):
                try:
                    v = float(cell)
                except ValueError:
                    raise ValueError(
                        f"row {r}, column {header[c]!r}: non-numeric cell {cell!r}"
                    ) from None
                if not math.isfinite(v):
                    raise ValueError(
                        f"row {r}, column {header[c]!r}: non-finite cell {cell!r}"
                    )
                parsed.append(v)
            rows.append(parsed)
    if not rows:
        raise ValueError(f"no data rows in {path}")
    mat = np.asarray(rows, dtype=float)
    feat = [i for i in range(len(header)) if i != t_idx]
    return Dataset(mat[:, feat], mat[:, t_idx])


def save_csv(
    ds: Dataset,
    path: str | Path,
    target_name: str = "target",
    feature_names: Sequence[str] | None = None,
) -> None:
    """Write a Dataset in the format :func:`load_csv` reads (target last)."""
    if feature_names is None:
        feature_names = [f"x{i + 1}" for i in range(ds.d)]
    if len(feature_names) != ds.d:
        raise ValueError("feature_names length does not match dataset dimension")
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(feature_names) + [target_name])
        for i in range(len(ds)):
            writer.writerow([repr(float(v)) for v in ds.x[i]] + [repr(float(ds.y[i]))])


def split(ds: Dataset, cfg: SplitConfig) -> tuple[Dataset, Dataset, Dataset]:
    """Seeded random partition into (train, calibration, test).

    The shuffled order is consumed test part first, then ``floor(gamma * m)``
    (at least 1) of the remaining m for training, calibration last. All three
    parts must come out non-empty.
    """
    n = len(ds)
    rng = np.random.default_rng(cfg.seed)
    perm = rng.permutation(n)
    if cfg.fixed_counts is not None:
        train_n, calib_n, test_n = cfg.fixed_counts
        if train_n + calib_n + test_n != n:
            raise ValueError(
                f"fixed_counts sum to {train_n + calib_n + test_n}, dataset has {n} rows"
            )
    else:
        test_n = int(cfg.test_fraction * n)
        m = n - test_n
        train_n = max(1, int(cfg.gamma * m))
        calib_n = m - train_n
    if min(train_n, calib_n, test_n) < 1:
        raise ValueError(
            f"insufficient samples: n={n} gives sizes "
            f"(train={train_n}, calib={calib_n}, test={test_n})"
        )
    test = perm[:test_n]
    train = perm[test_n : test_n + train_n]
    calib = perm[test_n + train_n :]
    return ds.subset(train), ds.subset(calib), ds.subset(test)


def standardize_response(
    train: Dataset, calib: Dataset, test: Dataset
) -> tuple[Dataset, Dataset, Dataset, StandardizationParams]:
    """Divide all responses by the training-part mean absolute response.

    The scale comes from the training part only, so no information leaks
    from calibration or test responses. Features are untouched.
    """
    scale = float(np.mean(np.abs(train.y)))
    if scale == 0.0:
        raise ValueError("cannot standardize: training responses are all zero")
    params = StandardizationParams(scale=scale)
    out = tuple(Dataset(part.x, part.y / scale) for part in (train, calib, test))
    return out[0], out[1], out[2], params
