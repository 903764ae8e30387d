"""Univariate series container, CSV ingestion, chronological splitting, scaling."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np


class Frequency(str, Enum):
    FIVE_MIN = "five_min"
    DAILY = "daily"
    WEEKLY = "weekly"
    MONTHLY = "monthly"
    OTHER = "other"


@dataclass(frozen=True)
class TimeSeries:
    """Ordered real-valued observations; index i maps to time start_index + i."""

    values: np.ndarray
    start_index: int = 0
    frequency: Frequency = Frequency.OTHER

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("a TimeSeries needs a non-empty 1-D value array")
        if not np.all(np.isfinite(arr)):
            raise ValueError("TimeSeries values must be finite (no NaN/inf)")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return self.values.size

    @property
    def n(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class SplitSpec:
    """Chronological holdout: the last test_len observations form the test split."""

    test_len: int

    def __post_init__(self):
        if self.test_len < 1:
            raise ValueError("test_len must be a positive integer")


@dataclass(frozen=True)
class AffineScaler:
    """x -> (x - shift) / scale, with an exact inverse."""

    shift: float
    scale: float

    def __post_init__(self):
        if not (self.scale > 0):
            raise ValueError("scale must be strictly positive")

    def apply(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) - self.shift) / self.scale

    def invert(self, x) -> np.ndarray:
        return np.asarray(x, dtype=np.float64) * self.scale + self.shift


def load_csv(
    path,
    column: int | str = 0,
    has_header: bool | None = None,
    frequency: Frequency = Frequency.OTHER,
) -> TimeSeries:
    """Read one numeric column from a CSV file.

    ``column`` may be a 0-based index or a header name. ``has_header=None``
    treats the file as headered exactly when ``column`` is a name.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    if has_header is None:
        has_header = isinstance(column, str)

    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        rows = [row for row in reader if row and any(cell.strip() for cell in row)]

    if not rows:
        raise ValueError(f"{path}: file is empty")

    col_idx: int
    if has_header:
        header, rows = rows[0], rows[1:]
        if isinstance(column, str):
            try:
                col_idx = [name.strip() for name in header].index(column)
            except ValueError:
                raise ValueError(f"{path}: no column named {column!r}") from None
        else:
            col_idx = column
    else:
        if isinstance(column, str):
            raise ValueError("column given by name requires a header row")
        col_idx = column

    if not rows:
        raise ValueError(f"{path}: column has no data rows")

    values = np.empty(len(rows), dtype=np.float64)
    offset = 2 if has_header else 1  # 1-based file row of the first data row
    for i, row in enumerate(rows):
        if col_idx >= len(row):
            raise ValueError(f"{path}: row {i + offset} has no column {col_idx}")
        cell = row[col_idx].strip()
        try:
            values[i] = float(cell)
        except ValueError:
            raise ValueError(
                f"{path}: non-numeric value {cell!r} at row {i + offset}"
            ) from None

    return TimeSeries(values, frequency=frequency)


def save_csv(series: TimeSeries, path, column_name: str = "value") -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([column_name])
        for v in series.values:
            writer.writerow([repr(float(v))])


def split(series: TimeSeries, spec: SplitSpec) -> tuple[TimeSeries, TimeSeries]:
    """Chronological train/test split; concatenation restores the original."""
    h = spec.test_len
    if h >= series.n:
        raise ValueError(
            f"test_len {h} must be smaller than the series length {series.n}"
        )
    train = TimeSeries(series.values[: series.n - h], series.start_index, series.frequency)
    test = TimeSeries(
        series.values[series.n - h :],
        series.start_index + series.n - h,
        series.frequency,
    )
    return train, test


def fit_scaler(train: TimeSeries | np.ndarray) -> AffineScaler:
    """Z-score scaler fit on training values; constant series fall back to scale 1."""
    values = train.values if isinstance(train, TimeSeries) else np.asarray(train, float)
    shift = float(np.mean(values))
    scale = float(np.std(values))  # population std
    if scale == 0.0 or not np.isfinite(scale):
        scale = 1.0
    return AffineScaler(shift=shift, scale=scale)
