"""Series ingestion, cleaning, scaling, and windowing.

All operations are pure: they take an immutable :class:`TimeSeries` and
return new objects.  Missing observations are represented by ``None`` (never
by NaN or a magic number) so that an unfilled gap fails loudly downstream.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "DataError",
    "TimeSeries",
    "ScalingParams",
    "load_csv",
    "with_missing",
    "interpolate_missing",
    "flag_outliers",
    "clean_series",
    "normalize_minmax",
    "denormalize",
    "sliding_windows",
    "train_test_split",
]

#: cell contents that parse to a missing observation
MISSING_TOKENS = frozenset({"", "NA", "?"})


class DataError(ValueError):
    """Raised for malformed or insufficient input data."""


def _check_value(v, where: str) -> None:
    if v is None:
        return
    if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
        raise DataError(f"{where}: values must be finite reals or None, got {v!r}")


@dataclass(frozen=True)
class TimeSeries:
    """Ordered real-valued observations with optional timestamps.

    ``values`` entries are floats or ``None`` (missing).  Timestamps, when
    present, must be strictly increasing and aligned with ``values``.
    """

    name: str
    values: tuple
    timestamps: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if not self.values:
            raise DataError(f"series {self.name!r}: empty value sequence")
        for v in self.values:
            _check_value(v, f"series {self.name!r}")
        if self.timestamps is not None:
            ts = tuple(self.timestamps)
            object.__setattr__(self, "timestamps", ts)
            if len(ts) != len(self.values):
                raise DataError(
                    f"series {self.name!r}: {len(ts)} timestamps for "
                    f"{len(self.values)} values"
                )
            for a, b in zip(ts, ts[1:]):
                if not a < b:
                    raise DataError(
                        f"series {self.name!r}: timestamps not strictly increasing"
                    )

    def __len__(self) -> int:
        return len(self.values)

    @property
    def missing_indices(self) -> tuple:
        return tuple(i for i, v in enumerate(self.values) if v is None)

    def require_complete(self) -> np.ndarray:
        """Return values as a float array; error if any observation is missing."""
        if any(v is None for v in self.values):
            raise DataError(
                f"series {self.name!r}: contains missing values; "
                "interpolate before modeling"
            )
        return np.asarray(self.values, dtype=np.float64)


@dataclass(frozen=True)
class ScalingParams:
    """Min-max scaling parameters retained for the inverse transform."""

    min: float
    max: float

    def __post_init__(self):
        if not (math.isfinite(self.min) and math.isfinite(self.max)):
            raise ValueError("scaling bounds must be finite")
        if not self.max > self.min:
            raise ValueError(f"degenerate range: max ({self.max}) must exceed min ({self.min})")

    @property
    def span(self) -> float:
        return self.max - self.min


def _parse_timestamp(cell: str, row: int):
    cell = cell.strip()
    try:
        return float(cell)
    except ValueError:
        pass
    try:
        return datetime.fromisoformat(cell)
    except ValueError:
        raise DataError(f"row {row}: unparseable timestamp {cell!r}") from None


def _resolve_column(header: Sequence[str], column, what: str) -> int:
    if isinstance(column, int):
        if not 0 <= column < len(header):
            raise DataError(f"{what} column index {column} out of range (header has {len(header)} columns)")
        return column
    try:
        return header.index(column)
    except ValueError:
        raise DataError(f"{what} column {column!r} not in header {list(header)}") from None


def load_csv(path, value_column, timestamp_column=None) -> TimeSeries:
    """Load one value column (and optionally timestamps) from a CSV file.

    The file must have a single header row.  Columns are selected by name or
    zero-based index.  Cells equal to ``""``, ``"NA"``, or ``"?"``, and any
    cell that does not parse as a real number, become missing observations
    for :func:`interpolate_missing` to fill.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such data file: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        vcol = _resolve_column(header, value_column, "value")
        tcol = None
        if timestamp_column is not None:
            tcol = _resolve_column(header, timestamp_column, "timestamp")

        values: list = []
        stamps: list = []
        parseable = 0
        for rownum, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            cell = row[vcol].strip() if vcol < len(row) else ""
            if cell in MISSING_TOKENS:
                values.append(None)
            else:
                try:
                    v = float(cell)
                except ValueError:
                    v = None
                if v is not None and not math.isfinite(v):
                    v = None
                values.append(v)
                if v is not None:
                    parseable += 1
            if tcol is not None:
                tcell = row[tcol] if tcol < len(row) else ""
                stamps.append(_parse_timestamp(tcell, rownum))

    if parseable == 0:
        raise DataError(f"{path}: zero parseable rows in column {value_column!r}")
    return TimeSeries(
        name=path.stem,
        values=tuple(values),
        timestamps=tuple(stamps) if tcol is not None else None,
    )


def with_missing(series: TimeSeries, indices: Iterable[int]) -> TimeSeries:
    """Return a copy with the given positions marked missing."""
    idx = set(indices)
    bad = [i for i in idx if not 0 <= i < len(series)]
    if bad:
        raise ValueError(f"indices out of range: {sorted(bad)}")
    vals = tuple(None if i in idx else v for i, v in enumerate(series.values))
    return TimeSeries(series.name, vals, series.timestamps)


def interpolate_missing(series: TimeSeries, n: int = 1) -> TimeSeries:
    """Fill missing positions by averaging the valid neighbors within distance ``n``.

    With a full neighborhood this is the symmetric average
    ``sum(x[t-i] + x[t+i] for i in 1..n) / (2n)``.  Neighbor values are taken
    from the original series (other flagged positions never contribute), and
    a flagged position with no valid neighbor on either side is a hard error
    naming the index.  Non-flagged values are returned unchanged, bit for bit.
    """
    if n < 1:
        raise ValueError("neighborhood half-width n must be >= 1")
    vals = list(series.values)
    filled = list(vals)
    for t, v in enumerate(vals):
        if v is not None:
            continue
        left = [vals[t - i] for i in range(1, n + 1) if t - i >= 0 and vals[t - i] is not None]
        right = [vals[t + i] for i in range(1, n + 1) if t + i < len(vals) and vals[t + i] is not None]
        if not left or not right:
            raise DataError(
                f"series {series.name!r}: flagged value at index {t} has no valid "
                f"neighbor within distance {n} on "
                + ("the left" if not left else "the right")
            )
        neighbors = left + right
        filled[t] = math.fsum(neighbors) / len(neighbors)
    return TimeSeries(series.name, tuple(filled), series.timestamps)


def flag_outliers(series: TimeSeries, k: float = 3.0) -> set:
    """Indices of present values farther than ``k`` sample standard deviations from the mean.

    Degenerate series (fewer than two present values, or zero variance)
    yield no flags.
    """
    if k <= 0:
        raise ValueError("sigma multiplier k must be positive")
    present = [(i, v) for i, v in enumerate(series.values) if v is not None]
    if len(present) < 2:
        return set()
    xs = np.asarray([v for _, v in present], dtype=np.float64)
    mean = float(xs.mean())
    std = float(xs.std(ddof=1))
    if std == 0.0:
        return set()
    return {i for i, v in present if abs(v - mean) > k * std}


def clean_series(series: TimeSeries, outlier_k: float = 3.0, neighborhood: int = 1) -> TimeSeries:
    """Replace outliers and missing values by neighborhood interpolation.

    ``outlier_k <= 0`` disables outlier detection; missing cells are always
    filled.
    """
    if outlier_k > 0:
        series = with_missing(series, flag_outliers(series, outlier_k))
    if series.missing_indices:
        series = interpolate_missing(series, neighborhood)
    return series


def normalize_minmax(series: TimeSeries) -> tuple:
    """Scale to [0, 1]; returns the scaled series and the fitted parameters.

    A constant series has no usable range and is rejected.
    """
    xs = series.require_complete()
    lo = float(xs.min())
    hi = float(xs.max())
    if hi == lo:
        raise ValueError(f"series {series.name!r}: degenerate range (constant series)")
    params = ScalingParams(lo, hi)
    scaled = (xs - lo) / params.span
    return TimeSeries(series.name, tuple(float(v) for v in scaled), series.timestamps), params


def denormalize(values, params: ScalingParams) -> np.ndarray:
    """Inverse of :func:`normalize_minmax`: ``x * (max - min) + min``."""
    arr = np.asarray(values, dtype=np.float64)
    return arr * params.span + params.min


def sliding_windows(series: TimeSeries, w: int) -> Iterator[tuple]:
    """Yield ``(window, target)`` pairs: ``w`` consecutive points and the next value.

    Produces exactly ``len(series) - w`` pairs; consecutive windows overlap in
    ``w - 1`` elements.
    """
    if w < 1:
        raise ValueError("window size must be >= 1")
    if len(series) <= w:
        raise DataError(
            f"series {series.name!r}: length {len(series)} leaves no target for window size {w}"
        )
    xs = series.require_complete()
    for t in range(w, len(xs)):
        yield tuple(float(v) for v in xs[t - w : t]), float(xs[t])


def train_test_split(series: TimeSeries, train_fraction: float, min_length: int = 1) -> tuple:
    """Chronological split: first ``floor(fraction * n)`` points train, rest test."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie in (0, 1)")
    n = len(series)
    cut = int(math.floor(train_fraction * n))
    if cut < min_length or n - cut < min_length:
        raise DataError(
            f"series {series.name!r}: split at {cut}/{n - cut} leaves a part "
            f"shorter than {min_length}"
        )
    ts = series.timestamps
    train = TimeSeries(series.name, series.values[:cut], ts[:cut] if ts else None)
    test = TimeSeries(series.name, series.values[cut:], ts[cut:] if ts else None)
    return train, test
