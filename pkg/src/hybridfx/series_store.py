"""Time-series containers, CSV ingestion and train/test splitting.

Values are float64. Dates are ``datetime.date``; rows are ordered by date
and the series is treated as an index-ordered sequence (no calendar filling).
"""
from __future__ import annotations

import csv
import datetime as _dt
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError

CHANNELS = ("open", "high", "low", "close")


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def _parse_date(text: str) -> _dt.date:
    return _dt.date.fromisoformat(text.strip())


@dataclass(frozen=True)
class Series:
    """Univariate, strictly date-ordered series of finite values."""

    timestamps: tuple
    values: np.ndarray
    channel: str = "close"
    name: str = ""

    def __post_init__(self):
        values = _frozen(self.values)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "timestamps", tuple(self.timestamps))
        if values.ndim != 1:
            raise DataError("series values must be one-dimensional")
        if len(values) < 2:
            raise DataError(f"series needs at least 2 values, got {len(values)}")
        if len(self.timestamps) != len(values):
            raise DataError("timestamps and values differ in length")
        if not np.all(np.isfinite(values)):
            bad = np.flatnonzero(~np.isfinite(values)).tolist()
            raise DataError(f"non-finite values at positions {bad}")
        for a, b in zip(self.timestamps, self.timestamps[1:]):
            if not a < b:
                raise DataError(f"timestamps not strictly increasing at {b}")
        if self.channel not in CHANNELS:
            raise DataError(f"unknown channel {self.channel!r}")

    def __len__(self) -> int:
        return len(self.values)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def slice(self, start: int, stop: int) -> "Series":
        return Series(self.timestamps[start:stop], self.values[start:stop], self.channel, self.name)

    def with_values(self, values) -> "Series":
        return Series(self.timestamps, values, self.channel, self.name)


@dataclass(frozen=True)
class OhlcFrame:
    """Four aligned price channels. Univariate files load with all four equal."""

    timestamps: tuple
    open: np.ndarray
    high: np.ndarray
    low: np.ndarray
    close: np.ndarray
    name: str = ""
    univariate: bool = False

    def __post_init__(self):
        object.__setattr__(self, "timestamps", tuple(self.timestamps))
        n = len(self.timestamps)
        for ch in CHANNELS:
            arr = _frozen(getattr(self, ch))
            if arr.shape != (n,):
                raise DataError(f"channel {ch} has length {arr.size}, expected {n}")
            if not np.all(np.isfinite(arr)):
                raise DataError(f"non-finite values in channel {ch}")
            object.__setattr__(self, ch, arr)
        for a, b in zip(self.timestamps, self.timestamps[1:]):
            if not a < b:
                raise DataError(f"timestamps not strictly increasing at {b}")
        lo = np.minimum(self.open, self.close)
        hi = np.maximum(self.open, self.close)
        bad = np.flatnonzero((self.low > lo) | (hi > self.high))
        if bad.size:
            dates = [str(self.timestamps[i]) for i in bad[:5]]
            warnings.warn(f"{bad.size} rows violate low <= open,close <= high (e.g. {dates})",
                          stacklevel=2)

    def __len__(self) -> int:
        return len(self.timestamps)

    def series(self, channel: str = "close") -> Series:
        return Series(self.timestamps, getattr(self, channel), channel, self.name)

    def matrix(self) -> np.ndarray:
        """Rows of (open, high, low, close)."""
        return np.column_stack([self.open, self.high, self.low, self.close])

    def slice(self, start: int, stop: int) -> "OhlcFrame":
        return OhlcFrame(self.timestamps[start:stop], self.open[start:stop], self.high[start:stop],
                         self.low[start:stop], self.close[start:stop], self.name, self.univariate)


@dataclass(frozen=True)
class SplitSpec:
    """``fit_length`` points build the model, the next ``horizon`` are forecast.

    ``origin`` is the index of the first test point; ``None`` places the
    window at the end of the series.
    """

    fit_length: int
    horizon: int
    origin: int | None = None

    def __post_init__(self):
        if self.fit_length < 1 or self.horizon < 1:
            raise DataError("fit_length and horizon must be positive")

    def bounds(self, total: int) -> tuple[int, int, int]:
        origin = total - self.horizon if self.origin is None else self.origin
        start, stop = origin - self.fit_length, origin + self.horizon
        if start < 0 or stop > total:
            raise DataError(
                f"split needs {self.fit_length}+{self.horizon} points ending at {stop}, "
                f"series has {total}")
        return start, origin, stop


def split(series, spec: SplitSpec):
    """Return ``(fit, test)`` slices. Works on Series and OhlcFrame alike."""
    start, origin, stop = spec.bounds(len(series))
    return series.slice(start, origin), series.slice(origin, stop)


def load_csv(path, date_column: str = "date", value_columns: Sequence[str] | None = None,
             strict: bool = True) -> OhlcFrame:
    """Read ``date,open,high,low,close`` or ``date,value`` CSV.

    Rows with unparseable or non-finite values raise :class:`DataError`
    citing their line numbers; with ``strict=False`` they are dropped with a
    warning instead.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if value_columns is None:
            value_columns = list(CHANNELS) if set(CHANNELS) <= set(header) else ["value"]
        value_columns = list(value_columns)
        missing = [c for c in [date_column, *value_columns] if c not in header]
        if missing:
            raise DataError(f"{path}: missing column(s) {missing}")
        di = header.index(date_column)
        vi = [header.index(c) for c in value_columns]

        rows, rejected = [], []
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not f.strip() for f in rec):
                continue
            try:
                date = _parse_date(rec[di])
                vals = [float(rec[i]) for i in vi]
            except (ValueError, IndexError) as exc:
                rejected.append((lineno, str(exc)))
                continue
            if not all(math.isfinite(v) for v in vals):
                rejected.append((lineno, "non-finite value"))
                continue
            rows.append((date, vals))

    if rejected:
        report = "; ".join(f"line {ln}: {why}" for ln, why in rejected)
        if strict:
            err = DataError(f"{path}: rejected rows: {report}")
            err.rejected = rejected
            raise err
        warnings.warn(f"{path}: dropped rows: {report}", stacklevel=2)

    rows.sort(key=lambda r: r[0])
    dates = [r[0] for r in rows]
    dups = sorted({str(a) for a, b in zip(dates, dates[1:]) if a == b})
    if dups:
        raise DataError(f"{path}: duplicate dates {dups}")
    if not rows:
        raise DataError(f"{path}: no data rows")

    data = np.array([r[1] for r in rows], dtype=float)
    if len(value_columns) == 1:
        v = data[:, 0]
        return OhlcFrame(dates, v, v, v, v, name=path.stem, univariate=True)
    if len(value_columns) != 4:
        raise DataError("value_columns must name one column or the four OHLC channels")
    return OhlcFrame(dates, *data.T, name=path.stem)


def write_csv(frame: OhlcFrame, path) -> None:
    """Write a frame using shortest round-trip float formatting."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if frame.univariate:
            w.writerow(["date", "value"])
            for d, v in zip(frame.timestamps, frame.close):
                w.writerow([d.isoformat(), repr(float(v))])
        else:
            w.writerow(["date", *CHANNELS])
            for i, d in enumerate(frame.timestamps):
                w.writerow([d.isoformat(), *(repr(float(getattr(frame, c)[i])) for c in CHANNELS)])
