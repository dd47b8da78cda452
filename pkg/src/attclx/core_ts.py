"""Time-series and dataset containers shared by the rest of the package.

All containers hold read-only float64 numpy arrays. Constructors copy their
input, so a container never aliases caller memory.
"""
from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DuplicateDate, EmptyInput, InvalidBar, LengthMismatch

OHLCV_FIELDS = ("open", "high", "low", "close", "volume", "amount")


def _frozen(a, dtype=np.float64) -> np.ndarray:
    out = np.array(a, dtype=dtype, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class OhlcvBar:
    date: dt.date
    open: float
    high: float
    low: float
    close: float
    volume: float
    amount: float

    def problem(self) -> Optional[str]:
        """Return a description of the first violated bar invariant, or None."""
        prices = (self.open, self.high, self.low, self.close)
        for name, v in zip(("open", "high", "low", "close"), prices):
            if not math.isfinite(v) or v <= 0:
                return f"{name} must be finite and > 0 (got {v})"
        for name in ("volume", "amount"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                return f"{name} must be finite and >= 0 (got {v})"
        if self.low > min(self.open, self.close):
            return "low exceeds min(open, close)"
        if self.high < max(self.open, self.close):
            return "high below max(open, close)"
        return None


@dataclass(frozen=True, eq=False)
class Series:
    """An ordered run of finite values with an optional aligned date index."""

    values: np.ndarray
    dates: Optional[np.ndarray] = None

    def __post_init__(self):
        values = _frozen(self.values)
        if values.ndim != 1 or values.size < 1:
            raise EmptyInput("series must be one-dimensional with length >= 1")
        if not np.all(np.isfinite(values)):
            raise ValueError("series values must be finite")
        object.__setattr__(self, "values", values)
        if self.dates is not None:
            dates = _frozen(self.dates, dtype="datetime64[D]")
            if dates.shape != values.shape:
                raise LengthMismatch("date index must align 1:1 with values")
            if dates.size > 1 and not np.all(dates[1:] > dates[:-1]):
                raise ValueError("date index must be strictly increasing")
            object.__setattr__(self, "dates", dates)

    def __len__(self):
        return self.values.size

    def __eq__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        if not np.array_equal(self.values, other.values):
            return False
        if self.dates is None or other.dates is None:
            return self.dates is None and other.dates is None
        return np.array_equal(self.dates, other.dates)

    def with_dates(self, dates) -> "Series":
        return Series(self.values, dates)


@dataclass(frozen=True, eq=False)
class OhlcvFrame:
    """Date-sorted daily bars stored column-wise.

    Build it with :func:`align_and_validate`; the direct constructor trusts
    its arguments apart from shape checks.
    """

    dates: np.ndarray
    open: np.ndarray
    high: np.ndarray
    low: np.ndarray
    close: np.ndarray
    volume: np.ndarray
    amount: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dates", _frozen(self.dates, dtype="datetime64[D]"))
        n = self.dates.size
        for name in OHLCV_FIELDS:
            col = _frozen(getattr(self, name))
            if col.shape != (n,):
                raise LengthMismatch(f"column {name} has shape {col.shape}, expected ({n},)")
            object.__setattr__(self, name, col)

    def __len__(self):
        return self.dates.size

    def __eq__(self, other):
        if not isinstance(other, OhlcvFrame):
            return NotImplemented
        return np.array_equal(self.dates, other.dates) and all(
            np.array_equal(getattr(self, f), getattr(other, f)) for f in OHLCV_FIELDS
        )

    def column(self, name: str) -> Series:
        return Series(getattr(self, name), self.dates)

    def close_series(self) -> Series:
        return self.column("close")

    def bars(self) -> list[OhlcvBar]:
        return [
            OhlcvBar(d.item(), *(float(getattr(self, f)[i]) for f in OHLCV_FIELDS))
            for i, d in enumerate(self.dates)
        ]

    def slice(self, start: int, stop: int) -> "OhlcvFrame":
        return OhlcvFrame(self.dates[start:stop], *(getattr(self, f)[start:stop] for f in OHLCV_FIELDS))

    def with_close(self, close: Series) -> "OhlcvFrame":
        """Replace the close column, e.g. after re-attaching dates to a Series."""
        if close.dates is not None and not np.array_equal(close.dates, self.dates):
            raise LengthMismatch("close series dates do not match frame dates")
        cols = {f: getattr(self, f) for f in OHLCV_FIELDS}
        cols["close"] = close.values
        return OhlcvFrame(self.dates, **cols)


def align_and_validate(bars: Iterable[OhlcvBar]) -> OhlcvFrame:
    """Sort bars by date and enforce the per-bar invariants.

    Raises EmptyInput, DuplicateDate or InvalidBar (the index refers to the
    caller's original ordering).
    """
    bars = list(bars)
    if not bars:
        raise EmptyInput("no bars supplied")
    for i, bar in enumerate(bars):
        reason = bar.problem()
        if reason is not None:
            raise InvalidBar(i, reason)
    order = sorted(range(len(bars)), key=lambda i: bars[i].date)
    ordered = [bars[i] for i in order]
    for prev, cur in zip(ordered, ordered[1:]):
        if prev.date == cur.date:
            raise DuplicateDate(cur.date)
    return OhlcvFrame(
        np.array([b.date for b in ordered], dtype="datetime64[D]"),
        *(np.array([getattr(b, f) for b in ordered], dtype=np.float64) for f in OHLCV_FIELDS),
    )


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Rows are time steps, columns are uniquely named feature channels."""

    values: np.ndarray
    columns: tuple[str, ...]
    dates: Optional[np.ndarray] = None

    def __post_init__(self):
        values = _frozen(self.values)
        columns = tuple(self.columns)
        if values.ndim != 2:
            raise ValueError("feature matrix must be two-dimensional")
        if values.shape[1] != len(columns):
            raise LengthMismatch(f"{values.shape[1]} value columns but {len(columns)} names")
        if len(set(columns)) != len(columns):
            raise ValueError("column names must be unique")
        if not np.all(np.isfinite(values)):
            raise ValueError("feature matrix cells must be finite")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "columns", columns)
        if self.dates is not None:
            object.__setattr__(self, "dates", _frozen(self.dates, dtype="datetime64[D]"))

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.columns.index(name)]

    def rows(self, start: int, stop: int) -> "FeatureMatrix":
        dates = None if self.dates is None else self.dates[start:stop]
        return FeatureMatrix(self.values[start:stop], self.columns, dates)


@dataclass(frozen=True, eq=False)
class WindowedDataset:
    """Look-back windows paired with the value one step after each window.

    ``target_index[i]`` is the row (in the source matrix) whose value is
    ``targets[i]``; window i covers rows ``target_index[i] - lookback`` up to
    ``target_index[i] - 1``.
    """

    inputs: np.ndarray
    targets: np.ndarray
    lookback: int
    target_index: np.ndarray

    def __post_init__(self):
        inputs = _frozen(self.inputs)
        targets = _frozen(self.targets)
        tidx = _frozen(self.target_index, dtype=np.int64)
        if self.lookback < 1:
            raise ValueError("lookback must be positive")
        if inputs.ndim != 3 or inputs.shape[1] != self.lookback:
            raise LengthMismatch(f"inputs shape {inputs.shape} incompatible with lookback {self.lookback}")
        if not (inputs.shape[0] == targets.shape[0] == tidx.shape[0]):
            raise LengthMismatch("inputs, targets and target_index must have equal length")
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "target_index", tidx)

    def __len__(self):
        return self.targets.shape[0]

    @property
    def n_features(self) -> int:
        return self.inputs.shape[2]

    def subset(self, mask_or_idx) -> "WindowedDataset":
        return WindowedDataset(
            self.inputs[mask_or_idx], self.targets[mask_or_idx], self.lookback, self.target_index[mask_or_idx]
        )


def make_windows(values, targets: Sequence[float], lookback: int, offset: int = 0) -> WindowedDataset:
    """Slide a ``lookback``-row window over ``values``.

    ``values`` is (N, F) (or (N,) for a single channel) and ``targets`` has
    length N. Produces N - lookback samples; sample i uses rows i..i+L-1 and
    targets row i+L. ``offset`` shifts the recorded ``target_index``.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    tgt = np.asarray(targets, dtype=np.float64)
    n = arr.shape[0]
    if tgt.shape != (n,):
        raise LengthMismatch(f"targets length {tgt.shape} does not match {n} rows")
    if n <= lookback:
        raise LengthMismatch(f"need more than {lookback} rows to window, got {n}")
    windows = np.lib.stride_tricks.sliding_window_view(arr, lookback, axis=0)[: n - lookback]
    # sliding_window_view puts the window axis last
    windows = np.ascontiguousarray(np.swapaxes(windows, 1, 2))
    idx = np.arange(lookback, n) + offset
    return WindowedDataset(windows, tgt[lookback:], lookback, idx)
