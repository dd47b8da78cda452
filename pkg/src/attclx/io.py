"""CSV ingestion in the daily-bar export layout, and seeded synthetic bars."""
from __future__ import annotations

import csv
import datetime as dt
import hashlib
import os
from typing import Optional

import numpy as np

from .core_ts import OhlcvBar, OhlcvFrame, align_and_validate
from .errors import BadParams, MissingColumn, ParseError

REQUIRED_COLUMNS = ("trade_date", "open", "high", "low", "close", "vol", "amount")
SYNTHETIC_KINDS = ("random_walk", "ar2", "sine_plus_noise")


def _parse_date(text: str) -> dt.date:
    text = text.strip()
    if len(text) != 8 or not text.isdigit():
        raise ValueError(f"expected YYYYMMDD, got {text!r}")
    return dt.date(int(text[:4]), int(text[4:6]), int(text[6:]))


def load_ohlcv_csv(path) -> OhlcvFrame:
    """Read a header-led CSV with trade_date (YYYYMMDD), open, high, low, close, vol, amount.

    Extra columns are ignored; rows may come in any date order.
    """
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = [h.strip() for h in (reader.fieldnames or [])]
        reader.fieldnames = header
        for name in REQUIRED_COLUMNS:
            if name not in header:
                raise MissingColumn(name)
        bars = []
        for row in reader:
            line = reader.line_num
            try:
                date = _parse_date(row["trade_date"])
            except (ValueError, TypeError, AttributeError) as exc:
                raise ParseError(line, "trade_date", str(exc)) from None
            vals = {}
            for col, field in (("open", "open"), ("high", "high"), ("low", "low"), ("close", "close"),
                               ("vol", "volume"), ("amount", "amount")):
                try:
                    vals[field] = float(row[col])
                except (ValueError, TypeError) as exc:
                    raise ParseError(line, col, str(exc)) from None
            bars.append(OhlcvBar(date, **vals))
    return align_and_validate(bars)


def write_ohlcv_csv(frame: OhlcvFrame, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(REQUIRED_COLUMNS)
    for i, d in enumerate(frame.dates):
        w.writerow([
            d.item().strftime("%Y%m%d"),
            *(repr(float(getattr(frame, f)[i])) for f in ("open", "high", "low", "close", "volume", "amount")),
        ])


def save_ohlcv_csv(frame: OhlcvFrame, path) -> None:
    """Write ``frame`` in the same layout ``load_ohlcv_csv`` reads (values round-trip exactly)."""
    with open(path, "w", newline="") as fh:
        write_ohlcv_csv(frame, fh)


def file_fingerprint(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def frame_fingerprint(frame: OhlcvFrame) -> str:
    h = hashlib.sha256()
    h.update(frame.dates.astype("int64").tobytes())
    for f in ("open", "high", "low", "close", "volume", "amount"):
        h.update(getattr(frame, f).tobytes())
    return h.hexdigest()


_DEFAULTS = {
    "random_walk": {"start": 100.0, "sigma": 1.0, "drift": 0.0},
    "ar2": {"start": 100.0, "a1": 0.5, "a2": -0.3, "sigma": 0.1, "intercept": 0.0},
    "sine_plus_noise": {"level": 100.0, "amplitude": 10.0, "period": 50, "noise": 1.0, "ar": 0.0, "trend": 0.0},
}
_COMMON = {"jitter": 0.005, "floor": 5.0, "start_date": "20070104"}


def _close_path(kind: str, n: int, rng: np.random.Generator, p: dict) -> np.ndarray:
    if kind == "random_walk":
        steps = p["drift"] + p["sigma"] * rng.standard_normal(n - 1)
        return p["start"] + np.concatenate([[0.0], np.cumsum(steps)])
    if kind == "ar2":
        burn = 200
        e = p["sigma"] * rng.standard_normal(n - 1 + burn)
        x = np.zeros(n - 1 + burn)
        for t in range(2, x.size):
            x[t] = p["intercept"] + p["a1"] * x[t - 1] + p["a2"] * x[t - 2] + e[t]
        return p["start"] + np.concatenate([[0.0], np.cumsum(x[burn:])])
    # sine_plus_noise: t mod period keeps the zero-noise path exactly periodic
    period = p["period"]
    t = np.arange(n)
    phase = (t % period) / period if float(period).is_integer() else t / period
    wave = p["level"] + p["amplitude"] * np.sin(2 * np.pi * phase) + p["trend"] * t
    noise = np.zeros(n)
    if p["noise"] > 0:
        e = p["noise"] * rng.standard_normal(n + 100)
        z = np.zeros(n + 100)
        for i in range(1, z.size):
            z[i] = p["ar"] * z[i - 1] + e[i]
        noise = z[100:]
    return wave + noise


def gen_synthetic(kind: str, n: int, seed: int, params: Optional[dict] = None) -> OhlcvFrame:
    """Deterministic synthetic daily bars.

    The close path follows ``kind``; open/high/low are the close perturbed by
    seeded relative jitter (``jitter``, default 0.5%) arranged to satisfy the
    bar invariants. If the close path dips below ``floor`` the whole path is
    shifted up, which leaves its differences untouched. Dates are
    consecutive business days from ``start_date``.
    """
    if kind not in SYNTHETIC_KINDS:
        raise BadParams(f"unknown kind {kind!r}; expected one of {SYNTHETIC_KINDS}")
    if n < 50:
        raise BadParams("n must be at least 50")
    p = {**_COMMON, **_DEFAULTS[kind]}
    unknown = set(params or {}) - set(p)
    if unknown:
        raise BadParams(f"unknown parameters for {kind}: {sorted(unknown)}")
    p.update(params or {})
    if p["jitter"] < 0 or p["floor"] <= 0:
        raise BadParams("jitter must be >= 0 and floor > 0")
    if kind == "sine_plus_noise" and p["period"] <= 0:
        raise BadParams("period must be positive")
    rng = np.random.default_rng(seed)
    bar_rng = np.random.default_rng([seed, 1])

    close = _close_path(kind, n, rng, p)
    if close.min() < p["floor"]:
        close = close + (p["floor"] - close.min())
    j = p["jitter"]
    open_ = close * (1.0 + j * bar_rng.standard_normal(n))
    open_ = np.maximum(open_, 0.5 * close)
    high = np.maximum(open_, close) * (1.0 + j * np.abs(bar_rng.standard_normal(n)))
    low = np.minimum(open_, close) * (1.0 - np.minimum(j * np.abs(bar_rng.standard_normal(n)), 0.5))
    volume = np.round(np.exp(bar_rng.normal(13.0, 0.5, n)))
    amount = volume * (open_ + high + low + close) / 4.0

    start = np.datetime64(_parse_date(p["start_date"]), "D")
    dates = np.busday_offset(start, np.arange(n), roll="forward")
    return OhlcvFrame(dates, open_, high, low, close, volume, amount)


def fixture_path(name: str) -> str:
    """Path of a CSV shipped inside the package's data directory."""
    return os.path.join(os.path.dirname(__file__), "data", name)
