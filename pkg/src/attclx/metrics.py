"""Forecast error metrics."""
from __future__ import annotations

import numpy as np

from .core_ts import Series
from .errors import LengthMismatch, ZeroTruthValue

METRIC_NAMES = ("mse", "mae", "rmse", "mape", "r2_standard", "r2_paper")


def evaluate(pred, truth) -> dict:
    """MAE, RMSE, MAPE (as a fraction), MSE and two R^2 readings.

    ``r2_standard`` is 1 - SS_res / SS_tot. ``r2_paper`` is the ratio of
    explained to total sum of squares, sum (pred - mean(truth))^2 /
    sum (truth - mean(truth))^2, which only coincides with the standard
    value for least-squares fits.
    """
    p = pred.values if isinstance(pred, Series) else np.asarray(pred, dtype=np.float64)
    y = truth.values if isinstance(truth, Series) else np.asarray(truth, dtype=np.float64)
    if p.shape != y.shape or p.ndim != 1:
        raise LengthMismatch(f"prediction shape {p.shape} does not match truth shape {y.shape}")
    if p.size < 2:
        raise LengthMismatch("need at least 2 points to evaluate")
    if np.any(y == 0):
        raise ZeroTruthValue("MAPE is undefined when a true value is zero")
    err = p - y
    mse = float(np.mean(err**2))
    ybar = y.mean()
    ss_tot = float(np.sum((y - ybar) ** 2))
    if ss_tot == 0.0:
        r2s = r2p = float("nan")
    else:
        r2s = 1.0 - float(np.sum(err**2)) / ss_tot
        r2p = float(np.sum((p - ybar) ** 2)) / ss_tot
    return {
        "mse": mse,
        "mae": float(np.mean(np.abs(err))),
        "rmse": float(np.sqrt(mse)),
        "mape": float(np.mean(np.abs(err / y))),
        "r2_standard": r2s,
        "r2_paper": r2p,
    }
