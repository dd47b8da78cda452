"""Regenerate the golden reference values under tests/data/.

Needs statsmodels, which serves only as an independent reference here and
is not a dependency of the package. Run from the repository root:

    python3 scripts/make_goldens.py
"""
import json
import math
import os

import numpy as np
from statsmodels.tsa.ar_model import AutoReg
from statsmodels.tsa.stattools import acf, adfuller, pacf

from attclx.io import fixture_path, load_ohlcv_csv

OUT = os.path.join(os.path.dirname(__file__), os.pardir, "tests", "data")


def adf_series():
    """Ten random walks and ten AR(1) series of assorted lengths."""
    cases = []
    for k in range(20):
        rng = np.random.default_rng(1000 + k)
        n = int(rng.integers(80, 600))
        e = rng.standard_normal(n)
        if k < 10:
            x = np.cumsum(e)
            label = "random_walk"
        else:
            phi = 0.2 + 0.07 * (k - 10)
            x = np.zeros(n)
            for t in range(1, n):
                x[t] = phi * x[t - 1] + e[t]
            label = f"ar1_phi={phi:.2f}"
        cases.append((label, 1000 + k, x))
    return cases


def main():
    os.makedirs(OUT, exist_ok=True)
    adf = []
    for label, seed, x in adf_series():
        max_lag = int(math.floor(12 * (x.size / 100) ** 0.25))
        stat, p, used, nobs, crit, _ = adfuller(x, maxlag=max_lag, regression="c", autolag="AIC")
        adf.append({
            "label": label, "seed": seed, "series": x.tolist(), "max_lag": max_lag,
            "statistic": stat, "p_value": p, "lags_used": used, "n_obs": nobs,
            "critical_values": crit,
        })
    with open(os.path.join(OUT, "adf_golden.json"), "w") as fh:
        json.dump(adf, fh)

    corr = []
    for k in range(5):
        rng = np.random.default_rng(2000 + k)
        x = np.cumsum(rng.standard_normal(300)) if k % 2 else rng.standard_normal(300)
        corr.append({
            "seed": 2000 + k, "series": x.tolist(), "n_lags": 20,
            "acf": acf(x, nlags=20, fft=False).tolist(),
            "pacf": pacf(x, nlags=20, method="ldb").tolist(),
        })
    with open(os.path.join(OUT, "correlogram_golden.json"), "w") as fh:
        json.dump(corr, fh)

    frame = load_ohlcv_csv(fixture_path("stand_in_daily.csv"))
    close = frame.close
    split = int(0.8 * close.size)
    dx = np.diff(close[:split])
    res = AutoReg(dx, lags=2, trend="c", old_names=False).fit()
    c, a1, a2 = res.params
    dall = np.diff(close)
    # one-step forecasts for rows split..n-1 with the train-span coefficients
    pred = np.array([close[t - 1] + c + a1 * dall[t - 2] + a2 * dall[t - 3] for t in range(split, close.size)])
    err = pred - close[split:]
    arima = {
        "fixture": "stand_in_daily.csv", "split": split,
        "intercept": c, "a1": a1, "a2": a2, "residual_variance": float(np.mean(res.resid**2)),
        "mae": float(np.mean(np.abs(err))), "rmse": float(np.sqrt(np.mean(err**2))),
    }
    with open(os.path.join(OUT, "arima_golden.json"), "w") as fh:
        json.dump(arima, fh, indent=1)
    print(f"wrote {len(adf)} ADF cases, {len(corr)} correlogram cases, ARIMA golden")


if __name__ == "__main__":
    main()
