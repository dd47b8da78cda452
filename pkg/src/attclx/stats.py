"""Stationarity diagnostics: differencing, the augmented Dickey-Fuller test,
and sample (partial) autocorrelations.

The ADF regression always includes a constant and no trend. Lag length is
chosen by AIC over a common estimation sample, then the chosen regression is
re-estimated on every observation it can use. P-values and critical values
come from MacKinnon's response surfaces (1994 for p-values, 2010 for finite
sample critical values), embedded below for the single-series,
constant-only case.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import ndtr

from .core_ts import Series
from .errors import SeriesTooShort, SingularRegression, ZeroVariance

# MacKinnon (1994), regression with constant, N = 1
_TAU_MAX = 2.74
_TAU_MIN = -18.83
_TAU_STAR = -1.61
_SMALLP = (2.1659, 1.4412, 3.8269e-2)
_LARGEP = (1.7339, 9.3202e-1, -1.2745e-1, -1.0368e-2)

# MacKinnon (2010), regression with constant, N = 1; cv = b0 + b1/T + b2/T^2 + b3/T^3
_CRIT_SURFACE = {
    "1%": (-3.43035, -6.5393, -16.786, -79.433),
    "5%": (-2.86154, -2.8903, -4.234, -40.040),
    "10%": (-2.56677, -1.5384, -2.809, 0.0),
}


def _values(series) -> np.ndarray:
    if isinstance(series, Series):
        return series.values
    return np.asarray(series, dtype=np.float64)


def difference(series, order: int = 1) -> Series:
    """Apply ``order`` successive first differences (x_k = s_k - s_{k-1})."""
    if order < 0:
        raise ValueError("order must be non-negative")
    x = _values(series)
    if x.size <= order:
        raise SeriesTooShort(f"series of length {x.size} cannot be differenced {order} times")
    out = np.diff(x, n=order) if order else x.copy()
    dates = series.dates[order:] if isinstance(series, Series) and series.dates is not None else None
    return Series(out, dates)


def mackinnon_pvalue(stat: float) -> float:
    """Approximate asymptotic p-value of an ADF t-statistic (constant, no trend)."""
    if stat > _TAU_MAX:
        return 1.0
    if stat < _TAU_MIN:
        return 0.0
    coef = _SMALLP if stat <= _TAU_STAR else _LARGEP
    z = sum(c * stat**i for i, c in enumerate(coef))
    return float(ndtr(z))


def mackinnon_critical_values(nobs: float) -> dict[str, float]:
    inv = 0.0 if math.isinf(nobs) else 1.0 / nobs
    return {k: float(sum(b * inv**i for i, b in enumerate(c))) for k, c in _CRIT_SURFACE.items()}


@dataclass(frozen=True)
class AdfReport:
    test_statistic: float
    p_value: float
    lags_used: int
    n_obs: int
    critical_values: dict = field(default_factory=dict)

    def is_stationary(self, threshold: float = 0.05) -> bool:
        """Reject the unit-root null when the p-value falls below ``threshold``."""
        return self.p_value < threshold

    def as_text(self) -> str:
        lines = [
            f"test_statistic={self.test_statistic:.6g}",
            f"p_value={self.p_value:.6g}",
            f"lags_used={self.lags_used}",
            f"n_obs={self.n_obs}",
        ]
        lines += [f"critical_value_{k}={v:.6g}" for k, v in self.critical_values.items()]
        return "\n".join(lines) + "\n"


def _ols(y: np.ndarray, X: np.ndarray):
    """OLS via QR. Returns (beta, ssr, R) and raises on a rank-deficient design."""
    q, r = np.linalg.qr(X)
    diag = np.abs(np.diag(r))
    if diag.min() <= 1e-10 * max(diag.max(), 1.0):
        raise SingularRegression("design matrix is rank deficient")
    beta = np.linalg.solve(r, q.T @ y)
    resid = y - X @ beta
    return beta, float(resid @ resid), r


def _adf_design(y: np.ndarray, dy: np.ndarray, lags: int, nobs: int):
    """Response and regressors [1, y_{t-1}, dy_{t-1}, ..., dy_{t-lags}] for the last nobs diffs."""
    n1 = dy.size
    rows = np.arange(n1 - nobs, n1)
    X = np.empty((nobs, lags + 2))
    X[:, 0] = 1.0
    X[:, 1] = y[rows]
    for i in range(1, lags + 1):
        X[:, i + 1] = dy[rows - i]
    return dy[rows], X


def default_max_lag(n: int) -> int:
    """Schwert's rule floor(12 (n/100)^(1/4))."""
    return int(math.floor(12.0 * (n / 100.0) ** 0.25))


def adf_test(series, max_lag: Optional[int] = None) -> AdfReport:
    """Augmented Dickey-Fuller unit-root test with a constant and AIC lag choice.

    Fits dy_t = a + g*y_{t-1} + sum_i b_i dy_{t-i} by OLS and returns the
    t-ratio of g. ``max_lag`` caps the AIC search (default: Schwert's rule);
    it is further limited to n//2 - 2 so every candidate regression keeps
    enough degrees of freedom.
    """
    y = _values(series)
    n = y.size
    if n < 20:
        raise SeriesTooShort(f"ADF needs at least 20 observations, got {n}")
    if y.max() == y.min():
        raise SingularRegression("series is constant")
    if max_lag is None:
        max_lag = default_max_lag(n)
    if max_lag < 0:
        raise ValueError("max_lag must be non-negative")
    max_lag = min(max_lag, n // 2 - 2)
    dy = np.diff(y)

    # common sample so AIC values are comparable
    m = dy.size - max_lag
    best_lag, best_aic = 0, math.inf
    for k in range(max_lag + 1):
        resp, X = _adf_design(y, dy, k, m)
        _, ssr, _ = _ols(resp, X)
        aic = m * math.log(ssr / m) + 2 * X.shape[1]
        if aic < best_aic:
            best_aic, best_lag = aic, k

    nobs = dy.size - best_lag
    resp, X = _adf_design(y, dy, best_lag, nobs)
    beta, ssr, r = _ols(resp, X)
    sigma2 = ssr / (nobs - X.shape[1])
    rinv = np.linalg.inv(r)
    var_g = sigma2 * float(rinv[1] @ rinv[1])
    stat = float(beta[1] / math.sqrt(var_g))
    return AdfReport(
        test_statistic=stat,
        p_value=mackinnon_pvalue(stat),
        lags_used=best_lag,
        n_obs=nobs,
        critical_values=mackinnon_critical_values(nobs),
    )


def acf(series, n_lags: int) -> np.ndarray:
    """Biased sample autocorrelations for lags 0..n_lags (entry 0 is 1)."""
    x = _values(series)
    if n_lags < 1:
        raise ValueError("n_lags must be positive")
    if n_lags >= x.size:
        raise SeriesTooShort(f"n_lags={n_lags} must be below the series length {x.size}")
    xc = x - x.mean()
    denom = float(xc @ xc)
    if denom == 0.0:
        raise ZeroVariance("autocorrelation undefined for a constant series")
    n = x.size
    out = np.array([xc[: n - k] @ xc[k:] for k in range(n_lags + 1)]) / denom
    out[0] = 1.0
    return out


def durbin_levinson(rho: np.ndarray) -> np.ndarray:
    """Partial autocorrelations from autocorrelations rho[0..K] (rho[0] = 1)."""
    K = rho.size - 1
    pac = np.zeros(K + 1)
    pac[0] = 1.0
    if K == 0:
        return pac
    phi = np.zeros(K + 1)
    phi[1] = rho[1]
    pac[1] = rho[1]
    v = 1.0 - rho[1] ** 2
    for k in range(2, K + 1):
        a = (rho[k] - phi[1:k] @ rho[k - 1 : 0 : -1]) / v
        new = phi.copy()
        new[1:k] = phi[1:k] - a * phi[k - 1 : 0 : -1]
        new[k] = a
        phi = new
        pac[k] = a
        v *= 1.0 - a * a
    return pac


def pacf(series, n_lags: int) -> np.ndarray:
    """Sample partial autocorrelations (Durbin-Levinson on the biased ACF)."""
    x = _values(series)
    if n_lags < 1:
        raise ValueError("n_lags must be positive")
    if n_lags >= x.size / 2:
        raise SeriesTooShort(f"n_lags={n_lags} must be below half the series length {x.size}")
    return durbin_levinson(acf(x, n_lags))
