"""ARIMA(p, d, 0) preprocessing: conditional least squares AR fit on the
d-times differenced series, causal one-step fitted values on the price
scale, and recursive forecasts.

Re-integration uses the identity s_t = D^d s_t + (s_t - D^d s_t), where the
second term is a fixed linear combination of s_{t-1}..s_{t-d}. A prediction
of the differenced value therefore maps to a price prediction using only
past prices.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .core_ts import Series
from .errors import SeriesTooShort, SingularDesignMatrix


@dataclass(frozen=True)
class ArimaSpec:
    p: int = 2
    d: int = 1
    q: int = 0

    def __post_init__(self):
        if self.q != 0:
            raise ValueError("only q = 0 is supported (no MA terms)")
        if self.p < 0 or self.d < 0:
            raise ValueError("p and d must be non-negative")

    @property
    def warmup(self) -> int:
        return self.p + self.d


@dataclass(frozen=True, eq=False)
class ArModel:
    spec: ArimaSpec
    intercept: float
    coefficients: np.ndarray
    residual_variance: float
    training_anchor: np.ndarray

    def __post_init__(self):
        coef = np.array(self.coefficients, dtype=np.float64)
        anchor = np.array(self.training_anchor, dtype=np.float64)
        if coef.shape != (self.spec.p,):
            raise ValueError(f"expected {self.spec.p} coefficients, got {coef.shape}")
        if self.residual_variance < 0:
            raise ValueError("residual variance must be non-negative")
        coef.flags.writeable = False
        anchor.flags.writeable = False
        object.__setattr__(self, "coefficients", coef)
        object.__setattr__(self, "training_anchor", anchor)

    def to_dict(self) -> dict:
        return {
            "p": self.spec.p,
            "d": self.spec.d,
            "q": self.spec.q,
            "intercept": self.intercept,
            "coefficients": self.coefficients.tolist(),
            "residual_variance": self.residual_variance,
            "training_anchor": self.training_anchor.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ArModel":
        return cls(
            ArimaSpec(d["p"], d["d"], d["q"]),
            float(d["intercept"]),
            np.array(d["coefficients"], dtype=np.float64),
            float(d["residual_variance"]),
            np.array(d["training_anchor"], dtype=np.float64),
        )


def _values(series) -> np.ndarray:
    return series.values if isinstance(series, Series) else np.asarray(series, dtype=np.float64)


def _lag_matrix(x: np.ndarray, p: int) -> np.ndarray:
    """Rows t = p..n-1 of [1, x_{t-1}, ..., x_{t-p}]."""
    n = x.size
    X = np.ones((n - p, p + 1))
    for i in range(1, p + 1):
        X[:, i] = x[p - i : n - i]
    return X


def fit(series, spec: ArimaSpec = ArimaSpec()) -> ArModel:
    """Estimate intercept and AR coefficients by OLS on the differenced series."""
    s = _values(series)
    if s.size <= spec.p + spec.d + 10:
        raise SeriesTooShort(f"need more than {spec.p + spec.d + 10} observations, got {s.size}")
    x = np.diff(s, n=spec.d) if spec.d else s
    y = x[spec.p :]
    X = _lag_matrix(x, spec.p)
    if not np.any(X[:, 1:]) and not np.any(y):
        # zero differenced series (e.g. constant prices under d >= 1)
        beta = np.zeros(spec.p + 1)
    else:
        beta, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
        if rank < X.shape[1]:
            raise SingularDesignMatrix(f"AR design matrix has rank {rank} < {X.shape[1]}")
    resid = y - X @ beta
    return ArModel(
        spec=spec,
        intercept=float(beta[0]),
        coefficients=beta[1:],
        residual_variance=float(np.mean(resid**2)),
        training_anchor=s[-(spec.p + spec.d) :] if spec.p + spec.d else s[:0],
    )


def _integration_weights(d: int) -> np.ndarray:
    """w such that s_t - D^d s_t = sum_j w[j-1] * s_{t-j}, j = 1..d."""
    return np.array([-comb(d, j) * (-1) ** j for j in range(1, d + 1)], dtype=np.float64)


def fitted_and_residuals(model: ArModel, series) -> tuple[Series, Series]:
    """Causal one-step-ahead fitted prices and residuals aligned to ``series``.

    The first p + d positions have no complete history; they carry
    fitted = actual and residual = 0.
    """
    s = _values(series)
    p, d = model.spec.p, model.spec.d
    w = p + d
    if s.size <= w:
        raise SeriesTooShort(f"need more than {w} observations, got {s.size}")
    x = np.diff(s, n=d) if d else s
    # prediction of x_t from x_{t-1..t-p}; x index j corresponds to s index j + d
    xhat = model.intercept + _lag_matrix(x, p)[:, 1:] @ model.coefficients if p else np.full(x.size, model.intercept)
    iw = _integration_weights(d)
    level = np.zeros(s.size - w)
    for j in range(1, d + 1):
        level += iw[j - 1] * s[w - j : s.size - j]
    fitted = s.copy()
    fitted[w:] = xhat + level
    resid = np.zeros_like(s)
    resid[w:] = s[w:] - fitted[w:]
    dates = series.dates if isinstance(series, Series) else None
    return Series(fitted, dates), Series(resid, dates)


def forecast(model: ArModel, history, horizon: int) -> Series:
    """Iterate the AR recurrence ``horizon`` steps past ``history`` with zero noise."""
    if horizon < 1:
        raise ValueError("horizon must be positive")
    s = list(_values(history))
    p, d = model.spec.p, model.spec.d
    if len(s) < p + d:
        raise SeriesTooShort(f"history must hold at least {p + d} values")
    iw = _integration_weights(d)
    coef = model.coefficients
    out = []
    for _ in range(horizon):
        tail = np.array(s[-(p + d) :]) if p + d else np.zeros(0)
        x = np.diff(tail, n=d) if d else tail
        # x[-1] is x_{t-1}
        xhat = model.intercept + sum(coef[i] * x[-1 - i] for i in range(p))
        nxt = xhat + sum(iw[j - 1] * s[-j] for j in range(1, d + 1))
        s.append(float(nxt))
        out.append(float(nxt))
    return Series(np.array(out))


def rolling_forecast(model: ArModel, series, start: int) -> Series:
    """One-step forecasts for positions start..n-1, each from the observed prefix.

    Coefficients stay fixed; equals ``fitted_and_residuals`` past the warm-up.
    """
    s = _values(series)
    if start < model.spec.warmup or start >= s.size:
        raise SeriesTooShort(f"start must lie in [{model.spec.warmup}, {s.size})")
    fitted, _ = fitted_and_residuals(model, s)
    return Series(fitted.values[start:])
