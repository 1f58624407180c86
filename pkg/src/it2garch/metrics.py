"""Forecast accuracy metrics and residual autocorrelation diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .special import chi2_sf

__all__ = [
    "MetricsReport",
    "LjungBoxResult",
    "mse",
    "rmse",
    "mae",
    "mape",
    "mape_with_skips",
    "r2",
    "evaluate",
    "autocorrelation",
    "ljung_box",
]


def _paired(actual, predicted) -> tuple:
    a = np.asarray(actual, dtype=np.float64)
    p = np.asarray(predicted, dtype=np.float64)
    if a.ndim != 1 or p.ndim != 1:
        raise ValueError("actual and predicted must be 1-D")
    if a.size != p.size:
        raise ValueError(f"length mismatch: {a.size} actual vs {p.size} predicted")
    if a.size == 0:
        raise ValueError("empty input")
    return a, p


def mse(actual, predicted) -> float:
    """Mean squared error."""
    a, p = _paired(actual, predicted)
    d = a - p
    return float(np.mean(d * d))


def rmse(actual, predicted) -> float:
    """Root mean squared error."""
    return math.sqrt(mse(actual, predicted))


def mae(actual, predicted) -> float:
    """Mean absolute error."""
    a, p = _paired(actual, predicted)
    return float(np.mean(np.abs(a - p)))


def mape(actual, predicted) -> float:
    """Mean absolute percentage error, in percent.

    Samples with a zero actual value contribute an undefined ratio and are
    skipped; :func:`evaluate` reports how many were dropped.  All-zero
    actuals are an error.
    """
    value, _ = mape_with_skips(actual, predicted)
    return value


def mape_with_skips(actual, predicted) -> tuple:
    a, p = _paired(actual, predicted)
    keep = a != 0.0
    skipped = int(np.sum(~keep))
    if skipped == a.size:
        raise ValueError("MAPE undefined: every actual value is zero")
    a = a[keep]
    p = p[keep]
    return float(np.mean(np.abs((a - p) / a)) * 100.0), skipped


def r2(actual, predicted) -> float:
    """Coefficient of determination 1 - SS_res / SS_tot."""
    a, p = _paired(actual, predicted)
    mean = float(np.mean(a))
    ss_tot = float(np.sum((a - mean) ** 2))
    if ss_tot == 0.0:
        raise ValueError("R^2 undefined: actual values have zero variance")
    ss_res = float(np.sum((a - p) ** 2))
    return 1.0 - ss_res / ss_tot


@dataclass(frozen=True)
class MetricsReport:
    mse: float
    rmse: float
    mae: float
    mape: float
    r2: float
    n: int
    mape_skipped: int = 0

    def to_dict(self) -> dict:
        return {
            "mse": self.mse,
            "rmse": self.rmse,
            "mae": self.mae,
            "mape": self.mape,
            "r2": self.r2,
            "n": self.n,
            "mape_skipped": self.mape_skipped,
        }


def evaluate(actual, predicted) -> MetricsReport:
    """All five metrics over one (actual, predicted) pairing."""
    a, p = _paired(actual, predicted)
    mape_value, skipped = mape_with_skips(a, p)
    return MetricsReport(
        mse=mse(a, p),
        rmse=rmse(a, p),
        mae=mae(a, p),
        mape=mape_value,
        r2=r2(a, p),
        n=int(a.size),
        mape_skipped=skipped,
    )


def autocorrelation(series, lag: int) -> float:
    """Sample autocorrelation at the given lag (lag 0 is exactly 1)."""
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("series must be a non-empty 1-D sequence")
    if not 0 <= lag < x.size:
        raise ValueError(f"lag must lie in [0, {x.size - 1}], got {lag}")
    d = x - x.mean()
    denom = float(np.dot(d, d))
    if denom == 0.0:
        raise ValueError("autocorrelation undefined for a zero-variance series")
    if lag == 0:
        return 1.0
    return float(np.dot(d[:-lag], d[lag:])) / denom


@dataclass(frozen=True)
class LjungBoxResult:
    q: float
    h: int
    p_value: float
    autocorrs: tuple

    def to_dict(self) -> dict:
        return {
            "q": self.q,
            "h": self.h,
            "p_value": self.p_value,
            "autocorrs": list(self.autocorrs),
        }


def ljung_box(residuals, h: int) -> LjungBoxResult:
    """Portmanteau test for autocorrelation up to lag ``h``.

    Q = n (n + 2) * sum_{r=1..h} rho(r)^2 / (n - r); under the white-noise
    null Q is asymptotically chi-square with ``h`` degrees of freedom, so the
    p-value is the chi-square survival function at Q.
    """
    x = np.asarray(residuals, dtype=np.float64)
    if h < 1:
        raise ValueError("lag count h must be >= 1")
    n = x.size
    if n <= h:
        raise ValueError(f"need more than h={h} observations, got {n}")
    rhos = tuple(autocorrelation(x, r) for r in range(1, h + 1))
    q = n * (n + 2.0) * math.fsum(rho * rho / (n - r) for r, rho in enumerate(rhos, start=1))
    return LjungBoxResult(q=q, h=h, p_value=chi2_sf(q, df=h), autocorrs=rhos)
