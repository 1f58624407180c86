"""GARCH(1,1) recursion, chi-square interval variance, and a seeded simulator.

The conditional-variance recursion treats the shock term as the squared
*standardized* innovation times the previous variance,

    sigma_t^2 = omega + alpha1 * eps_{t-1}^2 * sigma_{t-1}^2 + beta1 * sigma_{t-1}^2,

which is the raw-residual textbook form rewritten in standardized units.
Because eps^2 for a standard normal innovation is chi-square with one degree
of freedom, replacing eps^2 by the df=1 quantiles at a chosen confidence
turns the same recursion into an interval estimate of the variance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .series import TimeSeries
from .special import chi2_quantile

__all__ = [
    "GarchParams",
    "ResidualState",
    "ChiSquareBounds",
    "VarianceInterval",
    "variance_step",
    "chi_square_quantile",
    "make_bounds",
    "variance_triple",
    "variance_interval_step",
    "residual_update",
    "simulate_garch",
]


def _require_finite(name: str, value: float) -> float:
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return float(value)


@dataclass(frozen=True)
class GarchParams:
    """Conditional-variance recursion coefficients (omega, alpha1, beta1)."""

    omega: float
    alpha1: float
    beta1: float

    def __post_init__(self):
        for field in ("omega", "alpha1", "beta1"):
            _require_finite(field, getattr(self, field))
        if self.omega <= 0.0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if self.alpha1 < 0.0 or self.beta1 < 0.0:
            raise ValueError("alpha1 and beta1 must be non-negative")


@dataclass(frozen=True)
class ResidualState:
    """Carries the last standardized innovation and the point variance.

    ``epsilon is None`` means no realized observation backs the state; the
    recursion then uses the unconditional expectation E[eps^2] = 1 for the
    point track.
    """

    epsilon: float | None
    variance: float

    def __post_init__(self):
        if self.epsilon is not None:
            _require_finite("epsilon", self.epsilon)
        _require_finite("variance", self.variance)
        if self.variance < 0.0:
            raise ValueError(f"variance must be non-negative, got {self.variance}")

    @property
    def eps_sq(self) -> float:
        return 1.0 if self.epsilon is None else self.epsilon * self.epsilon


@dataclass(frozen=True)
class ChiSquareBounds:
    """df=1 chi-square quantiles bracketing eps^2 at the given confidence."""

    confidence: float
    q_low: float
    q_high: float

    def __post_init__(self):
        if not 0.0 < self.confidence < 1.0:
            raise ValueError("confidence must lie strictly in (0, 1)")
        if not 0.0 < self.q_low < self.q_high:
            raise ValueError("quantiles must satisfy 0 < q_low < q_high")


@dataclass(frozen=True)
class VarianceInterval:
    """Per-step (lower, point, upper) conditional variance triple."""

    lower: float
    point: float
    upper: float

    def __post_init__(self):
        for field in ("lower", "point", "upper"):
            v = _require_finite(field, getattr(self, field))
            if v < 0.0:
                raise ValueError(f"{field} variance must be non-negative, got {v}")
        if not self.lower <= self.point <= self.upper:
            raise ValueError(
                f"variance interval out of order: ({self.lower}, {self.point}, {self.upper})"
            )


def variance_step(params: GarchParams, eps_sq_prev: float, var_prev: float) -> float:
    """One recursion step: omega + alpha1 * eps^2 * var + beta1 * var."""
    eps_sq_prev = _require_finite("eps_sq_prev", eps_sq_prev)
    var_prev = _require_finite("var_prev", var_prev)
    if eps_sq_prev < 0.0 or var_prev < 0.0:
        raise ValueError("squared residual and previous variance must be non-negative")
    return params.omega + params.alpha1 * eps_sq_prev * var_prev + params.beta1 * var_prev


def chi_square_quantile(p: float) -> float:
    """Quantile of the chi-square distribution with one degree of freedom."""
    return chi2_quantile(p, df=1.0)


def make_bounds(confidence: float) -> ChiSquareBounds:
    """df=1 quantile pair at significance alpha = 1 - confidence."""
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must lie strictly in (0, 1)")
    alpha = 1.0 - confidence
    return ChiSquareBounds(
        confidence=confidence,
        q_low=chi_square_quantile(alpha / 2.0),
        q_high=chi_square_quantile(1.0 - alpha / 2.0),
    )


def variance_triple(
    params: GarchParams, var_prev: float, bounds: ChiSquareBounds, eps_sq: float
) -> VarianceInterval:
    """Interval-plus-point variance update with the ordering enforced directly.

    The bounds substitute the chi-square quantiles for eps^2; the point track
    uses ``eps_sq`` (the realized squared innovation when an observation
    exists, 1 otherwise).  A realized eps^2 outside [q_low, q_high] widens the
    interval to keep lower <= point <= upper.
    """
    var_prev = _require_finite("var_prev", var_prev)
    eps_sq = _require_finite("eps_sq", eps_sq)
    if var_prev < 0.0 or eps_sq < 0.0:
        raise ValueError("previous variance and eps_sq must be non-negative")
    omega, alpha1, beta1 = params.omega, params.alpha1, params.beta1
    lower = omega + alpha1 * bounds.q_low * var_prev + beta1 * var_prev
    point = omega + alpha1 * eps_sq * var_prev + beta1 * var_prev
    upper = omega + alpha1 * bounds.q_high * var_prev + beta1 * var_prev
    if lower > point:
        lower = point
    if upper < point:
        upper = point
    return VarianceInterval(lower, point, upper)


def variance_interval_step(
    params: GarchParams, var_prev: float, bounds: ChiSquareBounds
) -> VarianceInterval:
    """Variance interval for the next step, point track at E[eps^2] = 1."""
    return variance_triple(params, var_prev, bounds, eps_sq=1.0)


def residual_update(y_actual: float, y_pred: float, sigma: float, floor: float = 0.0) -> float:
    """Standardized innovation (y_actual - y_pred) / sigma.

    ``sigma`` below ``floor`` is clamped to the floor; callers that clamp are
    expected to count the event.  Non-positive sigma is an error.
    """
    _require_finite("y_actual", y_actual)
    _require_finite("y_pred", y_pred)
    _require_finite("sigma", sigma)
    if sigma <= 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if sigma < floor:
        sigma = floor
    return (y_actual - y_pred) / sigma


def simulate_garch(params: GarchParams, mean: float, n: int, seed: int) -> TimeSeries:
    """Generate a seeded GARCH(1,1) series y_t = mean + eps_t * sigma_t.

    The initial variance is the stationary value omega / (1 - alpha1 - beta1)
    when it exists, omega otherwise.  Identical (params, mean, n, seed) give
    bit-identical output.
    """
    _require_finite("mean", mean)
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    eps = rng.standard_normal(n)
    omega, alpha1, beta1 = params.omega, params.alpha1, params.beta1
    persistence = alpha1 + beta1
    var = omega / (1.0 - persistence) if persistence < 1.0 else omega
    values = np.empty(n, dtype=np.float64)
    for t in range(n):
        if t > 0:
            e2 = eps[t - 1] * eps[t - 1]
            var = omega + alpha1 * e2 * var + beta1 * var
        values[t] = mean + eps[t] * math.sqrt(var)
    return TimeSeries(
        name=f"garch-sim-{seed}", values=tuple(float(v) for v in values)
    )
