"""Shared test helpers: independent oracles and randomized model factories."""

from __future__ import annotations

import math

import numpy as np
import pytest

from it2garch.fuzzy import RuleBase, retain_rule
from it2garch.garch import GarchParams
from it2garch.model import ModelConfig, TrainedModel
from it2garch.series import ScalingParams


def normal_cdf(z: float) -> float:
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


def normal_quantile(p: float) -> float:
    """Inverse standard normal CDF by bisection on math.erf."""
    assert 0.0 < p < 1.0
    lo, hi = -40.0, 40.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if normal_cdf(mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def chi2_df1_quantile_oracle(p: float) -> float:
    """Independent route: df=1 chi-square quantile as a squared normal quantile."""
    return normal_quantile((1.0 + p) / 2.0) ** 2


def chi2_even_df_sf_oracle(x: float, df: int) -> float:
    """Survival function for even df via the closed-form Poisson sum."""
    assert df % 2 == 0 and df > 0
    m = x / 2.0
    term = math.exp(-m)
    total = term
    for i in range(1, df // 2):
        term *= m / i
        total += term
    return min(total, 1.0)


def make_random_model(rng: np.random.Generator, window: int = 4,
                      sets: int = 3, n_rules: int | None = None) -> TrainedModel:
    """Small random-but-valid model for property and interval tests."""
    if n_rules is None:
        n_rules = int(rng.integers(1, 12))
    rb = RuleBase(window, sets)
    while len(rb) < n_rules:
        ant = tuple(int(a) for a in rng.integers(0, sets, window))
        coeffs = tuple(float(c) for c in rng.normal(0.0, 0.5, window + 1))
        retain_rule(rb, ant, coeffs)
    alpha = float(rng.uniform(0.0, 0.5))
    beta = float(rng.uniform(0.0, min(0.9 - alpha, 0.6)))
    garch = GarchParams(float(rng.uniform(1e-4, 0.1)), alpha, beta)
    config = ModelConfig(window=window, sets_per_input=sets, seed=int(rng.integers(0, 2**31)))
    scaling = ScalingParams(0.0, 1.0)
    return TrainedModel(garch=garch, rulebase=rb, config=config,
                        scaling=scaling, training_mse=0.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
