"""Interval type-2 Gaussian sets, TSK rules, firing strengths, and defuzzification.

A set is a Gaussian membership function whose standard deviation is only
known to lie in [sigma_low, sigma_high]; evaluating it yields a membership
*interval*.  Rules pair a per-slot set assignment (the antecedent) with an
affine consequent.  Firing strengths are per-slot membership products,
accumulated in log space because a window of small memberships underflows
the naive product.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

__all__ = [
    "GaussianIT2Set",
    "IntervalMembership",
    "FiringInterval",
    "FuzzyRule",
    "RuleBase",
    "FuzzyOutputInterval",
    "membership",
    "set_centers",
    "build_sets",
    "firing_strength",
    "consequent_eval",
    "classify_antecedent",
    "retain_rule",
    "select_rules",
    "fuzzy_output",
    "defuzzify",
]

#: log-firing floor: anything at or below this exponentiates to exactly 0.0,
#: so rules tied at the floor are indistinguishable and insertion order wins
LOG_FIRING_FLOOR = -746.0


@dataclass(frozen=True)
class GaussianIT2Set:
    """Gaussian set with an uncertain standard deviation in [sigma_low, sigma_high]."""

    center: float
    sigma_low: float
    sigma_high: float

    def __post_init__(self):
        if not all(map(math.isfinite, (self.center, self.sigma_low, self.sigma_high))):
            raise ValueError("set parameters must be finite")
        if not 0.0 < self.sigma_low <= self.sigma_high:
            raise ValueError(
                f"need 0 < sigma_low <= sigma_high, got ({self.sigma_low}, {self.sigma_high})"
            )


@dataclass(frozen=True)
class IntervalMembership:
    low: float
    high: float

    def __post_init__(self):
        if not 0.0 <= self.low <= self.high <= 1.0:
            raise ValueError(f"membership interval out of order: ({self.low}, {self.high})")


@dataclass(frozen=True)
class FiringInterval:
    low: float
    high: float

    def __post_init__(self):
        if not 0.0 <= self.low <= self.high <= 1.0:
            raise ValueError(f"firing interval out of order: ({self.low}, {self.high})")


@dataclass(frozen=True)
class FuzzyRule:
    """Antecedent set indices (one per window slot) plus affine consequent coefficients.

    ``coeffs[0]`` is the intercept; ``coeffs[j]`` multiplies window slot j-1.
    """

    antecedent: tuple
    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "antecedent", tuple(int(a) for a in self.antecedent))
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if len(self.coeffs) != len(self.antecedent) + 1:
            raise ValueError(
                f"rule needs {len(self.antecedent) + 1} coefficients, got {len(self.coeffs)}"
            )
        if any(a < 0 for a in self.antecedent):
            raise ValueError("antecedent indices must be non-negative")


@dataclass(frozen=True)
class FuzzyOutputInterval:
    low: float
    high: float

    def __post_init__(self):
        if not self.low <= self.high:
            raise ValueError(f"output interval out of order: ({self.low}, {self.high})")


class RuleBase:
    """Ordered collection of rules, unique by antecedent.

    Mutated only by :func:`retain_rule` during training; frozen (read-only)
    afterwards.  Rule order is insertion order, which tie-breaks selection.
    """

    SCHEMA = "it2garch.rulebase/1"

    def __init__(self, window: int, sets_per_input: int, set_mode: str = "three-sigma"):
        if window < 1 or sets_per_input < 1:
            raise ValueError("window and sets_per_input must be positive")
        self.window = int(window)
        self.sets_per_input = int(sets_per_input)
        self.set_mode = set_mode
        self.rules: list = []
        self.index: dict = {}

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    def position(self, antecedent) -> int | None:
        return self.index.get(tuple(antecedent))

    def replace_coeffs(self, coeff_rows) -> None:
        """Install optimized coefficients, one row per rule in insertion order."""
        if len(coeff_rows) != len(self.rules):
            raise ValueError(f"expected {len(self.rules)} coefficient rows, got {len(coeff_rows)}")
        self.rules = [
            FuzzyRule(rule.antecedent, tuple(float(c) for c in row))
            for rule, row in zip(self.rules, coeff_rows)
        ]

    def to_dict(self) -> dict:
        return {
            "schema": self.SCHEMA,
            "window": self.window,
            "sets_per_input": self.sets_per_input,
            "set_mode": self.set_mode,
            "rules": [
                {"antecedent": list(r.antecedent), "coeffs": list(r.coeffs)}
                for r in self.rules
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RuleBase":
        if doc.get("schema") != cls.SCHEMA:
            raise ValueError(f"unsupported rulebase schema: {doc.get('schema')!r}")
        base = cls(doc["window"], doc["sets_per_input"], doc["set_mode"])
        for entry in doc["rules"]:
            retain_rule(base, entry["antecedent"], entry["coeffs"])
        return base

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "RuleBase":
        return cls.from_dict(json.loads(Path(path).read_text()))


def membership(fset: GaussianIT2Set, x: float) -> IntervalMembership:
    """Interval membership of ``x``: Gaussian evaluated at both deviations.

    The wider deviation gives the upper bound, the narrower the lower bound.
    """
    if not math.isfinite(x):
        raise ValueError(f"x must be finite, got {x!r}")
    d = x - fset.center
    dd = d * d
    high = math.exp(-dd / (2.0 * fset.sigma_high * fset.sigma_high))
    low = math.exp(-dd / (2.0 * fset.sigma_low * fset.sigma_low))
    if low > high:
        low = high
    return IntervalMembership(low, high)


def set_centers(center: float, sigma_mid: float, count: int) -> tuple:
    """Set centers spread evenly over [center - 3*sigma, center + 3*sigma]."""
    if count < 1:
        raise ValueError("need at least one set")
    if count == 1:
        return (center,)
    return tuple(
        center + 3.0 * sigma_mid * (2.0 * k / (count - 1) - 1.0) for k in range(count)
    )


def build_sets(center, variance, count: int = 3, sigma_floor: float = 1e-8) -> tuple:
    """Fuzzy sets for one time step from the variance interval.

    Deviations come from the interval bounds (sigma_low = sqrt(lower),
    sigma_high = sqrt(upper)); centers are placed by the three-sigma rule
    around ``center`` using the point deviation.  All deviations are floored
    at ``sigma_floor`` so a collapsed interval still yields valid sets.
    """
    sig_lo = max(math.sqrt(variance.lower), sigma_floor)
    sig_hi = max(math.sqrt(variance.upper), sigma_floor)
    sig_mid = max(math.sqrt(variance.point), sigma_floor)
    return tuple(
        GaussianIT2Set(c, sig_lo, sig_hi) for c in set_centers(center, sig_mid, count)
    )


def _log_or_floor(value: float) -> float:
    if value <= 0.0:
        return -math.inf
    return math.log(value)


def firing_strength(rule: FuzzyRule, memberships: Sequence[Sequence[IntervalMembership]]) -> FiringInterval:
    """Product of the selected per-slot memberships, accumulated in log space."""
    if len(memberships) != len(rule.antecedent):
        raise ValueError(
            f"membership grid has {len(memberships)} slots, rule expects {len(rule.antecedent)}"
        )
    log_high = 0.0
    log_low = 0.0
    for slot, set_idx in enumerate(rule.antecedent):
        m = memberships[slot][set_idx]
        log_high += _log_or_floor(m.high)
        log_low += _log_or_floor(m.low)
    high = math.exp(log_high) if log_high > -math.inf else 0.0
    low = math.exp(log_low) if log_low > -math.inf else 0.0
    if low > high:
        low = high
    return FiringInterval(low, high)


def consequent_eval(rule: FuzzyRule, window: Sequence[float]) -> float:
    """Affine consequent: coeffs[0] + sum(coeffs[j+1] * window[j])."""
    if len(window) != len(rule.antecedent):
        raise ValueError(f"window length {len(window)} != rule arity {len(rule.antecedent)}")
    acc = rule.coeffs[0]
    for j, x in enumerate(window):
        acc += rule.coeffs[j + 1] * x
    return acc


def classify_antecedent(window: Sequence[float], sets: Sequence[GaussianIT2Set]) -> tuple:
    """Per-slot index of the set with maximal upper membership (ties to the lowest index)."""
    if not sets:
        raise ValueError("need at least one set")
    out = []
    for x in window:
        best_idx = 0
        best = membership(sets[0], x).high
        for k in range(1, len(sets)):
            m = membership(sets[k], x).high
            if m > best:
                best = m
                best_idx = k
        out.append(best_idx)
    return tuple(out)


def retain_rule(rulebase: RuleBase, antecedent, initial_coeffs) -> RuleBase:
    """Insert a rule for ``antecedent`` unless one already exists.

    Existing rules keep their coefficients; the base never grows beyond one
    rule per distinct antecedent.
    """
    key = tuple(int(a) for a in antecedent)
    if len(key) != rulebase.window:
        raise ValueError(f"antecedent length {len(key)} != window {rulebase.window}")
    if any(not 0 <= a < rulebase.sets_per_input for a in key):
        raise ValueError(f"antecedent indices must lie in [0, {rulebase.sets_per_input})")
    if key not in rulebase.index:
        rulebase.index[key] = len(rulebase.rules)
        rulebase.rules.append(FuzzyRule(key, initial_coeffs))
    return rulebase


def select_rules(rulebase: RuleBase, memberships) -> tuple:
    """Max-firing rules for the upper and lower bounds.

    Returns ``(rule_l, f_high_max, rule_r, f_low_max)``: the rule whose upper
    firing is maximal with that firing value, and likewise for the lower
    firing.  Ties (including the all-zero-firing case) go to the earliest
    inserted rule.
    """
    if len(rulebase) == 0:
        raise ValueError("empty rule base")
    best_l = best_r = 0
    best_high = best_low = -math.inf
    for i, rule in enumerate(rulebase.rules):
        log_high = 0.0
        log_low = 0.0
        for slot, set_idx in enumerate(rule.antecedent):
            m = memberships[slot][set_idx]
            log_high += _log_or_floor(m.high)
            log_low += _log_or_floor(m.low)
        log_high = max(log_high, LOG_FIRING_FLOOR)
        log_low = max(log_low, LOG_FIRING_FLOOR)
        if log_high > best_high:
            best_high = log_high
            best_l = i
        if log_low > best_low:
            best_low = log_low
            best_r = i
    return (
        rulebase.rules[best_l],
        math.exp(best_high),
        rulebase.rules[best_r],
        math.exp(best_low),
    )


def fuzzy_output(rule_l: FuzzyRule, f_high: float, rule_r: FuzzyRule, f_low: float,
                 window: Sequence[float]) -> FuzzyOutputInterval:
    """Fuzzy output interval: consequents scaled by their max firing strengths.

    The raw pair can arrive out of order when consequents have opposite
    signs, so the bounds are sorted before construction.
    """
    raw_upper = consequent_eval(rule_l, window) * f_high
    raw_lower = consequent_eval(rule_r, window) * f_low
    if raw_lower <= raw_upper:
        return FuzzyOutputInterval(raw_lower, raw_upper)
    return FuzzyOutputInterval(raw_upper, raw_lower)


def defuzzify(interval: FuzzyOutputInterval) -> float:
    """Interval midpoint."""
    return (interval.low + interval.high) * 0.5
