"""Interval type-2 sets, rules, firing strengths, and defuzzification."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from it2garch.fuzzy import (
    FiringInterval,
    FuzzyOutputInterval,
    FuzzyRule,
    GaussianIT2Set,
    IntervalMembership,
    RuleBase,
    build_sets,
    classify_antecedent,
    consequent_eval,
    defuzzify,
    firing_strength,
    fuzzy_output,
    membership,
    retain_rule,
    select_rules,
)
from it2garch.garch import VarianceInterval


class TestMembership:
    def test_center_gives_unit_interval(self):
        s = GaussianIT2Set(2.0, 0.5, 1.5)
        assert membership(s, 2.0) == IntervalMembership(1.0, 1.0)

    def test_one_sigma_point(self):
        s = GaussianIT2Set(0.0, 1.0, 1.0)
        m = membership(s, 1.0)
        assert m.low == pytest.approx(math.exp(-0.5))
        assert m.high == pytest.approx(math.exp(-0.5))

    def test_three_sigma_with_narrow_lower(self):
        s = GaussianIT2Set(0.0, 0.5, 1.0)
        m = membership(s, 3.0)
        assert m.high == pytest.approx(math.exp(-4.5))
        assert m.low == pytest.approx(math.exp(-18.0))
        assert m.low <= m.high

    @settings(max_examples=100, deadline=None)
    @given(
        st.floats(-50, 50),
        st.floats(-50, 50),
        st.floats(0.01, 10),
        st.floats(0.01, 10),
    )
    def test_interval_ordering_and_unit_peak(self, c, x, s1, s2):
        lo, hi = sorted((s1, s2))
        m = membership(GaussianIT2Set(c, lo, hi), x)
        assert 0.0 <= m.low <= m.high <= 1.0
        if x == c:
            assert m == IntervalMembership(1.0, 1.0)
        elif abs(x - c) > 1e-6 * hi:  # exponent resolvable in float64
            assert m.high < 1.0

    def test_monotone_in_sigma_off_center(self):
        x, c = 2.0, 0.0
        values = [membership(GaussianIT2Set(c, s, s), x).high
                  for s in (0.5, 1.0, 2.0, 4.0)]
        assert all(a < b for a, b in zip(values, values[1:]))


class TestBuildSets:
    def test_three_sigma_centers(self):
        sets = build_sets(5.0, VarianceInterval(1.0, 1.0, 1.0))
        assert [s.center for s in sets] == [2.0, 5.0, 8.0]
        assert all(s.sigma_low == 1.0 and s.sigma_high == 1.0 for s in sets)

    def test_interval_deviations(self):
        sets = build_sets(0.0, VarianceInterval(0.25, 1.0, 4.0))
        assert [s.center for s in sets] == [-3.0, 0.0, 3.0]
        assert all(s.sigma_low == 0.5 and s.sigma_high == 2.0 for s in sets)

    def test_degenerate_variance_floored(self):
        sets = build_sets(1.0, VarianceInterval(0.0, 0.0, 0.0), sigma_floor=1e-8)
        assert all(s.center == pytest.approx(1.0, abs=1e-6) for s in sets)
        assert all(s.sigma_low == 1e-8 and s.sigma_high == 1e-8 for s in sets)

    def test_configurable_set_count(self):
        sets = build_sets(0.0, VarianceInterval(1.0, 1.0, 1.0), count=5)
        assert [s.center for s in sets] == [-3.0, -1.5, 0.0, 1.5, 3.0]


class TestFiring:
    def grid(self, pairs):
        return [[IntervalMembership(lo, hi) for lo, hi in row] for row in pairs]

    def test_all_ones(self):
        rule = FuzzyRule((0, 0), (0.0, 0.0, 0.0))
        g = self.grid([[(1.0, 1.0)], [(1.0, 1.0)]])
        assert firing_strength(rule, g) == FiringInterval(1.0, 1.0)

    def test_product_of_halves(self):
        rule = FuzzyRule((0, 0), (0.0, 0.0, 0.0))
        g = self.grid([[(0.5, 0.5)], [(0.5, 0.5)]])
        f = firing_strength(rule, g)
        assert f.low == pytest.approx(0.25) and f.high == pytest.approx(0.25)

    def test_zero_annihilates(self):
        rule = FuzzyRule((0, 0), (0.0, 0.0, 0.0))
        g = self.grid([[(0.0, 0.0)], [(0.9, 1.0)]])
        assert firing_strength(rule, g) == FiringInterval(0.0, 0.0)

    def test_log_space_matches_naive_product(self, rng):
        # naive product oracle, memberships >= 1e-6, window up to 8
        for _ in range(200):
            w = int(rng.integers(1, 9))
            lows = rng.uniform(1e-6, 1.0, w)
            highs = np.minimum(1.0, lows + rng.uniform(0, 1.0 - lows))
            rule = FuzzyRule(tuple([0] * w), tuple([0.0] * (w + 1)))
            g = self.grid([[(lo, hi)] for lo, hi in zip(lows, highs)])
            f = firing_strength(rule, g)
            naive_low = math.prod(lows)
            naive_high = math.prod(highs)
            assert f.low == pytest.approx(naive_low, rel=1e-12)
            assert f.high == pytest.approx(naive_high, rel=1e-12)

    def test_underflow_survives_log_space(self):
        w = 40
        rule = FuzzyRule(tuple([0] * w), tuple([0.0] * (w + 1)))
        g = self.grid([[(1e-12, 1e-10)]] * w)
        f = firing_strength(rule, g)
        assert f.low == 0.0 and f.high == 0.0  # true product underflows to zero


class TestConsequent:
    def test_zero_polynomial(self):
        rule = FuzzyRule((0, 0, 0), (0.0, 0.0, 0.0, 0.0))
        assert consequent_eval(rule, (4.0, 5.0, 6.0)) == 0.0

    def test_affine(self):
        rule = FuzzyRule((0,), (1.0, 2.0))
        assert consequent_eval(rule, (3.0,)) == 7.0

    def test_projection(self):
        rule = FuzzyRule((0, 0), (0.0, 1.0, 0.0))
        assert consequent_eval(rule, (42.0, -1.0)) == 42.0


class TestClassify:
    def sets3(self):
        return build_sets(0.0, VarianceInterval(1.0, 1.0, 1.0))

    def test_center_hit(self):
        assert classify_antecedent((0.0,), self.sets3()) == (1,)
        assert classify_antecedent((3.0,), self.sets3()) == (2,)

    def test_tie_breaks_to_lowest_index(self):
        # -1.5 is equidistant between centers -3 and 0 with equal sigmas
        assert classify_antecedent((-1.5,), self.sets3()) == (0,)

    def test_repeated_argmax(self):
        assert classify_antecedent((3.0, 3.0, 3.0), self.sets3()) == (2, 2, 2)

    def test_translation_invariance(self, rng):
        for _ in range(50):
            c = float(rng.normal(0, 5))
            var = VarianceInterval(0.5, 1.0, 2.0)
            window = tuple(float(v) for v in rng.normal(c, 2.0, 5))
            shift = float(rng.normal(0, 100))
            a = classify_antecedent(window, build_sets(c, var))
            b = classify_antecedent(tuple(v + shift for v in window),
                                    build_sets(c + shift, var))
            assert a == b


class TestRuleBase:
    def test_first_insertion(self):
        rb = RuleBase(2, 3)
        retain_rule(rb, (0, 1), (0.0, 0.0, 0.0))
        assert len(rb) == 1

    def test_duplicate_antecedent_is_noop(self):
        rb = RuleBase(2, 3)
        retain_rule(rb, (0, 1), (0.0, 0.0, 0.0))
        retain_rule(rb, (0, 1), (9.0, 9.0, 9.0))
        assert len(rb) == 1
        assert rb.rules[0].coeffs == (0.0, 0.0, 0.0)

    def test_distinct_antecedents_accumulate(self):
        rb = RuleBase(2, 3)
        retain_rule(rb, (0, 1), (0.0, 0.0, 0.0))
        retain_rule(rb, (1, 1), (0.0, 0.0, 0.0))
        assert len(rb) == 2

    def test_size_capped_by_antecedent_space(self, rng):
        rb = RuleBase(3, 2)
        for _ in range(100):
            retain_rule(rb, tuple(int(a) for a in rng.integers(0, 2, 3)),
                        (0.0,) * 4)
        assert len(rb) <= 2 ** 3

    def test_json_round_trip(self, tmp_path):
        rb = RuleBase(2, 3)
        retain_rule(rb, (0, 2), (0.5, -1.0, 2.0))
        retain_rule(rb, (1, 1), (0.25, 0.0, -3.0))
        path = tmp_path / "rules.json"
        rb.save(path)
        loaded = RuleBase.load(path)
        assert loaded.to_dict() == rb.to_dict()
        loaded.save(tmp_path / "rules2.json")
        assert (tmp_path / "rules.json").read_text() == (tmp_path / "rules2.json").read_text()

    def test_schema_rejected(self):
        with pytest.raises(ValueError, match="schema"):
            RuleBase.from_dict({"schema": "bogus", "window": 2,
                                "sets_per_input": 3, "set_mode": "x", "rules": []})


class TestSelectRules:
    def grid_for(self, w, value=0.5):
        return [[IntervalMembership(value, value)] * 3 for _ in range(w)]

    def test_singleton_base(self):
        rb = RuleBase(1, 3)
        retain_rule(rb, (0,), (0.0, 1.0))
        g = [[IntervalMembership(0.2, 0.4),
              IntervalMembership(0.1, 0.2),
              IntervalMembership(0.0, 0.0)]]
        rule_l, fh, rule_r, fl = select_rules(rb, g)
        assert rule_l is rb.rules[0] and rule_r is rb.rules[0]
        assert fh == pytest.approx(0.4) and fl == pytest.approx(0.2)

    def test_highest_upper_firing_wins(self):
        rb = RuleBase(1, 3)
        retain_rule(rb, (0,), (0.0, 1.0))
        retain_rule(rb, (1,), (0.0, 2.0))
        g = [[IntervalMembership(0.8, 0.9), IntervalMembership(0.3, 0.4),
              IntervalMembership(0.0, 0.0)]]
        rule_l, fh, _, _ = select_rules(rb, g)
        assert rule_l is rb.rules[0]
        assert fh == pytest.approx(0.9)

    def test_all_zero_firing_falls_back_to_earliest(self):
        rb = RuleBase(2, 3)
        retain_rule(rb, (0, 0), (0.0, 0.0, 0.0))
        retain_rule(rb, (1, 1), (0.0, 0.0, 0.0))
        g = [[IntervalMembership(0.0, 0.0)] * 3 for _ in range(2)]
        rule_l, fh, rule_r, fl = select_rules(rb, g)
        assert rule_l is rb.rules[0] and rule_r is rb.rules[0]
        assert fh == 0.0 and fl == 0.0

    def test_empty_base_rejected(self):
        with pytest.raises(ValueError):
            select_rules(RuleBase(1, 3), self.grid_for(1))


class TestFuzzyOutput:
    def test_degenerate_identical_rules(self):
        rule = FuzzyRule((0,), (0.0, 2.0))
        out = fuzzy_output(rule, 0.5, rule, 0.5, (3.0,))
        assert out == FuzzyOutputInterval(3.0, 3.0)

    def test_ordering_enforced(self):
        # consequents (2, 1) with firings (0.5, 0.8) -> raw (1.0, 0.8)
        rule_l = FuzzyRule((0,), (2.0, 0.0))
        rule_r = FuzzyRule((0,), (1.0, 0.0))
        out = fuzzy_output(rule_l, 0.5, rule_r, 0.8, (9.0,))
        assert out.low == pytest.approx(0.8)
        assert out.high == pytest.approx(1.0)

    def test_zero_firing_zero_output(self):
        rule = FuzzyRule((0,), (5.0, 5.0))
        out = fuzzy_output(rule, 0.0, rule, 0.0, (1.0,))
        assert out == FuzzyOutputInterval(0.0, 0.0)


class TestDefuzzify:
    def test_midpoint(self):
        assert defuzzify(FuzzyOutputInterval(0.2, 0.8)) == pytest.approx(0.5)
        assert defuzzify(FuzzyOutputInterval(-1.0, 1.0)) == 0.0
        assert defuzzify(FuzzyOutputInterval(3.0, 3.0)) == 3.0

    @settings(max_examples=100, deadline=None)
    @given(st.floats(-1e12, 1e12), st.floats(0, 1e12))
    def test_result_inside_interval(self, low, width):
        interval = FuzzyOutputInterval(low, low + width)
        mid = defuzzify(interval)
        assert interval.low <= mid <= interval.high
