import math
from fractions import Fraction

import numpy as np
import pytest

from reference import cantor_digits
from speedmeasure import (AnalyticCurve, Composite, ConfigError, Discrete, DomainError, Euclidean,
                          Interval, PiecewiseLinear, RealLine, Restriction, SampledCadlag, cantor,
                          cantor_exact, non_cadlag_step, one_sided_limits, oracle_library)
from speedmeasure.oracles import list_oracles

# frozen from the 60-digit ternary oracle in tests/reference.py
CANTOR_AT_QUARTER = 1 / 3


class TestInterval:
    @pytest.mark.parametrize("text,lo,hi,lc,hc", [
        ("[0, 1]", 0, 1, True, True),
        ("(0, 0.5]", 0, 0.5, False, True),
        ("[0.25,0.75)", 0.25, 0.75, True, False),
        ("(1, 2)", 1, 2, False, False),
    ])
    def test_parse(self, text, lo, hi, lc, hc):
        assert Interval.parse(text) == Interval(lo, hi, lc, hc)

    @pytest.mark.parametrize("args", [(1, 0), (0, math.inf), (0.5, 0.5, False, True)])
    def test_invalid(self, args):
        with pytest.raises(ConfigError):
            Interval(*args)

    def test_degenerate_closed_allowed(self):
        assert Interval.closed(0.3, 0.3).is_degenerate

    def test_contains_respects_flags(self):
        J = Interval(0, 1, False, True)
        assert not J.contains(0) and J.contains(1) and J.contains(0.5)

    def test_contains_interval(self):
        D = Interval(0, 1, False, True)
        assert D.contains_interval(Interval.open(0, 1))
        assert not D.contains_interval(Interval.closed(0, 1))

    @pytest.mark.parametrize("text", ["0, 1", "[0 1]", "[a, 1]"])
    def test_parse_errors(self, text):
        with pytest.raises((ConfigError, ValueError)):
            Interval.parse(text)


class TestEval:
    def test_cantor_left_third_endpoint(self):
        # the float 1/3 lies just below 1/3, where the function is a hair below 1/2
        got = oracle_library("cantor").eval(1 / 3)
        assert got == pytest.approx(float(cantor_digits(Fraction(1 / 3))), abs=1e-15)
        assert got == pytest.approx(0.5, abs=1e-10)

    def test_cantor_quarter_matches_digit_oracle(self):
        ref = float(cantor_digits(Fraction(1, 4)))
        assert ref == pytest.approx(CANTOR_AT_QUARTER, abs=1e-15)
        assert oracle_library("cantor").eval(0.25) == pytest.approx(CANTOR_AT_QUARTER, abs=1e-15)

    def test_cantor_agrees_with_exact_values(self):
        rng = np.random.default_rng(1)
        xs = rng.uniform(0, 1, 200)
        exact = np.array([float(cantor_exact(Fraction(x))) for x in xs])
        assert np.max(np.abs(cantor(xs) - exact)) < 1e-11

    @pytest.mark.parametrize("x", [Fraction(1, 4), Fraction(3, 10), Fraction(2, 7), Fraction(7, 9)])
    def test_exact_cantor_matches_digit_oracle(self, x):
        assert abs(cantor_exact(x) - cantor_digits(x)) < Fraction(1, 2 ** 55)

    def test_sampled_cadlag_convention(self):
        c = SampledCadlag(Discrete(), [(0.0, "a"), (0.5, "b")], Interval.closed(0, 1))
        assert c.eval(0.4) == "a" and c.eval(0.5) == "b" and c.eval(0.9) == "b"

    def test_piecewise_linear_midpoint(self):
        c = PiecewiseLinear(Euclidean(2), [(0.0, (0, 0)), (1.0, (1, 1))])
        assert np.allclose(c.eval(0.5), (0.5, 0.5))

    def test_identity_and_circle(self):
        assert oracle_library("identity").eval(0.3) == 0.3
        assert oracle_library("circle_arc").eval(math.pi) == pytest.approx(math.pi)

    def test_outside_domain(self):
        with pytest.raises(DomainError):
            oracle_library("identity").eval(1.5)


class TestValidation:
    def test_sample_times_increasing(self):
        with pytest.raises(ConfigError):
            SampledCadlag(RealLine(), [(0.0, 1.0), (0.0, 2.0)])

    def test_sample_times_inside_domain(self):
        with pytest.raises(ConfigError):
            SampledCadlag(RealLine(), [(0.0, 1.0), (2.0, 2.0)], Interval.closed(0, 1))

    def test_composite_shared_domain(self):
        with pytest.raises(ConfigError):
            Composite([oracle_library("identity"), oracle_library("identity", hi=2.0)])

    def test_declared_jumps_sorted_and_inside(self):
        f = lambda t: np.asarray(t, dtype=float)
        with pytest.raises(ConfigError):
            AnalyticCurve(RealLine(), Interval.closed(0, 1), f, jumps=(0.6, 0.2))
        with pytest.raises(ConfigError):
            AnalyticCurve(RealLine(), Interval.closed(0, 1), f, jumps=(1.5,))

    def test_piecewise_linear_needs_euclidean(self):
        with pytest.raises(ConfigError):
            PiecewiseLinear(RealLine(), [(0, 0), (1, 1)])

    def test_unknown_oracle(self):
        with pytest.raises(ConfigError):
            oracle_library("koch")

    def test_restriction_outside(self):
        with pytest.raises(DomainError):
            Restriction(oracle_library("identity"), Interval.closed(0.5, 2))


class TestOneSidedLimits:
    @pytest.mark.parametrize("curve,t,left,right", [
        (oracle_library("step"), 0.5, 1.0, 0.0),
        (non_cadlag_step(), 0.5, 5.0, 5.0),
        (oracle_library("cantor"), 0.7, 0.0, 0.0),
        (oracle_library("identity"), 0.0, 0.0, 0.0),
    ])
    def test_declared(self, curve, t, left, right):
        g = one_sided_limits(curve, t)
        assert (g.left_gap, g.right_gap) == (left, right)

    def test_probed_black_box(self):
        f = lambda t: np.where(np.asarray(t) >= 0.5, 1.0, 0.0)
        c = AnalyticCurve(RealLine(), Interval.closed(0, 1), f)
        g = one_sided_limits(c, 0.5)
        assert g.status == "converged" and (g.left_gap, g.right_gap) == (1.0, 0.0)

    def test_probed_cantor(self):
        c = AnalyticCurve(RealLine(), Interval.closed(0, 1), cantor)
        g = one_sided_limits(c, 0.7)
        assert g.resolved and g.mass == 0.0

    def test_endpoint_convention(self):
        c = oracle_library("step", times=(0.0, 1.0), levels=(0.0, 1.0, 2.0))
        assert one_sided_limits(c, 0.0).left_gap == 0.0
        assert one_sided_limits(c, 1.0).right_gap == 0.0

    def test_sampled_jump(self):
        c = SampledCadlag(Discrete(), [(0.0, "a"), (0.5, "b"), (1.0, "a")])
        g = one_sided_limits(c, 0.5)
        assert (g.left_gap, g.right_gap) == (1.0, 0.0)

    def test_bad_schedule(self):
        with pytest.raises(ConfigError):
            one_sided_limits(oracle_library("identity"), 0.5, h_schedule=[0.1, 0.2], use_declared=False)


class TestComposites:
    def test_composite_sums_values(self):
        c = Composite([oracle_library("cantor"), oracle_library("identity")])
        assert c.eval(1 / 3) == pytest.approx(0.5 + 1 / 3)
        assert c.truth["variation"] == 2.0

    def test_restriction_keeps_inside_jumps(self):
        st = oracle_library("staircase")
        r = Restriction(st, Interval.closed(0.3, 0.8))
        assert r.declared_jumps == (0.5, 0.75)
        assert r.eval(0.6) == st.eval(0.6)


class TestCatalogue:
    def test_names(self):
        names = {e["name"] for e in list_oracles()}
        assert {"cantor", "identity", "circle_arc", "step", "sin_wave", "cantor_plus_linear",
                "staircase"} <= names

    def test_declared_jumps(self):
        cat = {e["name"]: e for e in list_oracles()}
        assert len(cat["step"]["declared_jumps"]) == 1
        for name in ("cantor", "identity", "circle_arc", "sin_wave", "cantor_plus_linear"):
            assert cat[name]["declared_jumps"] == []

    @pytest.mark.parametrize("name,var", [("cantor", 1.0), ("sin_wave", 4.0), ("circle_arc", 2 * math.pi)])
    def test_known_variation(self, name, var):
        cat = {e["name"]: e for e in list_oracles()}
        assert cat[name]["truth"]["variation"] == pytest.approx(var, abs=1e-12)
