import math

import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from speedmeasure import (Circle, Discrete, Euclidean, Interval, IntervalFamily, PiecewiseLinear,
                          RealLine, SampledCadlag, Snowflake, build_speed_measure, measure_interval,
                          metric_axiom_report, oracle_library, signed_variation, var_sum,
                          var_vs_measure_check, variation)

SETTINGS = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
reals = st.floats(-50, 50, allow_nan=False, allow_infinity=False)
unit = st.floats(0, 1, allow_nan=False, allow_infinity=False)


@st.composite
def sampled_paths(draw, space_kind="real"):
    n = draw(st.integers(2, 12))
    gaps = draw(st.lists(st.floats(0.01, 1.0), min_size=n - 1, max_size=n - 1))
    times = np.concatenate([[0.0], np.cumsum(gaps)])
    if space_kind == "discrete":
        pts = draw(st.lists(st.sampled_from("abc"), min_size=n, max_size=n))
        space = Discrete()
    else:
        pts = draw(st.lists(reals, min_size=n, max_size=n))
        space = RealLine()
    return SampledCadlag(space, list(zip(times.tolist(), pts)))


@st.composite
def polylines(draw):
    n = draw(st.integers(2, 8))
    gaps = draw(st.lists(st.floats(0.05, 1.0), min_size=n - 1, max_size=n - 1))
    times = np.concatenate([[0.0], np.cumsum(gaps)])
    pts = draw(st.lists(st.tuples(reals, reals), min_size=n, max_size=n))
    return PiecewiseLinear(Euclidean(2), list(zip(times.tolist(), pts)))


def _points_in(curve, fracs):
    dom = curve.domain
    return sorted(dom.lo + dom.length * f for f in fracs)


@SETTINGS
@given(st.lists(reals, min_size=2, max_size=6), st.floats(0.05, 1.0))
def test_real_and_snowflake_axioms(pts, alpha):
    assert metric_axiom_report(RealLine(), pts).passed
    assert metric_axiom_report(Snowflake(alpha), pts).passed


@SETTINGS
@given(st.lists(st.floats(-20, 20), min_size=2, max_size=6), st.floats(0.1, 5))
def test_circle_axioms(pts, r):
    assert metric_axiom_report(Circle(r), pts, rtol=1e-9).passed


@SETTINGS
@given(polylines(), st.lists(unit, min_size=3, max_size=3))
def test_additivity(curve, fracs):
    a, b, c = _points_in(curve, fracs)
    vab = variation(curve, Interval.closed(a, b)).value
    vbc = variation(curve, Interval.closed(b, c)).value
    vac = variation(curve, Interval.closed(a, c)).value
    assert vac == pytest.approx(vab + vbc, abs=1e-9 * max(1.0, vac))


@SETTINGS
@given(polylines(), st.lists(unit, min_size=4, max_size=4))
def test_monotone_in_interval(curve, fracs):
    a, b, c, d = _points_in(curve, fracs)
    inner = variation(curve, Interval.closed(b, c)).value
    outer = variation(curve, Interval.closed(a, d)).value
    assert inner <= outer + 1e-9 * max(1.0, outer)


@SETTINGS
@given(polylines(), st.lists(unit, min_size=2, max_size=30))
def test_refinement_never_decreases_chord_sums(curve, fracs):
    dom = curve.domain
    coarse = np.unique(_points_in(curve, fracs[: len(fracs) // 2 + 1]))
    fine = np.unique(_points_in(curve, fracs))
    assume(coarse.size >= 2)
    assert var_sum(curve, fine) >= var_sum(curve, coarse) - 1e-9
    assert var_sum(curve, fine) <= variation(curve).value + 1e-9


@SETTINGS
@given(polylines(), st.lists(unit, min_size=2, max_size=2))
def test_sign_convention(curve, fracs):
    a, b = _points_in(curve, fracs)
    assert signed_variation(curve, b, a) == -signed_variation(curve, a, b)


@SETTINGS
@given(sampled_paths(), st.lists(unit, min_size=3, max_size=3))
def test_telescoping_and_open_identity(curve, fracs):
    nu = build_speed_measure(curve, n_cells=16)
    s, t, u = _points_in(curve, fracs)
    assume(s < t < u)
    whole = measure_interval(nu, Interval(s, u, False, True))
    parts = measure_interval(nu, Interval(s, t, False, True)) + measure_interval(nu, Interval(t, u, False, True))
    assert whole == pytest.approx(parts, abs=1e-9)
    J = Interval.open(s, u)
    assert measure_interval(nu, J) == pytest.approx(variation(curve, J).value, abs=1e-9)


@SETTINGS
@given(sampled_paths("discrete"), st.lists(unit, min_size=2, max_size=2))
def test_var_at_most_measure(curve, fracs):
    nu = build_speed_measure(curve, n_cells=16)
    a, b = _points_in(curve, fracs)
    assume(a < b)
    rep = var_vs_measure_check(curve, nu, Interval.closed(a, b))
    assert rep.holds and rep.variation <= rep.measure + 1e-12


@SETTINGS
@given(sampled_paths())
def test_total_mass_is_chord_total(curve):
    nu = build_speed_measure(curve, n_cells=16)
    assert measure_interval(nu, curve.domain) == pytest.approx(float(np.sum(curve.steps)), abs=1e-9)


@SETTINGS
@given(st.lists(st.tuples(unit, st.floats(0.001, 0.1)), min_size=1, max_size=8))
def test_family_merge_preserves_length(raw):
    pairs, end = [], -1.0
    for a, w in sorted(raw):
        a = max(a, end)
        pairs.append((a, a + w))
        end = a + w
    fam = IntervalFamily(tuple(pairs))
    merged = sum(J.length for J in fam.merged())
    assert merged == pytest.approx(fam.total_length, abs=1e-12)


@SETTINGS
@given(st.floats(-10, 10), st.floats(0, 10), st.booleans(), st.booleans())
def test_interval_text_roundtrip(lo, w, lc, hc):
    assume(lo + w > lo)
    J = Interval(lo, lo + w, lc, hc)
    assert Interval.parse(str(J)) == J


@SETTINGS
@given(unit, unit)
def test_cantor_measure_is_monotone_difference(s, t):
    from speedmeasure import cantor
    s, t = sorted((s, t))
    assume(s < t)
    nu = _cantor_nu()
    got = measure_interval(nu, Interval(s, t, False, True))
    assert got == pytest.approx(float(cantor(t) - cantor(s)), abs=3e-6)


_CACHE = {}


def _cantor_nu():
    if "cantor" not in _CACHE:
        _CACHE["cantor"] = build_speed_measure(oracle_library("cantor"))
    return _CACHE["cantor"]
