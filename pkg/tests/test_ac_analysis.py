import math
from fractions import Fraction

import numpy as np
import pytest

from reference import cantor_cover_length
from speedmeasure import (ConfigError, IntervalFamily, NestedNullSet, ac_measure_test, ac_probe,
                          banach_zaretsky_verdict, cantor_plus_linear_with_step, luzin_n_upper_bound,
                          oracle_library)

# frozen: (2/3)**12 from exact rational arithmetic in tests/reference.py
CANTOR_G12_LENGTH = 0.007707346629258933


class TestIntervalFamily:
    def test_sorted_and_measured(self):
        fam = IntervalFamily(((0.5, 0.6), (0.0, 0.1)))
        assert fam.pairs == ((0.0, 0.1), (0.5, 0.6))
        assert fam.total_length == pytest.approx(0.2)

    @pytest.mark.parametrize("pairs", [((0.2, 0.1),), ((0.0, 0.5), (0.4, 0.6)), ((0.3, 0.3),)])
    def test_invalid(self, pairs):
        with pytest.raises(ConfigError):
            IntervalFamily(pairs)

    def test_merged_touching(self):
        fam = IntervalFamily(((0.0, 0.25), (0.25, 0.5), (0.75, 1.0)))
        assert [(J.lo, J.hi) for J in fam.merged()] == [(0.0, 0.5), (0.75, 1.0)]

    def test_chord_sum(self):
        fam = IntervalFamily(((0.0, 1 / 3), (2 / 3, 1.0)))
        assert fam.chord_sum(oracle_library("cantor")) == pytest.approx(1.0, abs=1e-10)


class TestNestedNullSet:
    def test_cantor_generations(self):
        ns = NestedNullSet.cantor_generations(12)
        assert len(ns.generations) == 13 and len(ns.generations[12]) == 4096
        assert float(cantor_cover_length(12)) == pytest.approx(CANTOR_G12_LENGTH, rel=1e-15)
        assert ns.generations[12].total_length == pytest.approx(CANTOR_G12_LENGTH, rel=1e-9)

    def test_outward_rounding_covers_exact_cells(self):
        ns = NestedNullSet.cantor_generations(5)
        for a, b in ns.generations[5].pairs:
            k = round(a * 3 ** 5)
            assert Fraction(a) <= Fraction(k, 3 ** 5) and Fraction(b) >= Fraction(k + 1, 3 ** 5)

    def test_not_nested(self):
        with pytest.raises(ConfigError):
            NestedNullSet((((0.0, 0.5),), ((0.4, 0.6),)))

    def test_not_shrinking(self):
        with pytest.raises(ConfigError):
            NestedNullSet((((0.0, 0.5),), ((0.0, 0.5),)))

    @pytest.mark.parametrize("desc,n", [
        ({"kind": "cantor_generations", "depth": 3}, 4),
        ({"kind": "around_point", "t": 0.5, "depth": 5}, 6),
        ({"kind": "explicit", "generations": [[[0, 1]], [[0, 0.25], [0.75, 1]]]}, 2),
    ])
    def test_from_dict(self, desc, n):
        from speedmeasure import Interval
        assert len(NestedNullSet.from_dict(desc, Interval.closed(0, 1)).generations) == n


class TestProbe:
    def test_identity(self, nus):
        r = ac_probe(oracle_library("identity"), 0.1, nu=nus("identity"))
        assert not r.violation and r.delta_estimate == pytest.approx(0.1, rel=0.05)

    @pytest.mark.parametrize("eps", [0.3, 0.9])
    def test_step_atom_witness(self, nus, eps):
        r = ac_probe(oracle_library("step"), eps, nu=nus("step"))
        assert r.violation and r.kind == "atom" and r.delta_estimate == 0.0
        (a, b), = r.witness.pairs
        assert a < 0.5 < b and r.witness_chord_sum == 1.0

    def test_cantor_witness(self, nus):
        c = oracle_library("cantor")
        r = ac_probe(c, 0.5, nu=nus("cantor"))
        assert r.violation and r.verified
        assert len(r.witness) == 4096
        assert r.witness_length == pytest.approx(CANTOR_G12_LENGTH, rel=1e-9) and r.witness_length < 0.008
        assert r.witness.chord_sum(c) == pytest.approx(1.0, abs=1e-9)

    def test_epsilon_positive(self):
        with pytest.raises(ConfigError):
            ac_probe(oracle_library("identity"), 0.0)


class TestMeasureTest:
    @pytest.mark.parametrize("name,passes", [("identity", True), ("circle_arc", True), ("cantor", False),
                                             ("step", False)])
    def test_oracles(self, nus, name, passes):
        rep = ac_measure_test(nus(name), 0.1)
        assert rep.passes is passes

    def test_identity_delta_equals_epsilon(self, nus):
        rep = ac_measure_test(nus("identity"), 0.1)
        assert rep.delta == pytest.approx(0.1)

    def test_cantor_full_mass_on_small_cover(self, nus):
        rep = ac_measure_test(nus("cantor"), 0.25)
        d, mass, lam = rep.worst[-1]
        assert lam <= d and mass == pytest.approx(1.0, abs=1e-6)


class TestVerdict:
    @pytest.mark.parametrize("name,ac", [
        ("identity", True), ("circle_arc", True), ("sin_wave", True), ("power", True),
        ("cantor", False), ("cantor_plus_linear", False), ("step", False), ("staircase", False),
    ])
    def test_oracles(self, nus, name, ac):
        v = banach_zaretsky_verdict(oracle_library(name), nus(name))
        assert v.ac_loc is ac and v.basis == "exact" and v.consistent
        assert (v.probe is not None and v.probe.violation) is (not ac)

    def test_composite_exact(self):
        v = banach_zaretsky_verdict(cantor_plus_linear_with_step())
        assert not v.ac_loc and v.atoms == 1 and v.consistent

    def test_black_box_is_evidence_based(self):
        from speedmeasure import AnalyticCurve, Interval, RealLine
        c = AnalyticCurve(RealLine(), Interval.closed(0, 1), np.sin)
        v = banach_zaretsky_verdict(c)
        assert v.basis == "evidence-based" and v.ac_loc


class TestLuzin:
    def test_identity(self, nus):
        rep = luzin_n_upper_bound(oracle_library("identity"), NestedNullSet.cantor_generations(10),
                                  nus("identity"))
        assert np.allclose(rep.bounds, [(2 / 3) ** g for g in range(11)], atol=1e-9)
        assert rep.tends_to_zero and rep.monotone and rep.diameter_bound_ok
        assert rep.h1_estimate == rep.bounds

    def test_cantor(self, nus):
        rep = luzin_n_upper_bound(oracle_library("cantor"), NestedNullSet.cantor_generations(8),
                                  nus("cantor"))
        assert np.allclose(rep.bounds, 1.0, atol=1e-6) and not rep.tends_to_zero

    def test_step_around_jump(self, nus):
        ns = NestedNullSet.around_point(0.5, 12, 0.25, 0.0, 1.0)
        rep = luzin_n_upper_bound(oracle_library("step"), ns, nus("step"))
        assert rep.bounds[-1] == pytest.approx(1.0) and not rep.tends_to_zero

    def test_outside_domain(self, nus):
        with pytest.raises(ConfigError):
            luzin_n_upper_bound(oracle_library("identity"),
                                NestedNullSet.cantor_generations(2, 0.5, 1.5), nus("identity"))
