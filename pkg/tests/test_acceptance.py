"""One test per acceptance criterion; each records a pass/fail line."""
import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest
from scipy.integrate import quad

from reference import power_lp_integral
from speedmeasure import (CONTINUOUS_ORACLES, ORACLE_NAMES, Interval, NestedNullSet, acp_classify,
                          atom_mass_from_variation, banach_zaretsky_verdict, build_speed_measure,
                          continuity_verdict, length_identity_check, luzin_n_upper_bound,
                          measure_interval, metric_derivatives, non_cadlag_step, oracle_library,
                          variation, variation_quotients)

ALL_CURVES = [(n, lambda n=n: oracle_library(n)) for n in ORACLE_NAMES] + \
    [("noncadlag_step", non_cadlag_step)]


def test_cantor_variation(criterion):
    t0 = time.perf_counter()
    res = variation(oracle_library("cantor"), Interval.closed(0, 1), tol=1e-6)
    dt = time.perf_counter() - t0
    ok = abs(res.value - 1) <= 1e-6 and res.converged and res.depth <= 24 and dt < 5
    criterion(1, "Cantor variation = 1", ok,
              f"Var {res.value!r}, converged {res.converged}, depth {res.depth}, {dt:.2f} s")


def test_open_interval_identity(criterion):
    worst, where = 0.0, ""
    for k, (name, make) in enumerate(ALL_CURVES):
        curve = make()
        nu = build_speed_measure(curve)
        rng = np.random.default_rng(100 + k)
        dom = curve.domain
        for _ in range(50):
            a, b = np.sort(rng.uniform(dom.lo, dom.hi, 2))
            J = Interval.open(float(a), float(b))
            err = abs(measure_interval(nu, J) - variation(curve, J, 1e-6).value)
            if err > worst:
                worst, where = err, f"{name} {J}"
    criterion(2, "nu(J) = Var(J) on 50 random open intervals per oracle", worst <= 2e-6,
              f"max err {worst:.3g} at {where}")


def test_atom_formula(criterion):
    ok, parts = True, []
    for label, curve in (("cadlag step", oracle_library("step")), ("non-cadlag step", non_cadlag_step())):
        nu = build_speed_measure(curve)
        for a in nu.atoms:
            jump = atom_mass_from_variation(curve, a.t, tol=1e-10)
            h = 2.0 ** -30
            spread = nu.V(a.t + h) - nu.V(a.t - h)
            ok &= a.mass == a.left_gap + a.right_gap
            ok &= abs(a.mass - jump) <= 1e-9 and abs(a.mass - spread) <= 1e-9
            parts.append(f"{label} at {a.t}: {a.left_gap}+{a.right_gap}={a.mass}, "
                         f"V(t+)-V(t-) {jump!r}")
        ok &= len(nu.atoms) == 1
    criterion(3, "atom mass = left gap + right gap = V(t+) - V(t-)", ok, "; ".join(parts))


def test_continuity_equivalence(criterion):
    wrong = []
    for name in list(CONTINUOUS_ORACLES) + ["step", "staircase"]:
        verdict = continuity_verdict(build_speed_measure(oracle_library(name)))
        if verdict != (name in CONTINUOUS_ORACLES):
            wrong.append(name)
    criterion(4, "continuity verdict", not wrong, f"misclassified: {wrong or 'none'}")


def test_length_identity(criterion):
    circ = oracle_library("circle_arc")
    rc = length_identity_check(circ, circ.domain)
    ok_c = (abs(rc.variation - rc.rhs) <= 1e-4 and abs(rc.ac_integral - 2 * math.pi) <= 1e-4
            and rc.singular_mass <= 1e-4)
    can = oracle_library("cantor")
    rk = length_identity_check(can, can.domain)
    ok_k = rk.ac_integral <= 1e-3 and abs(rk.singular_mass - 1) <= 1e-3
    cpl = oracle_library("cantor_plus_linear")
    rp = length_identity_check(cpl, cpl.domain)
    ok_p = abs(rp.ac_integral - 1) <= 1e-3 and abs(rp.sc_mass - 1) <= 1e-3
    criterion(5, "length identity", ok_c and ok_k and ok_p,
              f"circle L {rc.variation:.8f} vs {rc.ac_integral:.8f} + {rc.singular_mass:.2g}; "
              f"cantor ac {rk.ac_integral:.2g} sing {rk.singular_mass:.6f}; "
              f"cantor+linear ac {rp.ac_integral:.6f} sc {rp.sc_mass:.6f}")


def test_banach_zaretsky(criterion):
    ok, parts = True, []
    for name, expected in [("identity", True), ("circle_arc", True), ("sin_wave", True),
                           ("cantor", False), ("cantor_plus_linear", False), ("step", False)]:
        curve = oracle_library(name)
        v = banach_zaretsky_verdict(curve)
        has_witness = v.probe is not None and v.probe.violation
        ok &= v.ac_loc is expected and v.consistent and has_witness is (not expected)
        if has_witness:
            ok &= v.probe.witness.chord_sum(curve) > v.probe.epsilon
        parts.append(f"{name} {'AC' if v.ac_loc else 'not AC'}")
        if name == "cantor":
            w = v.probe.witness
            chord = w.chord_sum(curve)
            g12 = (2 / 3) ** 12
            ok &= (len(w) == 2 ** 12 and abs(w.total_length - g12) <= 1e-9 and w.total_length < 0.008
                   and abs(chord - 1) <= 1e-9)
            parts.append(f"cantor witness {len(w)} intervals, length {w.total_length:.7f}, "
                         f"chord sum {chord!r}")
    criterion(6, "Banach-Zaretsky verdicts with witnesses", ok, "; ".join(parts))


def test_luzin(criterion):
    ns = NestedNullSet.cantor_generations(15)
    ident = luzin_n_upper_bound(oracle_library("identity"), ns)
    err_i = max(abs(b - (2 / 3) ** g) for g, b in enumerate(ident.bounds))
    cant = luzin_n_upper_bound(oracle_library("cantor"), ns)
    err_c = max(abs(b - 1) for b in cant.bounds)
    ok = err_i <= 1e-9 and ident.tends_to_zero and err_c <= 1e-6 and not cant.tends_to_zero
    criterion(7, "Luzin (N) bounds on Cantor generations to depth 15", ok,
              f"identity max err {err_i:.2g}, tends to 0 {ident.tends_to_zero}; "
              f"cantor max err {err_c:.2g}")


def test_metric_derivative_agreement(criterion):
    t0 = time.perf_counter()
    fracs, worst = [], ""
    for name in CONTINUOUS_ORACLES:
        curve = oracle_library(name)
        dom = curve.domain
        # dyadic grid: only 3 of its points lie in the Cantor set
        grid = dom.lo + dom.length * np.arange(4096) / 4096
        nu = build_speed_measure(curve)
        md = metric_derivatives(curve, grid, nu=nu)
        q, conv = variation_quotients(curve, grid, sides="right")
        usable = np.array([e.status != "undefined_at_jump" for e in md])
        agree = (np.array([e.status == "converged" for e in md]) & conv
                 & (np.abs(np.array([e.value for e in md]) - q) <= 1e-4))
        frac = float(agree[usable].mean())
        fracs.append(frac)
        worst += f"{name} {frac:.2%}; "
    dt = time.perf_counter() - t0
    criterion(8, "metric derivative = v-quotient a.e. on 4096 points", min(fracs) >= 0.99 and dt < 60,
              f"{worst}{dt:.1f} s")


def test_acp(criterion):
    ok, parts = True, []
    for p in (1, 2, 4):
        closed = power_lp_integral(p)
        finite = math.isfinite(closed)
        if finite:
            ok &= abs(quad(lambda t: ((2 / 3) * t ** (-1 / 3)) ** p, 0, 1, limit=200)[0] - closed) <= 1e-8
        ok &= finite is (p < 3)
    ident = oracle_library("identity")
    for p in (1, 2, 4):
        r = acp_classify(ident, p)
        ok &= r.member
        parts.append(f"identity p={p} {r.member}")
    power = oracle_library("power")
    for p, expected in ((1, True), (2, True), (4, False)):
        r = acp_classify(power, p)
        ok &= r.member is expected
        parts.append(f"t^(2/3) p={p} {r.member} (int {r.integral:.6g})")
    cantor = oracle_library("cantor")
    ac = banach_zaretsky_verdict(cantor).ac_loc
    for p in (1, 2, 4):
        r = acp_classify(cantor, p, ac_loc=ac)
        ok &= not r.member
    parts.append("cantor none")
    criterion(9, "AC^p classification", ok, "; ".join(parts))


def test_cli_verify_all(criterion):
    proc = subprocess.run([sys.executable, "-m", "speedmeasure", "verify", "--all", "--format", "json"],
                          capture_output=True, text=True, timeout=600)
    doc = json.loads(proc.stdout)
    wanted = ("additivity", "monotonicity in the interval", "refinement monotonicity",
              "sign convention", "telescoping", "probe witness soundness", "cross-level AC consistency")
    missing = []
    for c in doc["curves"]:
        names = [k["name"] for k in c["checks"] if k["passed"]]
        for w in wanted:
            if not any(n.startswith(w) for n in names):
                missing.append(f"{c['curve']}: {w}")
    failed = [f"{c['curve']}: {k['name']}" for c in doc["curves"] for k in c["checks"] if not k["passed"]]
    ok = proc.returncode == 0 and not missing and not failed
    criterion(10, "invariant suite under `speedmeasure verify --all`", ok,
              f"exit {proc.returncode}, {len(doc['curves'])} curves, missing {missing or 'none'}, "
              f"failed {failed or 'none'}")
