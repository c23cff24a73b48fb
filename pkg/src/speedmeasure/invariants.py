"""Executable invariant suite run by ``speedmeasure verify``.

Each check returns ``Check(name, passed, detail)``; a curve passes when all
of them do.  Random intervals come from ``numpy.random.default_rng(seed)``,
so a run is reproducible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ac_analysis import (NestedNullSet, ac_measure_test, ac_probe, banach_zaretsky_verdict,
                          luzin_n_upper_bound)
from .curves import Curve, Interval, SampledCadlag
from .decomposition import decompose, length_identity_check, metric_derivatives, variation_quotients
from .errors import InconsistencyError, NotBVError
from .metric_spaces import metric_axiom_report
from .speed_measure import (atom_mass_from_variation, build_speed_measure, continuity_verdict,
                            measure_interval, var_vs_measure_check)
from .variation import signed_variation, var_sum, variation


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class VerifyReport:
    curve: str
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, passed, detail: str = "") -> None:
        self.checks.append(Check(name, bool(passed), detail))

    def summary(self) -> dict:
        return {
            "curve": self.curve,
            "passed": self.passed,
            "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in self.checks],
        }


def _random_subinterval(rng, dom: Interval, open_=False) -> Interval:
    a, b = np.sort(rng.uniform(dom.lo, dom.hi, size=2))
    if a == b:
        b = min(dom.hi, a + 1e-3 * dom.length)
    if open_:
        return Interval.open(float(a), float(b))
    return Interval.closed(float(a), float(b))


def verify_curve(curve: Curve, tol: float = 1e-6, seed: int = 0, n_random: int = 8,
                 decomp_tol: float = 1e-4) -> VerifyReport:
    rng = np.random.default_rng(seed)
    rep = VerifyReport(curve.name)
    dom = curve.domain
    truth = curve.truth

    # metric axioms on points of the image
    ts = np.linspace(dom.lo, dom.hi, 7)[[0, 1, 3, 5, 6]] if dom.lo_closed and dom.hi_closed \
        else dom.lo + dom.length * np.array([0.1, 0.3, 0.5, 0.7, 0.9])
    pts = list(curve.eval_many(ts))
    ax = metric_axiom_report(curve.space, pts)
    rep.add("metric axioms on image samples", ax.passed, f"{ax.checked_triples} triples")

    try:
        nu = build_speed_measure(curve, tol)
    except NotBVError as exc:
        rep.add("bounded variation", "variation" not in truth or math.isinf(truth["variation"]),
                str(exc))
        return rep
    total = variation(curve, dom, tol)
    rep.add("variation converged", total.converged,
            f"Var = {total.value:.10g} at depth {total.depth}")
    if "variation" in truth:
        rep.add("variation matches ground truth", abs(total.value - truth["variation"]) <= tol,
                f"{total.value:.10g} vs {truth['variation']:.10g}")

    # additivity, monotonicity, sign convention
    add_err = 0.0
    mono_ok = True
    sign_ok = True
    for _ in range(n_random):
        a, b, c = np.sort(rng.uniform(dom.lo, dom.hi, size=3))
        if not (dom.contains(a) and dom.contains(c)):
            continue
        vab = float(variation(curve, Interval.closed(a, b), tol).value)
        vbc = float(variation(curve, Interval.closed(b, c), tol).value)
        vac = float(variation(curve, Interval.closed(a, c), tol).value)
        add_err = max(add_err, abs(vac - vab - vbc))
        mono_ok &= vab <= vac + tol and vbc <= vac + tol
        sign_ok &= signed_variation(curve, c, a, tol) == -signed_variation(curve, a, c, tol)
    rep.add("additivity Var[a,c] = Var[a,b] + Var[b,c]", add_err <= 3 * tol, f"max err {add_err:.3g}")
    rep.add("monotonicity in the interval", mono_ok)
    rep.add("sign convention Var([b,a]) = -Var([a,b])", sign_ok)

    # refinement monotonicity of chord sums on nested partitions
    a, b = (dom.lo, dom.hi) if dom.lo_closed and dom.hi_closed else \
        (dom.lo + 0.01 * dom.length, dom.hi - 0.01 * dom.length)
    sums = [var_sum(curve, a + (b - a) * np.arange(2 ** k + 1) / 2 ** k) for k in range(1, 12)]
    rep.add("refinement monotonicity", all(y >= x - 1e-12 for x, y in zip(sums, sums[1:])),
            f"chord sums {sums[0]:.6g} .. {sums[-1]:.6g}")

    # distribution-function telescoping on the grid
    g = nu.profile.grid
    idx = np.sort(rng.choice(g.size, size=min(g.size, 3 * n_random), replace=False))
    tele = 0.0
    for s, t, u in zip(idx, idx[1:], idx[2:]):
        s, t, u = float(g[s]), float(g[t]), float(g[u])
        if not (s < t < u):
            continue
        lhs = measure_interval(nu, Interval(s, u, False, True))
        rhs = measure_interval(nu, Interval(s, t, False, True)) + measure_interval(nu, Interval(t, u, False, True))
        tele = max(tele, abs(lhs - rhs))
    rep.add("telescoping nu(s,u] = nu(s,t] + nu(t,u]", tele <= 1e-12, f"max err {tele:.3g}")
    base_ok = abs(nu.V(nu.profile.base_point)) == 0 and bool(np.all(np.diff(nu.profile.V_values) >= -1e-15))
    rep.add("V vanishes at the base point and is nondecreasing", base_ok)

    # open-interval identity and var-vs-measure
    worst = 0.0
    for _ in range(n_random):
        J = _random_subinterval(rng, dom, open_=True)
        worst = max(worst, abs(measure_interval(nu, J) - float(variation(curve, J, tol).value)))
    rep.add("open intervals: nu(J) = Var(J)", worst <= 2 * tol, f"max err {worst:.3g}")
    checks_ok = True
    probes = [_random_subinterval(rng, dom) for _ in range(max(2, n_random // 2))]
    for at in nu.atoms:
        probes.append(Interval.closed(at.t, min(dom.hi, at.t + 0.1 * dom.length)) if at.t < dom.hi
                      else Interval.closed(max(dom.lo, at.t - 0.1 * dom.length), at.t))
    for J in probes:
        if nu.domain.contains_interval(J):
            checks_ok &= var_vs_measure_check(curve, nu, J, tol).holds
    rep.add("Var(J) <= nu(J) with equality iff no outward boundary gap", checks_ok)

    # atoms
    atom_ok = True
    for at in nu.atoms:
        lim = atom_mass_from_variation(curve, at.t, tol=max(tol, 1e-9))
        atom_ok &= at.mass == at.left_gap + at.right_gap
        atom_ok &= lim is not None and abs(lim - at.mass) <= tol
    rep.add("atom mass = gaps = V(t+) - V(t-)", atom_ok, f"{len(nu.atoms)} atoms")
    if "continuous" in truth:
        rep.add("continuity verdict matches ground truth",
                continuity_verdict(nu) == bool(truth["continuous"]))
    if isinstance(curve, SampledCadlag):
        chords = float(np.sum(curve.steps))
        rep.add("sampled path: nu(domain) = sum of chords",
                abs(measure_interval(nu, dom) - chords) <= 1e-12)

    # decomposition
    try:
        dec = decompose(curve, nu, tol=decomp_tol)
    except InconsistencyError as exc:
        rep.add("decomposition consistent", False, str(exc))
        dec = None
    if dec is not None:
        cons = abs(dec.ac_mass + dec.atomic_mass + dec.sc_mass - measure_interval(nu, dom))
        bound = dec.nu_per_cell.size * decomp_tol
        rep.add("mass conservation ac + atomic + sc = nu(domain)", cons <= bound, f"err {cons:.3g}")
        rep.add("density >= 0 and sc >= 0",
                bool(np.all(dec.ac_per_cell >= 0) and np.all(dec.sc_mass_per_cell >= 0)))
        excluded = all(s == "atom" for t, s in zip(dec.grid, dec.density_status)
                       if nu.atom_mass(t) > 0)
        rep.add("atoms excluded from the density", excluded)
        rep.add("atoms counted once", abs(dec.atomic_mass - sum(a.mass for a in dec.atomic)) <= 1e-12)
        for key, val in (("ac_mass", dec.ac_mass), ("atomic_mass", dec.atomic_mass),
                         ("sc_mass", dec.sc_mass)):
            if key in truth:
                rep.add(f"{key} matches ground truth", abs(val - truth[key]) <= 1e-3,
                        f"{val:.6g} vs {truth[key]:.6g}")
        li = length_identity_check(curve, dom, decomp_tol, nu)
        rep.add("length identity on the domain", li.holds,
                f"Var {li.variation:.6g}, int {li.ac_integral:.6g} + sing {li.singular_mass:.6g}")

    # metric derivative vs variation quotient
    grid = dom.lo + dom.length * np.arange(1, 1024) / 1024
    md = metric_derivatives(curve, grid, nu=nu)
    q, ok = variation_quotients(curve, grid, sides="right")
    usable = np.array([e.status != "undefined_at_jump" for e in md])
    agree = np.array([e.status == "converged" for e in md]) & ok & \
        (np.abs(np.array([e.value for e in md]) - q) <= 1e-4)
    frac = float(agree[usable].mean()) if usable.any() else 1.0
    rep.add("metric derivative >= 0", all(not (e.value < 0) for e in md))
    rep.add("metric derivative = variation quotient a.e.", frac >= 0.99, f"agree at {frac:.2%}")

    # ac levels
    verdict = banach_zaretsky_verdict(curve, nu)
    probe = verdict.probe
    sound = True
    if probe is not None and probe.violation:
        w = probe.witness
        sound = (w.chord_sum(curve) > probe.epsilon
                 and abs(w.total_length - probe.witness_length) <= 1e-12)
    rep.add("probe witness soundness", sound)
    if total.value > 0:
        mt = ac_measure_test(nu, 0.25 * total.value)
        no_witness = not (probe is not None and probe.violation)
        rep.add("cross-level AC consistency",
                verdict.consistent and mt.passes == no_witness == verdict.evidence_ac,
                f"verdict {verdict.ac_loc} ({verdict.basis}), measure test {mt.passes}, "
                f"probe witness {not no_witness}")
    ns = NestedNullSet.cantor_generations(8, dom.lo, dom.hi) if dom.lo_closed and dom.hi_closed \
        else NestedNullSet.cantor_generations(8, dom.lo + 0.01 * dom.length, dom.hi - 0.01 * dom.length)
    lz = luzin_n_upper_bound(curve, ns, nu)
    rep.add("Luzin bound nonincreasing", lz.monotone)
    rep.add("diam <= Var <= nu on cover intervals", lz.diameter_bound_ok)
    return rep
