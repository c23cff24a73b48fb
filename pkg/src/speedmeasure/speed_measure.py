"""The speed measure ``nu``: Lebesgue-Stieltjes measure of ``v(t) = V(t+)``.

``nu`` is stored as the profile of ``V``/``v`` on a grid plus an explicit list
of atoms.  Interval masses follow from

    nu(J) = upper(J) - lower(J)

with ``upper = v(hi)`` for a closed right end and ``V(hi-)`` for an open one,
and ``lower = V(lo-)`` for a closed left end and ``v(lo)`` for an open one.
Off-grid values of ``V`` are filled in by additivity,
``V(t) = V(g) + Var(gamma; [g, t])`` for the nearest grid node ``g <= t``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .curves import Curve, Interval, one_sided_limits
from .errors import ConfigError, DomainError, NotBVError
from .variation import (DEFAULT_TOL, VariationProfile, _dyadic_sum, cumulative_profile,
                        interval_variations, variation)

DEFAULT_CELLS = 1024
JUMP_FLOOR = 1e-7
MAX_PROBES = 64


@dataclass(frozen=True)
class Atom:
    t: float
    left_gap: float
    right_gap: float
    status: str = "exact"

    @property
    def mass(self) -> float:
        return self.left_gap + self.right_gap


@dataclass
class SpeedMeasure:
    curve: Curve
    domain: Interval
    profile: VariationProfile
    atoms: list
    left_endpoint_mass: float
    tol: float
    total_variation: float = math.nan
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._atoms = {a.t: a for a in self.atoms}

    # -- distribution function -------------------------------------------------
    def V(self, t: float) -> float:
        """Signed ``Var(gamma; [c, t])`` for ``t`` in the domain."""
        t = float(t)
        if t in self._cache:
            return self._cache[t]
        if not self.domain.contains(t):
            raise DomainError(f"t = {t!r} lies outside the domain {self.domain}")
        g = self.profile.grid
        i = int(np.searchsorted(g, t, side="right")) - 1
        if i >= 0 and g[i] == t:
            val = float(self.profile.V_values[i])
        elif i >= 0:
            val = float(self.profile.V_values[i]) + self._var(g[i], t)
        else:
            val = float(self.profile.V_values[0]) - self._var(t, g[0])
        self._cache[t] = val
        return val

    def _var(self, a, b):
        return float(variation(self.curve, Interval.closed(float(a), float(b)), self.tol).value)

    def left_gap(self, t: float) -> float:
        a = self._atoms.get(float(t))
        return a.left_gap if a else 0.0

    def right_gap(self, t: float) -> float:
        a = self._atoms.get(float(t))
        return a.right_gap if a else 0.0

    def atom_mass(self, t: float) -> float:
        """``nu({t})``; zero at continuity points."""
        a = self._atoms.get(float(t))
        return a.mass if a else 0.0

    def v(self, t: float) -> float:
        """Right-continuous modification ``v(t) = V(t+)``.

        At an open left end of the domain this is the limit ``V(lo+)``.
        """
        t = float(t)
        if t == self.domain.lo and not self.domain.lo_closed:
            c = self.profile.base_point
            return self.V(c) - float(variation(self.curve, Interval(t, c, False, True), self.tol).value)
        return self.V(t) + self.right_gap(t)

    def V_minus(self, t: float) -> float:
        """Left limit ``V(t-)`` (``V(a-) = V(a)`` at a closed left end)."""
        t = float(t)
        if t == self.domain.hi and not self.domain.hi_closed:
            c = self.profile.base_point
            return self.V(c) + float(variation(self.curve, Interval(c, t, True, False), self.tol).value)
        return self.V(t) - self.left_gap(t)

    @property
    def is_continuous(self) -> bool:
        return not self.atoms and self.left_endpoint_mass == 0


def _uniform_grid(domain: Interval, n_cells: int) -> np.ndarray:
    g = domain.lo + domain.length * (np.arange(n_cells + 1) / n_cells)
    g[-1] = domain.hi
    keep = np.ones(g.size, dtype=bool)
    keep[0] = domain.lo_closed
    keep[-1] = domain.hi_closed
    return g[keep]


def build_speed_measure(curve: Curve, tol: float = DEFAULT_TOL, grid: Sequence[float] | None = None,
                        n_cells: int = DEFAULT_CELLS, jump_floor: float = JUMP_FLOOR,
                        max_depth: int = 24, blowup_bound: float = 1e12) -> SpeedMeasure:
    """Build ``nu`` for a curve that is locally of bounded variation.

    Atoms come from the declared jumps; black-box curves are scanned instead:
    a grid cell whose increment of ``V`` exceeds its width times the local
    density (taken from the neighbouring cells) plus ``jump_floor`` is bisected
    down to float resolution and its endpoints probed for one-sided gaps.
    """
    if not tol > 0:
        raise ConfigError(f"tol must be positive, got {tol}")
    dom = curve.domain
    total = variation(curve, dom, tol, max_depth=max_depth, blowup_bound=blowup_bound)
    if total.bounded is False:
        raise NotBVError(
            f"{curve.name} is not of bounded variation on {dom}: "
            f"{'blow-up past ' + format(blowup_bound, 'g') if total.infinite else 'chord sums keep growing'}"
            f" (last value {total.value:.6g} at depth {total.depth})")
    c = dom.lo if dom.lo_closed else 0.5 * (dom.lo + dom.hi)
    base = _uniform_grid(dom, n_cells) if grid is None else np.asarray(grid, dtype=float)
    extra = [c] + [t for t in (curve.declared_jumps or ()) if dom.contains(t)]
    nodes = np.union1d(base, extra)
    profile = cumulative_profile(curve, c, nodes, tol, max_depth=max_depth,
                                 blowup_bound=blowup_bound)

    atoms: dict[float, Atom] = {}
    if curve.declared_jumps is not None:
        for t in curve.declared_jumps:
            g = one_sided_limits(curve, t)
            if g.resolved and g.mass > 0:
                atoms[t] = Atom(t, g.left_gap, g.right_gap, g.status)
    else:
        for a in _scan_for_atoms(curve, profile, jump_floor):
            atoms[a.t] = a
    atom_list = sorted(atoms.values(), key=lambda a: a.t)
    left_mass = atoms[dom.lo].right_gap if (dom.lo_closed and dom.lo in atoms) else 0.0
    return SpeedMeasure(curve, dom, profile, atom_list, left_mass, tol, float(total.value))


def _scan_for_atoms(curve: Curve, profile: VariationProfile, jump_floor: float) -> list[Atom]:
    g, V = profile.grid, profile.V_values
    if g.size < 2:
        return []
    w = np.diff(g)
    inc = np.diff(V)
    dens = inc / w
    left = np.concatenate([[np.inf], dens[:-1]])
    right = np.concatenate([dens[1:], [np.inf]])
    local = np.minimum(left, right)
    local[~np.isfinite(local)] = 0.0
    excess = inc - w * local - jump_floor
    suspects = np.flatnonzero(excess > 0)
    suspects = suspects[np.argsort(-excess[suspects], kind="stable")][:MAX_PROBES]
    found: dict[float, Atom] = {}
    for i in sorted(suspects):
        l, r = float(g[i]), float(g[i + 1])
        for _ in range(80):
            m = 0.5 * (l + r)
            if m <= l or m >= r:
                break
            if _dyadic_sum(curve, l, m, 6, np.empty(0)) >= _dyadic_sum(curve, m, r, 6, np.empty(0)):
                r = m
            else:
                l = m
        gl, gr = (one_sided_limits(curve, t) if curve.domain.contains(t) else None for t in (l, r))
        # a jump strictly between two adjacent floats shows up twice; keep it at r
        if gl is not None and gr is not None and gl.resolved and gr.resolved \
                and r > l and gl.right_gap > 0 and gr.left_gap > 0:
            gl = type(gl)(l, gl.left_gap, 0.0, gl.status)
        for t, gap in ((l, gl), (r, gr)):
            if gap is not None and t not in found and gap.resolved and gap.mass > 0:
                found[t] = Atom(t, gap.left_gap, gap.right_gap, "estimated")
    return list(found.values())


def measure_interval(nu: SpeedMeasure, J: Interval) -> float:
    """``nu(J)`` for an interval with any combination of open/closed ends."""
    if not nu.domain.contains_interval(J):
        raise DomainError(f"{J} is not contained in the domain {nu.domain}")
    upper = nu.v(J.hi) if J.hi_closed else nu.V_minus(J.hi)
    lower = nu.V_minus(J.lo) if J.lo_closed else nu.v(J.lo)
    return max(upper - lower, 0.0)


def _overlap(A: Interval, B: Interval) -> bool:
    if A.hi < B.lo:
        return False
    if A.hi == B.lo:
        return A.hi_closed and B.lo_closed
    return True


def measure_finite_union(nu: SpeedMeasure, intervals: Sequence[Interval]) -> float:
    """Mass of a union of pairwise disjoint intervals."""
    ordered = sorted(intervals, key=lambda J: (J.lo, J.hi))
    for A, B in zip(ordered, ordered[1:]):
        if _overlap(A, B):
            raise ConfigError(f"intervals {A} and {B} overlap")
    return float(sum(measure_interval(nu, J) for J in ordered))


def measure_closed_union(nu: SpeedMeasure, intervals: Sequence[Interval]) -> float:
    """Batched mass of disjoint closed intervals inside the domain.

    Uses ``nu([a, b]) = Var(gamma; [a, b]) + left_gap(a) + right_gap(b)`` with
    all variations refined together; meant for unions of many short pieces.
    """
    ordered = sorted(intervals, key=lambda J: (J.lo, J.hi))
    for A, B in zip(ordered, ordered[1:]):
        if _overlap(A, B):
            raise ConfigError(f"intervals {A} and {B} overlap")
    for J in ordered:
        if not (J.lo_closed and J.hi_closed) or not nu.domain.contains_interval(J):
            raise DomainError(f"{J} is not a closed interval inside {nu.domain}")
    if not ordered:
        return 0.0
    lo = np.array([J.lo for J in ordered])
    hi = np.array([J.hi for J in ordered])
    var, _, _ = interval_variations(nu.curve, lo, hi, tol=nu.tol / len(ordered), min_depth=2)
    gaps = sum(nu.left_gap(a) + nu.right_gap(b) for a, b in zip(lo, hi))
    return float(var.sum() + gaps)


@dataclass
class VarMeasureReport:
    interval: str
    variation: float
    measure: float
    difference: float
    boundary: list  # (t, left_gap, right_gap, continuous)
    equality_expected: bool
    holds: bool


def var_vs_measure_check(curve: Curve, nu: SpeedMeasure, J: Interval,
                         tol: float | None = None) -> VarMeasureReport:
    """Compare ``Var(gamma; J)`` with ``nu(J)``.

    Always ``Var <= nu``; the two agree unless an included endpoint carries an
    outward gap (left gap at the left end, right gap at the right end).
    """
    tol = nu.tol if tol is None else tol
    var = float(variation(curve, J, tol).value)
    mass = measure_interval(nu, J)
    boundary = []
    outward = 0.0
    for t in J.included_boundary():
        lg, rg = nu.left_gap(t), nu.right_gap(t)
        boundary.append((t, lg, rg, lg + rg == 0))
        if t == J.lo:
            outward += lg
        if t == J.hi:
            outward += rg
    expected = outward == 0
    holds = var <= mass + 2 * tol
    if expected:
        holds &= abs(var - mass) <= 2 * tol
    else:
        holds &= mass - var > 2 * tol
    return VarMeasureReport(str(J), var, mass, mass - var, boundary, expected, bool(holds))


def continuity_verdict(nu: SpeedMeasure) -> bool:
    """True iff ``nu`` has no atoms, i.e. the map is a curve."""
    return nu.is_continuous


def atom_mass_from_variation(curve: Curve, t: float, tol: float = 1e-9,
                             ks: Sequence[int] = tuple(range(10, 41, 2))) -> float | None:
    """``V(t+) - V(t-)`` as the limit of ``Var(gamma; [t-h, t+h])``, ``h = 2**-k``.

    Independent of the stored gaps: only chord sums are used.
    """
    dom = curve.domain
    vals = []
    for k in ks:
        h = 2.0 ** -k
        a = max(t - h, dom.lo) if dom.lo_closed else max(t - h, dom.lo + h)
        b = min(t + h, dom.hi) if dom.hi_closed else min(t + h, dom.hi - h)
        vals.append(float(variation(curve, Interval.closed(a, b), tol, min_depth=4).value))
    if len(vals) >= 3 and abs(vals[-1] - vals[-2]) <= tol and abs(vals[-2] - vals[-3]) <= tol:
        return vals[-1]
    return None


def speed_measure_csv(nu: SpeedMeasure) -> tuple[str, str]:
    """``(profile_csv, atoms_csv)`` texts.

    Profile columns: ``t, V, v, cumulative_atom_mass``; atoms: ``t, left_gap,
    right_gap, mass``.
    """
    prof = io.StringIO()
    w = csv.writer(prof, lineterminator="\n")
    w.writerow(["t", "V", "v", "cumulative_atom_mass"])
    times = np.asarray([a.t for a in nu.atoms])
    masses = np.cumsum([a.mass for a in nu.atoms]) if nu.atoms else np.zeros(0)
    for t, V, v in zip(nu.profile.grid, nu.profile.V_values, nu.profile.v_values):
        k = int(np.searchsorted(times, t, side="right"))
        w.writerow([repr(float(t)), repr(float(V)), repr(float(v)),
                    repr(float(masses[k - 1]) if k else 0.0)])
    at = io.StringIO()
    w = csv.writer(at, lineterminator="\n")
    w.writerow(["t", "left_gap", "right_gap", "mass"])
    for a in nu.atoms:
        w.writerow([repr(a.t), repr(a.left_gap), repr(a.right_gap), repr(a.mass)])
    return prof.getvalue(), at.getvalue()
