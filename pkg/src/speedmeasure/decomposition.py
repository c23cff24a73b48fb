"""Metric derivative, density of the absolutely continuous part, and the split

    nu = nu_ac + nu_atomic + nu_sc,    nu_ac = |gamma'| * Lebesgue.

The density is the metric derivative ``lim d(gamma(t+e), gamma(t)) / |e|``
where it settles, and otherwise the variation quotient
``Var(gamma; [t, t+h]) / h`` at the smallest stable ``h``.  Points where
neither settles (e.g. points of a Cantor set) get a value interpolated from
their neighbours and are flagged as such.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .curves import Curve, Interval
from .errors import ConfigError, InconsistencyError
from .speed_measure import Atom, SpeedMeasure, measure_interval
from .variation import interval_variations, variation

DERIV_TOL = 1e-4
DECOMP_TOL = 1e-4
#: metric-derivative steps are ``L * 2**-k`` for these ``k``
DEFAULT_K = tuple(range(6, 31))
#: variation-quotient steps
QUOTIENT_K = tuple(range(18, 35))
GROWTH = 1.2


@dataclass(frozen=True)
class MetricDerivativeEstimate:
    t: float
    value: float
    status: str  # converged | not_resolved | divergent | undefined_at_jump
    h_used: float


def _atom_times(curve: Curve, nu: SpeedMeasure | None) -> np.ndarray:
    if nu is not None:
        ts = [a.t for a in nu.atoms]
        if nu.left_endpoint_mass > 0:
            ts.append(nu.domain.lo)
        return np.unique(np.asarray(ts, dtype=float))
    out = []
    for t in curve.declared_jumps or ():
        g = curve.declared_gaps(t)
        if g is not None and g.resolved and g.mass > 0:
            out.append(t)
    return np.asarray(out, dtype=float)


def _side_status(q: np.ndarray, deriv_tol: float):
    """Per row of quotients (NaN = step unavailable): converged value, flags."""
    n = q.shape[0]
    value = np.full(n, np.nan)
    conv = np.zeros(n, dtype=bool)
    div = np.zeros(n, dtype=bool)
    has = np.zeros(n, dtype=bool)
    for i in range(n):
        row = q[i][~np.isnan(q[i])]
        if row.size == 0:
            continue
        has[i] = True
        value[i] = row[-1]
        if row.size >= 3 and np.ptp(row[-3:]) <= deriv_tol:
            conv[i] = True
        elif row.size >= 4 and np.all(row[-3:] >= GROWTH * row[-4:-1]) and row[-1] > 0:
            div[i] = True
    return value, conv, div, has


def metric_derivatives(curve: Curve, ts: Sequence[float], h_schedule: Sequence[float] | None = None,
                       deriv_tol: float = DERIV_TOL, nu: SpeedMeasure | None = None
                       ) -> list[MetricDerivativeEstimate]:
    """Vectorized :func:`metric_derivative` over many times."""
    ts = np.asarray(ts, dtype=float)
    dom = curve.domain
    curve._check_times(ts)
    H = (np.asarray(h_schedule, dtype=float) if h_schedule is not None
         else dom.length * 2.0 ** -np.asarray(DEFAULT_K, dtype=float))
    if H.ndim != 1 or H.size < 3 or np.any(H <= 0) or np.any(np.diff(H) >= 0):
        raise ConfigError("h_schedule needs at least 3 positive, strictly decreasing steps")
    atoms = _atom_times(curve, nu)
    base = curve.eval_many(ts)
    quot = {}
    for sign in (1.0, -1.0):
        P = ts[:, None] + sign * H[None, :]
        ok = np.vectorize(dom.contains, otypes=[bool])(P) if P.size else np.zeros(P.shape, bool)
        Pc = np.where(ok, P, ts[:, None])
        pts = curve.eval_many(Pc.ravel())
        pts = pts.reshape(Pc.shape + pts.shape[1:])
        rep = np.repeat(base[:, None], H.size, axis=1) if base.ndim == 1 else \
            np.repeat(base[:, None, ...], H.size, axis=1)
        d = curve.space.distances(pts, rep).astype(float)
        q = d / H[None, :]
        q[~ok] = np.nan
        quot[sign] = q
    vr, cr, dr, hr = _side_status(quot[1.0], deriv_tol)
    vl, cl, dl, hl = _side_status(quot[-1.0], deriv_tol)
    out = []
    for i, t in enumerate(ts):
        if atoms.size and np.any(atoms == t):
            out.append(MetricDerivativeEstimate(float(t), math.nan, "undefined_at_jump", float(H[-1])))
            continue
        sides = [(v, c, dv) for v, c, dv, h in ((vr[i], cr[i], dr[i], hr[i]),
                                              (vl[i], cl[i], dl[i], hl[i])) if h]
        if any(dv for _, _, dv in sides):
            out.append(MetricDerivativeEstimate(float(t), math.inf, "divergent", float(H[-1])))
        elif sides and all(c for _, c, _ in sides) and \
                max(v for v, _, _ in sides) - min(v for v, _, _ in sides) <= deriv_tol:
            val = float(np.mean([v for v, _, _ in sides]))
            out.append(MetricDerivativeEstimate(float(t), max(val, 0.0), "converged", float(H[-1])))
        else:
            val = float(np.nanmean([v for v, _, _ in sides])) if sides else math.nan
            out.append(MetricDerivativeEstimate(float(t), val, "not_resolved", float(H[-1])))
    return out


def metric_derivative(curve: Curve, t: float, h_schedule: Sequence[float] | None = None,
                      deriv_tol: float = DERIV_TOL, nu: SpeedMeasure | None = None
                      ) -> MetricDerivativeEstimate:
    """``|gamma'|(t) = lim d(gamma(t+e), gamma(t)) / |e|`` along ``e = +-h``.

    Both sides must settle (last three quotients within ``deriv_tol``) and
    agree; at a domain end only the inward side is used.
    """
    return metric_derivatives(curve, [t], h_schedule, deriv_tol, nu)[0]


def _one_sided_quotients(curve: Curve, ts: np.ndarray, sign: float, deriv_tol: float,
                         ks: Sequence[int]):
    dom = curve.domain
    n = ts.size
    vals = np.full(n, np.nan)
    conv = np.zeros(n, dtype=bool)
    avail = np.zeros(n, dtype=bool)
    hist: list[list[float]] = [[] for _ in range(n)]
    active = np.arange(n)
    for k in ks:
        if active.size == 0:
            break
        h = dom.length * 2.0 ** -k
        t = ts[active]
        other = t + sign * h
        inside = np.array([dom.contains(x) for x in other], dtype=bool)
        active, t, other = active[inside], t[inside], other[inside]
        if active.size == 0:
            continue
        avail[active] = True
        lo, hi = np.minimum(t, other), np.maximum(t, other)
        v, _, _ = interval_variations(curve, lo, hi, tol=deriv_tol * h / 8)
        q = v / h
        done = np.zeros(active.size, dtype=bool)
        for j, i in enumerate(active):
            hist[i].append(q[j])
            vals[i] = q[j]
            if len(hist[i]) >= 3 and np.ptp(hist[i][-3:]) <= deriv_tol:
                conv[i] = done[j] = True
        active = active[~done]
    return vals, conv, avail


def variation_quotients(curve: Curve, ts: Sequence[float], deriv_tol: float = DERIV_TOL,
                        ks: Sequence[int] = QUOTIENT_K, sides: str = "both"):
    """``Var(gamma; [t, t+h]) / h`` at the smallest stable ``h``.

    With ``sides="both"`` the backward quotient over ``[t-h, t]`` must settle
    too and agree within ``deriv_tol``; at a domain end only the inward side
    exists.  ``sides="right"`` is the plain forward quotient (backward only at
    the right end).  Returns ``(values, converged)``.
    """
    ts = np.asarray(ts, dtype=float)
    vr, cr, ar = _one_sided_quotients(curve, ts, 1.0, deriv_tol, ks)
    if sides == "right":
        vl, cl, al = _one_sided_quotients(curve, ts[~ar], -1.0, deriv_tol, ks) if (~ar).any() \
            else (np.zeros(0), np.zeros(0, bool), np.zeros(0, bool))
        vals, conv = vr.copy(), cr.copy()
        vals[~ar], conv[~ar] = vl, cl
        return vals, conv
    if sides != "both":
        raise ConfigError(f"sides must be 'both' or 'right', got {sides!r}")
    vl, cl, al = _one_sided_quotients(curve, ts, -1.0, deriv_tol, ks)
    vals = np.where(ar & al, 0.5 * (vr + vl), np.where(ar, vr, vl))
    conv = np.where(ar, cr, True) & np.where(al, cl, True) & (ar | al)
    both = ar & al
    conv[both] &= np.abs(vr[both] - vl[both]) <= deriv_tol
    return vals, conv


@dataclass
class DensityProfile:
    grid: np.ndarray
    density: np.ndarray
    status: list  # per point: metric_derivative | variation_quotient | interpolated | atom
    estimates: list = field(default_factory=list, repr=False)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "density", "status"])
        for t, d, s in zip(self.grid, self.density, self.status):
            w.writerow([repr(float(t)), repr(float(d)), s])
        return buf.getvalue()


def density_profile(curve: Curve, grid: Sequence[float], h_schedule: Sequence[float] | None = None,
                    deriv_tol: float = DERIV_TOL, nu: SpeedMeasure | None = None) -> DensityProfile:
    """Density of ``nu_ac`` on ``grid``; atom times are excluded (NaN, status ``atom``)."""
    grid = np.asarray(grid, dtype=float)
    est = metric_derivatives(curve, grid, h_schedule, deriv_tol, nu)
    dens = np.array([e.value for e in est], dtype=float)
    status = ["metric_derivative" if e.status == "converged" else
              ("atom" if e.status == "undefined_at_jump" else "") for e in est]
    # divergent quotients are not retried: the variation quotient blows up as well
    todo = np.array([e.status == "not_resolved" for e in est], dtype=bool)
    if todo.any():
        q, ok = variation_quotients(curve, grid[todo], deriv_tol)
        for j, i in enumerate(np.flatnonzero(todo)):
            if ok[j]:
                dens[i] = q[j]
                status[i] = "variation_quotient"
    good = np.array([s in ("metric_derivative", "variation_quotient") for s in status], dtype=bool)
    bad = np.array([s == "" for s in status], dtype=bool)
    if bad.any():
        if good.any():
            dens[bad] = np.interp(grid[bad], grid[good], dens[good])
        else:
            dens[bad] = 0.0
        for i in np.flatnonzero(bad):
            status[i] = "interpolated"
    dens[good] = np.maximum(dens[good], 0.0)
    return DensityProfile(grid, dens, status, est)


@dataclass
class LebesgueDecomposition:
    interval: Interval
    grid: np.ndarray
    density: np.ndarray
    density_status: list
    atomic: list
    nu_per_cell: np.ndarray
    ac_per_cell: np.ndarray
    atomic_per_cell: np.ndarray
    sc_mass_per_cell: np.ndarray
    tol: float
    clamped_cells: int = 0
    #: unclamped sum of the per-cell residuals
    sc_raw: float = 0.0

    @property
    def ac_mass(self) -> float:
        return float(self.ac_per_cell.sum())

    @property
    def atomic_mass(self) -> float:
        return float(self.atomic_per_cell.sum())

    @property
    def sc_mass(self) -> float:
        """Aggregate sc mass: the raw residual sum (cell noise cancels), floored at 0."""
        return max(self.sc_raw, 0.0)

    @property
    def singular_mass(self) -> float:
        return self.atomic_mass + self.sc_mass

    @property
    def total(self) -> float:
        return float(self.nu_per_cell.sum())

    def summary(self) -> dict:
        return {
            "interval": str(self.interval),
            "nu_total": self.total,
            "ac_mass": self.ac_mass,
            "atomic_mass": self.atomic_mass,
            "sc_mass": self.sc_mass,
            "cells": int(self.nu_per_cell.size),
            "clamped_cells": int(self.clamped_cells),
            "interpolated_density_points": sum(s == "interpolated" for s in self.density_status),
            "atoms": [{"t": a.t, "left_gap": a.left_gap, "right_gap": a.right_gap, "mass": a.mass}
                      for a in self.atomic],
            "tol": self.tol,
        }

    def cells_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lo", "hi", "nu", "ac", "atomic", "sc"])
        for i in range(self.nu_per_cell.size):
            w.writerow([repr(float(self.grid[i])), repr(float(self.grid[i + 1])),
                        repr(float(self.nu_per_cell[i])), repr(float(self.ac_per_cell[i])),
                        repr(float(self.atomic_per_cell[i])), repr(float(self.sc_mass_per_cell[i]))])
        return buf.getvalue()


def decompose(curve: Curve, nu: SpeedMeasure, grid: Sequence[float] | None = None,
              tol: float = DECOMP_TOL, J: Interval | None = None,
              deriv_tol: float = DERIV_TOL) -> LebesgueDecomposition:
    """Split ``nu`` on ``J`` (default: the domain) into ac, atomic and sc parts.

    Cells are ``(g_i, g_{i+1}]`` (the first also takes ``g_0`` when ``J`` is
    closed there).  The ac part is the trapezoid integral of the density; at
    an atom the density is taken just beside it, on the side of the cell.
    """
    if not tol > 0:
        raise ConfigError(f"tol must be positive, got {tol}")
    J = nu.domain if J is None else J
    if not nu.domain.contains_interval(J):
        raise ConfigError(f"{J} is not contained in the domain {nu.domain}")
    g = nu.profile.grid if grid is None else np.asarray(grid, dtype=float)
    atoms_in = [a for a in nu.atoms if J.contains(a.t)]
    g = np.union1d(g[(g > J.lo) & (g < J.hi)], [J.lo, J.hi] + [a.t for a in atoms_in])
    if g.size < 2:
        raise ConfigError(f"decomposition needs a nondegenerate interval, got {J}")
    atom_t = {a.t for a in nu.atoms}
    if nu.left_endpoint_mass > 0:
        atom_t.add(nu.domain.lo)

    widths = np.diff(g)
    eta = np.minimum(np.concatenate([[np.inf], widths]), np.concatenate([widths, [np.inf]])) * 1e-6
    # density seen from the left / right of each grid point
    special = np.array([(t in atom_t) or not nu.domain.contains(t) for t in g], dtype=bool)
    pts_l = np.where(special, g - eta, g)
    pts_r = np.where(special, g + eta, g)
    pts_l[0], pts_r[-1] = pts_r[0], pts_l[-1]
    want = np.unique(np.concatenate([pts_l, pts_r]))
    prof = density_profile(curve, want, deriv_tol=deriv_tol, nu=nu)
    lookup = dict(zip(prof.grid.tolist(), prof.density.tolist()))
    st_lookup = dict(zip(prof.grid.tolist(), prof.status))
    dl = np.array([lookup[t] for t in pts_l])
    dr = np.array([lookup[t] for t in pts_r])
    ac = widths * 0.5 * (dr[:-1] + dl[1:])
    # an unresolved end density may hide an integrable singularity: refine toward it
    for i in range(widths.size):
        bad_lo = st_lookup[float(pts_r[i])] == "interpolated"
        bad_hi = st_lookup[float(pts_l[i + 1])] == "interpolated"
        if bad_lo or bad_hi:
            ac[i] = _graded_integral(curve, float(pts_r[i]), float(pts_l[i + 1]),
                                     bad_lo, bad_hi, deriv_tol, nu)

    m = widths.size
    nu_cell = np.empty(m)
    at_cell = np.zeros(m)
    cells = []
    for i in range(m):
        lo_closed = i == 0 and J.lo_closed
        hi_closed = i < m - 1 or J.hi_closed
        cell = Interval(float(g[i]), float(g[i + 1]), lo_closed, hi_closed)
        cells.append(cell)
        nu_cell[i] = measure_interval(nu, cell)
        for a in atoms_in:
            if cell.contains(a.t):
                at_cell[i] += nu.atom_mass(a.t) if a.t != nu.domain.lo else nu.left_endpoint_mass
    # a closed left end of J that is not the domain's left end picks up the full atom there
    sc = nu_cell - ac - at_cell
    worst = float(sc.min()) if m else 0.0
    if worst < -10 * tol:
        i = int(np.argmin(sc))
        raise InconsistencyError(
            f"singular-continuous residual {worst:.3g} < -10*tol on cell {cells[i]} "
            f"(nu={nu_cell[i]:.6g}, ac={ac[i]:.6g}, atomic={at_cell[i]:.6g}): density overestimated")
    clamped = int(np.sum(sc < 0))
    sc_raw = float(sc.sum())
    sc = np.maximum(sc, 0.0)
    density = np.array([lookup[t] if not s else math.nan for t, s in zip(pts_l, special)])
    status = []
    for t, s in zip(g, special):
        status.append("atom" if s and t in atom_t else st_lookup.get(float(t), "shifted"))
    return LebesgueDecomposition(J, g, density, status, atoms_in, nu_cell, ac, at_cell, sc, tol,
                                 clamped, sc_raw)


GRADED_LEVELS = 40
GRADED_SPLIT = 4
#: graded cells stop at distance ``L * 2**-GRADED_FLOOR`` from the flagged end
GRADED_FLOOR = 26


def _graded_integral(curve, a, b, toward_a, toward_b, deriv_tol, nu) -> float:
    """Midpoint rule on cells shrinking geometrically toward the flagged end(s)."""
    if toward_a and toward_b:
        m = 0.5 * (a + b)
        return (_graded_integral(curve, a, m, True, False, deriv_tol, nu)
                + _graded_integral(curve, m, b, False, True, deriv_tol, nu))
    w = b - a
    # stay where the step schedule still resolves the density
    levels = int(np.clip(np.floor(np.log2(w / (curve.domain.length * 2.0 ** -GRADED_FLOOR))),
                         1, GRADED_LEVELS))
    edges = w * 2.0 ** -np.arange(levels + 1)  # distances from the flagged end
    frac = (np.arange(GRADED_SPLIT) + 0.5) / GRADED_SPLIT
    dist = (edges[1:, None] + (edges[:-1] - edges[1:])[:, None] * frac[None, :]).ravel()
    widths = np.repeat((edges[:-1] - edges[1:]) / GRADED_SPLIT, GRADED_SPLIT)
    pts = a + dist if toward_a else b - dist
    order = np.argsort(pts)
    prof = density_profile(curve, pts[order], deriv_tol=deriv_tol, nu=nu)
    d = np.empty_like(pts)
    d[order] = prof.density
    d = np.where(np.isfinite(d), d, 0.0)
    return float(np.sum(d * widths))


@dataclass
class LengthIdentityReport:
    interval: str
    variation: float
    ac_integral: float
    singular_mass: float
    atomic_mass: float
    sc_mass: float
    boundary_continuous: bool
    continuous_curve: bool
    holds: bool

    @property
    def rhs(self) -> float:
        return self.ac_integral + self.singular_mass


def length_identity_check(curve: Curve, J: Interval, tol: float = DECOMP_TOL,
                          nu: SpeedMeasure | None = None, grid: Sequence[float] | None = None
                          ) -> LengthIdentityReport:
    """``Var(gamma; J)`` against ``int_J |gamma'| + nu_sing(J)``.

    Always ``<=``; equality when the included ends of ``J`` are continuity
    points, and in particular for every ``J`` when the curve is continuous.
    """
    from .speed_measure import build_speed_measure

    nu = build_speed_measure(curve) if nu is None else nu
    dec = decompose(curve, nu, grid, tol, J)
    var = float(variation(curve, J, nu.tol).value)
    rhs = dec.ac_mass + dec.singular_mass
    bdry = all(nu.atom_mass(t) == 0 for t in J.included_boundary())
    holds = var <= rhs + tol
    if bdry:
        holds &= abs(var - rhs) <= tol
    return LengthIdentityReport(str(J), var, dec.ac_mass, dec.singular_mass, dec.atomic_mass,
                                dec.sc_mass, bdry, nu.is_continuous, bool(holds))


@dataclass
class ACpReport:
    p: float
    ac_loc: bool
    integral: float
    integral_history: list
    integral_finite: bool
    stronger_condition: bool
    stronger_checked: int
    member: bool


ACP_LEVELS = (8, 10, 12, 14)
ACP_RATIO = 0.9


def acp_classify(curve: Curve, p: float, tol: float = 1e-3, ac_loc: bool | None = None,
                 n_subintervals: int = 32, seed: int = 0) -> ACpReport:
    """Membership in ``AC^p``: ``AC`` with ``|gamma'|`` in ``L^p``.

    ``int |gamma'|^p`` is computed with the midpoint rule on ``2**8 .. 2**14``
    cells.  The integral counts as finite when the successive increments
    shrink geometrically (ratio at most 0.9) or are already below ``tol``; it
    is then extrapolated.  Increment ratios for an integrand ``~ t**-a`` are
    ``4**(a - 1)``, so integrands within a hair of the integrability edge
    (``a`` above ~0.92) are reported as divergent.
    """
    if not p >= 1:
        raise ConfigError(f"p must be >= 1, got {p}")
    if ac_loc is None:
        from .ac_analysis import banach_zaretsky_verdict
        ac_loc = banach_zaretsky_verdict(curve).ac_loc
    dom = curve.domain
    integrals = []
    integrals1 = []
    mids_last = dens_last = None
    for lvl in ACP_LEVELS:
        n = 1 << lvl
        mids = dom.lo + dom.length * (np.arange(n) + 0.5) / n
        d = density_profile(curve, mids).density
        d = np.where(np.isfinite(d), d, 0.0)
        w = dom.length / n
        integrals.append(float(np.sum(d ** p) * w))
        integrals1.append(float(np.sum(d) * w))
        mids_last, dens_last = mids, d
    finite, value = _extrapolate(integrals, tol)
    ok1, val1 = _extrapolate(integrals1, tol)
    quad_err = abs(val1 - integrals1[-1]) + tol

    # L(gamma|[s,t]) <= int_s^t |gamma'| on random grid-aligned subintervals
    rng = np.random.default_rng(seed)
    n = mids_last.size
    w = dom.length / n
    cum = np.concatenate([[0.0], np.cumsum(dens_last) * w])
    stronger = True
    for _ in range(n_subintervals):
        i, j = sorted(rng.choice(n + 1, size=2, replace=False))
        s, t = dom.lo + dom.length * i / n, dom.lo + dom.length * j / n
        s, t = max(s, dom.lo), min(t, dom.hi)
        L = float(variation(curve, Interval.closed(s, t) if dom.contains(s) and dom.contains(t)
                            else Interval(s, t, dom.contains(s), dom.contains(t))).value)
        if L > cum[j] - cum[i] + quad_err:
            stronger = False
    return ACpReport(float(p), bool(ac_loc), value, integrals, finite, stronger, n_subintervals,
                     bool(ac_loc and finite))


def _extrapolate(values: list[float], tol: float) -> tuple[bool, float]:
    inc = np.diff(values)
    if np.all(np.abs(inc[-2:]) <= tol):
        return True, values[-1]
    a, b = abs(inc[-2]), abs(inc[-1])
    if a > 0 and b / a <= ACP_RATIO:
        r = b / a
        return True, values[-1] + inc[-1] * r / (1 - r)
    return False, math.inf
