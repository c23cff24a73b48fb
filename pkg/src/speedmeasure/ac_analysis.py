"""Absolute continuity at three levels.

* maps: the epsilon-delta condition on finite interval families
  (:func:`ac_probe`),
* measures: ``lambda(F) <= delta  =>  nu(F) <= epsilon`` on finite unions
  (:func:`ac_measure_test`),
* null sets: upper bounds for ``H^1(gamma(N))`` along nested interval covers
  of ``N`` (:func:`luzin_n_upper_bound`),

and the combined verdict ``AC_loc  <=>  BV_loc and nu << lambda``
(:func:`banach_zaretsky_verdict`).

No finite computation certifies absolute continuity, so verdicts that do
not come from an oracle's declared ground truth are labelled
``"evidence-based"``.
"""
from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .curves import Curve, Interval
from .errors import ConfigError, InconsistencyError, NotBVError
from .speed_measure import SpeedMeasure, build_speed_measure, measure_closed_union
from .variation import interval_variations, variation

PROBE_BUDGET = 12
PROBE_THETA = 0.5
PROBE_MAX_CELLS = 50_000
SC_TOL = 1e-3


@dataclass(frozen=True)
class IntervalFamily:
    """Finitely many ``(a_k, b_k)`` with ``a_k < b_k`` and disjoint interiors."""

    pairs: tuple

    def __post_init__(self):
        pairs = tuple(sorted((float(a), float(b)) for a, b in self.pairs))
        for a, b in pairs:
            if not a < b:
                raise ConfigError(f"interval family needs a < b, got ({a}, {b})")
        for (a0, b0), (a1, b1) in zip(pairs, pairs[1:]):
            if a1 < b0:
                raise ConfigError(f"intervals ({a0}, {b0}) and ({a1}, {b1}) overlap")
        object.__setattr__(self, "pairs", pairs)

    def __len__(self):
        return len(self.pairs)

    @property
    def lo(self) -> np.ndarray:
        return np.asarray([a for a, _ in self.pairs])

    @property
    def hi(self) -> np.ndarray:
        return np.asarray([b for _, b in self.pairs])

    @property
    def total_length(self) -> float:
        return float(np.sum(self.hi - self.lo)) if self.pairs else 0.0

    def chord_sum(self, curve: Curve) -> float:
        """``sum_k d(gamma(b_k), gamma(a_k))``, one scalar evaluation per end."""
        sp = curve.space
        return float(sum(sp.distance(curve.eval(b), curve.eval(a)) for a, b in self.pairs))

    def merged(self) -> list[Interval]:
        """Closed intervals ``[a_k, b_k]``, touching ones merged."""
        out: list[list[float]] = []
        for a, b in self.pairs:
            if out and a <= out[-1][1]:
                out[-1][1] = max(out[-1][1], b)
            else:
                out.append([a, b])
        return [Interval.closed(a, b) for a, b in out]

    def to_list(self) -> list:
        return [[a, b] for a, b in self.pairs]


@dataclass(frozen=True)
class NestedNullSet:
    """Covers ``G_0 ⊇ G_1 ⊇ ...`` of a Lebesgue-null set, lengths decreasing to 0."""

    generations: tuple

    def __post_init__(self):
        gens = tuple(g if isinstance(g, IntervalFamily) else IntervalFamily(tuple(g))
                     for g in self.generations)
        if not gens:
            raise ConfigError("a nested null set needs at least one generation")
        for g, (outer, inner) in enumerate(zip(gens, gens[1:])):
            lo, hi = outer.lo, outer.hi
            for a, b in inner.pairs:
                i = int(np.searchsorted(lo, a, side="right")) - 1
                if i < 0 or b > hi[i]:
                    raise ConfigError(f"generation {g + 1} interval ({a}, {b}) is not covered "
                                      f"by generation {g}")
            if not inner.total_length < outer.total_length:
                raise ConfigError(f"generation {g + 1} does not shrink "
                                  f"({inner.total_length} >= {outer.total_length})")
        object.__setattr__(self, "generations", gens)

    @classmethod
    def cantor_generations(cls, depth: int, lo: float = 0.0, hi: float = 1.0) -> "NestedNullSet":
        """Generations ``0..depth`` of the middle-thirds construction on ``[lo, hi]``."""
        if depth < 0:
            raise ConfigError("depth must be >= 0")
        gens = []
        cells = [0]  # left ends in units of 3**-g
        for g in range(depth + 1):
            if g:
                cells = [c for k in cells for c in (3 * k, 3 * k + 2)]
            gens.append(IntervalFamily(tuple(_outward(lo, hi - lo, k, k + 1, g) for k in cells)))
        return cls(tuple(gens))

    @classmethod
    def around_point(cls, t: float, depth: int, radius: float, lo: float = -math.inf,
                     hi: float = math.inf) -> "NestedNullSet":
        """``[t - r 2**-g, t + r 2**-g]`` clipped to ``[lo, hi]``, ``g = 0..depth``."""
        gens = []
        for g in range(depth + 1):
            r = radius * 2.0 ** -g
            gens.append(IntervalFamily(((max(t - r, lo), min(t + r, hi)),)))
        return cls(tuple(gens))

    @classmethod
    def from_dict(cls, desc: dict, domain: Interval) -> "NestedNullSet":
        kind = desc.get("kind")
        if kind == "cantor_generations":
            return cls.cantor_generations(int(desc.get("depth", 10)),
                                          float(desc.get("lo", domain.lo)),
                                          float(desc.get("hi", domain.hi)))
        if kind == "around_point":
            return cls.around_point(float(desc["t"]), int(desc.get("depth", 10)),
                                    float(desc.get("radius", 0.25 * domain.length)),
                                    domain.lo, domain.hi)
        if kind == "explicit":
            return cls(tuple(IntervalFamily(tuple(tuple(p) for p in g))
                             for g in desc["generations"]))
        raise ConfigError(f"unknown null-set kind {kind!r}")


def _outward(lo: float, L: float, ka: int, kb: int, g: int) -> tuple[float, float]:
    """``[lo + L ka/3**g, lo + L kb/3**g]`` rounded outward to floats."""
    den = 3 ** g
    ea = Fraction(lo) + Fraction(L) * Fraction(ka, den)
    eb = Fraction(lo) + Fraction(L) * Fraction(kb, den)
    a, b = float(ea), float(eb)
    if Fraction(a) > ea:
        a = math.nextafter(a, -math.inf)
    if Fraction(b) < eb:
        b = math.nextafter(b, math.inf)
    return a, b


# -- epsilon-delta probe ----------------------------------------------------------

@dataclass
class ProbeResult:
    epsilon: float
    delta_estimate: float
    witness: IntervalFamily | None
    witness_chord_sum: float | None
    witness_length: float | None
    verified: bool
    kind: str  # "atom" | "search" | "none"
    history: list = field(default_factory=list)  # (generation, cells kept, smallest violating length)

    @property
    def violation(self) -> bool:
        return self.witness is not None

    def summary(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "delta_estimate": self.delta_estimate,
            "violation": self.violation,
            "kind": self.kind,
            "witness_intervals": len(self.witness) if self.witness else 0,
            "witness_length": self.witness_length,
            "witness_chord_sum": self.witness_chord_sum,
            "verified": self.verified,
        }


def _atoms_of(curve: Curve, nu: SpeedMeasure | None):
    if nu is not None:
        out = [(a.t, a.left_gap, a.right_gap) for a in nu.atoms]
        return out
    out = []
    for t in curve.declared_jumps or ():
        g = curve.declared_gaps(t)
        if g is not None and g.resolved and g.mass > 0:
            out.append((t, g.left_gap, g.right_gap))
    return out


def _atom_family(curve: Curve, atoms, h: float) -> IntervalFamily:
    dom = curve.domain
    pairs = []
    for t, lg, rg in atoms:
        a, b = max(t - h, dom.lo), min(t + h, dom.hi)
        straddle = curve.space.distance(curve.eval(b), curve.eval(a)) if a < b else 0.0
        if straddle >= lg + rg or not (a < t < b):
            if a < b:
                pairs.append((a, b))
        else:
            # gamma(t) sits off the segment between the one-sided limits: split at t
            if a < t:
                pairs.append((a, t))
            if t < b:
                pairs.append((t, b))
    return IntervalFamily(tuple(pairs))


def _search_generations(curve: Curve, budget: int, theta: float, max_cells: int):
    """Yield ``(g, lo, hi, chords, k)`` for the kept cells of each generation,
    ranked by chord-to-length ratio; cell ``k`` is ``[k, k+1] * 3**-g`` in
    domain units."""
    dom = curve.domain
    k = np.array([0], dtype=np.int64)
    sp = curve.space
    for g in range(1, budget + 1):
        k3 = (3 * k[:, None] + np.arange(3)[None, :]).ravel()
        w = dom.length / 3.0 ** g
        lo3 = dom.lo + k3 * w
        hi3 = np.minimum(dom.lo + (k3 + 1) * w, dom.hi)
        ends = curve.eval_many(np.concatenate([lo3, hi3]))
        n = lo3.size
        chords = sp.distances(ends[n:], ends[:n]).astype(float)
        ratio = chords / (hi3 - lo3)
        keep = (chords > 0) & (ratio >= theta * ratio.max()) if ratio.size else chords > 0
        idx = np.flatnonzero(keep)
        idx = idx[np.argsort(-ratio[idx], kind="stable")][:max_cells]
        if idx.size == 0:
            return
        yield g, lo3[idx], hi3[idx], chords[idx], k3[idx]
        k = np.sort(k3[idx])


def _exact_family(curve: Curve, k: np.ndarray, g: int) -> IntervalFamily:
    dom = curve.domain
    return IntervalFamily(tuple(_outward(dom.lo, dom.length, int(j), int(j) + 1, g)
                                for j in np.sort(k)))


def ac_probe(curve: Curve, epsilon: float, budget: int = PROBE_BUDGET,
             nu: SpeedMeasure | None = None, theta: float = PROBE_THETA,
             max_cells: int = PROBE_MAX_CELLS) -> ProbeResult:
    """Search for interval families breaking the epsilon-delta condition.

    Atoms come first: a family of short intervals around them has chord sum
    close to the total atom mass for any length, so ``delta = 0``.  Otherwise
    cells are split in three for ``budget`` generations, keeping those whose
    chord-to-length ratio is within ``theta`` of the best; the kept cells,
    ranked by ratio, give the shortest violating prefix per generation.
    A witness (the whole kept family) is reported only when those prefix
    lengths keep shrinking (halving every three generations).
    """
    if not epsilon > 0:
        raise ConfigError(f"epsilon must be positive, got {epsilon}")
    atoms = _atoms_of(curve, nu)
    if atoms and sum(lg + rg for _, lg, rg in atoms) > epsilon:
        h = curve.domain.length * 2.0 ** -20
        fam = _atom_family(curve, atoms, h)
        chord = fam.chord_sum(curve)
        if chord > epsilon:
            return ProbeResult(float(epsilon), 0.0, fam, chord, fam.total_length, True, "atom")

    history = []
    best = math.inf
    last = None
    for g, lo, hi, chords, k in _search_generations(curve, budget, theta, max_cells):
        csum = np.cumsum(chords)
        lsum = np.cumsum(hi - lo)
        hit = np.flatnonzero(csum > epsilon)
        viol = float(lsum[hit[0]]) if hit.size else math.inf
        history.append((g, int(lo.size), viol))
        best = min(best, viol)
        last = (g, k)
    shrinking = (len(history) >= 4 and math.isfinite(history[-1][2])
                 and history[-1][2] <= 0.5 * history[-4][2])
    if last is not None and shrinking:
        fam = _exact_family(curve, last[1], last[0])
        chord = fam.chord_sum(curve)  # independent re-evaluation
        ok = chord > epsilon
        if ok:
            return ProbeResult(float(epsilon), best, fam, chord, fam.total_length, True,
                               "search", history)
    return ProbeResult(float(epsilon), best, None, None, None, False, "none", history)


# -- measure level ----------------------------------------------------------------

@dataclass
class MeasureTestReport:
    epsilon: float
    passes: bool
    delta: float | None
    worst: list  # (delta, worst nu(F) with lambda(F) <= delta, lambda(F))
    candidates: int


def _candidate_unions(curve: Curve, nu: SpeedMeasure, budget: int, theta: float):
    """``(lambda(F), nu(F))`` for ranked prefixes (1, 2, 4, ... cells) of each probe
    generation, plus covers of the atoms.

    Cell variations are refined once per generation; a prefix then costs a
    cumulative sum, since ``Var`` adds over touching closed cells and
    ``nu([a, b]) = Var([a, b]) + left_gap(a) + right_gap(b)`` per merged piece.
    """
    out = []
    has_atoms = bool(nu.atoms) or nu.left_endpoint_mass > 0
    for _, lo, hi, _, _ in _search_generations(curve, budget, theta, PROBE_MAX_CELLS):
        var, _, _ = interval_variations(curve, lo, hi, tol=nu.tol / lo.size, min_depth=2)
        cvar = np.cumsum(var)
        clen = np.cumsum(hi - lo)
        n = lo.size
        for m in sorted({min(n, 1 << j) for j in range(int(math.log2(n)) + 2)}):
            mass = float(cvar[m - 1])
            if has_atoms:
                fam = IntervalFamily(tuple(zip(lo[:m].tolist(), hi[:m].tolist())))
                mass += float(sum(nu.left_gap(J.lo) + nu.right_gap(J.hi) for J in fam.merged()))
            out.append((float(clen[m - 1]), mass))
    for a, b in _atom_covers(curve, nu):
        fam = IntervalFamily(tuple(zip(a, b)))
        out.append((fam.total_length, measure_closed_union(nu, fam.merged())))
    return out


def _atom_covers(curve: Curve, nu: SpeedMeasure):
    atoms = _atoms_of(curve, nu)
    dom = curve.domain
    if not atoms:
        return []
    covers = []
    for k in (10, 20, 30):
        h = dom.length * 2.0 ** -k
        covers.append(([max(t - h, dom.lo) for t, _, _ in atoms],
                       [min(t + h, dom.hi) for t, _, _ in atoms]))
    return covers


def ac_measure_test(nu: SpeedMeasure, epsilon: float, delta_grid: Sequence[float] | None = None,
                    budget: int = 14, theta: float = PROBE_THETA) -> MeasureTestReport:
    """Is there a ``delta`` in the grid with ``lambda(F) <= delta => nu(F) <= epsilon``
    for every candidate union ``F``?"""
    if not epsilon > 0:
        raise ConfigError(f"epsilon must be positive, got {epsilon}")
    grid = sorted((epsilon * 2.0 ** -j for j in range(7)) if delta_grid is None else delta_grid,
                  reverse=True)
    cands = _candidate_unions(nu.curve, nu, budget, theta)
    lam = np.array([c[0] for c in cands])
    mass = np.array([c[1] for c in cands])
    worst = []
    passing = None
    for d in grid:
        sel = lam <= d
        if sel.any():
            i = int(np.flatnonzero(sel)[np.argmax(mass[sel])])
            worst.append((float(d), float(mass[i]), float(lam[i])))
            ok = mass[i] <= epsilon + nu.tol
        else:
            worst.append((float(d), 0.0, 0.0))
            ok = True
        if ok and passing is None:
            passing = float(d)
    return MeasureTestReport(float(epsilon), passing is not None, passing, worst, len(cands))


# -- verdict ----------------------------------------------------------------------

@dataclass
class Verdict:
    ac_loc: bool
    basis: str  # "exact" | "evidence-based"
    evidence_ac: bool
    consistent: bool
    bv: bool
    atoms: int
    sc_mass: float | None
    probe: ProbeResult | None
    notes: list = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "ac_loc": self.ac_loc,
            "basis": self.basis,
            "evidence_ac": self.evidence_ac,
            "consistent": self.consistent,
            "bv": self.bv,
            "atoms": self.atoms,
            "sc_mass": self.sc_mass,
            "probe": self.probe.summary() if self.probe else None,
            "notes": list(self.notes),
        }


def banach_zaretsky_verdict(curve: Curve, nu: SpeedMeasure | None = None, sc_tol: float = SC_TOL,
                            budget: int = PROBE_BUDGET) -> Verdict:
    """``AC_loc`` iff BV, no atoms, negligible singular-continuous mass and no
    probe witness.  Oracles that declare ``truth["ac"]`` decide exactly; the
    evidence is still gathered and checked against it."""
    from .decomposition import decompose

    notes = []
    try:
        nu = build_speed_measure(curve) if nu is None else nu
    except NotBVError as exc:
        exact = curve.truth.get("ac")
        notes.append(str(exc))
        return Verdict(False, "exact" if exact is not None else "evidence-based", False,
                       exact in (None, False), False, 0, None, None, notes)
    n_atoms = len(nu.atoms) + (1 if nu.left_endpoint_mass > 0 and
                               all(a.t != nu.domain.lo for a in nu.atoms) else 0)
    sc = None
    try:
        sc = decompose(curve, nu).sc_mass
    except InconsistencyError as exc:
        notes.append(f"decomposition: {exc}")
    total = float(variation(curve, curve.domain, nu.tol).value)
    probe = ac_probe(curve, 0.25 * total, budget, nu) if total > 0 else None
    evidence = (n_atoms == 0 and sc is not None and sc <= sc_tol
                and not (probe is not None and probe.violation))
    exact = curve.truth.get("ac")
    if exact is not None:
        return Verdict(bool(exact), "exact", evidence, bool(exact) == evidence, True, n_atoms, sc,
                       probe, notes)
    return Verdict(evidence, "evidence-based", evidence, True, True, n_atoms, sc, probe, notes)


# -- Luzin (N) ---------------------------------------------------------------------

@dataclass
class LuzinReport:
    nu_bounds: list  # sum_k nu([a_k, b_k]) per generation
    diam_sums: list  # sum_k sampled diam(gamma([a_k, b_k]))
    lengths: list
    tends_to_zero: bool
    monotone: bool
    diameter_bound_ok: bool
    h1_estimate: list | None  # equals nu_bounds for simple curves

    @property
    def bounds(self) -> list:
        return self.nu_bounds

    def summary(self) -> dict:
        return {
            "bounds": self.nu_bounds,
            "diam_sums": self.diam_sums,
            "lengths": self.lengths,
            "tends_to_zero": self.tends_to_zero,
            "monotone": self.monotone,
            "diameter_bound_ok": self.diameter_bound_ok,
            "h1_estimate": self.h1_estimate,
            "verdict": ("tends to 0: evidence for Luzin (N) on this null set" if self.tends_to_zero
                        else "does not tend to 0: these covers give no evidence for Luzin (N)"),
        }


def _outward_gaps(nu: SpeedMeasure, lo, hi) -> np.ndarray:
    return np.array([nu.left_gap(a) + nu.right_gap(b) for a, b in zip(lo, hi)])


def _sampled_diameters(curve: Curve, lo: np.ndarray, hi: np.ndarray, k: int) -> np.ndarray:
    frac = np.arange(k + 1) / k
    ts = lo[:, None] + (hi - lo)[:, None] * frac[None, :]
    ts[:, -1] = hi
    pts = curve.eval_many(ts.ravel())
    pts = pts.reshape(ts.shape + pts.shape[1:])
    if curve.space.real_valued:
        spread = pts.max(axis=1) - pts.min(axis=1)
        return curve.space.distances(spread, np.zeros_like(spread))
    n = k + 1
    i, j = np.triu_indices(n, 1)
    return curve.space.distances(pts[:, i], pts[:, j]).max(axis=1)


def luzin_n_upper_bound(curve: Curve, null_set: NestedNullSet, nu: SpeedMeasure | None = None,
                        samples: int = 16, tol: float | None = None) -> LuzinReport:
    """Per generation: ``sum diam(gamma([a_k, b_k])) <= sum nu([a_k, b_k])``.

    ``nu([a, b]) = Var(gamma; [a, b]) + left_gap(a) + right_gap(b)``, with the
    variations refined in one batch per generation.
    """
    nu = build_speed_measure(curve) if nu is None else nu
    tol = nu.tol if tol is None else tol
    dom = curve.domain
    bounds, diams, lengths = [], [], []
    diam_ok = True
    for fam in null_set.generations:
        lo, hi = fam.lo, fam.hi
        if not all(dom.contains(a) and dom.contains(b) for a, b in fam.pairs):
            raise ConfigError("null-set generations must lie in the domain")
        var, _, _ = interval_variations(curve, lo, hi, tol=tol / max(1, lo.size), min_depth=2)
        masses = var + _outward_gaps(nu, lo, hi)
        d = _sampled_diameters(curve, lo, hi, samples)
        diam_ok &= bool(np.all(d <= var + tol) and np.all(var <= masses + tol))
        bounds.append(float(masses.sum()))
        diams.append(float(d.sum()))
        lengths.append(fam.total_length)
    monotone = all(b1 <= b0 + tol for b0, b1 in zip(bounds, bounds[1:]))
    tends = len(bounds) >= 4 and (bounds[-1] <= tol or bounds[-1] <= 0.5 * bounds[-4])
    simple = bool(curve.truth.get("simple"))
    return LuzinReport(bounds, diams, lengths, bool(tends), monotone, diam_ok,
                       list(bounds) if simple else None)
