"""Variation ``Var(gamma; J)``, cumulative variation ``V`` and its right-continuous
modification ``v``.

Sampled cadlag and piecewise-linear curves have exact variation (chord sums
over the samples).  Everything else goes through dyadic refinement of
``[a, b]``: at depth ``k`` the partition is the dyadic grid with ``2**k``
cells, plus every declared jump inside ``(a, b)`` and its neighbours
``t +- 2**-m * (b - a)`` for ``m <= k``.  The partitions are nested, so the chord
sums only grow with depth; refinement stops once two consecutive doublings add
less than ``tol``.  Open ends are handled by inner regularity: ``[a + h, b - h]``
with ``h`` halving until the value settles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .curves import (Curve, Interval, PiecewiseLinear, Restriction, SampledCadlag,
                     one_sided_limits)
from .errors import ConfigError, DomainError

DEFAULT_TOL = 1e-6
DEFAULT_MAX_DEPTH = 24
DEFAULT_BLOWUP = 1e12
MIN_DEPTH = 8
CELL_MIN_DEPTH = 4
_CHUNK = 1 << 20
_MAX_HALVINGS = 60
#: extra levels checked once two doublings have stalled
LOOKAHEAD = 3


@dataclass
class VariationResult:
    """Outcome of :func:`variation`.

    ``value`` is a lower bound for the true supremum in every case; it is
    ``math.inf`` when the running sum exceeded the blow-up bound.
    ``diverging`` flags a refinement that hit ``max_depth`` with increments
    that were not shrinking.
    """

    value: float
    converged: bool
    depth: int
    infinite: bool = False
    diverging: bool = False
    residual: float = 0.0
    history: list = field(default_factory=list, repr=False)

    def __float__(self):
        return float(self.value)

    @property
    def bounded(self) -> bool | None:
        """True/False when bounded variation is established/refuted, else None."""
        if self.infinite or self.diverging:
            return False
        return True if self.converged else None


def _check_tol(tol):
    if not tol > 0:
        raise ConfigError(f"tol must be positive, got {tol}")


def var_sum(curve: Curve, partition: Sequence[float]) -> float:
    """``sum_k d(gamma(t_k), gamma(t_{k+1}))`` over a nondecreasing partition."""
    ts = np.asarray(partition, dtype=float)
    if ts.size < 2:
        if ts.size == 1 and not curve.domain.contains(float(ts[0])):
            raise DomainError(f"t = {ts[0]!r} lies outside the domain {curve.domain}")
        return 0.0
    if np.any(np.diff(ts) < 0):
        raise ConfigError("partition times must be nondecreasing")
    pts = curve.eval_many(ts)
    return float(np.sum(curve.space.consecutive(pts)))


def _dyadic_sum(curve: Curve, a: float, b: float, depth: int, extra: np.ndarray) -> float:
    n = 1 << depth
    total = 0.0
    for start in range(0, n, _CHUNK):
        stop = min(n, start + _CHUNK)
        ts = a + (b - a) * (np.arange(start, stop + 1) / n)
        np.clip(ts, a, b, out=ts)
        if stop == n:
            ts[-1] = b
        if extra.size:
            sel = extra[(extra > ts[0]) & (extra < ts[-1])]
            if sel.size:
                ts = np.union1d(ts, sel)
        total += float(np.sum(curve.space.consecutive(curve._eval(ts))))
    return total


def _seed_points(jumps, a, b, depth):
    inside = [t for t in jumps if a < t < b]
    if not inside:
        return np.empty(0)
    L = b - a
    pts = list(inside)
    for m in range(1, depth + 1):
        off = L * 2.0 ** -m
        for t in inside:
            for s in (t - off, t + off):
                if a < s < b:
                    pts.append(s)
    return np.unique(np.asarray(pts))


def _refine_closed(curve: Curve, a: float, b: float, tol: float, max_depth: int,
                   blowup: float, min_depth: int) -> VariationResult:
    if a == b:
        return VariationResult(0.0, True, 0)
    jumps = curve.declared_jumps or ()
    history: list[float] = []
    running = 0.0
    depth = min(min_depth, max_depth)
    while depth <= max_depth:
        s = _dyadic_sum(curve, a, b, depth, _seed_points(jumps, a, b, depth))
        running = max(running, s)
        history.append(running)
        if not math.isfinite(running) or running > blowup:
            return VariationResult(math.inf, False, depth, infinite=True, history=history)
        if len(history) >= 3 and history[-1] - history[-2] < tol and history[-2] - history[-3] < tol:
            # plateau guard: the partition LOOKAHEAD levels finer must agree too
            ahead = min(depth + LOOKAHEAD, max_depth)
            if ahead == depth:
                return VariationResult(running, True, depth, residual=history[-1] - history[-2],
                                       history=history)
            s = _dyadic_sum(curve, a, b, ahead, _seed_points(jumps, a, b, ahead))
            gain = max(running, s) - running
            running = max(running, s)
            history.append(running)
            if running > blowup:
                return VariationResult(math.inf, False, ahead, infinite=True, history=history)
            if gain < tol:
                return VariationResult(running, True, ahead, residual=gain, history=history)
            depth = ahead
        depth += 1
    depth = min(depth, max_depth)
    inc = np.diff(history)
    diverging = bool(len(inc) >= 4 and inc[-1] > tol and np.all(inc[-3:] >= 0.9 * inc[-4:-1]))
    residual = float(inc[-1]) if len(inc) else 0.0
    return VariationResult(running, False, depth, diverging=diverging, residual=residual,
                           history=history)


def _exact_path(curve: Curve) -> bool:
    while isinstance(curve, Restriction):
        curve = curve.base
    return isinstance(curve, (SampledCadlag, PiecewiseLinear))


def _exact_variation(curve: Curve, J: Interval) -> VariationResult:
    if J.is_degenerate:
        return VariationResult(0.0, True, 0)
    pts = curve.chord_path(J)
    return VariationResult(float(np.sum(curve.space.consecutive(pts))), True, 0)


def variation(curve: Curve, J: Interval | None = None, tol: float = DEFAULT_TOL,
              max_depth: int = DEFAULT_MAX_DEPTH, blowup_bound: float = DEFAULT_BLOWUP,
              min_depth: int = MIN_DEPTH) -> VariationResult:
    """``Var(gamma; J)`` for any interval ``J`` inside the curve's domain."""
    _check_tol(tol)
    J = curve.domain if J is None else J
    if not curve.domain.contains_interval(J):
        raise DomainError(f"{J} is not contained in the domain {curve.domain}")
    if J.is_degenerate:
        return VariationResult(0.0, True, 0)
    if _exact_path(curve):
        return _exact_variation(curve, J)
    if J.lo_closed and J.hi_closed:
        return _refine_closed(curve, J.lo, J.hi, tol, max_depth, blowup_bound, min_depth)

    # inner regularity: sup over compact [a + h, b - h]; the inner
    # refinements and the halving run tighter than tol so the two errors fit in it
    h = J.length / 4.0
    history: list[float] = []
    running = 0.0
    depth = 0
    last = None
    for _ in range(_MAX_HALVINGS):
        a = J.lo if J.lo_closed else J.lo + h
        b = J.hi if J.hi_closed else J.hi - h
        if (not J.lo_closed and a <= J.lo) or (not J.hi_closed and b >= J.hi):
            break
        last = _refine_closed(curve, a, b, tol / 16, max_depth, blowup_bound, min_depth)
        if last.infinite:
            return last
        depth = max(depth, last.depth)
        running = max(running, last.value)
        history.append(running)
        if (len(history) >= 3 and history[-1] - history[-2] < tol / 4
                and history[-2] - history[-3] < tol / 4):
            # the halving can stall while both ends sit in flat stretches; a
            # much deeper inner interval catches mass hiding next to the ends
            deep = _deep_inner(curve, J, tol, max_depth, blowup_bound, min_depth)
            if deep is not None and deep.value > running:
                if deep.infinite:
                    return deep
                history.append(deep.value)
                return VariationResult(deep.value, deep.converged, max(depth, deep.depth),
                                       residual=deep.value - running, history=history)
            return VariationResult(running, last.converged, depth,
                                   residual=history[-1] - history[-2], history=history)
        h /= 2.0
    return VariationResult(running, False, depth,
                           diverging=bool(last is not None and last.diverging),
                           residual=(history[-1] - history[-2]) if len(history) > 1 else 0.0,
                           history=history)


DEEP_INNER = 40


def _deep_inner(curve, J, tol, max_depth, blowup, min_depth):
    h = J.length * 2.0 ** -DEEP_INNER
    a = J.lo if J.lo_closed else J.lo + h
    b = J.hi if J.hi_closed else J.hi - h
    if not (a < b) or (not J.lo_closed and a <= J.lo) or (not J.hi_closed and b >= J.hi):
        return None
    return _refine_closed(curve, a, b, tol / 16, max_depth, blowup, min_depth)


def signed_variation(curve: Curve, a: float, b: float, tol: float = DEFAULT_TOL, **kw) -> float:
    """``Var(gamma; [a, b])`` with the convention ``Var([b, a]) = -Var([a, b])``."""
    if a <= b:
        return float(variation(curve, Interval.closed(a, b), tol, **kw).value)
    return -float(variation(curve, Interval.closed(b, a), tol, **kw).value)


def cell_variations(curve: Curve, nodes: Sequence[float], tol: float = DEFAULT_TOL,
                    max_depth: int = DEFAULT_MAX_DEPTH, blowup_bound: float = DEFAULT_BLOWUP,
                    min_depth: int = CELL_MIN_DEPTH):
    """Variation over every cell ``[nodes[i], nodes[i+1]]``, refined in batch.

    Returns ``(values, converged, depths)`` arrays of length ``len(nodes) - 1``.
    """
    _check_tol(tol)
    nodes = np.asarray(nodes, dtype=float)
    m = len(nodes) - 1
    values = np.zeros(max(m, 0))
    conv = np.ones(max(m, 0), dtype=bool)
    depths = np.zeros(max(m, 0), dtype=int)
    if m <= 0:
        return values, conv, depths
    if np.any(np.diff(nodes) < 0):
        raise ConfigError("cell nodes must be nondecreasing")
    curve._check_times(nodes)
    return interval_variations(curve, nodes[:-1], nodes[1:], tol, max_depth, blowup_bound,
                               min_depth)


def interval_variations(curve: Curve, lo: Sequence[float], hi: Sequence[float],
                        tol: float = DEFAULT_TOL, max_depth: int = DEFAULT_MAX_DEPTH,
                        blowup_bound: float = DEFAULT_BLOWUP, min_depth: int = CELL_MIN_DEPTH):
    """Variation over the closed intervals ``[lo[i], hi[i]]``, refined in batch.

    Returns ``(values, converged, depths)``.
    """
    _check_tol(tol)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    m = lo.size
    values = np.zeros(m)
    conv = np.ones(m, dtype=bool)
    depths = np.zeros(m, dtype=int)
    if m == 0:
        return values, conv, depths
    if np.any(hi < lo):
        raise ConfigError("interval ends must satisfy lo <= hi")
    if _exact_path(curve):
        for i in range(m):
            values[i] = _exact_variation(curve, Interval.closed(lo[i], hi[i])).value
        return values, conv, depths

    jumps = np.asarray(curve.declared_jumps or (), dtype=float)
    if jumps.size:
        seeded = np.array([np.any((jumps > a) & (jumps < b)) for a, b in zip(lo, hi)])
    else:
        seeded = np.zeros(m, dtype=bool)
    for i in np.flatnonzero(seeded):
        r = _refine_closed(curve, lo[i], hi[i], tol, max_depth, blowup_bound, min_depth)
        values[i], conv[i], depths[i] = r.value, r.converged, r.depth

    active = np.flatnonzero(~seeded & (hi > lo))
    history: list[np.ndarray] = []
    for depth in range(min_depth, max_depth + 1):
        if active.size == 0:
            break
        s = _batch_sums(curve, lo[active], hi[active], depth)
        values[active] = np.maximum(values[active], s)
        depths[active] = depth
        history.append(values[active].copy())
        if len(history) >= 3:
            stalled = ((history[-1] - history[-2]) < tol) & ((history[-2] - history[-3]) < tol)
            ahead = min(depth + LOOKAHEAD, max_depth)
            if stalled.any() and ahead > depth:
                rows = active[stalled]
                before = values[rows].copy()
                values[rows] = np.maximum(before, _batch_sums(curve, lo[rows], hi[rows], ahead))
                depths[rows] = ahead
                stalled[stalled] = (values[rows] - before) < tol
            keep = ~stalled
            active = active[keep]
            history = [h[keep] for h in history[-2:]]
            history[-1] = values[active].copy()
        big = values[active] > blowup_bound
        if big.any():
            values[active[big]] = math.inf
            conv[active[big]] = False
            active = active[~big]
            history = [h[~big] for h in history]
    conv[active] = False
    return values, conv, depths


def _batch_sums(curve: Curve, lo: np.ndarray, hi: np.ndarray, depth: int) -> np.ndarray:
    k = 1 << depth
    out = np.empty(lo.size)
    rows = max(1, (1 << 22) // (k + 1))
    frac = np.arange(k + 1) / k
    for start in range(0, lo.size, rows):
        a = lo[start:start + rows, None]
        b = hi[start:start + rows, None]
        ts = a + (b - a) * frac[None, :]
        np.clip(ts, a, b, out=ts)
        ts[:, -1] = b[:, 0]
        pts = curve._eval(ts.ravel())
        pts = pts.reshape(ts.shape + pts.shape[1:])
        out[start:start + rows] = curve.space.distances(pts[:, :-1], pts[:, 1:]).sum(axis=1)
    return out


@dataclass
class VariationProfile:
    """``V`` on a grid with base point ``c``, and ``v(t) = V(t+)``."""

    base_point: float
    grid: np.ndarray
    V_values: np.ndarray
    v_values: np.ndarray
    right_gaps: np.ndarray
    refinement_depth: int
    converged: bool
    residual: float = 0.0

    def index(self, t: float) -> int | None:
        i = int(np.searchsorted(self.grid, t))
        if i < len(self.grid) and self.grid[i] == t:
            return i
        return None


def cumulative_profile(curve: Curve, c: float, grid: Sequence[float], tol: float = DEFAULT_TOL,
                       **kw) -> VariationProfile:
    """Signed ``V(t) = Var(gamma; [c, t])`` and ``v(t) = V(t+)`` on ``grid``.

    One sweep: the cell variations between consecutive nodes (grid plus ``c``)
    are accumulated outward from ``c``.
    """
    _check_tol(tol)
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or np.any(np.diff(grid) <= 0):
        raise ConfigError("grid must be strictly increasing")
    if not curve.domain.contains(float(c)):
        raise DomainError(f"base point {c} lies outside the domain {curve.domain}")
    curve._check_times(grid)
    nodes = np.union1d(grid, [c])
    cells, conv, depths = cell_variations(curve, nodes, tol, **kw)
    ic = int(np.searchsorted(nodes, c))
    V = np.zeros(len(nodes))
    V[ic + 1:] = np.cumsum(cells[ic:])
    V[:ic] = -np.cumsum(cells[:ic][::-1])[::-1]
    V_grid = V[np.searchsorted(nodes, grid)]

    gaps = np.zeros(len(grid))
    all_resolved = True
    jumps = curve.declared_jumps
    for i, t in enumerate(grid):
        if jumps is not None and t not in jumps:
            continue
        g = one_sided_limits(curve, float(t))
        if g.right_gap is None:
            all_resolved = False
        else:
            gaps[i] = g.right_gap
    return VariationProfile(
        base_point=float(c), grid=grid, V_values=V_grid, v_values=V_grid + gaps,
        right_gaps=gaps, refinement_depth=int(depths.max()) if depths.size else 0,
        converged=bool(conv.all()) and all_resolved)
