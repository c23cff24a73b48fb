"""Maps ``gamma: I -> X`` from a real interval into a metric space.

Four bodies are supported:

* :class:`AnalyticCurve` wraps a (vectorized) evaluator, optionally with exact
  left/right limit evaluators and a declared list of discontinuities.
* :class:`SampledCadlag` interprets ``(time, point)`` samples as a
  right-continuous step path, so its variation and speed measure are exact.
* :class:`PiecewiseLinear` interpolates breakpoints in a Euclidean space.
* :class:`Composite` is the pointwise sum of real-valued curves.

A curve whose ``declared_jumps`` is a tuple (possibly empty) claims to know
*all* of its discontinuities; ``None`` marks a black box whose jumps have to be
found numerically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .errors import ConfigError, DomainError
from .metric_spaces import Euclidean, MetricSpace, RealLine

#: default probing schedule for one-sided limits: 2**-k for k = 4..40
DEFAULT_H_SCHEDULE = tuple(2.0 ** -k for k in range(4, 41))
EXACT_GAP_TOL = 1e-9
BLACKBOX_GAP_TOL = 1e-6


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ConfigError("interval endpoints must be finite (use compact exhaustion)")
        if lo > hi:
            raise ConfigError(f"interval has lo > hi: {lo} > {hi}")
        if lo == hi and not (self.lo_closed and self.hi_closed):
            raise ConfigError("a degenerate interval must be closed on both ends")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def closed(cls, lo, hi):
        return cls(lo, hi, True, True)

    @classmethod
    def open(cls, lo, hi):
        return cls(lo, hi, False, False)

    @classmethod
    def parse(cls, text: str) -> "Interval":
        """Parse bracket notation such as ``"(0, 0.5]"``."""
        text = text.strip()
        if len(text) < 5 or text[0] not in "[(" or text[-1] not in "])":
            raise ConfigError(f"cannot parse interval {text!r}")
        lo, hi = (float(x) for x in text[1:-1].split(","))
        return cls(lo, hi, text[0] == "[", text[-1] == "]")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def is_degenerate(self) -> bool:
        return self.lo == self.hi

    def contains(self, t: float) -> bool:
        if t < self.lo or t > self.hi:
            return False
        if t == self.lo and not self.lo_closed:
            return False
        if t == self.hi and not self.hi_closed:
            return False
        return True

    def contains_interval(self, other: "Interval") -> bool:
        lo_ok = other.lo > self.lo or (other.lo == self.lo and (self.lo_closed or not other.lo_closed))
        hi_ok = other.hi < self.hi or (other.hi == self.hi and (self.hi_closed or not other.hi_closed))
        return lo_ok and hi_ok

    def included_boundary(self) -> list[float]:
        """Points of ``J`` minus its interior."""
        pts = []
        if self.lo_closed:
            pts.append(self.lo)
        if self.hi_closed and self.hi != self.lo:
            pts.append(self.hi)
        return pts

    def __str__(self):
        return f"{'[' if self.lo_closed else '('}{self.lo!r}, {self.hi!r}{']' if self.hi_closed else ')'}"


@dataclass(frozen=True)
class JumpGaps:
    """``left_gap = d(gamma(t-), gamma(t))`` and ``right_gap = d(gamma(t), gamma(t+))``.

    ``None`` gaps come with ``status == "not_resolved"``.
    """

    t: float
    left_gap: float | None
    right_gap: float | None
    status: str = "exact"

    @property
    def resolved(self) -> bool:
        return self.left_gap is not None and self.right_gap is not None

    @property
    def mass(self) -> float | None:
        if not self.resolved:
            return None
        return self.left_gap + self.right_gap


class Curve:
    """Common interface. Subclasses set ``space``, ``domain`` and implement ``_eval``."""

    space: MetricSpace
    domain: Interval
    name: str = "curve"
    #: exact evaluators use the tighter default gap tolerance
    exact_evaluator: bool = True
    truth: dict

    def _eval(self, ts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _check_times(self, ts: np.ndarray) -> None:
        if ts.size == 0:
            return
        lo, hi = ts.min(), ts.max()
        if not (self.domain.contains(float(lo)) and self.domain.contains(float(hi))):
            bad = lo if not self.domain.contains(float(lo)) else hi
            raise DomainError(f"t = {bad!r} lies outside the domain {self.domain} of {self.name}")

    def eval(self, t: float) -> Any:
        """``gamma(t)`` as a single point."""
        out = self.eval_many(np.asarray([float(t)]))
        return out[0]

    def eval_many(self, ts) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        self._check_times(ts)
        return self._eval(ts)

    @property
    def declared_jumps(self) -> tuple[float, ...] | None:
        return None

    def exact_limits(self, t: float):
        """``(gamma(t-), gamma(t+))`` when known exactly, else ``None``."""
        return None

    def gap_tol(self) -> float:
        return EXACT_GAP_TOL if self.exact_evaluator else BLACKBOX_GAP_TOL

    def declared_gaps(self, t: float) -> JumpGaps | None:
        """Exact gaps from declared limits, honouring the endpoint convention."""
        lims = self.exact_limits(t)
        if lims is None:
            return None
        left_pt, right_pt = lims
        x = self.eval(t)
        left = 0.0 if t == self.domain.lo else self.space.distance(left_pt, x)
        right = 0.0 if t == self.domain.hi else self.space.distance(x, right_pt)
        return JumpGaps(float(t), left, right, "exact")

    def describe(self) -> dict:
        return {"name": self.name, "space": self.space.describe(), "domain": str(self.domain)}

    def __repr__(self):
        return f"<{type(self).__name__} {self.name} on {self.domain} in {self.space.kind}>"


class AnalyticCurve(Curve):
    """Curve given by an evaluator ``func(ts) -> points``.

    ``left_limit``/``right_limit`` evaluate ``gamma(t-)``/``gamma(t+)`` at the
    declared jump times; elsewhere the curve is taken to be continuous, provided
    ``jumps`` is not ``None``.
    """

    def __init__(self, space: MetricSpace, domain: Interval, func: Callable,
                 left_limit: Callable | None = None, right_limit: Callable | None = None,
                 jumps: Sequence[float] | None = None, name: str = "analytic",
                 truth: dict | None = None, vectorized: bool = True,
                 exact_evaluator: bool | None = None):
        self.space = space
        self.domain = domain
        self.func = func
        self.left_limit = left_limit
        self.right_limit = right_limit
        self.vectorized = vectorized
        self.name = name
        self.truth = dict(truth or {})
        if jumps is not None:
            jumps = tuple(float(t) for t in jumps)
            if list(jumps) != sorted(jumps):
                raise ConfigError("declared jumps must be sorted")
            for t in jumps:
                if not domain.contains(t):
                    raise ConfigError(f"declared jump {t} is outside the domain {domain}")
        self._jumps = jumps
        self.exact_evaluator = (jumps is not None) if exact_evaluator is None else exact_evaluator

    def _eval(self, ts):
        if self.vectorized:
            out = self.func(ts)
        else:
            out = self.space.as_array([self.func(float(t)) for t in ts])
        if isinstance(self.space, Euclidean):
            return np.asarray(out, dtype=float).reshape(len(ts), self.space.n)
        if self.space.real_valued or self.space.kind == "circle":
            return np.asarray(out, dtype=float).reshape(len(ts))
        return np.asarray(out, dtype=object)

    @property
    def declared_jumps(self):
        return self._jumps

    def exact_limits(self, t):
        if self._jumps is None:
            return None
        x = self.eval(t)
        if t not in self._jumps:
            return x, x
        if self.left_limit is None or self.right_limit is None:
            return None
        arr = np.asarray([float(t)])
        return self.left_limit(arr)[0], self.right_limit(arr)[0]


class SampledCadlag(Curve):
    """Right-continuous step path through ``(time, point)`` samples."""

    def __init__(self, space: MetricSpace, samples: Sequence[tuple[float, Any]],
                 domain: Interval | None = None, name: str = "sampled"):
        if len(samples) == 0:
            raise ConfigError("a sampled curve needs at least one sample")
        times = np.asarray([float(t) for t, _ in samples])
        if np.any(np.diff(times) <= 0):
            raise ConfigError("sample times must be strictly increasing")
        self.space = space
        self.times = times
        self.points = space.as_array([p for _, p in samples])
        self.domain = domain or Interval.closed(times[0], times[-1])
        for t in times:
            if not self.domain.contains(float(t)):
                raise ConfigError(f"sample time {t} lies outside the domain {self.domain}")
        self.name = name
        self.truth = {}
        self.exact_evaluator = True
        steps = space.consecutive(self.points) if len(times) > 1 else np.zeros(0)
        self.steps = steps
        self._jumps = tuple(float(t) for t, s in zip(times[1:], steps) if s > 0)

    def _index(self, ts):
        idx = np.searchsorted(self.times, ts, side="right") - 1
        if np.any(idx < 0):
            raise DomainError(f"t = {ts[idx < 0][0]!r} precedes the first sample of {self.name}")
        return idx

    def _eval(self, ts):
        return self.points[self._index(ts)]

    @property
    def declared_jumps(self):
        return self._jumps

    def exact_limits(self, t):
        i = int(self._index(np.asarray([t]))[0])
        x = self.points[i]
        if self.times[i] == t and i > 0:
            return self.points[i - 1], x
        return x, x

    def chord_path(self, J: Interval) -> np.ndarray:
        """Point values visited on ``J`` (first value, then each sample inside)."""
        start = self.eval(J.lo)
        inside = (self.times > J.lo) & (self.times < J.hi)
        if J.hi_closed and J.hi > J.lo:
            inside |= self.times == J.hi
        pts = self.points[inside]
        if isinstance(self.space, Euclidean):
            return np.vstack([np.asarray(start)[None, :], pts])
        out = np.empty(len(pts) + 1, dtype=self.points.dtype)
        out[0] = start
        out[1:] = pts
        return out


class PiecewiseLinear(Curve):
    """Linear interpolation of breakpoints; Euclidean spaces only."""

    def __init__(self, space: MetricSpace, breakpoints: Sequence[tuple[float, Any]],
                 domain: Interval | None = None, name: str = "piecewise_linear"):
        if not isinstance(space, Euclidean):
            raise ConfigError("piecewise-linear curves need a euclidean space")
        if len(breakpoints) < 2:
            raise ConfigError("a piecewise-linear curve needs at least two breakpoints")
        times = np.asarray([float(t) for t, _ in breakpoints])
        if np.any(np.diff(times) <= 0):
            raise ConfigError("breakpoint times must be strictly increasing")
        self.space = space
        self.times = times
        self.points = space.as_array([p for _, p in breakpoints])
        self.domain = domain or Interval.closed(times[0], times[-1])
        if self.domain.lo < times[0] or self.domain.hi > times[-1]:
            raise ConfigError("the domain must lie within the breakpoint range")
        self.name = name
        self.truth = {"continuous": True}
        self.exact_evaluator = True

    def _eval(self, ts):
        return np.stack([np.interp(ts, self.times, self.points[:, k])
                         for k in range(self.space.n)], axis=-1)

    @property
    def declared_jumps(self):
        return ()

    def exact_limits(self, t):
        x = self.eval(t)
        return x, x

    def chord_path(self, J: Interval) -> np.ndarray:
        inner = self.times[(self.times > J.lo) & (self.times < J.hi)]
        return self.eval_many(np.concatenate([[J.lo], inner, [J.hi]]))


class Composite(Curve):
    """Pointwise sum of real-valued curves sharing one domain."""

    def __init__(self, components: Sequence[Curve], name: str = "composite"):
        if not components:
            raise ConfigError("a composite curve needs at least one component")
        dom = components[0].domain
        for c in components:
            if not isinstance(c.space, RealLine):
                raise ConfigError("composite components must be real-line valued")
            if c.domain != dom:
                raise ConfigError("composite components must share the same domain")
        self.components = tuple(components)
        self.space = RealLine()
        self.domain = dom
        self.name = name
        self.exact_evaluator = all(c.exact_evaluator for c in components)
        jumps = [c.declared_jumps for c in components]
        self._jumps = None if any(j is None for j in jumps) else tuple(sorted(set().union(*jumps)))
        truths = [c.truth for c in components]
        self.truth = {}
        if all(t.get("monotone") for t in truths):
            # nondecreasing real parts: the variations (and speed measures) add
            self.truth["monotone"] = True
            for key in ("variation", "ac_mass", "atomic_mass", "sc_mass"):
                if all(key in t for t in truths):
                    self.truth[key] = sum(t[key] for t in truths)
            if all("ac" in t for t in truths):
                self.truth["ac"] = all(t["ac"] for t in truths)
            if all("continuous" in t for t in truths):
                self.truth["continuous"] = all(t["continuous"] for t in truths)

    def _eval(self, ts):
        return sum(np.asarray(c._eval(ts), dtype=float) for c in self.components)

    @property
    def declared_jumps(self):
        return self._jumps

    def exact_limits(self, t):
        if self._jumps is None:
            return None
        lims = [c.exact_limits(t) for c in self.components]
        if any(l is None for l in lims):
            return None
        return float(sum(l[0] for l in lims)), float(sum(l[1] for l in lims))


class Restriction(Curve):
    """``gamma`` restricted to a subinterval ``J`` of its domain."""

    def __init__(self, base: Curve, J: Interval):
        if not base.domain.contains_interval(J):
            raise DomainError(f"{J} is not contained in the domain {base.domain} of {base.name}")
        self.base = base
        self.space = base.space
        self.domain = J
        self.name = f"{base.name}|{J}"
        self.exact_evaluator = base.exact_evaluator
        # properties that survive restriction
        self.truth = {k: True for k in ("continuous", "monotone", "simple", "ac")
                      if base.truth.get(k) is True}
        jumps = base.declared_jumps
        self._jumps = None if jumps is None else tuple(t for t in jumps if J.contains(t))

    def _eval(self, ts):
        return self.base._eval(ts)

    @property
    def declared_jumps(self):
        return self._jumps

    def exact_limits(self, t):
        return self.base.exact_limits(t)

    def chord_path(self, J: Interval) -> np.ndarray:
        return self.base.chord_path(J)


def one_sided_limits(curve: Curve, t: float, h_schedule: Sequence[float] | None = None,
                     gap_tol: float | None = None, use_declared: bool = True) -> JumpGaps:
    """Gaps ``d(gamma(t-), gamma(t))`` and ``d(gamma(t), gamma(t+))``.

    Exact when the curve declares its limits; otherwise the distances are probed
    along ``h_schedule`` and accepted once the last three successive values
    differ by less than ``gap_tol``.  Values below ``gap_tol`` count as 0.
    """
    t = float(t)
    if not curve.domain.contains(t):
        raise DomainError(f"t = {t!r} lies outside the domain {curve.domain}")
    if use_declared:
        exact = curve.declared_gaps(t)
        if exact is not None:
            return exact
    hs = np.asarray(h_schedule if h_schedule is not None else DEFAULT_H_SCHEDULE, dtype=float)
    if np.any(hs <= 0) or np.any(np.diff(hs) >= 0):
        raise ConfigError("h_schedule must be positive and strictly decreasing")
    tol = curve.gap_tol() if gap_tol is None else gap_tol
    x = curve.eval(t)
    dom = curve.domain
    left_ok = (t - hs > dom.lo) | ((t - hs == dom.lo) & dom.lo_closed)
    right_ok = (t + hs < dom.hi) | ((t + hs == dom.hi) & dom.hi_closed)
    left, lstat = (0.0, "exact") if t == dom.lo else _probe(curve, x, t - hs[left_ok], tol)
    right, rstat = (0.0, "exact") if t == dom.hi else _probe(curve, x, t + hs[right_ok], tol)
    status = "not_resolved" if "not_resolved" in (lstat, rstat) else (
        "exact" if lstat == rstat == "exact" else "converged")
    return JumpGaps(t, left, right, status)


def _probe(curve: Curve, x, times: np.ndarray, tol: float):
    if len(times) < 4:
        return None, "not_resolved"
    pts = curve.eval_many(times)
    g = curve.space.distances(pts, _broadcast(x, len(times), curve.space))
    if np.all(np.abs(np.diff(g[-4:])) < tol):
        val = float(g[-1])
        return (0.0 if val < tol else val), "converged"
    return None, "not_resolved"


def _broadcast(x, n, space):
    if isinstance(space, Euclidean):
        return np.broadcast_to(np.asarray(x, dtype=float), (n, space.n))
    if space.kind == "discrete":
        out = np.empty(n, dtype=object)
        out[:] = [x] * n
        return out
    return np.full(n, float(x))
