"""Metric spaces that curves map into.

Points are plain Python/numpy values; each space validates and normalizes
them:

============  ==========================================
space         point representation
============  ==========================================
real-line     float
snowflake     float, distance ``|x - y| ** alpha``
euclidean     length-``n`` float array
circle        angle in ``[0, 2*pi)`` (reduced on entry)
discrete      ``str`` label
============  ==========================================

Every space also has a vectorized :meth:`MetricSpace.distances` that works on
the arrays produced by :meth:`MetricSpace.as_array`, which is what the
refinement code uses.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi


class MetricSpace:
    """Base class. Subclasses are immutable descriptors."""

    kind: str = "abstract"
    #: True when points are real scalars (so real-valued oracles may map into it)
    real_valued: bool = False

    def check(self, p: Any) -> Any:
        raise NotImplementedError

    def distance(self, p: Any, q: Any) -> float:
        raise NotImplementedError

    def as_array(self, points: Sequence[Any]) -> np.ndarray:
        return np.asarray([self.check(p) for p in points], dtype=float)

    def distances(self, P: np.ndarray, Q: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def consecutive(self, P: np.ndarray) -> np.ndarray:
        """Distances between successive entries of a point array."""
        return self.distances(P[:-1], P[1:])

    def describe(self) -> dict:
        return {"kind": self.kind}


def _real(p: Any, kind: str) -> float:
    if isinstance(p, (bool, str, bytes)) or not np.isscalar(p) and np.ndim(p) != 0:
        raise TypeError(f"{kind} points are real scalars, got {p!r}")
    try:
        x = float(p)
    except (TypeError, ValueError) as exc:
        raise TypeError(f"{kind} points are real scalars, got {p!r}") from exc
    if not math.isfinite(x):
        raise TypeError(f"{kind} points must be finite, got {p!r}")
    return x


@dataclass(frozen=True)
class RealLine(MetricSpace):
    kind: str = field(default="real-line", init=False)
    real_valued: bool = field(default=True, init=False)

    def check(self, p):
        return _real(p, self.kind)

    def distance(self, p, q):
        return abs(self.check(p) - self.check(q))

    def distances(self, P, Q):
        return np.abs(np.asarray(P, dtype=float) - np.asarray(Q, dtype=float))


@dataclass(frozen=True)
class Snowflake(MetricSpace):
    """The real line with ``d(x, y) = |x - y| ** alpha``, ``0 < alpha <= 1``."""

    alpha: float = 0.5
    kind: str = field(default="snowflake", init=False)
    real_valued: bool = field(default=True, init=False)

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError(f"snowflake alpha must lie in (0, 1], got {self.alpha}")

    def check(self, p):
        return _real(p, self.kind)

    def distance(self, p, q):
        return abs(self.check(p) - self.check(q)) ** self.alpha

    def distances(self, P, Q):
        return np.abs(np.asarray(P, dtype=float) - np.asarray(Q, dtype=float)) ** self.alpha

    def describe(self):
        return {"kind": self.kind, "alpha": self.alpha}


@dataclass(frozen=True)
class Euclidean(MetricSpace):
    n: int = 2
    kind: str = field(default="euclidean", init=False)

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError(f"euclidean dimension must be a positive integer, got {self.n!r}")

    def check(self, p):
        if isinstance(p, (str, bytes)):
            raise TypeError(f"euclidean({self.n}) points are real vectors, got {p!r}")
        try:
            v = np.asarray(p, dtype=float)
        except (TypeError, ValueError) as exc:
            raise TypeError(f"euclidean({self.n}) points are real vectors, got {p!r}") from exc
        if self.n == 1 and v.ndim == 0:
            v = v.reshape(1)
        if v.shape != (self.n,):
            raise TypeError(f"euclidean({self.n}) expects vectors of length {self.n}, got {p!r}")
        return v

    def distance(self, p, q):
        return float(np.linalg.norm(self.check(p) - self.check(q)))

    def as_array(self, points):
        return np.stack([self.check(p) for p in points]) if len(points) else np.empty((0, self.n))

    def distances(self, P, Q):
        D = np.asarray(P, dtype=float) - np.asarray(Q, dtype=float)
        return np.sqrt(np.sum(D * D, axis=-1))

    def describe(self):
        return {"kind": self.kind, "n": int(self.n)}


@dataclass(frozen=True)
class Circle(MetricSpace):
    """Circle of the given radius with the geodesic (arc-length) metric."""

    radius: float = 1.0
    kind: str = field(default="circle", init=False)

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"circle radius must be positive, got {self.radius}")

    def check(self, p):
        a = _real(p, self.kind) % TWO_PI
        # tiny negative angles round up to exactly 2*pi
        return 0.0 if a == TWO_PI else a

    def distance(self, p, q):
        delta = abs(self.check(p) - self.check(q))
        return self.radius * min(delta, TWO_PI - delta)

    def as_array(self, points):
        return np.asarray([self.check(p) for p in points], dtype=float)

    def distances(self, P, Q):
        P, Q = np.mod(P, TWO_PI), np.mod(Q, TWO_PI)
        P, Q = np.where(P == TWO_PI, 0.0, P), np.where(Q == TWO_PI, 0.0, Q)
        delta = np.abs(P - Q)
        return self.radius * np.minimum(delta, TWO_PI - delta)

    def describe(self):
        return {"kind": self.kind, "radius": self.radius}


@dataclass(frozen=True)
class Discrete(MetricSpace):
    """String labels; distance is exactly 0 or 1."""

    kind: str = field(default="discrete", init=False)

    def check(self, p):
        if not isinstance(p, str):
            raise TypeError(f"discrete points are string labels, got {p!r}")
        return p

    def distance(self, p, q):
        return 0.0 if self.check(p) == self.check(q) else 1.0

    def as_array(self, points):
        out = np.empty(len(points), dtype=object)
        for i, p in enumerate(points):
            out[i] = self.check(p)
        return out

    def distances(self, P, Q):
        return (np.asarray(P, dtype=object) != np.asarray(Q, dtype=object)).astype(float)


def distance(space: MetricSpace, p, q) -> float:
    """``d(p, q)`` in ``space``; raises ``TypeError`` for points of the wrong kind."""
    return space.distance(p, q)


def space_from_dict(desc: dict) -> MetricSpace:
    """Build a space from a descriptor such as ``{"kind": "snowflake", "alpha": 0.5}``."""
    kind = desc.get("kind")
    if kind in ("real-line", "real_line", "real"):
        return RealLine()
    if kind == "snowflake":
        return Snowflake(float(desc.get("alpha", 0.5)))
    if kind == "euclidean":
        return Euclidean(int(desc.get("n", 2)))
    if kind == "circle":
        return Circle(float(desc.get("radius", 1.0)))
    if kind == "discrete":
        return Discrete()
    raise ValueError(f"unknown space kind {kind!r}")


@dataclass
class AxiomReport:
    passed: bool
    checked_triples: int
    failures: list = field(default_factory=list)  # (axiom name, witness tuple)

    def witnesses(self, axiom: str) -> list:
        return [w for a, w in self.failures if a == axiom]


def metric_axiom_report(space: MetricSpace, samples: Sequence,
                        dist: Callable[[Any, Any], float] | None = None,
                        rtol: float = 1e-12) -> AxiomReport:
    """Check symmetry, ``d(x,x)=0``, positivity off the diagonal and the
    triangle inequality over all sample pairs/triples.

    ``dist`` overrides the space's distance (used to test the checker itself).
    """
    d = dist if dist is not None else space.distance
    pts = [space.check(p) for p in samples]
    labels = list(samples)
    n = len(pts)
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            D[i, j] = d(pts[i], pts[j])
    failures = []
    for i in range(n):
        if D[i, i] != 0:
            failures.append(("identity", (labels[i],)))
    for i, j in itertools.combinations(range(n), 2):
        if D[i, j] != D[j, i]:
            failures.append(("symmetry", (labels[i], labels[j])))
        if D[i, j] <= 0 and not _same_point(pts[i], pts[j]):
            failures.append(("positivity", (labels[i], labels[j])))
    count = 0
    for i, j, k in itertools.product(range(n), repeat=3):
        count += 1
        lhs, rhs = D[i, k], D[i, j] + D[j, k]
        if lhs > rhs + rtol * max(1.0, rhs):
            failures.append(("triangle", (labels[i], labels[j], labels[k])))
    return AxiomReport(passed=not failures, checked_triples=count, failures=failures)


def _same_point(p, q) -> bool:
    if isinstance(p, np.ndarray):
        return bool(np.array_equal(p, q))
    return p == q
