"""Analytic test curves with known variation, jumps and decomposition."""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .curves import AnalyticCurve, Composite, Interval
from .errors import ConfigError
from .metric_spaces import Circle, MetricSpace, RealLine

_SHIFT = np.uint64(62)
_MASK = np.uint64((1 << 62) - 1)


def cantor(ts) -> np.ndarray:
    """Cantor function on arrays, clipped to 0 below 0 and 1 above 1.

    The ternary digits of each float are extracted with integer arithmetic on
    ``x * 2**62`` so that no rounding creeps in while shifting digits out.
    """
    x = np.clip(np.asarray(ts, dtype=float), 0.0, 1.0)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    n = np.rint(x * 2.0 ** 62).astype(np.uint64)
    value = np.zeros(x.shape)
    value[n >= (np.uint64(1) << _SHIFT)] = 1.0
    idx = np.flatnonzero(n < (np.uint64(1) << _SHIFT))
    n = n[idx]
    acc = np.zeros(idx.size)
    weight = 0.5
    three = np.uint64(3)
    for _ in range(64):
        if idx.size == 0:
            break
        n3 = n * three
        digit = n3 >> _SHIFT
        n = n3 & _MASK
        acc += weight * (digit != 0)
        # a digit 1 ends the expansion: the point sits in a removed middle third
        done = digit == 1
        if done.any():
            value[idx[done]] = acc[done]
            keep = ~done
            idx, n, acc = idx[keep], n[keep], acc[keep]
        weight *= 0.5
    value[idx] = acc
    return value[0] if scalar else value


def cantor_exact(x) -> Fraction:
    """Exact Cantor function value at a rational point."""
    x = Fraction(x)
    if x <= 0:
        return Fraction(0)
    if x >= 1:
        return Fraction(1)
    seen: dict[Fraction, int] = {}
    bits: list[int] = []
    r = x
    while r not in seen:
        seen[r] = len(bits)
        r *= 3
        d = math.floor(r)
        r -= d
        if d == 1:
            return _bits_value(bits) + Fraction(1, 2 ** (len(bits) + 1))
        bits.append(d // 2)
        if r == 0:
            return _bits_value(bits)
    start = seen[r]
    period = bits[start:]
    P = int("".join(map(str, period)), 2) if period else 0
    tail = Fraction(P, 2 ** len(period) - 1) / 2 ** start
    return _bits_value(bits[:start]) + tail


def _bits_value(bits) -> Fraction:
    return sum((Fraction(b, 2 ** (i + 1)) for i, b in enumerate(bits)), Fraction(0))


def _real_space(space):
    space = space or RealLine()
    if not space.real_valued:
        raise ConfigError(f"this oracle is real-valued; cannot map into {space.kind}")
    return space


def _keep_truth(space: MetricSpace, truth: dict) -> dict:
    # variation figures are only known in the standard metric
    if isinstance(space, RealLine):
        return truth
    return {k: v for k, v in truth.items() if k in ("continuous", "jumps")}


def make_cantor(lo=0.0, hi=1.0, space=None):
    space = _real_space(space)
    dom = Interval.closed(lo, hi)
    L = hi - lo
    truth = {"continuous": True, "monotone": True, "simple": False, "ac": False, "jumps": 0,
             "variation": 1.0,
             "ac_mass": 0.0, "atomic_mass": 0.0, "sc_mass": 1.0}
    return AnalyticCurve(space, dom, lambda t: cantor((t - lo) / L), jumps=(),
                         name="cantor", truth=_keep_truth(space, truth))


def make_identity(lo=0.0, hi=1.0, space=None):
    space = _real_space(space)
    truth = {"continuous": True, "monotone": True, "simple": True, "ac": True, "jumps": 0,
             "variation": hi - lo, "ac_mass": hi - lo, "atomic_mass": 0.0, "sc_mass": 0.0}
    return AnalyticCurve(space, Interval.closed(lo, hi), lambda t: np.array(t, dtype=float),
                         jumps=(), name="identity", truth=_keep_truth(space, truth))


def make_circle_arc(speed=1.0, radius=1.0, lo=0.0, hi=2 * math.pi):
    total = abs(speed) * radius * (hi - lo)
    truth = {"continuous": True, "monotone": False, "simple": abs(speed) * (hi - lo) <= 2 * math.pi,
             "ac": True, "jumps": 0, "variation": total, "ac_mass": total,
             "atomic_mass": 0.0, "sc_mass": 0.0, "speed": abs(speed) * radius}
    return AnalyticCurve(Circle(radius), Interval.closed(lo, hi),
                         lambda t: np.mod(speed * np.asarray(t, dtype=float), 2 * math.pi),
                         jumps=(), name="circle_arc", truth=truth)


def make_step(times=(0.5,), levels=(0.0, 1.0), at_jump=None, cadlag=True,
              lo=0.0, hi=1.0, space=None):
    """Piecewise-constant real path.

    ``levels[i]`` is the value between ``times[i-1]`` and ``times[i]``.  At a
    jump time the path takes the right level (``cadlag=True``) or the left
    level, unless ``at_jump[i]`` overrides it.
    """
    space = _real_space(space)
    times = tuple(float(t) for t in times)
    levels = tuple(float(v) for v in levels)
    if len(levels) != len(times) + 1:
        raise ConfigError("step needs len(levels) == len(times) + 1")
    if list(times) != sorted(times) or len(set(times)) != len(times):
        raise ConfigError("step times must be strictly increasing")
    at = [None] * len(times) if at_jump is None else list(at_jump)
    if len(at) != len(times):
        raise ConfigError("at_jump must have one entry per jump time")
    tarr = np.asarray(times)
    lev = np.asarray(levels)
    side = "right" if cadlag else "left"
    value_at = [float(a) if a is not None else (levels[i + 1] if cadlag else levels[i])
                for i, a in enumerate(at)]

    def f(t):
        t = np.asarray(t, dtype=float)
        out = lev[np.searchsorted(tarr, t, side=side)]
        for tj, vj in zip(times, value_at):
            out = np.where(t == tj, vj, out)
        return out

    def left(t):
        return lev[np.searchsorted(tarr, np.asarray(t, dtype=float), side="left")]

    def right(t):
        return lev[np.searchsorted(tarr, np.asarray(t, dtype=float), side="right")]

    atomic = 0.0
    jumps = []
    monotone = all(a <= b for a, b in zip(levels, levels[1:]))
    for i, t in enumerate(times):
        lg = 0.0 if t == lo else abs(value_at[i] - levels[i])
        rg = 0.0 if t == hi else abs(levels[i + 1] - value_at[i])
        monotone &= levels[i] <= value_at[i] <= levels[i + 1]
        if lg + rg > 0:
            jumps.append(t)
        atomic += lg + rg
    truth = {"continuous": not jumps, "monotone": monotone, "simple": False,
             "ac": not jumps, "jumps": len(jumps), "variation": atomic,
             "ac_mass": 0.0, "atomic_mass": atomic, "sc_mass": 0.0}
    return AnalyticCurve(space, Interval.closed(lo, hi), f, left_limit=left, right_limit=right,
                         jumps=times, name="step", truth=_keep_truth(space, truth))


def make_sin_wave(lo=0.0, hi=2 * math.pi, amplitude=1.0, frequency=1.0, space=None):
    space = _real_space(space)
    # exact variation: sum of rises between consecutive critical points
    k0 = math.ceil((lo * frequency - math.pi / 2) / math.pi)
    crit = []
    k = k0
    while (math.pi / 2 + k * math.pi) / frequency < hi:
        c = (math.pi / 2 + k * math.pi) / frequency
        if c > lo:
            crit.append(c)
        k += 1
    pts = np.asarray([lo, *crit, hi])
    var = float(np.sum(np.abs(np.diff(amplitude * np.sin(frequency * pts)))))
    truth = {"continuous": True, "monotone": False, "simple": False, "ac": True, "jumps": 0,
             "variation": var, "ac_mass": var, "atomic_mass": 0.0, "sc_mass": 0.0}
    return AnalyticCurve(space, Interval.closed(lo, hi),
                         lambda t: amplitude * np.sin(frequency * np.asarray(t, dtype=float)),
                         jumps=(), name="sin_wave", truth=_keep_truth(space, truth))


def make_cantor_plus_linear(lo=0.0, hi=1.0, space=None):
    space = _real_space(space)
    L = hi - lo
    truth = {"continuous": True, "monotone": True, "simple": True, "ac": False, "jumps": 0,
             "variation": 1.0 + L, "ac_mass": L, "atomic_mass": 0.0, "sc_mass": 1.0}
    return AnalyticCurve(space, Interval.closed(lo, hi),
                         lambda t: cantor((np.asarray(t, dtype=float) - lo) / L) + t,
                         jumps=(), name="cantor_plus_linear", truth=_keep_truth(space, truth))


def make_staircase(n=4, lo=0.0, hi=1.0, height=1.0, space=None):
    """Cadlag staircase rising by ``height/n`` at ``lo + k*(hi-lo)/n``, k = 1..n."""
    if int(n) < 1:
        raise ConfigError("staircase needs n >= 1")
    n = int(n)
    L = hi - lo
    times = [lo + k * L / n for k in range(1, n + 1)]
    levels = [height * k / n for k in range(n + 1)]
    # last jump sits at the right endpoint, where the left gap still counts
    curve = make_step(times=times, levels=levels, cadlag=True, lo=lo, hi=hi, space=space)
    curve.name = "staircase"
    return curve


def make_power(exponent=2.0 / 3.0, lo=0.0, hi=1.0, space=None):
    """``t ** exponent`` on a nonnegative interval."""
    space = _real_space(space)
    if lo < 0 or exponent <= 0:
        raise ConfigError("power oracle needs lo >= 0 and exponent > 0")
    var = hi ** exponent - lo ** exponent
    truth = {"continuous": True, "monotone": True, "simple": True, "ac": True, "jumps": 0,
             "variation": var, "ac_mass": var, "atomic_mass": 0.0, "sc_mass": 0.0}
    return AnalyticCurve(space, Interval.closed(lo, hi),
                         lambda t: np.asarray(t, dtype=float) ** exponent,
                         jumps=(), name="power", truth=_keep_truth(space, truth))


_BUILDERS = {
    "cantor": make_cantor,
    "identity": make_identity,
    "circle_arc": make_circle_arc,
    "step": make_step,
    "sin_wave": make_sin_wave,
    "cantor_plus_linear": make_cantor_plus_linear,
    "staircase": make_staircase,
    "power": make_power,
}

_DEFAULTS = {
    "cantor": {"lo": 0.0, "hi": 1.0},
    "identity": {"lo": 0.0, "hi": 1.0},
    "circle_arc": {"speed": 1.0, "radius": 1.0, "lo": 0.0, "hi": 2 * math.pi},
    "step": {"times": [0.5], "levels": [0.0, 1.0], "at_jump": None, "cadlag": True,
             "lo": 0.0, "hi": 1.0},
    "sin_wave": {"lo": 0.0, "hi": 2 * math.pi, "amplitude": 1.0, "frequency": 1.0},
    "cantor_plus_linear": {"lo": 0.0, "hi": 1.0},
    "staircase": {"n": 4, "lo": 0.0, "hi": 1.0, "height": 1.0},
    "power": {"exponent": 2.0 / 3.0, "lo": 0.0, "hi": 1.0},
}

ORACLE_NAMES = tuple(_BUILDERS)
CONTINUOUS_ORACLES = ("cantor", "identity", "circle_arc", "sin_wave", "cantor_plus_linear")


def oracle_library(name: str, **params) -> AnalyticCurve:
    """Build a named oracle curve.

    >>> float(oracle_library("identity").eval(0.3))
    0.3
    """
    if name not in _BUILDERS:
        raise ConfigError(f"unknown oracle {name!r}; known: {', '.join(ORACLE_NAMES)}")
    try:
        return _BUILDERS[name](**params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for oracle {name!r}: {exc}") from exc


def non_cadlag_step(value=5.0, t=0.5):
    """``gamma = 0`` except ``gamma(t) = value``: equal left and right gaps."""
    curve = make_step(times=(t,), levels=(0.0, 0.0), at_jump=(value,))
    curve.name = "noncadlag_step"
    return curve


def cantor_plus_linear_with_step(jump_at=0.75, size=1.0):
    """Composite: Cantor function + identity + cadlag step of the given size."""
    return Composite([make_cantor_plus_linear(),
                      make_step(times=(jump_at,), levels=(0.0, size))],
                     name="cantor_plus_linear+step")


def list_oracles() -> list[dict]:
    """Catalogue of oracle names, default parameters and ground truths."""
    out = []
    for name in ORACLE_NAMES:
        curve = oracle_library(name)
        out.append({
            "name": name,
            "parameters": _DEFAULTS[name],
            "space": curve.space.describe(),
            "domain": str(curve.domain),
            "declared_jumps": list(curve.declared_jumps or ()),
            "truth": curve.truth,
        })
    return out
