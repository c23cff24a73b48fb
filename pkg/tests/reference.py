"""Independent reference computations used to derive frozen test values.

Nothing here imports the package's numerics; each oracle works from first
principles (digit expansions, closed forms, plain chord sums).
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np


def cantor_digits(x: Fraction, digits: int = 60) -> Fraction:
    """Cantor function from a ``digits``-long ternary expansion of ``x``."""
    if x >= 1:
        return Fraction(1)
    if x <= 0:
        return Fraction(0)
    out = Fraction(0)
    scale = Fraction(1, 2)
    for _ in range(digits):
        x *= 3
        d = int(x)
        x -= d
        if d == 1:
            return out + scale
        out += scale * (d // 2)
        scale /= 2
    return out


def cantor_measure(a: Fraction, b: Fraction) -> Fraction:
    """Cantor measure of ``(a, b]`` by digit counting."""
    return cantor_digits(b) - cantor_digits(a)


def chord_sum(f, lo: float, hi: float, n: int, dist=None) -> float:
    """Chord sum of ``f`` on the uniform ``n``-cell partition."""
    t = np.linspace(lo, hi, n + 1)
    y = f(t)
    if dist is None:
        return float(np.sum(np.abs(np.diff(y))))
    return float(np.sum(dist(y[:-1], y[1:])))


def circle_dist(a, b):
    d = np.mod(np.abs(a - b), 2 * math.pi)
    return np.minimum(d, 2 * math.pi - d)


def power_lp_integral(p: float) -> float:
    """``int_0^1 ((2/3) t**(-1/3))**p dt``; finite iff ``p < 3``."""
    if p >= 3:
        return math.inf
    return (2 / 3) ** p / (1 - p / 3)


def snowflake_quotients(alpha: float, ks) -> list[float]:
    """``|h|**alpha / |h|`` along ``h = 2**-k`` for ``gamma(t) = t``."""
    return [(2.0 ** -k) ** alpha / 2.0 ** -k for k in ks]


def cantor_cover_length(g: int) -> Fraction:
    return Fraction(2, 3) ** g
