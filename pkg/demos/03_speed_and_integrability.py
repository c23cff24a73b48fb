"""Metric speed on a circle, on a snowflaked line, and for t**(2/3), whose
speed blows up at 0 but stays integrable in L^p for p < 3.

Run: python3 demos/03_speed_and_integrability.py
"""
import numpy as np

from speedmeasure import (AnalyticCurve, Interval, Snowflake, acp_classify, length_identity_check,
                          metric_derivative, oracle_library)

arc = oracle_library("circle_arc")
print("circle arc, metric speed at a few times:",
      [round(metric_derivative(arc, t).value, 6) for t in (0.5, 2.0, 5.0)])
li = length_identity_check(arc, arc.domain)
print(f"length {li.variation:.8f} = integral of speed {li.ac_integral:.8f} + singular {li.singular_mass:.1e}")

snow = AnalyticCurve(Snowflake(0.5), Interval.closed(0, 1), lambda t: np.asarray(t, float), jumps=())
est = metric_derivative(snow, 0.5)
print(f"\nt -> t with d = |x - y|**0.5: speed status '{est.status}'; quotients grow like h**-0.5")

power = oracle_library("power")
print("\nt**(2/3) on [0, 1]:")
for p in (1, 2, 2.5, 4):
    r = acp_classify(power, p, ac_loc=True)
    closed = (2 / 3) ** p / (1 - p / 3) if p < 3 else float("inf")
    print(f"  p = {p:<3}  integral of speed**p ~ {r.integral:.5g} (exact {closed:.5g}), "
          f"in AC^p: {r.member}")
