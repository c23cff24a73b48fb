"""Where a path jumps, the speed measure has an atom; how the jump splits
into a left and a right gap decides what closed intervals see.

Run: python3 demos/02_jumps_and_atoms.py
"""
import numpy as np

from speedmeasure import (AnalyticCurve, Interval, RealLine, build_speed_measure, non_cadlag_step,
                          oracle_library, var_vs_measure_check)

for curve in (oracle_library("step"), non_cadlag_step()):
    nu = build_speed_measure(curve)
    print(f"{curve.name}: gamma(0.5) = {curve.eval(0.5)}")
    for a in nu.atoms:
        print(f"  atom at {a.t}: left gap {a.left_gap}, right gap {a.right_gap}, mass {a.mass}")
    for text in ("[0, 0.5]", "[0.5, 1]", "(0.4, 0.6)"):
        rep = var_vs_measure_check(curve, nu, Interval.parse(text))
        kind = "equal" if rep.equality_expected else "strict"
        print(f"  J = {text:<11} Var {rep.variation:5.2f}  nu {rep.measure:5.2f}  ({kind})")

# a path we know nothing about: the jumps have to be located numerically
blind = AnalyticCurve(RealLine(), Interval.closed(0, 1),
                      lambda t: np.sin(3 * t) + np.where(t >= 0.71, 0.5, 0.0))
nu = build_speed_measure(blind)
print("\nblack-box path, atoms found by scanning:")
for a in nu.atoms:
    print(f"  t = {a.t:.12f}, mass {a.mass:.9f} ({a.status})")
