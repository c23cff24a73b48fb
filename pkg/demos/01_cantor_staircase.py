"""The Cantor function: length 1, yet no length is carried by any interval of
positive speed.

Run: python3 demos/01_cantor_staircase.py
"""
from speedmeasure import (Interval, ac_probe, build_speed_measure, decompose, measure_interval,
                          oracle_library, variation)

cantor = oracle_library("cantor")

res = variation(cantor, tol=1e-6)
print(f"Var(cantor; [0,1]) = {res.value:.9f}  (converged at depth {res.depth})")

nu = build_speed_measure(cantor)
for text in ("(0, 0.3333333333333333]", "(0.3333333333333333, 0.6666666666666666]", "[0.25, 0.75]"):
    print(f"  nu{text:<44} = {measure_interval(nu, Interval.parse(text)):.9f}")
print(f"atoms: {nu.atoms or 'none'}, so the curve is continuous")

dec = decompose(cantor, nu)
print(f"\nsplit of nu: ac {dec.ac_mass:.2e}, atomic {dec.atomic_mass:.1f}, sc {dec.sc_mass:.6f}")

probe = ac_probe(cantor, 0.5, nu=nu)
w = probe.witness
print(f"\n{len(w)} intervals of total length {w.total_length:.6f} "
      f"carry chord sum {w.chord_sum(cantor):.9f} > 0.5;")
print("shrinking the family further never lowers the chord sum, so no delta works for epsilon = 0.5")
