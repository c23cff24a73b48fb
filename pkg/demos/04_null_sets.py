"""Covers of the Cantor set shrink to length 0.  Their images under the
identity shrink too; under the Cantor function they keep length 1.

Run: python3 demos/04_null_sets.py
"""
from speedmeasure import NestedNullSet, luzin_n_upper_bound, oracle_library

covers = NestedNullSet.cantor_generations(12)
print(" g   cover length   identity bound   cantor bound")
ident = luzin_n_upper_bound(oracle_library("identity"), covers)
cant = luzin_n_upper_bound(oracle_library("cantor"), covers)
for g, (L, a, b) in enumerate(zip(ident.lengths, ident.bounds, cant.bounds)):
    print(f"{g:2d}   {L:12.8f}   {a:14.8f}   {b:12.8f}")
print(f"\nidentity: {ident.summary()['verdict']}")
print(f"cantor:   {cant.summary()['verdict']}")
