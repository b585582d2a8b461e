"""Build the first-return map of a square billiard with one-way mirrors and
trace a few reflections of a single ray.

Run: python3 demos/billiard_return_map.py
"""

from fractions import Fraction

from itmlab import BilliardTable, SlopeDirection, SpyMirror
from itmlab.attractor import attractor
from itmlab.billiards import first_return_itm, trace

table = BilliardTable(
    mirrors=(
        SpyMirror(Fraction(1, 7), Fraction(3, 4), "left"),
        SpyMirror(Fraction(4, 7), Fraction(1, 4), "right"),
    )
)

m = first_return_itm(table, SlopeDirection(Fraction(1, 3)))
print("transversal return map:")
print(f"  beta  = {[str(b) for b in m.beta]}")
print(f"  gamma = {[str(g) for g in m.gamma]}")
res = attractor(m)
print(f"  attractor: {res.X}  ({res.status})")

print("\nray from (0, 1/5) with slope 1/3:")
for ev in trace(table, (Fraction(0), Fraction(1, 5)), SlopeDirection(Fraction(1, 3)), 8):
    print(f"  {ev.kind:8s} at ({ev.x}, {ev.y})")
