"""Take an unstable map, measure what blocks stability, and repair it with
an exact perturbation of bounded size.

Run: python3 demos/stabilize_unstable_map.py
"""

from fractions import Fraction

from itmlab import make_map
from itmlab.stability import is_stable
from itmlab.stabilize import stabilize, unstable_number

m = make_map(["0", "1/2", "3/4", "1"], ["1/2", "1/4", "-3/4"])
u = unstable_number(m, budget=20_000)
print(f"before: stable={is_stable(m, budget=20_000).stable}  U={u.U}")
print(f"  nontrivial cycle sizes: {list(u.cycle_sizes)}")
print(f"  broken boundary points: {[str(b) for b in u.boundary]}")

out, trace = stabilize(m, eps_total=Fraction(1, 100), budget=20_000)
print(f"\nperturbation steps: {len(trace.steps)}")
for step in trace.steps:
    print(f"  {step.kind}: U {step.u_before} -> {step.u_after}, "
          f"|delta| <= {step.eps}")

print(f"\nafter: beta={[str(b) for b in out.beta]}")
print(f"       gamma={[str(g) for g in out.gamma]}")
print(f"       stable={is_stable(out, budget=20_000).stable}  U={unstable_number(out, budget=20_000).U}")
