"""Walk the three-branch reference map end to end: attractor, return
structure, and the stability certificate.

Run: python3 demos/classify_reference_map.py
"""

from itmlab import make_map
from itmlab.attractor import attractor, components
from itmlab.returnmap import return_map, rotation_data
from itmlab.stability import is_stable

m = make_map(["0", "1/3", "2/3", "1"], ["1/3", "1/7", "-1/2"])
res = attractor(m)
print(f"status: {res.status}  (stabilized after {res.n_stable} steps)")
print(f"attractor: {res.X}")

for J in components(res.X):
    rmd = return_map(m, res.X, J)
    print(f"\ncomponent {J}:")
    for br in rmd.branches:
        print(f"  branch {br.domain} -> return time {br.return_time}, "
              f"translation {br.translation}")
    for ld in rmd.landings:
        print(f"  landing point {ld.a} hits a partition point at time {ld.l}")
    rot = rotation_data(rmd)
    if rot.is_rotation:
        print(f"  return map is a rotation by {rot.rotation_number}")

rep = is_stable(m)
print(f"\nstable: {rep.stable}")
for name, verdict in [("A1", rep.acc.a1), ("A2", rep.acc.a2),
                      ("A3", rep.acc.a3), ("Matching", rep.matching)]:
    print(f"  {name}: {'ok' if verdict.ok else verdict.witness}")
