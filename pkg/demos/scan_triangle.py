"""Classify the two-parameter triangle family on a grid and render the
result to a PNG, coloring cells by their return-structure fingerprint.

Run: python3 demos/scan_triangle.py  (writes triangle.png)
"""

from itmlab import ScanRequest
from itmlab.btfamily import render, scan

req = ScanRequest(resolution=48, budget=20_000)
sr = scan(req)
print(f"classified {len(sr.cells)} cells in {sr.elapsed:.1f}s")
for tag, count in sorted(sr.tag_counts().items()):
    print(f"  {tag}: {count}")

with open("triangle.png", "wb") as fh:
    fh.write(render(sr, fmt="png"))
print("wrote triangle.png")
