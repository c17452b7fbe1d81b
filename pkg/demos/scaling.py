"""Time the pipeline on growing pairs of catalog-like trees and fit a line.

Sizes can be passed on the command line:  python demos/scaling.py 1000 4000 8000
"""

import sys

import numpy as np

from taxmerge.bench import linear_fit, run_bench, tree_family

sizes = [int(s) for s in sys.argv[1:]] or [1000, 2000, 4000, 8000]
records = run_bench(tree_family(sizes), repeats=2)

print(f"{'concepts':>9s} {'icg':>8s} {'merge':>8s} {'mappings':>9s} {'total':>8s}")
for r in records:
    print(f"{r.source_concepts:9d} {r.t_icg:8.3f} {r.t_merge:8.3f} {r.t_mappings:9.3f} {r.t_total:8.3f}")

xs = np.array([r.source_concepts + r.target_concepts for r in records], dtype=float)
totals = np.array([r.t_total for r in records])
slope, intercept, r2 = linear_fit(xs, totals)
print(f"\ntotal = {slope * 1e6:.2f} us per concept {intercept * 1e3:+.1f} ms,  R^2 = {r2:.3f}")
print("seconds per 1000 input concepts:", np.round(totals / xs * 1000, 4))
