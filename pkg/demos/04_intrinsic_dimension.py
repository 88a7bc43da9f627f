"""
Intrinsic dimensionality
========================

Correlation dimension of synthetic manifolds, then of every triplet.
"""
import numpy as np

from defecttune.cli import dim_estimates
from defecttune.dataset import load_bundled
from defecttune.intdim import estimate_points

rng = np.random.default_rng(0)
for k in (1, 2, 3):
    X = np.full((300, 20), 0.5)
    X[:, :k] = rng.random((300, k))
    print(f"{k}-D cloud in 20-D: m = {estimate_points(X).m:.2f}")

est = dim_estimates(load_bundled(), "triplet")
for e in est:
    print(f"{e.dataset_name:10s} k={e.points_used:5d} m={e.m:.2f}")
print(f"median m = {np.median([e.m for e in est]):.2f}")

# the log-log curve the slope is fitted to
e = est[0]
for r, c in zip(e.curve.radii[::4], e.curve.c_values[::4]):
    print(f"r={r:.4f} C(r)={c:.4f}")
