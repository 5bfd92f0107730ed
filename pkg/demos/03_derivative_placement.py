"""Where should derivative-sign constraints go?

Under the unconstrained model the derivative field is Gaussian, so the
probability of a negative derivative is available in closed form at any
point.  Constraints pay off where that probability is high (data gaps), not
where observations already pin the slope down.

Run:  python3 demos/03_derivative_placement.py
"""

import numpy as np

from monogp import Dataset, KernelParams, lhd, place_gap_grid, place_plus_shape
from monogp.design import greedy_negative_derivative_points, prob_negative_derivative
from monogp.experiments import EXAMPLE1_DESIGN, testfn_example1

X = EXAMPLE1_DESIGN[:, None]
data = Dataset(X, testfn_example1(X[:, 0]))
params = KernelParams([0.3], 1.0)

print("probability of a negative derivative along the input (gap = 0.4..0.9):")
for x in (0.1, 0.3, 0.5, 0.65, 0.8, 0.95):
    p = prob_negative_derivative(np.array([x]), 0, data, params)
    marker = " <-- inside the gap" if 0.4 < x < 0.9 else ""
    print(f"  x={x:4.2f}  P(y' < 0) = {p:.3f}{marker}")

print("\ngreedy one-shot ranking of candidate constraint locations:")
candidates = np.linspace(0.05, 0.95, 19)[:, None]
pts, probs = greedy_negative_derivative_points(data, params, 0, candidates, m=5)
for p, pr in zip(pts[:, 0], probs):
    print(f"  x={p:4.2f}  P(y' < 0) = {pr:.3f}")

print("\nequally spaced gap grid (ten points strictly inside the gap):")
print(" ", np.round(place_gap_grid(0.4, 0.9, 10), 4))

print("\n'+'-shaped placement around prediction points in 2-d:")
centers = lhd(3, 2, seed=1)
spec = place_plus_shape(centers, arm=0.1, per_arm=2)
for k, L, s in zip(spec.dims, spec.locations, spec.directions):
    print(f"  dimension {k} (direction {s:+d}): {L.shape[0]} locations")
print("  total derivative locations:", spec.total_points)
