"""One replicate of the random-polynomial comparison, metric by metric.

A random nondecreasing polynomial surface is evaluated on a 25-point Latin
hypercube, split 20/5 into train/test.  Both models predict the five held-out
values; the monotone model constrains derivative signs at 40 locations
arranged in '+' shapes around the test points.

Run:  python3 demos/04_simulation_metrics.py      (about a minute)
"""

import numpy as np

from monogp import Dataset, lhd, place_plus_shape
from monogp.experiments import (
    ExperimentConfig,
    fit_models,
    metrics,
    random_polynomial,
)

rng = np.random.default_rng(2)
fn, gamma = random_polynomial(seed=7)
print(f"surface scale beta = {gamma[0, 0]:.3e} "
      "(a shared gamma(0.01, 1) draw scales every coefficient)")

pts = lhd(25, 2, seed=3)
perm = rng.permutation(25)
train, test = pts[perm[:20]], pts[perm[20:]]
data = Dataset(train, fn(train[:, 0], train[:, 1]))
truth = fn(test[:, 0], test[:, 1])
spec = place_plus_shape(test, arm=0.1, per_arm=2)
print(f"derivative constraint locations: {spec.total_points} "
      f"({spec.counts[0]} per dimension)")

cfg = ExperimentConfig(n_particles=400, burnin=500, thin=2, seed=1,
                       standardize=True)
fit = fit_models(data, spec, test, cfg)

for name, summ in [("unconstrained", fit.unconstrained),
                   ("monotone", fit.monotone)]:
    m = metrics(summ, truth)
    print(f"\n{name}:")
    print(f"  RMSE  = {m.rmse:.3e}")
    print(f"  AWoCI = {m.awoci:.3e}   (mean width of the 95% intervals)")
    print(f"  covered {int(m.cover.sum())} of {m.cover.size} test truths")

print("\nconstraint satisfaction in the final ensemble: "
      f"{fit.constraint_satisfaction():.3f}")
