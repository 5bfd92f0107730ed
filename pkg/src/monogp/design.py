"""Construction of derivative input sets and space-filling designs.

Derivative-sign constraints are cheap to impose but not free: each location
enlarges the joint covariance, so placement matters.  This module provides
the analytic probability of a negative derivative under the unconstrained
model (to find where constraints bite), an equally spaced gap grid for
one-dimensional holes, "+"-shaped placement around prediction points for
multi-dimensional problems, and Latin hypercube designs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from .gp import Dataset, DerivativeSpec, FactorizationError, GPState, JitterPolicy
from .kernel import KernelParams


def prob_negative_derivative(x, k: int, data: Dataset, params: KernelParams,
                             jitter: JitterPolicy = JitterPolicy()) -> float:
    """P(dy/dx_k < 0 at ``x``) under the unconstrained model at fixed parameters.

    Phi(-m / sqrt(v)) with (m, v) the Gaussian conditional moments of the
    dimension-``k`` derivative at ``x`` given the data.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    spec = DerivativeSpec((k,), (x[None, :],), (1,))
    state = GPState(data, spec, None, jitter=jitter)
    mean, cov = state.conditional_moments(params.lengthscales, params.variance)
    v = float(cov[0, 0])
    if v <= 0.0:
        raise FactorizationError(
            f"nonpositive conditional derivative variance {v:.3e}")
    return float(ndtr(-mean[0] / np.sqrt(v)))


def place_gap_grid(lo: float, hi: float, count: int) -> np.ndarray:
    """``count`` equally spaced points strictly inside (lo, hi).

    The interval splits into ``count`` equal cells and each point sits at the
    40% mark of its cell, so the left margin is 0.4 and the right margin 0.6
    of the spacing; on (0.4, 0.9) with ten points this is the grid
    0.42, 0.47, ..., 0.87.
    """
    lo, hi = float(lo), float(hi)
    if not lo < hi:
        raise ValueError("need lo < hi")
    count = int(count)
    if count < 1:
        raise ValueError("need at least one point")
    step = (hi - lo) / count
    return lo + step * (np.arange(count) + 0.4)


def place_plus_shape(centers, arm: float, per_arm: int, box=None,
                     dims=None, directions=None) -> DerivativeSpec:
    """Derivative locations on axis-aligned arms around each center.

    For every center and every monotone dimension ``k``, ``per_arm`` points
    are placed on each side along the axis-``k`` line through the center at
    offsets ``arm * j / per_arm``; locations are clipped to the box and
    deduplicated within each dimension's set.
    """
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    d = centers.shape[1]
    if arm <= 0:
        raise ValueError("arm length must be positive")
    per_arm = int(per_arm)
    if per_arm < 1:
        raise ValueError("need at least one point per arm side")
    if box is None:
        box = (np.zeros(d), np.ones(d))
    lo, hi = (np.asarray(b, dtype=float) for b in box)
    if np.any(centers < lo) or np.any(centers > hi):
        raise ValueError("centers must lie inside the box")
    dims = tuple(range(d)) if dims is None else tuple(int(k) for k in dims)
    if directions is None:
        directions = (1,) * len(dims)
    offsets = arm * (np.arange(1, per_arm + 1) / per_arm)
    locations = []
    for k in dims:
        pts = []
        for c in centers:
            for off in offsets:
                for sign in (-1.0, 1.0):
                    p = c.copy()
                    p[k] = min(max(p[k] + sign * off, lo[k]), hi[k])
                    pts.append(p)
        pts = np.unique(np.asarray(pts), axis=0)
        locations.append(pts)
    return DerivativeSpec(dims, tuple(locations), tuple(directions))


def lhd(n: int, d: int, seed: int = 0) -> np.ndarray:
    """Latin hypercube design on [0, 1]^d.

    Per dimension the ``n`` coordinates occupy the ``n`` distinct cells of
    the uniform partition, uniformly jittered within their cells.
    """
    n, d = int(n), int(d)
    if n < 1 or d < 1:
        raise ValueError("need n >= 1 points and d >= 1 dimensions")
    rng = np.random.default_rng(seed)
    out = np.empty((n, d))
    for j in range(d):
        perm = rng.permutation(n)
        out[:, j] = (perm + rng.uniform(size=n)) / n
    return out


def greedy_negative_derivative_points(data: Dataset, params: KernelParams,
                                      k: int, candidates, m: int):
    """Experimental: the ``m`` candidates most likely to violate monotonicity.

    One-shot ranking by `prob_negative_derivative`; no sequential refitting.
    Returns (points, probabilities) sorted by decreasing probability.
    """
    candidates = np.atleast_2d(np.asarray(candidates, dtype=float))
    probs = np.array([prob_negative_derivative(c, k, data, params)
                      for c in candidates])
    order = np.argsort(-probs, kind="stable")[:int(m)]
    return candidates[order], probs[order]


@dataclass(frozen=True)
class PlacementPlan:
    """Serializable recipe for building a derivative input set.

    strategy "gap_grid" needs lo/hi/count (one monotone dimension);
    "plus_shape" needs arm/per_arm and takes the prediction points as
    centers; "explicit" carries the locations directly.
    """

    strategy: str
    dims: tuple
    directions: tuple
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.strategy not in ("gap_grid", "plus_shape", "explicit"):
            raise ValueError(f"unknown placement strategy {self.strategy!r}")
        object.__setattr__(self, "dims", tuple(int(k) for k in self.dims))
        object.__setattr__(self, "directions",
                           tuple(int(s) for s in self.directions))

    def realize(self, ndim: int, pred_points=None, box=None) -> DerivativeSpec:
        if self.strategy == "gap_grid":
            if len(self.dims) != 1:
                raise ValueError("gap_grid places points in one dimension")
            grid = place_gap_grid(self.options["lo"], self.options["hi"],
                                  self.options["count"])
            k = self.dims[0]
            pts = np.full((grid.size, ndim), self.options.get("anchor", 0.0))
            pts[:, k] = grid
            return DerivativeSpec(self.dims, (pts,), self.directions)
        if self.strategy == "plus_shape":
            if pred_points is None:
                raise ValueError("plus_shape needs prediction points as centers")
            return place_plus_shape(pred_points, self.options.get("arm", 0.1),
                                    self.options.get("per_arm", 2), box=box,
                                    dims=self.dims, directions=self.directions)
        locs = tuple(np.asarray(p, dtype=float) for p in self.options["points"])
        return DerivativeSpec(self.dims, locs, self.directions)

    def to_dict(self) -> dict:
        options = {
            key: (value.tolist() if isinstance(value, np.ndarray) else
                  [np.asarray(v).tolist() for v in value] if key == "points"
                  else value)
            for key, value in self.options.items()
        }
        return {"strategy": self.strategy, "dims": list(self.dims),
                "directions": list(self.directions), "options": options}

    @classmethod
    def from_dict(cls, payload: dict) -> "PlacementPlan":
        return cls(payload["strategy"], tuple(payload["dims"]),
                   tuple(payload["directions"]),
                   dict(payload.get("options", {})))
