"""Derivative-set placement, negative-derivative probability, and LHD contracts."""

import numpy as np
import pytest
from scipy.stats import kstest

from monogp.design import (
    PlacementPlan,
    greedy_negative_derivative_points,
    lhd,
    place_gap_grid,
    place_plus_shape,
    prob_negative_derivative,
)
from monogp.gp import Dataset, DerivativeSpec, GPState
from monogp.kernel import KernelParams


class TestGapGrid:
    def test_reference_ten_point_grid(self):
        got = place_gap_grid(0.4, 0.9, 10)
        expected = np.array([0.42, 0.47, 0.52, 0.57, 0.62,
                             0.67, 0.72, 0.77, 0.82, 0.87])
        np.testing.assert_allclose(got, expected, atol=1e-12)

    def test_single_point_strictly_inside(self):
        pt = place_gap_grid(0.4, 0.9, 1)
        assert pt.shape == (1,)
        assert 0.4 < pt[0] < 0.9

    def test_constant_spacing(self):
        grid = place_gap_grid(-1.3, 2.1, 17)
        gaps = np.diff(grid)
        assert np.max(np.abs(gaps - gaps[0])) < 1e-12

    def test_endpoints_strictly_inside(self):
        for count in (1, 2, 5, 50):
            grid = place_gap_grid(0.0, 1.0, count)
            assert grid[0] > 0.0 and grid[-1] < 1.0

    def test_invalid_bounds(self):
        with pytest.raises(ValueError):
            place_gap_grid(1.0, 0.5, 3)
        with pytest.raises(ValueError):
            place_gap_grid(0.0, 1.0, 0)


class TestPlusShape:
    def test_single_center_counts(self):
        spec = place_plus_shape(np.array([[0.5, 0.5]]), arm=0.1, per_arm=2)
        assert spec.dims == (0, 1)
        assert spec.counts == (4, 4)
        # dimension-k arm varies only coordinate k
        for i, k in enumerate(spec.dims):
            other = 1 - k
            assert np.all(spec.locations[i][:, other] == 0.5)

    def test_five_centers_give_forty_locations(self):
        centers = np.array([[0.25, 0.25], [0.75, 0.25], [0.5, 0.5],
                            [0.25, 0.75], [0.75, 0.75]])
        spec = place_plus_shape(centers, arm=0.1, per_arm=2)
        assert spec.total_points == 40
        assert spec.counts == (20, 20)

    def test_all_points_inside_unit_box(self):
        centers = np.array([[0.05, 0.95], [0.5, 0.5]])
        spec = place_plus_shape(centers, arm=0.2, per_arm=3)
        for L in spec.locations:
            assert np.all(L >= 0.0) and np.all(L <= 1.0)

    def test_no_duplicates_within_dimension(self):
        centers = np.array([[0.02, 0.5], [0.5, 0.5]])  # clipping forces merges
        spec = place_plus_shape(centers, arm=0.3, per_arm=2)
        for L in spec.locations:
            assert np.unique(L, axis=0).shape[0] == L.shape[0]

    def test_rejects_center_outside_box(self):
        with pytest.raises(ValueError):
            place_plus_shape(np.array([[1.5, 0.5]]), arm=0.1, per_arm=1)


class TestLHD:
    def test_single_point(self):
        pt = lhd(1, 3, seed=0)
        assert pt.shape == (1, 3)
        assert np.all(pt >= 0) and np.all(pt <= 1)

    def test_one_point_per_cell_each_dimension(self):
        design = lhd(23, 4, seed=5)
        for j in range(4):
            cells = np.sort(np.floor(design[:, j] * 23).astype(int))
            np.testing.assert_array_equal(cells, np.arange(23))

    def test_seed_reproducibility(self):
        np.testing.assert_array_equal(lhd(12, 2, seed=9), lhd(12, 2, seed=9))
        assert not np.array_equal(lhd(12, 2, seed=9), lhd(12, 2, seed=10))

    def test_marginal_uniformity(self):
        pooled = np.concatenate([lhd(100, 1, seed=s)[:, 0] for s in range(100)])
        assert kstest(pooled, "uniform").pvalue > 0.01


class TestProbNegativeDerivative:
    def test_symmetric_flat_data_gives_half(self):
        # design and response symmetric about the query point: the conditional
        # derivative mean vanishes by symmetry
        X = np.array([0.2, 0.35, 0.65, 0.8])[:, None]
        y = np.array([1.0, 0.5, 0.5, 1.0])
        params = KernelParams([0.3], 1.0)
        p = prob_negative_derivative(np.array([0.5]), 0, Dataset(X, y), params)
        assert p == pytest.approx(0.5, abs=1e-9)

    def test_steep_dense_increasing_region(self):
        X = np.linspace(0.0, 1.0, 12)[:, None]
        y = 5.0 * X[:, 0]
        params = KernelParams([0.4], 1.0)
        p = prob_negative_derivative(np.array([0.5]), 0, Dataset(X, y), params)
        assert p < 0.05

    def test_matches_sampling_oracle(self):
        # empirical fraction of negative conditional draws within 0.01
        X = np.array([0.1, 0.4, 0.6, 0.95])[:, None]
        y = np.array([0.0, 0.8, 0.9, 1.4])
        data = Dataset(X, y)
        params = KernelParams([0.35], 1.2)
        x_query = np.array([0.5])
        p = prob_negative_derivative(x_query, 0, data, params)
        spec = DerivativeSpec((0,), (x_query[None, :],), (1,))
        state = GPState(data, spec, None)
        mean, cov = state.conditional_moments(params.lengthscales, params.variance)
        rng = np.random.default_rng(3)
        draws = mean[0] + np.sqrt(cov[0, 0]) * rng.standard_normal(100_000)
        assert p == pytest.approx(np.mean(draws < 0), abs=0.01)

    def test_invariant_under_joint_rescaling(self):
        # the scale family (y, sigma^2) -> (c y, c^2 sigma^2) leaves the
        # probability unchanged (m scales with c, sqrt(v) with c); rescaling
        # sigma^2 alone changes it because m does not depend on sigma^2
        X = np.array([0.1, 0.5, 0.9])[:, None]
        y = np.array([0.3, 0.2, 0.9])
        x_query = np.array([0.45])
        p1 = prob_negative_derivative(
            x_query, 0, Dataset(X, y), KernelParams([0.4], 1.0))
        c = 7.0
        p2 = prob_negative_derivative(
            x_query, 0, Dataset(X, c * y), KernelParams([0.4], c * c))
        assert p1 == pytest.approx(p2, abs=1e-12)


class TestGreedyHelper:
    def test_ranks_flat_region_above_steep(self):
        # gap region with no data should dominate the ranking
        X = np.array([0.0, 0.1, 0.2, 0.3, 0.4, 0.9, 1.0])[:, None]
        y = np.log(20 * X[:, 0] + 1)
        data = Dataset(X, y)
        params = KernelParams([0.25], 1.0)
        candidates = np.linspace(0.05, 0.95, 19)[:, None]
        pts, probs = greedy_negative_derivative_points(data, params, 0,
                                                       candidates, m=5)
        assert np.all(np.diff(probs) <= 1e-12)
        assert np.all((pts[:, 0] > 0.4) & (pts[:, 0] < 0.95))


class TestPlacementPlan:
    def test_gap_grid_roundtrip_and_realize(self):
        plan = PlacementPlan("gap_grid", (0,), (1,),
                             {"lo": 0.4, "hi": 0.9, "count": 10})
        again = PlacementPlan.from_dict(plan.to_dict())
        spec = again.realize(ndim=1)
        assert spec.counts == (10,)
        np.testing.assert_allclose(spec.locations[0][:, 0],
                                   place_gap_grid(0.4, 0.9, 10))

    def test_plus_shape_realize(self):
        plan = PlacementPlan("plus_shape", (0, 1), (1, 1),
                             {"arm": 0.1, "per_arm": 2})
        spec = plan.realize(ndim=2, pred_points=np.array([[0.5, 0.5]]))
        assert spec.total_points == 8

    def test_explicit_roundtrip(self):
        pts = [np.array([[0.1, 0.2], [0.3, 0.4]])]
        plan = PlacementPlan("explicit", (1,), (-1,), {"points": pts})
        again = PlacementPlan.from_dict(plan.to_dict())
        spec = again.realize(ndim=2)
        assert spec.directions == (-1,)
        np.testing.assert_allclose(spec.locations[0], pts[0])

    def test_unknown_strategy_rejected(self):
        with pytest.raises(ValueError):
            PlacementPlan("rings", (0,), (1,), {})
