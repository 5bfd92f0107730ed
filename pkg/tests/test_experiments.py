"""Benchmark surfaces, metric formulas, and the experiment drivers at toy scale."""

import math

import numpy as np
import pytest

from monogp import experiments as exp
from monogp.scmc import PosteriorSummary


class TestExample1Function:
    def test_zero_at_origin(self):
        assert exp.testfn_example1(0.0) == 0.0

    def test_log21_at_one(self):
        assert exp.testfn_example1(1.0) == pytest.approx(3.044522437723423,
                                                         rel=1e-14)

    def test_strictly_increasing(self):
        grid = np.linspace(0.0, 1.0, 101)
        assert np.all(np.diff(exp.testfn_example1(grid)) > 0)


class TestExample2Function:
    def test_corners(self):
        assert exp.testfn_example2(0.0, 0.0) == 0.0
        assert exp.testfn_example2(1.0, 1.0) == pytest.approx(45.0, rel=1e-14)

    def test_partials_nonnegative_on_grid(self):
        g = np.linspace(0.0, 1.0, 21)
        xx, yy = np.meshgrid(g, g)
        h = 1e-6
        d1 = (exp.testfn_example2(xx + h, yy) - exp.testfn_example2(xx - h, yy)) / (2 * h)
        d2 = (exp.testfn_example2(xx, yy + h) - exp.testfn_example2(xx, yy - h)) / (2 * h)
        assert np.all(d1 >= -1e-9) and np.all(d2 >= -1e-9)


class TestRandomPolynomial:
    def test_coefficient_scaling(self):
        _, gamma = exp.random_polynomial(7)
        beta = gamma[0, 0]
        assert beta > 0
        assert gamma[10, 10] == pytest.approx(121 * beta, rel=1e-12)
        assert np.all(gamma > 0)

    def test_value_at_corner_is_66_squared_beta(self):
        fn, gamma = exp.random_polynomial(3)
        beta = gamma[0, 0]
        assert fn(1.0, 1.0) == pytest.approx(beta * 66 * 66, rel=1e-10)

    def test_monotone_nondecreasing(self):
        fn, _ = exp.random_polynomial(11)
        g = np.linspace(0.0, 1.0, 15)
        vals = fn(*np.meshgrid(g, g, indexing="ij"))
        assert np.all(np.diff(vals, axis=0) >= -1e-30)
        assert np.all(np.diff(vals, axis=1) >= -1e-30)


class TestFlatSteep:
    def test_zero_at_origin(self):
        assert exp.testfn_flat_steep(0.0, 0.0) == 0.0

    def test_monotone_along_rays(self):
        t = np.linspace(0.0, 0.45, 30)
        assert np.all(np.diff(exp.testfn_flat_steep(t, t)) > 0)
        assert np.all(np.diff(exp.testfn_flat_steep(t, 0.1)) > 0)

    def test_diverges_at_boundary(self):
        assert exp.testfn_flat_steep(0.499999, 0.5) > 1e5

    def test_domain_error(self):
        with pytest.raises(ValueError):
            exp.testfn_flat_steep(0.6, 0.4)
        with pytest.raises(ValueError):
            exp.testfn_flat_steep(0.7, 0.5)


class TestMetrics:
    def test_exact_predictions_zero_width(self):
        truth = np.array([1.0, 2.0])
        summ = PosteriorSummary(truth.copy(), truth.copy(), truth.copy(),
                                truth.copy())
        m = exp.metrics(summ, truth)
        assert m.rmse == 0.0 and m.awoci == 0.0
        assert not m.cover.any()  # open interval of zero width covers nothing

    def test_hand_computed_two_point_case(self):
        summ = PosteriorSummary(np.array([1.0, 2.0]), np.array([0.0, 1.0]),
                                np.array([1.0, 2.0]), np.array([2.0, 5.0]))
        truth = np.array([0.0, 4.0])
        m = exp.metrics(summ, truth)
        assert m.rmse == pytest.approx(math.sqrt((1.0 + 4.0) / 2.0))
        assert m.awoci == pytest.approx((2.0 + 4.0) / 2.0)
        assert m.cover.tolist() == [False, True]

    def test_rmse_invariant_to_order(self):
        rng = np.random.default_rng(0)
        mean = rng.normal(size=6)
        truth = rng.normal(size=6)
        summ = PosteriorSummary(mean, mean - 1, mean, mean + 1)
        perm = rng.permutation(6)
        summ_p = PosteriorSummary(mean[perm], mean[perm] - 1, mean[perm],
                                  mean[perm] + 1)
        a = exp.metrics(summ, truth)
        b = exp.metrics(summ_p, truth[perm])
        assert a.rmse == pytest.approx(b.rmse, rel=1e-14)

    def test_length_mismatch(self):
        summ = PosteriorSummary(np.zeros(3), np.zeros(3), np.zeros(3), np.zeros(3))
        with pytest.raises(ValueError):
            exp.metrics(summ, np.zeros(4))


class TestFixtures:
    def test_example1_design_and_grid(self):
        np.testing.assert_allclose(exp.EXAMPLE1_DESIGN,
                                   [0.0, 0.1, 0.2, 0.3, 0.4, 0.9, 1.0])
        assert exp.EXAMPLE1_DERIV_GRID.shape == (10,)

    def test_example2_train_is_latin_hypercube(self):
        X = exp.EXAMPLE2_TRAIN
        assert X.shape == (15, 2)
        for j in range(2):
            cells = np.sort(np.floor(X[:, j] * 15).astype(int))
            np.testing.assert_array_equal(cells, np.arange(15))

    def test_example2_spec_has_forty_points(self):
        _, spec, _ = exp.example2_problem()
        assert spec.total_points == 40
        assert spec.counts == (20, 20)

    def test_queue_fixture_geometry(self):
        data, spec, xstar = exp.queue_problem()
        assert data.n == 32
        assert np.all(data.X.sum(axis=1) < 1.0)
        assert xstar.shape == (4, 2)
        assert spec.counts == (4, 4)
        for L in spec.locations:
            assert np.all(L.sum(axis=1) < 1.0)


class TestDriversToyScale:
    def test_example1_prefix_problems(self):
        for k in (0, 3, 10):
            data, spec, xstar = exp.example1_problem(n_deriv=k)
            assert spec.total_points == k
            assert data.n == 7 and xstar.shape == (50, 1)

    def test_run_example1_report_contract(self):
        cfg = exp.ExperimentConfig(n_particles=60, burnin=60, thin=1, seed=5)
        report, curves, fit = exp.run_example1(cfg)
        assert set(report.methods) == {"unconstrained", "monotone"}
        assert report.extras["gap_width_monotone"] >= 0
        assert 0 <= report.extras["constraint_satisfaction"] <= 1
        assert curves["monotone"].mean.shape == (50,)

    def test_run_simstudy_toy(self):
        from dataclasses import replace

        cfg = replace(exp.ExperimentConfig(), n_particles=40, burnin=40,
                      thin=1, standardize=True, tau_final=100.0)
        report = exp.run_simstudy(2, cfg)
        assert report.meta["replicates"] == 2
        for vals in report.methods.values():
            assert len(vals["rmse"]) + report.meta["failed"] >= 2 or vals["rmse"]
            assert 0 <= vals["coverage"] <= 1
