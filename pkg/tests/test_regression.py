import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relloss.families import Gaussian, InputError
from relloss.online import Mode, run
from relloss.regression import (log_bounds, offline_optimum, parse_prior, reg_init, reg_predict,
                                reg_regret_report, reg_run, reg_update, regret_expression)


def ridge(prior, xs, ys):
    return np.linalg.solve(prior + xs.T @ xs, xs.T @ ys)


class TestInit:
    def test_scalar(self):
        s = reg_init(1, 1.0, Mode.INCREMENTAL_OFFLINE)
        np.testing.assert_array_equal(s.theta, [0.0])
        np.testing.assert_array_equal(s.inv_rate, [[1.0]])

    def test_scaled_identity(self):
        s = reg_init(2, "0.5*I", Mode.FORWARD)
        np.testing.assert_array_equal(s.inv_rate, np.diag([0.5, 0.5]))

    def test_rejects_bad_priors(self):
        with pytest.raises(InputError):
            reg_init(2, [[1.0, 0.2], [0.0, 1.0]], Mode.FORWARD)
        with pytest.raises(InputError):
            reg_init(2, [[1.0, 2.0], [2.0, 1.0]], Mode.FORWARD)
        with pytest.raises(InputError):
            reg_init(2, np.eye(3), Mode.FORWARD)

    def test_parse_prior(self):
        np.testing.assert_array_equal(parse_prior("2", 2), 2 * np.eye(2))
        np.testing.assert_array_equal(parse_prior(3.0, 1), [[3.0]])


class TestPredictUpdate:
    def test_fresh_prediction_is_zero(self):
        for mode in Mode:
            yhat, _ = reg_predict(reg_init(3, 1.0, mode), [1.0, -2.0, 0.5])
            assert yhat == 0.0

    def test_forward_augments_before_predicting(self):
        yhat, s = reg_predict(reg_init(1, 1.0, Mode.FORWARD), [1.0])
        assert yhat == 0.0
        np.testing.assert_array_equal(s.inv_rate, [[2.0]])

    def test_incremental_after_one_example(self):
        s = reg_update(reg_init(1, 1.0, Mode.INCREMENTAL_OFFLINE), [1.0], 1.0)
        np.testing.assert_allclose(s.theta, [0.5])
        yhat, _ = reg_predict(s, [1.0])
        assert yhat == pytest.approx(0.5)

    def test_zero_instance_leaves_theta(self):
        s = reg_update(reg_init(2, 1.0, Mode.INCREMENTAL_OFFLINE), [1.0, 2.0], 3.0)
        after = reg_update(s, [0.0, 0.0], 123.0)
        np.testing.assert_allclose(after.theta, s.theta)

    def test_two_dimensional(self):
        s = reg_update(reg_init(2, 1.0, Mode.INCREMENTAL_OFFLINE), [1.0, 0.0], 2.0)
        np.testing.assert_allclose(s.theta, [1.0, 0.0])

    def test_dimension_mismatch(self):
        s = reg_init(2, 1.0, Mode.FORWARD)
        with pytest.raises(InputError):
            reg_predict(s, [1.0])
        with pytest.raises(InputError):
            reg_update(s, [1.0, 2.0, 3.0], 1.0)

    def test_forward_predict_is_idempotent(self):
        s = reg_init(2, 1.0, Mode.FORWARD)
        y1, s = reg_predict(s, [1.0, 1.0])
        y2, s2 = reg_predict(s, [1.0, 1.0])
        assert y1 == y2
        np.testing.assert_array_equal(s.inv_rate, s2.inv_rate)


class TestRegret:
    def test_single_forward(self):
        report = reg_regret_report([[1.0]], [1.0], 1.0, Mode.FORWARD)
        assert report.online_total == pytest.approx(0.5)
        assert report.offline_optimum == pytest.approx(0.25)
        assert report.regret == pytest.approx(0.25)
        assert report.bounds["regression_expression"].value == pytest.approx(0.25)

    @pytest.mark.parametrize("mode", list(Mode))
    def test_zero_labels(self, mode):
        xs = np.random.default_rng(40).uniform(-1, 1, (20, 3))
        report = reg_regret_report(xs, np.zeros(20), 1.0, mode)
        assert report.regret == 0.0
        assert report.bounds["regression_expression"].value == 0.0

    def test_two_dim_log_bounds(self):
        rng = np.random.default_rng(41)
        xs, ys = rng.uniform(-1, 1, (50, 2)), rng.uniform(-1, 1, 50)
        report = reg_regret_report(xs, ys, 1.0, Mode.FORWARD)
        a_form, d_form = log_bounds(reg_run(xs, ys, 1.0, Mode.FORWARD))
        assert report.bounds["log_ridge"].value == a_form
        assert d_form == pytest.approx(2 * a_form)
        assert report.regret <= d_form

    def test_offline_optimum_matches_ridge(self):
        rng = np.random.default_rng(42)
        xs, ys = rng.normal(size=(30, 4)), rng.normal(size=30)
        prior = 0.7 * np.eye(4)
        theta = ridge(prior, xs, ys)
        direct = 0.5 * theta @ prior @ theta + 0.5 * np.sum((xs @ theta - ys) ** 2)
        assert offline_optimum(prior, xs, ys) == pytest.approx(direct, rel=1e-12)

    def test_non_scalar_prior_has_no_log_bound(self):
        prior = np.diag([1.0, 2.0])
        report = reg_regret_report(np.ones((3, 2)), np.ones(3), prior, Mode.FORWARD)
        assert not report.bounds["log_ridge"].applicable
        assert report.failures() == []


class TestInvariants:
    def test_rank_one_matches_dense(self):
        rng = np.random.default_rng(43)
        for d in range(1, 9):
            xs, ys = rng.uniform(-1, 1, (200, d)), rng.uniform(-1, 1, 200)
            for mode in Mode:
                s = reg_init(d, 1.0, mode, check_dense=True)
                for x, y in zip(xs, ys):
                    _, s = reg_predict(s, x)
                    s = reg_update(s, x, y)
                    dense = np.linalg.solve(s.inv_rate, s.xy_sum)
                    assert np.max(np.abs(s.theta - dense)) < 1e-8

    def test_incremental_is_ridge(self):
        rng = np.random.default_rng(44)
        d = 5
        xs, ys = rng.normal(size=(60, d)), rng.normal(size=60)
        prior = parse_prior("2*I", d)
        s = reg_init(d, prior, Mode.INCREMENTAL_OFFLINE)
        for t, (x, y) in enumerate(zip(xs, ys), start=1):
            s = reg_update(s, x, y)
            np.testing.assert_allclose(s.theta, ridge(prior, xs[:t], ys[:t]), rtol=1e-9, atol=1e-12)

    @pytest.mark.parametrize("mode", list(Mode))
    def test_unit_instances_reproduce_gaussian(self, mode):
        ys = np.random.default_rng(45).normal(size=40)
        a = 1.5
        reg = reg_run(np.ones((40, 1)), ys, a, mode)
        dens = run(Gaussian(1), 0.0, a, mode, ys)
        np.testing.assert_allclose(reg.predictions, dens.predictions[:, 0], atol=1e-10)
        np.testing.assert_allclose(reg.losses, dens.losses, atol=1e-10)

    def test_forward_exactness_sweep(self):
        rng = np.random.default_rng(46)
        for _ in range(40):
            d, T = int(rng.integers(1, 9)), int(rng.integers(1, 201))
            xs, ys = rng.uniform(-2, 2, (T, d)), rng.uniform(-3, 3, T)
            report = reg_regret_report(xs, ys, rng.uniform(0.1, 5.0), Mode.FORWARD)
            assert report.identity_residuals["forward_exact"] <= 1e-8 * report.scale
            assert report.bounds["log_dimension"].holds

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 4), st.integers(1, 30), st.floats(0.05, 5.0), st.integers(0, 2**32 - 1))
    def test_forward_expression_random(self, d, T, a, seed):
        rng = np.random.default_rng(seed)
        xs, ys = rng.uniform(-1, 1, (T, d)), rng.uniform(-1, 1, T)
        trace = reg_run(xs, ys, a, Mode.FORWARD)
        report = reg_regret_report(trace, None, None, None)
        assert abs(report.regret - regret_expression(trace)) <= 1e-8 * report.scale
