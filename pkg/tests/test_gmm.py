"""Tests for the Gaussian mixture reference implementation."""

import math

import numpy as np
import pytest

from emcl.errors import NumericalError, ShapeError
from emcl.gmm import GmmParams, gmm_e_step, gmm_fit, gmm_m_step, log_likelihood


def two_component_1d(w0=0.5):
    return GmmParams(
        means=np.array([[-1.0], [1.0]]),
        variances=np.array([[1.0], [1.0]]),
        weights=np.array([w0, 1.0 - w0]),
    )


class TestParams:
    def test_weights_must_sum_to_one(self):
        with pytest.raises(ValueError):
            GmmParams(means=np.zeros((2, 1)), variances=np.ones((2, 1)), weights=np.array([0.6, 0.6]))

    def test_nonpositive_variance_rejected(self):
        with pytest.raises(NumericalError):
            GmmParams(means=np.zeros((1, 1)), variances=np.zeros((1, 1)), weights=np.array([1.0]))


class TestEStep:
    def test_single_component_gets_everything(self):
        params = GmmParams(means=np.array([[0.0, 0.0]]), variances=np.ones((1, 2)), weights=np.array([1.0]))
        resp = gmm_e_step(np.random.default_rng(0).standard_normal((10, 2)), params)
        np.testing.assert_array_equal(resp, np.ones((10, 1)))

    def test_equidistant_sample_splits_evenly(self):
        resp = gmm_e_step(np.array([[0.0]]), two_component_1d())
        np.testing.assert_allclose(resp, [[0.5, 0.5]], atol=1e-15)

    def test_hand_computed_posterior(self):
        # densities at x=-1 differ by a factor exp(-2), so the near component
        # gets 1 / (1 + exp(-2))
        resp = gmm_e_step(np.array([[-1.0]]), two_component_1d())
        expected = 1.0 / (1.0 + math.exp(-2.0))
        np.testing.assert_allclose(resp, [[expected, 1.0 - expected]], rtol=1e-12)

    def test_rows_stochastic_high_dimensional(self):
        rng = np.random.default_rng(1)
        k, d = 5, 200
        params = GmmParams(
            means=rng.standard_normal((k, d)),
            variances=rng.uniform(0.5, 2.0, (k, d)),
            weights=np.full(k, 1.0 / k),
        )
        resp = gmm_e_step(rng.standard_normal((50, d)) * 3, params)
        assert np.all(resp >= 0)
        np.testing.assert_allclose(resp.sum(axis=1), 1.0, atol=1e-9)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ShapeError):
            gmm_e_step(np.zeros((3, 2)), two_component_1d())


class TestMStep:
    def test_single_component_recovers_sample_statistics(self):
        rng = np.random.default_rng(2)
        data = rng.standard_normal((40, 3)) * 2 + 1
        params = gmm_m_step(data, np.ones((40, 1)))
        np.testing.assert_allclose(params.means[0], data.mean(axis=0), rtol=1e-12)
        np.testing.assert_allclose(params.variances[0], data.var(axis=0), rtol=1e-12)
        np.testing.assert_allclose(params.weights, [1.0])

    def test_hard_assignments_give_cluster_means(self):
        data = np.array([[0.0], [1.0], [10.0], [12.0]])
        resp = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 1.0]])
        params = gmm_m_step(data, resp)
        np.testing.assert_allclose(params.means, [[0.5], [11.0]])
        np.testing.assert_allclose(params.weights, [0.5, 0.5])

    def test_soft_assignments_match_brute_force(self):
        data = np.array([[0.0], [1.0], [2.0], [3.0]])
        resp = np.array([[0.9, 0.1], [0.6, 0.4], [0.3, 0.7], [0.1, 0.9]])
        params = gmm_m_step(data, resp)
        for k in range(2):
            mean_k = sum(resp[n, k] * data[n, 0] for n in range(4)) / sum(resp[n, k] for n in range(4))
            var_k = sum(resp[n, k] * (data[n, 0] - mean_k) ** 2 for n in range(4)) / sum(
                resp[n, k] for n in range(4)
            )
            np.testing.assert_allclose(params.means[k, 0], mean_k, rtol=1e-12)
            np.testing.assert_allclose(params.variances[k, 0], var_k, rtol=1e-12)
        np.testing.assert_allclose(params.weights, resp.mean(axis=0), rtol=1e-12)

    def test_dead_component_reinitialized_with_warning(self):
        data = np.array([[0.0], [1.0]])
        resp = np.array([[1.0, 0.0], [1.0, 0.0]])
        with pytest.warns(UserWarning, match="zero responsibility"):
            params = gmm_m_step(data, resp, np.random.default_rng(0))
        assert params.means[1, 0] in (0.0, 1.0)
        np.testing.assert_allclose(params.weights.sum(), 1.0, atol=1e-12)

    def test_variance_floor_applied(self):
        data = np.array([[1.0], [1.0]])
        params = gmm_m_step(data, np.ones((2, 1)))
        assert params.variances[0, 0] == 1e-6

    def test_weights_stay_normalized_for_random_assignments(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            n, k = int(rng.integers(2, 40)), int(rng.integers(1, 6))
            data = rng.standard_normal((n, 2))
            raw = rng.uniform(0, 1, (n, k))
            resp = raw / raw.sum(axis=1, keepdims=True)
            params = gmm_m_step(data, resp)
            assert abs(params.weights.sum() - 1.0) <= 1e-9
            assert np.all(params.weights >= 0)


class TestFit:
    def test_single_iteration_equals_one_em_application(self):
        rng = np.random.default_rng(3)
        data = rng.standard_normal((30, 2))
        params, trace = gmm_fit(data, k=3, iters=1, seed=3)
        assert trace.shape == (1,)
        np.testing.assert_allclose(trace[0], log_likelihood(data, params), rtol=1e-12)

    def test_likelihood_never_decreases(self):
        rng = np.random.default_rng(4)
        for seed in range(5):
            data = np.concatenate(
                [rng.normal(-2, 1, (60, 2)), rng.normal(3, 0.5, (40, 2))], axis=0
            )
            _, trace = gmm_fit(data, k=3, iters=30, seed=seed)
            assert np.all(np.diff(trace) >= -1e-9)

    def test_recovers_separated_mixture_means(self):
        rng = np.random.default_rng(42)
        a = rng.normal(-5.0, 0.5, 100)
        b = rng.normal(5.0, 0.5, 100)
        data = np.concatenate([a, b])[:, None]
        params, _ = gmm_fit(data, k=2, iters=50, seed=0)
        fitted = np.sort(params.means[:, 0])
        expected = np.sort([a.mean(), b.mean()])
        np.testing.assert_allclose(fitted, expected, atol=0.05)
