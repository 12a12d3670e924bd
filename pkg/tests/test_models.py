"""Target potentials: truncated Gaussian, Lasso/bridge and the FGM copula."""

import numpy as np
import pytest

from src.spherical_hmc.components.models import (
    bridge_model,
    copula_cdf,
    copula_pairs,
    copula_pmf_table,
    curvature_frequency,
    fgm_copula_model,
    independent_bernoulli_nll,
    lasso_model,
    outcome_counts,
    ridge_posterior_mean,
    toeplitz_covariance,
    truncated_gaussian_bounds,
    truncated_gaussian_covariance,
    truncated_gaussian_model,
)
from src.spherical_hmc.entity import RegressionData, SpikeData
from src.spherical_hmc.exception import ModelConstructionError


def numerical_gradient(func, beta, h=1e-6):
    grad = np.zeros_like(beta)
    for i in range(beta.size):
        step = np.zeros_like(beta)
        step[i] = h
        grad[i] = (func(beta + step) - func(beta - step)) / (2.0 * h)
    return grad


def random_diamond_point(rng, dim, radius=0.95):
    direction = rng.standard_normal(dim)
    return direction / np.abs(direction).sum() * radius * rng.uniform()


def test_toeplitz_covariance_entries():
    sigma = toeplitz_covariance(4)
    assert sigma[0, 0] == 1.0
    assert sigma[0, 3] == pytest.approx(0.25)
    assert sigma[2, 1] == pytest.approx(0.5)


def test_truncated_gaussian_benchmark_setups():
    assert truncated_gaussian_bounds(2) == ([0.0, 0.0], [5.0, 1.0])
    lower, upper = truncated_gaussian_bounds(10)
    assert lower == [0.0] * 10 and upper[0] == 5.0 and upper[1:] == [0.5] * 9
    np.testing.assert_array_equal(truncated_gaussian_covariance(2), [[1.0, 0.5], [0.5, 1.0]])
    np.testing.assert_allclose(truncated_gaussian_covariance(10), toeplitz_covariance(10))


def test_truncated_gaussian_potential_and_gradient(rng):
    sigma = toeplitz_covariance(3)
    mu = np.array([0.5, -0.2, 1.0])
    model = truncated_gaussian_model(mu, sigma)
    assert model.potential(mu) == 0.0
    beta = rng.standard_normal(3)
    expected = 0.5 * (beta - mu) @ np.linalg.solve(sigma, beta - mu)
    assert model.potential(beta) == pytest.approx(expected, rel=1e-12)
    np.testing.assert_allclose(model.gradient(beta), numerical_gradient(model.potential, beta), rtol=1e-6)


def test_truncated_gaussian_rejects_bad_covariances():
    with pytest.raises(ModelConstructionError, match="positive definite"):
        truncated_gaussian_model(np.zeros(2), np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(ModelConstructionError, match="symmetric"):
        truncated_gaussian_model(np.zeros(2), np.array([[1.0, 0.2], [0.1, 1.0]]))
    with pytest.raises(ModelConstructionError, match="shape"):
        truncated_gaussian_model(np.zeros(3), np.eye(2))


def test_lasso_gradient_and_ridge_stationary_point(diabetes, rng):
    model = lasso_model(diabetes, diabetes.sigma2_ols)
    beta = rng.standard_normal(diabetes.dimension) * 5.0
    np.testing.assert_allclose(
        model.gradient(beta), numerical_gradient(model.potential, beta, h=1e-4), rtol=1e-5, atol=1e-6
    )
    np.testing.assert_allclose(model.gradient(ridge_posterior_mean(diabetes)), 0.0, atol=1e-8)


def test_bridge_shares_the_lasso_potential(diabetes, rng):
    lasso = lasso_model(diabetes, 2.0)
    bridge = bridge_model(diabetes, 2.0, 0.8)
    beta = rng.standard_normal(diabetes.dimension)
    assert bridge.potential(beta) == lasso.potential(beta)
    with pytest.raises(ModelConstructionError):
        lasso_model(diabetes, 0.0)


@pytest.mark.parametrize("q", [1.0, 0.8, 1.2])
def test_regression_potential_ignores_row_order(diabetes, rng, q):
    order = rng.permutation(diabetes.n)
    shuffled = RegressionData(
        X=diabetes.X[order],
        y=diabetes.y[order],
        beta_ols=diabetes.beta_ols,
        sigma2_ols=diabetes.sigma2_ols,
        column_names=diabetes.column_names,
    )
    original = bridge_model(diabetes, diabetes.sigma2_ols, q)
    permuted = bridge_model(shuffled, diabetes.sigma2_ols, q)
    for _ in range(5):
        beta = rng.standard_normal(diabetes.dimension) * 10.0
        assert permuted.potential(beta) == pytest.approx(original.potential(beta), rel=1e-10)
        np.testing.assert_allclose(permuted.gradient(beta), original.gradient(beta), rtol=1e-9, atol=1e-9)


def test_curvature_frequency_of_the_euclidean_ball(diabetes):
    # q = 2 maps beta = t theta, so the frequency is t sqrt(largest eigenvalue)
    sigma2 = diabetes.sigma2_ols
    hessian = (diabetes.X.T @ diabetes.X + np.eye(diabetes.dimension)) / sigma2
    expected = 7.0 * np.sqrt(np.linalg.eigvalsh(hessian).max())
    assert curvature_frequency(diabetes, sigma2, 2.0, 7.0) == pytest.approx(expected, rel=1e-10)


def test_curvature_frequency_grows_with_the_radius(diabetes):
    sigma2 = diabetes.sigma2_ols
    largest = np.abs(diabetes.beta_ols).max()
    small, large = 0.5 * largest, 4.0 * largest
    # below max |beta_OLS| the lasso stretch is 2 t; above it 2 sqrt(t max |beta_OLS|)
    ratio = curvature_frequency(diabetes, sigma2, 1.0, large) / curvature_frequency(diabetes, sigma2, 1.0, small)
    assert ratio == pytest.approx(np.sqrt(large * largest) / small, rel=1e-10)
    with pytest.raises(ModelConstructionError):
        curvature_frequency(diabetes, sigma2, 1.0, 0.0)


def test_copula_pairs_order():
    assert copula_pairs(3) == [(0, 1), (0, 2), (1, 2)]
    assert len(copula_pairs(5)) == 10


def test_copula_pmf_two_neurons_matches_hand_inclusion_exclusion():
    p = np.array([0.3, 0.6])
    beta = np.array([0.7])
    pmf = copula_pmf_table(beta, p)
    q1, q2 = 1.0 - p
    h00 = (1.0 + beta[0] * p[0] * p[1]) * q1 * q2
    # code bit i is neuron i
    assert pmf[0] == pytest.approx(h00)
    assert pmf[1] == pytest.approx(q2 - h00)
    assert pmf[2] == pytest.approx(q1 - h00)
    assert pmf[3] == pytest.approx(1.0 - q1 - q2 + h00)
    assert pmf[3] == pytest.approx(
        copula_cdf([1, 1], beta, p) - copula_cdf([0, 1], beta, p) - copula_cdf([1, 0], beta, p)
        + copula_cdf([0, 0], beta, p)
    )


def test_copula_pmf_is_a_distribution_inside_the_diamond(rng):
    p = np.array([0.2, 0.35, 0.5, 0.1, 0.45])
    for _ in range(1000):
        pmf = copula_pmf_table(random_diamond_point(rng, 10), p)
        assert pmf.sum() == pytest.approx(1.0, abs=1e-10)
        assert pmf.min() >= -1e-12


def test_copula_pmf_marginals_are_the_firing_probabilities(rng):
    p = np.array([0.2, 0.35, 0.5])
    pmf = copula_pmf_table(random_diamond_point(rng, 3), p)
    codes = np.arange(8)
    for i in range(3):
        assert pmf[(codes >> i) & 1 == 1].sum() == pytest.approx(p[i], abs=1e-12)


def test_copula_cdf_below_zero_vanishes():
    assert copula_cdf([-1, 1], [0.2], [0.3, 0.4]) == 0.0
    assert copula_cdf([1, 1], [0.2], [0.3, 0.4]) == pytest.approx(1.0)


def test_outcome_counts():
    spikes = np.array([[1, 0, 1, 0], [1, 1, 0, 0]])
    np.testing.assert_array_equal(outcome_counts(spikes), [1, 1, 1, 1])
    np.testing.assert_array_equal(outcome_counts(np.array([[1, 1], [0, 0]])), [0, 2, 0, 0])


@pytest.fixture
def spike_data(rng):
    spikes = (rng.uniform(size=(4, 600)) < np.array([[0.2], [0.4], [0.3], [0.5]])).astype(np.int8)
    return SpikeData.from_spikes(spikes)


def test_fgm_copula_at_independence_is_the_bernoulli_likelihood(spike_data):
    model = fgm_copula_model(spike_data)
    assert model.dimension == 6
    assert model.potential(np.zeros(6)) == pytest.approx(independent_bernoulli_nll(spike_data), rel=1e-10)


def test_fgm_copula_gradient(spike_data, rng):
    model = fgm_copula_model(spike_data)
    beta = random_diamond_point(rng, 6, radius=0.8)
    np.testing.assert_allclose(model.gradient(beta), numerical_gradient(model.potential, beta), rtol=1e-5, atol=1e-6)


def test_fgm_copula_outside_valid_region_is_infinite(spike_data):
    model = fgm_copula_model(spike_data)
    assert model.potential(np.full(6, 40.0)) == np.inf or model.potential(np.full(6, -40.0)) == np.inf


def test_fgm_copula_neuron_limit(rng):
    spikes = (rng.uniform(size=(16, 200)) < 0.5).astype(np.int8)
    with pytest.raises(ModelConstructionError, match="inclusion-exclusion"):
        fgm_copula_model(SpikeData.from_spikes(spikes))
