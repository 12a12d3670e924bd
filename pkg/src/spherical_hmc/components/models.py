# Models Component
# Target potentials U(beta) = -log density and their gradients

import itertools
import math
import sys
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from src.spherical_hmc.exception import ModelConstructionError
from src.spherical_hmc.constants import DATA_CONSTANTS
from src.spherical_hmc.entity import RegressionData, SpikeData


@dataclass(frozen=True)
class TargetModel:
    """
    Potential and gradient on the original constrained coordinates.

    Usage:
        model = truncated_gaussian_model(mu, sigma)
        u = model.potential(beta)
        g = model.gradient(beta)
    """

    dimension: int
    potential: Callable[[NDArray[np.float64]], float]
    gradient: Callable[[NDArray[np.float64]], NDArray[np.float64]]
    description: str = field(default="")


def toeplitz_covariance(dim: int) -> NDArray[np.float64]:
    """Sigma_ij = 1 / (1 + |i - j|)"""
    return scipy.linalg.toeplitz(1.0 / (1.0 + np.arange(dim)))


def truncated_gaussian_bounds(dim: int) -> tuple[list[float], list[float]]:
    """Box of the truncated Gaussian benchmark: [0,5]x[0,1] for D = 2, else u_1 = 5, u_i = 0.5."""
    if dim == 2:
        return [0.0, 0.0], [5.0, 1.0]
    return [0.0] * dim, [5.0] + [0.5] * (dim - 1)


def truncated_gaussian_covariance(dim: int) -> NDArray[np.float64]:
    if dim == 2:
        return np.array([[1.0, 0.5], [0.5, 1.0]])
    return toeplitz_covariance(dim)


def truncated_gaussian_model(mu: NDArray[np.float64], sigma: NDArray[np.float64]) -> TargetModel:
    """
    U(beta) = 0.5 (beta - mu)^T Sigma^{-1} (beta - mu).

    The truncation itself lives in the ConstraintDomain.
    """
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape != (mu.size, mu.size):
        raise ModelConstructionError(f"Sigma has shape {sigma.shape}, expected {(mu.size, mu.size)}", sys)
    if not np.allclose(sigma, sigma.T):
        raise ModelConstructionError("Sigma must be symmetric", sys)
    try:
        factor = scipy.linalg.cho_factor(sigma, lower=True)
    except np.linalg.LinAlgError as e:
        raise ModelConstructionError(f"Sigma is not positive definite: {e}", sys)
    precision = scipy.linalg.cho_solve(factor, np.eye(mu.size))
    precision = 0.5 * (precision + precision.T)

    def potential(beta):
        d = beta - mu
        return 0.5 * float(d @ precision @ d)

    def gradient(beta):
        return precision @ (beta - mu)

    return TargetModel(
        dimension=mu.size,
        potential=potential,
        gradient=gradient,
        description=f"truncated Gaussian, D={mu.size}",
    )


def lasso_model(data: RegressionData, sigma2: float) -> TargetModel:
    """
    Gaussian likelihood with a N(0, sigma2 I) prior:
    U(beta) = RSS(beta) / (2 sigma2) + ||beta||^2 / (2 sigma2).

    The ||beta||_1 <= t constraint lives in the ConstraintDomain.
    """
    if not sigma2 > 0:
        raise ModelConstructionError(f"sigma2 must be positive, got {sigma2}", sys)
    xtx = data.X.T @ data.X
    xty = data.X.T @ data.y
    yty = float(data.y @ data.y)
    hessian = xtx + np.eye(data.dimension)
    scale = 1.0 / sigma2

    def potential(beta):
        rss = float(beta @ xtx @ beta) - 2.0 * float(beta @ xty) + yty
        return 0.5 * scale * (rss + float(beta @ beta))

    def gradient(beta):
        return scale * (hessian @ beta - xty)

    return TargetModel(
        dimension=data.dimension,
        potential=potential,
        gradient=gradient,
        description=f"Bayesian lasso, n={data.n}, D={data.dimension}, sigma2={sigma2:.4g}",
    )


def bridge_model(data: RegressionData, sigma2: float, q: float) -> TargetModel:
    """Same potential as the lasso; q only changes the QNormBall the chain lives in."""
    if not q > 0:
        raise ModelConstructionError(f"q must be positive, got {q}", sys)
    model = lasso_model(data, sigma2)
    return TargetModel(
        dimension=model.dimension,
        potential=model.potential,
        gradient=model.gradient,
        description=f"Bayesian bridge (q={q:g}), n={data.n}, D={data.dimension}, sigma2={sigma2:.4g}",
    )


def curvature_frequency(data: RegressionData, sigma2: float, q: float, t: float) -> float:
    """
    Estimated stiffest oscillation frequency of the regression potential in the ball
    coordinates of QNormBall(q, t).

    The map beta_i = t sgn(theta_i) |theta_i|^(2/q) stretches coordinate i by
    (2/q) t^(q/2) |beta_i|^(1 - q/2); |beta_i| is taken as min(t, max |beta_OLS|).
    The frequency is that stretch times sqrt(largest eigenvalue of (X^T X + I) / sigma2).
    """
    if not sigma2 > 0 or not q > 0 or not t > 0:
        raise ModelConstructionError(f"sigma2, q and t must be positive, got {sigma2}, {q}, {t}", sys)
    hessian = (data.X.T @ data.X + np.eye(data.dimension)) / sigma2
    stiffest = float(scipy.linalg.eigvalsh(hessian)[-1])
    magnitude = t if q > 2.0 else min(t, float(np.abs(data.beta_ols).max()))
    if magnitude == 0.0:
        magnitude = t
    stretch = (2.0 / q) * t ** (q / 2.0) * magnitude ** (1.0 - q / 2.0)
    return math.sqrt(stiffest) * stretch


def ridge_posterior_mean(data: RegressionData) -> NDArray[np.float64]:
    """(X^T X + I)^{-1} X^T y, the posterior mean without the norm constraint"""
    return np.linalg.solve(data.X.T @ data.X + np.eye(data.dimension), data.X.T @ data.y)


# ---------------------------------------------------------------------------
# FGM copula with second-order interactions
# ---------------------------------------------------------------------------

def copula_pairs(n_neurons: int) -> list[tuple[int, int]]:
    """Parameter order of beta_{j1 j2}, 0 <= j1 < j2 < n"""
    return list(itertools.combinations(range(n_neurons), 2))


def _outcomes(n_neurons: int) -> NDArray[np.int8]:
    """All 2^n binary outcomes; row k holds the bits of k (neuron i is bit i)."""
    codes = np.arange(2 ** n_neurons)
    return ((codes[:, None] >> np.arange(n_neurons)) & 1).astype(np.int8)


def copula_cdf(y: NDArray, beta: NDArray[np.float64], firing_probs: NDArray[np.float64]) -> float:
    """
    H(y) = [1 + sum_{j1<j2} beta_{j1j2} (1 - F_j1)(1 - F_j2)] prod_i F_i

    with F_i = P(Y_i <= y_i): 0 below 0, 1 - p_i at 0, 1 from 1 on.
    """
    y = np.asarray(y)
    if np.any(y < 0):
        return 0.0
    cdf = np.where(y >= 1, 1.0, 1.0 - np.asarray(firing_probs, dtype=float))
    tail = 1.0 - cdf
    interaction = sum(
        b * tail[j1] * tail[j2] for b, (j1, j2) in zip(beta, copula_pairs(y.size))
    )
    return float((1.0 + interaction) * np.prod(cdf))


def _copula_affine_table(firing_probs: NDArray[np.float64]) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """
    pmf(y) = base[y] + coef[y] @ beta for every outcome y.

    Inclusion-exclusion of H over the corners y - e, e in {0,1}^n: corners with a
    coordinate below 0 vanish, so pmf(y) = sum over subsets S of ones(y) of
    (-1)^|S| H(y with S cleared). That subset sum is applied as an in-place
    transform, one neuron at a time. H is affine in beta, so the constant part and
    the per-pair coefficients are transformed side by side.
    """
    n = firing_probs.size
    j1, j2 = np.array(copula_pairs(n)).T
    outcomes = _outcomes(n)
    codes = np.arange(outcomes.shape[0])

    cdf = np.where(outcomes == 1, 1.0, 1.0 - firing_probs)
    tail = 1.0 - cdf
    base = np.prod(cdf, axis=1)
    coef = tail[:, j1] * tail[:, j2] * base[:, None]

    for i in range(n):
        has_bit = (codes >> i) & 1 == 1
        without = codes[has_bit] ^ (1 << i)
        base[has_bit] -= base[without]
        coef[has_bit] -= coef[without]
    return base, coef


def copula_pmf_table(beta: NDArray[np.float64], firing_probs: NDArray[np.float64]) -> NDArray[np.float64]:
    """Joint pmf over all 2^n outcomes, indexed by the outcome's bit code"""
    base, coef = _copula_affine_table(np.asarray(firing_probs, dtype=float))
    return base + coef @ np.asarray(beta, dtype=float)


def _check_neurons(n_neurons: int) -> None:
    if n_neurons > DATA_CONSTANTS.MAX_NEURONS:
        raise ModelConstructionError(
            f"{n_neurons} neurons exceed the inclusion-exclusion limit of {DATA_CONSTANTS.MAX_NEURONS}", sys
        )
    if n_neurons < 2:
        raise ModelConstructionError("the copula model needs at least two neurons", sys)


def outcome_counts(spikes: NDArray) -> NDArray[np.int64]:
    """How often each of the 2^n firing patterns occurs across time bins"""
    n = spikes.shape[0]
    codes = (spikes.astype(np.int64) << np.arange(n)[:, None]).sum(axis=0)
    return np.bincount(codes, minlength=2 ** n)


def fgm_copula_model(data: SpikeData) -> TargetModel:
    """
    Negative log-likelihood of the binary firing patterns under the FGM copula
    with plug-in marginals; parameters are the n(n-1)/2 pair interactions.
    """
    _check_neurons(data.n_neurons)
    base, coef = _copula_affine_table(data.firing_probs)
    counts = outcome_counts(data.spikes)
    seen = counts > 0
    base, coef, counts = base[seen], coef[seen], counts[seen].astype(float)

    def potential(beta):
        pmf = base + coef @ beta
        if np.any(pmf <= 0.0):
            return np.inf
        return -float(counts @ np.log(pmf))

    def gradient(beta):
        pmf = base + coef @ beta
        # pmf is affine in beta
        return -(counts / pmf) @ coef

    return TargetModel(
        dimension=data.num_pairs,
        potential=potential,
        gradient=gradient,
        description=f"FGM copula, {data.n_neurons} neurons, {data.n_bins} bins",
    )


def independent_bernoulli_nll(data: SpikeData) -> float:
    """Negative log-likelihood when every neuron fires independently"""
    p = data.firing_probs[:, None]
    return -float(np.sum(data.spikes * np.log(p) + (1 - data.spikes) * np.log1p(-p)))


__all__ = [
    "TargetModel",
    "toeplitz_covariance",
    "truncated_gaussian_bounds",
    "truncated_gaussian_covariance",
    "truncated_gaussian_model",
    "lasso_model",
    "bridge_model",
    "curvature_frequency",
    "ridge_posterior_mean",
    "copula_pairs",
    "copula_cdf",
    "copula_pmf_table",
    "outcome_counts",
    "fgm_copula_model",
    "independent_bernoulli_nll",
]
