# Diagnostics Component
# Effective sample size, importance-weighted moments, resampling and efficiency reports

import sys
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from src.spherical_hmc import logging
from src.spherical_hmc.exception import CustomException, DiagnosticsError
from src.spherical_hmc.constants import DIAGNOSTICS_CONSTANTS
from src.spherical_hmc.entity import Chain, DiagnosticsEntity, EssReport
from src.spherical_hmc.components.draws import read_draws


def _autocorrelation(centered: NDArray[np.float64], lag: int, variance: float) -> float:
    n = centered.shape[0]
    return float(centered[: n - lag] @ centered[lag:]) / (n * variance)


def effective_sample_size(series: NDArray[np.float64]) -> tuple[float, bool]:
    """
    Geyer's initial monotone sequence estimator.

    Autocorrelations are summed in adjacent pairs gamma(2m) + gamma(2m+1) while the
    pairs stay positive, each pair capped by its predecessor, up to lag B/2.

    Returns:
        (ess, degenerate): ess clamped to [1, B]; degenerate is True for a
        constant series, which gets ess = 1.
    """
    x = np.asarray(series, dtype=float)
    n = x.shape[0]
    if n < DIAGNOSTICS_CONSTANTS.MIN_SERIES_LENGTH:
        raise DiagnosticsError(
            f"ESS needs at least {DIAGNOSTICS_CONSTANTS.MIN_SERIES_LENGTH} draws, got {n}", sys
        )
    if not np.all(np.isfinite(x)):
        raise DiagnosticsError("ESS is undefined for a series with non-finite values", sys)
    centered = x - x.mean()
    variance = float(centered @ centered) / n
    if np.ptp(x) == 0.0 or variance == 0.0:
        return 1.0, True

    max_lag = int(n * DIAGNOSTICS_CONSTANTS.MAX_LAG_FRACTION)
    total = 0.0
    previous = np.inf
    m = 0
    while 2 * m + 1 <= max_lag:
        pair = _autocorrelation(centered, 2 * m, variance) + _autocorrelation(centered, 2 * m + 1, variance)
        if pair <= 0.0:
            break
        pair = min(pair, previous)
        previous = pair
        total += pair
        m += 1

    tau = 2.0 * total - 1.0
    ess_value = n / tau if tau > 0.0 else float(n)
    return float(np.clip(ess_value, 1.0, n)), False


def ess(series: NDArray[np.float64]) -> float:
    """B / (1 + 2 sum_k gamma(k)) for one scalar series"""
    return effective_sample_size(series)[0]


def _check_weights(draws: NDArray[np.float64], weights: NDArray[np.float64]) -> tuple[NDArray, NDArray]:
    draws = np.asarray(draws, dtype=float)
    if draws.ndim == 1:
        draws = draws[:, None]
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (draws.shape[0],):
        raise DiagnosticsError(f"{weights.shape[0]} weights for {draws.shape[0]} draws", sys)
    if not np.all(np.isfinite(weights)) or np.any(weights < 0.0):
        raise DiagnosticsError("weights must be finite and nonnegative", sys)
    if not weights.sum() > 0.0:
        raise DiagnosticsError("all weights are zero; the chain never left the equator", sys)
    return draws, weights


def weighted_moments(
    draws: NDArray[np.float64], weights: NDArray[np.float64]
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Self-normalized importance estimates of the mean and covariance"""
    draws, weights = _check_weights(draws, weights)
    mean = np.average(draws, axis=0, weights=weights)
    centered = draws - mean
    covariance = (weights[:, None] * centered).T @ centered / weights.sum()
    return mean, covariance


def resample(
    draws: NDArray[np.float64], weights: NDArray[np.float64], rng: np.random.Generator
) -> NDArray[np.float64]:
    """Multinomial resampling proportional to the weights; output has as many rows as the input, in draw order"""
    draws, weights = _check_weights(draws, weights)
    n = draws.shape[0]
    return draws[rng.choice(n, size=n, p=weights / weights.sum())]


def estimate(
    draws: NDArray[np.float64],
    weights: NDArray[np.float64],
    mode: str = DIAGNOSTICS_CONSTANTS.WEIGHTED,
    rng: np.random.Generator | None = None,
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Mean and covariance either by importance weighting or by resampling then plain moments"""
    if mode == DIAGNOSTICS_CONSTANTS.WEIGHTED:
        return weighted_moments(draws, weights)
    if mode == DIAGNOSTICS_CONSTANTS.RESAMPLE:
        if rng is None:
            raise DiagnosticsError("resampling needs a random generator", sys)
        resampled = resample(draws, weights, rng)
        return weighted_moments(resampled, np.ones(resampled.shape[0]))
    raise DiagnosticsError(f"unknown estimator '{mode}'", sys)


def monte_carlo_standard_error(draws: NDArray[np.float64], weights: NDArray[np.float64]) -> NDArray[np.float64]:
    """
    Delta-method standard error of the self-normalized weighted mean, per coordinate.

    With z_i = (w_i / mean(w)) (beta_i - mu), the error is sqrt(var(z) / ESS(z)), so
    uneven weights and autocorrelation both widen it. Equal weights reduce it to
    sqrt(variance / ESS) of the draws.
    """
    draws, weights = _check_weights(draws, weights)
    mean = np.average(draws, axis=0, weights=weights)
    z = (weights / weights.mean())[:, None] * (draws - mean)
    variance = z.var(axis=0)
    if z.shape[0] < DIAGNOSTICS_CONSTANTS.MIN_SERIES_LENGTH:
        return np.sqrt(variance)
    ess_values = np.array([ess(z[:, j]) for j in range(z.shape[1])])
    return np.sqrt(variance / ess_values)


def tail_probabilities(draws: NDArray[np.float64], weights: NDArray[np.float64]) -> NDArray[np.float64]:
    """Weighted posterior P(beta_j <= 0) per coordinate"""
    draws, weights = _check_weights(draws, weights)
    return np.average(draws <= 0.0, axis=0, weights=weights)


def efficiency_report(chain: Chain) -> EssReport:
    """
    ESS per coordinate of the retained (unweighted) draws, with the min/median/max
    triple, acceptance rate and min(ESS) per second of sampling time.
    """
    if chain.num_draws == 0:
        raise DiagnosticsError("cannot report on an empty chain", sys)

    if chain.num_draws < DIAGNOSTICS_CONSTANTS.MIN_SERIES_LENGTH:
        values = [1.0] * chain.dimension
        degenerate = [True] * chain.dimension
    else:
        results = [effective_sample_size(chain.draws[:, j]) for j in range(chain.dimension)]
        values = [value for value, _ in results]
        degenerate = [flag for _, flag in results]

    seconds = chain.elapsed_seconds if chain.elapsed_seconds > 0.0 else None
    ess_min = float(np.min(values))
    return EssReport(
        sampler=chain.sampler,
        seed=chain.seed,
        ess=values,
        ess_min=ess_min,
        ess_med=float(np.median(values)),
        ess_max=float(np.max(values)),
        seconds=seconds,
        min_ess_per_sec=None if seconds is None else ess_min / seconds,
        accept_rate=chain.acceptance_rate,
        degenerate=degenerate,
    )


class DiagnosticsComponents:
    """
    Component for summarising an existing draws CSV.

    Usage:
        component = DiagnosticsComponents(draws_path)
        result = component.run()
    """

    def __init__(self, draws_path: str | Path):
        self.draws_path = Path(draws_path)

    def run(self) -> DiagnosticsEntity:
        """
        ESS report and weighted moments of the draws file; timing is unknown, so min(ESS)/s is empty.
        """
        try:
            chain = read_draws(self.draws_path)
            logging.info(f"Diagnostics of {chain.num_draws} draws from {self.draws_path}")
            report = efficiency_report(chain)
            mean, covariance = weighted_moments(chain.draws, chain.weights)
            mcse = monte_carlo_standard_error(chain.draws, chain.weights)
            return DiagnosticsEntity(
                draws_path=self.draws_path,
                report=report,
                mean=mean.tolist(),
                covariance=covariance.tolist(),
                mcse=mcse.tolist(),
            )

        except CustomException:
            raise
        except Exception as e:
            logging.exception(e)
            raise CustomException(e, sys)


__all__ = [
    "DiagnosticsComponents",
    "effective_sample_size",
    "ess",
    "weighted_moments",
    "resample",
    "estimate",
    "monte_carlo_standard_error",
    "tail_probabilities",
    "efficiency_report",
]
