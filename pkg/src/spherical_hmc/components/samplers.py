# Samplers Component
# Spherical HMC, Wall HMC and random-walk Metropolis behind one chain-execution contract

import math
import sys
import time
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from numpy.typing import NDArray

from src.spherical_hmc import logging
from src.spherical_hmc.exception import SamplingError
from src.spherical_hmc.constants import SAMPLER_CONSTANTS
from src.spherical_hmc.entity import Chain, SamplerConfig
from src.spherical_hmc.components.geometry import (
    SpherePoint,
    TangentVector,
    ball_to_sphere,
    geodesic_flow,
    renormalize,
    sample_tangent_velocity,
    sphere_to_ball,
    velocity_half_step,
)
from src.spherical_hmc.components.constraints import HyperRectangle, QNormBall
from src.spherical_hmc.components.models import TargetModel


# theta -> (U(from_ball(theta)), gradient of that composition in theta)
Energy = Callable[[NDArray[np.float64]], tuple[float, NDArray[np.float64]]]


@dataclass(frozen=True)
class ChainState:
    """
    Current position of a chain.

    point is theta_tilde on the sphere for Spherical HMC and beta in the
    original coordinates for Wall HMC and RWM. The remaining fields describe the
    step that produced the state.
    """

    point: NDArray[np.float64]
    potential: float
    weight: float
    gradient: NDArray[np.float64]
    accepted: bool = field(default=True)
    bounces: int = field(default=0)
    energy_error: float = field(default=0.0)
    proposal_outside: bool = field(default=False)


def _finite(value: float, grad: NDArray[np.float64]) -> bool:
    return math.isfinite(value) and bool(np.all(np.isfinite(grad)))


def _evaluate(model: TargetModel, beta: NDArray[np.float64]) -> tuple[float, NDArray[np.float64]]:
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        value = float(model.potential(beta))
        if not math.isfinite(value):
            return math.inf, np.full(beta.shape, np.nan)
        return value, np.asarray(model.gradient(beta), dtype=float)


def spherical_energy(model: TargetModel, domain) -> Energy:
    """Potential and gradient of U(from_ball(theta)) on the ball coordinates"""

    def energy(theta):
        beta = domain.from_ball(theta)
        value, grad_beta = _evaluate(model, beta)
        if not math.isfinite(value):
            return value, grad_beta
        return value, domain.chain_gradient(theta, grad_beta)

    return energy


def _metropolis(current_h: float, proposed_h: float, rng: np.random.Generator) -> tuple[bool, float]:
    """Accept with probability min(1, exp(current_h - proposed_h)); returns (accepted, delta_h)"""
    u = rng.random()
    delta = proposed_h - current_h
    if not math.isfinite(delta):
        return False, math.inf
    return bool(delta <= 0.0 or u < math.exp(-delta)), delta


# ---------------------------------------------------------------------------
# Spherical HMC
# ---------------------------------------------------------------------------

def spherical_leapfrog(
    theta_tilde: SpherePoint,
    v_tilde: TangentVector,
    energy: Energy,
    epsilon: float,
    num_steps: int,
    gradient: NDArray[np.float64] | None = None,
) -> tuple[SpherePoint, TangentVector, float, NDArray[np.float64]]:
    """
    L steps of: velocity half-step, exact geodesic rotation by arc epsilon, velocity half-step.

    Returns:
        (theta_tilde, v_tilde, U, gradient) at the end of the trajectory; U is
        inf when the potential or gradient stopped being finite on the way.
    """
    if gradient is None:
        _, gradient = energy(sphere_to_ball(theta_tilde))
    potential = math.nan
    for _ in range(num_steps):
        v_tilde = velocity_half_step(theta_tilde, v_tilde, gradient, epsilon)
        theta_tilde, v_tilde = geodesic_flow(theta_tilde, v_tilde, epsilon)
        theta_tilde, v_tilde = renormalize(theta_tilde, v_tilde)
        potential, gradient = energy(sphere_to_ball(theta_tilde))
        if not _finite(potential, gradient):
            return theta_tilde, v_tilde, math.inf, gradient
        v_tilde = velocity_half_step(theta_tilde, v_tilde, gradient, epsilon)
    if num_steps == 0:
        potential, gradient = energy(sphere_to_ball(theta_tilde))
    return theta_tilde, v_tilde, potential, gradient


def spherical_hmc_step(
    state: ChainState,
    model: TargetModel,
    domain,
    cfg: SamplerConfig,
    rng: np.random.Generator,
    energy: Energy | None = None,
) -> ChainState:
    """One Metropolis-corrected Spherical HMC transition; the state lives on the sphere."""
    energy = energy or spherical_energy(model, domain)
    v_tilde = sample_tangent_velocity(state.point, rng)
    num_steps = cfg.draw_num_steps(rng)
    current_h = state.potential + 0.5 * float(v_tilde @ v_tilde)

    theta_new, v_new, potential, gradient = spherical_leapfrog(
        state.point, v_tilde, energy, cfg.step_size, num_steps, state.gradient
    )
    proposed_h = potential + 0.5 * float(v_new @ v_new)
    accepted, delta = _metropolis(current_h, proposed_h, rng)

    if not accepted:
        return replace(state, accepted=False, bounces=0, energy_error=delta, proposal_outside=False)
    return ChainState(
        point=theta_new,
        potential=potential,
        weight=domain.jacobian_weight(theta_new),
        gradient=gradient,
        accepted=True,
        energy_error=delta,
    )


# ---------------------------------------------------------------------------
# Wall HMC
# ---------------------------------------------------------------------------

class _ReflectionLimit(Exception):
    """A position update needed more reflections than allowed"""


def _move_rectangle(
    beta: NDArray[np.float64], v: NDArray[np.float64], t: float, domain: HyperRectangle, limit: int
) -> tuple[NDArray[np.float64], NDArray[np.float64], int]:
    """Drift for time t, reflecting each violated coordinate about its face until in-domain."""
    lower, upper = np.asarray(domain.lower), np.asarray(domain.upper)
    beta, v = beta + t * v, v.copy()
    bounces = 0
    while True:
        above, below = beta > upper, beta < lower
        hits = int(above.sum() + below.sum())
        if hits == 0:
            return beta, v, bounces
        bounces += hits
        if bounces > limit:
            raise _ReflectionLimit
        beta = np.where(above, 2.0 * upper - beta, beta)
        beta = np.where(below, 2.0 * lower - beta, beta)
        v = np.where(above | below, -v, v)


def _diamond_normal(point: NDArray[np.float64], v: NDArray[np.float64]) -> NDArray[np.float64]:
    """Outward unit normal of the face of the l1 ball that point leaves through along v"""
    signs = np.sign(point)
    signs = np.where(signs == 0.0, np.sign(v), signs)
    signs = np.where(signs == 0.0, 1.0, signs)
    return signs / math.sqrt(point.size)


def _move_diamond(
    beta: NDArray[np.float64], v: NDArray[np.float64], t: float, domain: QNormBall, limit: int
) -> tuple[NDArray[np.float64], NDArray[np.float64], int]:
    """Drift for time t inside ||beta||_1 <= t_radius, bisecting for each hit and reflecting about the face."""
    radius = domain.t
    v = v.copy()
    remaining = t
    bounces = 0
    while True:
        end = beta + remaining * v
        if np.abs(end).sum() <= radius:
            return end, v, bounces
        lo, hi = 0.0, remaining
        for _ in range(SAMPLER_CONSTANTS.BISECTION_ITERATIONS):
            mid = 0.5 * (lo + hi)
            if np.abs(beta + mid * v).sum() <= radius:
                lo = mid
            else:
                hi = mid
        beta = beta + lo * v
        remaining -= lo
        normal = _diamond_normal(beta, v)
        v = v - 2.0 * float(v @ normal) * normal
        bounces += 1
        if bounces > limit:
            raise _ReflectionLimit


def wall_mover(domain) -> Callable:
    """The reflecting position update for a domain; only boxes and the l1 diamond are supported."""
    if isinstance(domain, HyperRectangle):
        return _move_rectangle
    if isinstance(domain, QNormBall) and domain.q == 1.0:
        return _move_diamond
    raise SamplingError(f"Wall HMC supports rectangles and q = 1 balls, not {domain.describe()}", sys)


def wall_hmc_step(
    state: ChainState,
    model: TargetModel,
    domain,
    cfg: SamplerConfig,
    rng: np.random.Generator,
) -> ChainState:
    """Leapfrog in the original coordinates with elastic reflections off the constraint boundary."""
    move = wall_mover(domain)
    epsilon = cfg.step_size
    v = rng.standard_normal(state.point.shape[0])
    num_steps = cfg.draw_num_steps(rng)
    current_h = state.potential + 0.5 * float(v @ v)

    beta, gradient, potential = state.point, state.gradient, state.potential
    bounces = 0
    aborted = False
    v = v - 0.5 * epsilon * gradient
    for step in range(num_steps):
        try:
            beta, v, hits = move(beta, v, epsilon, domain, cfg.max_reflections - bounces)
        except _ReflectionLimit:
            aborted = True
            break
        bounces += hits
        potential, gradient = _evaluate(model, beta)
        if not _finite(potential, gradient):
            potential = math.inf
            break
        scale = epsilon if step < num_steps - 1 else 0.5 * epsilon
        v = v - scale * gradient

    if aborted:
        return replace(state, accepted=False, bounces=bounces, energy_error=math.inf, proposal_outside=False)

    proposed_h = potential + 0.5 * float(v @ v)
    accepted, delta = _metropolis(current_h, proposed_h, rng)
    if not accepted:
        return replace(state, accepted=False, bounces=bounces, energy_error=delta, proposal_outside=False)
    return ChainState(
        point=beta, potential=potential, weight=1.0, gradient=gradient, bounces=bounces, energy_error=delta
    )


# ---------------------------------------------------------------------------
# Random-walk Metropolis
# ---------------------------------------------------------------------------

def rwm_step(
    state: ChainState,
    model: TargetModel,
    domain,
    cfg: SamplerConfig,
    rng: np.random.Generator,
) -> ChainState:
    """Isotropic Gaussian proposal; proposals outside the domain are rejected outright."""
    proposal = state.point + cfg.proposal_scale * rng.standard_normal(state.point.shape[0])
    u = rng.random()
    if not domain.contains(proposal):
        return replace(state, accepted=False, energy_error=math.inf, proposal_outside=True)

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        potential = float(model.potential(proposal))
    delta = potential - state.potential
    if not math.isfinite(delta) or not (delta <= 0.0 or u < math.exp(-delta)):
        return replace(state, accepted=False, energy_error=delta, proposal_outside=False)
    return ChainState(
        point=proposal,
        potential=potential,
        weight=1.0,
        gradient=state.gradient,
        energy_error=delta,
    )


# ---------------------------------------------------------------------------
# Chain execution
# ---------------------------------------------------------------------------

STEPS = {
    SAMPLER_CONSTANTS.SPHERICAL: spherical_hmc_step,
    SAMPLER_CONSTANTS.WALL: wall_hmc_step,
    SAMPLER_CONSTANTS.RWM: rwm_step,
}


def initial_state(sampler: str, model: TargetModel, domain) -> ChainState:
    """Spherical HMC starts at the pole, the other samplers at the domain center."""
    if sampler == SAMPLER_CONSTANTS.SPHERICAL:
        theta_tilde = ball_to_sphere(np.zeros(domain.dimension))
        potential, gradient = spherical_energy(model, domain)(sphere_to_ball(theta_tilde))
        weight = domain.jacobian_weight(theta_tilde)
        point = theta_tilde
    else:
        point = domain.center()
        potential, gradient = _evaluate(model, point)
        weight = 1.0
    if not _finite(potential, gradient):
        raise SamplingError(f"the potential is not finite at the starting point of the {sampler} chain", sys)
    return ChainState(point=point, potential=potential, weight=weight, gradient=gradient)


def original_point(sampler: str, state: ChainState, domain) -> NDArray[np.float64]:
    if sampler == SAMPLER_CONSTANTS.SPHERICAL:
        return domain.from_ball(sphere_to_ball(state.point))
    return state.point


def run_chain(
    sampler: str,
    model: TargetModel,
    domain,
    cfg: SamplerConfig,
    num_iter: int,
    burn_in: int,
) -> Chain:
    """
    Run burn_in + retained iterations from a deterministic start.

    Args:
        sampler: "sph", "wall" or "rwm"
        num_iter: total iterations, burn-in included

    Returns:
        Chain: the num_iter - burn_in retained draws in original coordinates
    """
    if sampler not in STEPS:
        raise SamplingError(f"unknown sampler '{sampler}', expected one of {sorted(STEPS)}", sys)
    if not 0 <= burn_in < num_iter:
        raise SamplingError(f"need num_iter > burn_in >= 0, got num_iter={num_iter}, burn_in={burn_in}", sys)
    if model.dimension != domain.dimension:
        raise SamplingError(
            f"model dimension {model.dimension} does not match domain dimension {domain.dimension}", sys
        )
    if sampler == SAMPLER_CONSTANTS.WALL:
        wall_mover(domain)

    step = STEPS[sampler]
    retained = num_iter - burn_in
    draws = np.empty((retained, domain.dimension))
    weights = np.empty(retained)
    accepts = np.zeros(retained, dtype=bool)
    energy_errors = np.empty(retained)
    bounces = 0
    outside = 0

    rng = np.random.default_rng(cfg.seed)
    extra = {"energy": spherical_energy(model, domain)} if sampler == SAMPLER_CONSTANTS.SPHERICAL else {}
    start = time.perf_counter()
    state = initial_state(sampler, model, domain)
    for iteration in range(num_iter):
        try:
            state = step(state, model, domain, cfg, rng, **extra)
        except Exception as e:
            logging.exception(e)
            raise SamplingError(f"{sampler} chain failed at iteration {iteration}: {e}", sys)
        index = iteration - burn_in
        if index < 0:
            continue
        draws[index] = original_point(sampler, state, domain)
        weights[index] = state.weight
        accepts[index] = state.accepted
        energy_errors[index] = state.energy_error
        bounces += state.bounces
        outside += int(state.proposal_outside)
    elapsed = time.perf_counter() - start

    return Chain(
        sampler=sampler,
        seed=cfg.seed,
        draws=draws,
        weights=weights,
        accepts=accepts,
        energy_errors=energy_errors,
        wall_bounces=bounces,
        out_of_domain_rejections=outside,
        elapsed_seconds=elapsed,
    )


__all__ = [
    "ChainState",
    "Energy",
    "spherical_energy",
    "spherical_leapfrog",
    "spherical_hmc_step",
    "wall_mover",
    "wall_hmc_step",
    "rwm_step",
    "STEPS",
    "initial_state",
    "original_point",
    "run_chain",
]
