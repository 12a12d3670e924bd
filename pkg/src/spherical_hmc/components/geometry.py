# Geometry Component
# Ball-to-sphere embedding, tangent spaces and the exact great-circle flow on S^D

import sys

import numpy as np
from numpy.typing import NDArray

from src.spherical_hmc.exception import ConstraintViolationError
from src.spherical_hmc.constants import GEOMETRY_CONSTANTS


# theta in the unit ball, length D
BallPoint = NDArray[np.float64]
# theta_tilde = (theta, theta_{D+1}) on the unit sphere, length D+1
SpherePoint = NDArray[np.float64]
# v_tilde with theta_tilde^T v_tilde = 0, length D+1
TangentVector = NDArray[np.float64]


def ball_to_sphere(theta: BallPoint, sign: float = 1.0) -> SpherePoint:
    """
    Lift a point of the unit ball onto the sphere.

    Returns (theta, sign * sqrt(1 - ||theta||^2)); sign = +1 lands on the
    upper hemisphere, -1 on the lower one.
    """
    theta = np.asarray(theta, dtype=float)
    norm_sq = float(theta @ theta)
    if norm_sq > (1.0 + GEOMETRY_CONSTANTS.BALL_TOLERANCE) ** 2:
        raise ConstraintViolationError(
            f"||theta||_2 = {np.sqrt(norm_sq):.15g} lies outside the unit ball", sys
        )
    last = np.copysign(np.sqrt(max(0.0, 1.0 - norm_sq)), sign)
    return np.append(theta, last)


def sphere_to_ball(theta_tilde: SpherePoint) -> BallPoint:
    return np.array(theta_tilde[:-1], dtype=float)


def tangent_project(theta_tilde: SpherePoint, w: NDArray[np.float64]) -> TangentVector:
    """(I - theta_tilde theta_tilde^T) w"""
    return w - theta_tilde * (theta_tilde @ w)


def sample_tangent_velocity(theta_tilde: SpherePoint, rng: np.random.Generator) -> TangentVector:
    """Draw from N(0, I - theta_tilde theta_tilde^T) by projecting a standard normal."""
    return tangent_project(theta_tilde, rng.standard_normal(theta_tilde.shape[0]))


def geodesic_flow(
    theta_tilde: SpherePoint, v_tilde: TangentVector, t: float
) -> tuple[SpherePoint, TangentVector]:
    """
    Move along the great circle through theta_tilde with initial velocity v_tilde.

    The flow is exact: it preserves ||theta_tilde|| = 1, the speed ||v_tilde||
    and tangency, and flow(t1) followed by flow(t2) equals flow(t1 + t2).
    """
    speed = float(np.sqrt(v_tilde @ v_tilde))
    if speed < GEOMETRY_CONSTANTS.MIN_SPEED:
        return theta_tilde.copy(), v_tilde.copy()
    cos_a = np.cos(speed * t)
    sin_a = np.sin(speed * t)
    theta_t = theta_tilde * cos_a + v_tilde * (sin_a / speed)
    v_t = -theta_tilde * (speed * sin_a) + v_tilde * cos_a
    return theta_t, v_t


def velocity_half_step(
    theta_tilde: SpherePoint, v_tilde: TangentVector, grad_theta: NDArray[np.float64], t: float
) -> TangentVector:
    """
    Exact solution of the potential-only half of the split dynamics.

    v_tilde - (t/2) ([I_D; 0] - theta_tilde theta^T) grad U(theta), which is the
    tangent projection of the zero-padded gradient.
    """
    padded = np.append(grad_theta, 0.0)
    return v_tilde - (0.5 * t) * tangent_project(theta_tilde, padded)


def renormalize(theta_tilde: SpherePoint, v_tilde: TangentVector) -> tuple[SpherePoint, TangentVector]:
    """Pull theta_tilde back to unit norm and v_tilde back to its tangent space."""
    theta_tilde = theta_tilde / np.sqrt(theta_tilde @ theta_tilde)
    return theta_tilde, tangent_project(theta_tilde, v_tilde)


def spherical_metric(theta: BallPoint) -> NDArray[np.float64]:
    """Canonical metric of S^D in the ball chart: I + theta theta^T / (1 - ||theta||^2)."""
    theta = np.asarray(theta, dtype=float)
    return np.eye(theta.shape[0]) + np.outer(theta, theta) / (1.0 - theta @ theta)


def spherical_metric_inverse(theta: BallPoint) -> NDArray[np.float64]:
    theta = np.asarray(theta, dtype=float)
    return np.eye(theta.shape[0]) - np.outer(theta, theta)


def spherical_metric_logdet(theta: BallPoint) -> float:
    """log det G_S = -log theta_{D+1}^2"""
    theta = np.asarray(theta, dtype=float)
    return -float(np.log1p(-(theta @ theta)))


def lift_velocity(theta_tilde: SpherePoint, v: NDArray[np.float64]) -> TangentVector:
    """(v, -theta^T v / theta_{D+1}); its squared length is v^T G_S v."""
    theta, last = theta_tilde[:-1], theta_tilde[-1]
    return np.append(v, -(theta @ v) / last)


def sample_ball_velocity(theta_tilde: SpherePoint, rng: np.random.Generator) -> TangentVector:
    """
    Draw v ~ N(0, G_S^{-1}) in the ball chart and lift it to the tangent space.

    Same law as sample_tangent_velocity; undefined on the equator.
    """
    theta = sphere_to_ball(theta_tilde)
    chol = np.linalg.cholesky(spherical_metric_inverse(theta))
    v = chol @ rng.standard_normal(theta.shape[0])
    return lift_velocity(theta_tilde, v)


__all__ = [
    "BallPoint",
    "SpherePoint",
    "TangentVector",
    "ball_to_sphere",
    "sphere_to_ball",
    "tangent_project",
    "sample_tangent_velocity",
    "geodesic_flow",
    "velocity_half_step",
    "renormalize",
    "spherical_metric",
    "spherical_metric_inverse",
    "spherical_metric_logdet",
    "lift_velocity",
    "sample_ball_velocity",
]
