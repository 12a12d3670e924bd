# Constraints Component
# Constraint domains, their bijections to the unit ball, gradient transport and Jacobian weights

import math
import sys
from abc import ABC, abstractmethod
from typing import Annotated, Literal, Union

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, TypeAdapter, field_validator, model_validator

from src.spherical_hmc.exception import DomainViolationError
from src.spherical_hmc.constants import CONSTRAINT_CONSTANTS
from src.spherical_hmc.components.geometry import BallPoint, SpherePoint


# beta in the original constrained space, length D
OriginalPoint = NDArray[np.float64]

TOL = CONSTRAINT_CONSTANTS.MEMBERSHIP_TOLERANCE


class _Domain(BaseModel, ABC):
    """Shared surface of every constraint variant"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    @property
    @abstractmethod
    def dimension(self) -> int: ...

    @abstractmethod
    def contains(self, beta: NDArray[np.float64]) -> bool | NDArray[np.bool_]:
        """Membership within MEMBERSHIP_TOLERANCE; accepts one point or a (B, D) array."""

    @abstractmethod
    def center(self) -> OriginalPoint:
        """The point that maps to the pole of the sphere."""

    @abstractmethod
    def _to_ball(self, beta: OriginalPoint) -> BallPoint: ...

    @abstractmethod
    def from_ball(self, theta: BallPoint) -> OriginalPoint: ...

    @abstractmethod
    def _ball_jacobian_det(self, theta: BallPoint) -> float:
        """|det d beta / d theta^T|"""

    @abstractmethod
    def chain_gradient(self, theta: BallPoint, grad_beta: NDArray[np.float64]) -> NDArray[np.float64]:
        """(d beta / d theta^T)^T grad_beta, the gradient of U(from_ball(theta))."""

    def to_ball(self, beta: OriginalPoint) -> BallPoint:
        beta = np.asarray(beta, dtype=float)
        if beta.shape != (self.dimension,):
            raise DomainViolationError(
                f"expected a point of dimension {self.dimension}, got shape {beta.shape}", sys
            )
        if not self.contains(beta):
            raise DomainViolationError(f"beta = {beta.tolist()} lies outside {self.describe()}", sys)
        return self._to_ball(beta)

    def jacobian_weight(self, theta_tilde: SpherePoint) -> float:
        """|dT| of the map sphere -> original domain: |theta_{D+1}| * |d beta / d theta|"""
        theta = theta_tilde[:-1]
        return abs(float(theta_tilde[-1])) * self._ball_jacobian_det(theta)

    def describe(self) -> str:
        return f"{type(self).__name__}({self.model_dump(exclude={'type'})})"


class UnitBall(_Domain):
    """||beta||_2 <= 1"""

    type: Literal["ball"] = "ball"
    dim: int = Field(ge=1)

    @property
    def dimension(self) -> int:
        return self.dim

    def contains(self, beta):
        beta = np.asarray(beta, dtype=float)
        return np.sqrt(np.sum(beta * beta, axis=-1)) <= 1.0 + TOL

    def center(self) -> OriginalPoint:
        return np.zeros(self.dim)

    def _to_ball(self, beta):
        return beta.copy()

    def from_ball(self, theta):
        return np.array(theta, dtype=float)

    def _ball_jacobian_det(self, theta):
        return 1.0

    def chain_gradient(self, theta, grad_beta):
        return np.asarray(grad_beta, dtype=float)


class HyperRectangle(_Domain):
    """l_i <= beta_i <= u_i, mapped through the cube [-1, 1]^D to its inscribed ball"""

    type: Literal["rectangle"] = "rectangle"
    lower: list[float]
    upper: list[float]

    _lower: np.ndarray = PrivateAttr()
    _upper: np.ndarray = PrivateAttr()
    _half_width: np.ndarray = PrivateAttr()
    _mid: np.ndarray = PrivateAttr()
    _log_volume: float = PrivateAttr()

    @model_validator(mode="after")
    def _check_bounds(self) -> "HyperRectangle":
        if len(self.lower) != len(self.upper) or not self.lower:
            raise ValueError("lower and upper must be non-empty and of equal length")
        bad = [i for i, (l, u) in enumerate(zip(self.lower, self.upper)) if not l < u]
        if bad:
            raise ValueError(f"lower must be strictly below upper; violated at indices {bad}")
        if not all(math.isfinite(b) for b in self.lower + self.upper):
            raise ValueError("bounds must be finite")
        self._lower = np.asarray(self.lower, dtype=float)
        self._upper = np.asarray(self.upper, dtype=float)
        self._half_width = 0.5 * (self._upper - self._lower)
        self._mid = 0.5 * (self._upper + self._lower)
        self._log_volume = float(np.sum(np.log(self._half_width)))
        return self

    @property
    def dimension(self) -> int:
        return len(self.lower)

    def contains(self, beta):
        beta = np.asarray(beta, dtype=float)
        return np.all((beta >= self._lower - TOL) & (beta <= self._upper + TOL), axis=-1)

    def center(self) -> OriginalPoint:
        return self._mid.copy()

    def _to_ball(self, beta):
        cube = (beta - self._mid) / self._half_width
        norm2 = float(np.linalg.norm(cube))
        if norm2 == 0.0:
            return np.zeros_like(cube)
        return cube * (np.abs(cube).max() / norm2)

    def _to_cube(self, theta):
        theta = np.asarray(theta, dtype=float)
        norm_inf = float(np.abs(theta).max())
        if norm_inf == 0.0:
            return np.zeros_like(theta)
        return theta * (np.linalg.norm(theta) / norm_inf)

    def from_ball(self, theta):
        cube = np.clip(self._to_cube(theta), -1.0, 1.0)
        return self._half_width * cube + self._mid

    def _ball_jacobian_det(self, theta):
        norm_inf = float(np.abs(theta).max())
        # theta = 0: limit along the lowest-index axis, where ||.||_2 = ||.||_inf
        ratio = 1.0 if norm_inf == 0.0 else float(np.linalg.norm(theta)) / norm_inf
        return float(np.exp(self.dimension * np.log(ratio) + self._log_volume))

    def chain_gradient(self, theta, grad_beta):
        theta = np.asarray(theta, dtype=float)
        h = self._half_width * np.asarray(grad_beta, dtype=float)
        k = int(np.argmax(np.abs(theta)))  # ties -> lowest index
        if theta[k] == 0.0:
            return h
        norm_sq = float(theta @ theta)
        ratio = np.sqrt(norm_sq) / abs(theta[k])
        correction = theta / norm_sq
        correction[k] -= 1.0 / theta[k]
        return ratio * (h + correction * float(theta @ h))


class QNormBall(_Domain):
    """||beta||_q <= t for 0 < q < infinity"""

    type: Literal["qnorm"] = "qnorm"
    q: float = Field(gt=0)
    t: float = Field(default=1.0, gt=0)
    dim: int = Field(ge=1)

    @field_validator("q")
    @classmethod
    def _finite_q(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("q must be finite; use a rectangle for q = inf")
        return value

    @property
    def dimension(self) -> int:
        return self.dim

    @property
    def _exponent(self) -> float:
        return 2.0 / self.q - 1.0

    def contains(self, beta):
        beta = np.asarray(beta, dtype=float)
        radius_q = self.t ** self.q
        return np.sum(np.abs(beta) ** self.q, axis=-1) <= radius_q + TOL * max(1.0, radius_q)

    def center(self) -> OriginalPoint:
        return np.zeros(self.dim)

    def _to_ball(self, beta):
        scaled = beta / self.t
        return np.sign(scaled) * np.abs(scaled) ** (self.q / 2.0)

    def from_ball(self, theta):
        theta = np.asarray(theta, dtype=float)
        return self.t * np.sign(theta) * np.abs(theta) ** (2.0 / self.q)

    def _abs_theta(self, theta):
        magnitude = np.abs(theta)
        if self._exponent < 0.0:
            magnitude = np.maximum(magnitude, CONSTRAINT_CONSTANTS.WEIGHT_CLAMP)
        return magnitude

    def _ball_jacobian_det(self, theta):
        diagonal = (2.0 / self.q) * self.t * self._abs_theta(theta) ** self._exponent
        return float(np.prod(diagonal))

    def chain_gradient(self, theta, grad_beta):
        diagonal = (2.0 / self.q) * self.t * self._abs_theta(np.asarray(theta, dtype=float)) ** self._exponent
        return diagonal * np.asarray(grad_beta, dtype=float)


ConstraintDomain = Annotated[Union[UnitBall, HyperRectangle, QNormBall], Field(discriminator="type")]

_DOMAIN_ADAPTER = TypeAdapter(ConstraintDomain)


def build_domain(config: dict) -> UnitBall | HyperRectangle | QNormBall:
    """Build a domain from its config-file table, e.g. {type: rectangle, lower: [...], upper: [...]}"""
    return _DOMAIN_ADAPTER.validate_python(dict(config))


def hypercube(dim: int, half_width: float = 1.0) -> HyperRectangle:
    """The q = infinity member of the q-norm family"""
    return HyperRectangle(lower=[-half_width] * dim, upper=[half_width] * dim)


def to_ball(domain: _Domain, beta: OriginalPoint) -> BallPoint:
    return domain.to_ball(beta)


def from_ball(domain: _Domain, theta: BallPoint) -> OriginalPoint:
    return domain.from_ball(theta)


def jacobian_weight(domain: _Domain, theta_tilde: SpherePoint) -> float:
    return domain.jacobian_weight(theta_tilde)


def chain_gradient(domain: _Domain, theta: BallPoint, grad_beta: NDArray[np.float64]) -> NDArray[np.float64]:
    return domain.chain_gradient(theta, grad_beta)


def contains(domain: _Domain, beta: NDArray[np.float64]) -> bool | NDArray[np.bool_]:
    return domain.contains(beta)


__all__ = [
    "OriginalPoint",
    "UnitBall",
    "HyperRectangle",
    "QNormBall",
    "ConstraintDomain",
    "build_domain",
    "hypercube",
    "to_ball",
    "from_ball",
    "jacobian_weight",
    "chain_gradient",
    "contains",
]
