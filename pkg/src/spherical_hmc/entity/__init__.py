# Entity classes - Record and return types shared by the components
# These are Pydantic models that define the structure of configs, chains and reports

import math
from pathlib import Path
from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.spherical_hmc.constants import HARNESS_CONSTANTS, SAMPLER_CONSTANTS


SamplerKind = Literal["sph", "wall", "rwm"]
ExperimentKind = Literal["truncated-gaussian", "lasso", "bridge", "copula"]
EstimatorMode = Literal["weighted", "resample"]


class SamplerConfig(BaseModel):
    """Tuning parameters of one MCMC driver"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    epsilon: float = Field(default=SAMPLER_CONSTANTS.DEFAULT_EPSILON, gt=0)
    num_leapfrog: int = Field(default=SAMPLER_CONSTANTS.DEFAULT_NUM_LEAPFROG, ge=1)
    trajectory_length: Optional[float] = Field(default=None, gt=0)
    # Spherical HMC on regression targets: the step is set per radius t from this ratio
    curvature_step: Optional[float] = Field(default=None, gt=0)
    randomize_steps: bool = Field(default=False)
    proposal_scale: float = Field(default=SAMPLER_CONSTANTS.DEFAULT_PROPOSAL_SCALE, gt=0)
    seed: int = Field(default=0, ge=0, lt=2**64)
    max_reflections: int = Field(default=SAMPLER_CONSTANTS.MAX_REFLECTIONS, ge=1)

    @property
    def step_size(self) -> float:
        """epsilon, or trajectory_length / L_max when a trajectory length is set"""
        if self.trajectory_length is not None:
            return self.trajectory_length / self.num_leapfrog
        return self.epsilon

    def draw_num_steps(self, rng: np.random.Generator) -> int:
        if self.randomize_steps:
            return int(rng.integers(1, self.num_leapfrog + 1))
        return self.num_leapfrog


class Chain(BaseModel):
    """Retained draws of one chain in original coordinates"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    sampler: str
    seed: int
    draws: np.ndarray
    weights: np.ndarray
    accepts: np.ndarray
    energy_errors: np.ndarray
    wall_bounces: int = Field(default=0)
    out_of_domain_rejections: int = Field(default=0)
    elapsed_seconds: float = Field(default=0.0, ge=0)

    @model_validator(mode="after")
    def _check_lengths(self) -> "Chain":
        n = self.draws.shape[0]
        if self.draws.ndim != 2 or len(self.weights) != n or len(self.accepts) != n:
            raise ValueError("draws, weights and accepts must have equal length")
        return self

    @property
    def num_draws(self) -> int:
        return int(self.draws.shape[0])

    @property
    def dimension(self) -> int:
        return int(self.draws.shape[1])

    @property
    def acceptance_rate(self) -> float:
        return float(np.mean(self.accepts)) if self.num_draws else 0.0

    @property
    def bounces_per_iteration(self) -> float:
        return self.wall_bounces / self.num_draws if self.num_draws else 0.0


class EssReport(BaseModel):
    """Efficiency summary of one chain"""

    sampler: Optional[str] = None
    seed: Optional[int] = None
    ess: List[float]
    ess_min: float
    ess_med: float
    ess_max: float
    seconds: Optional[float] = None
    min_ess_per_sec: Optional[float] = None
    accept_rate: float
    degenerate: List[bool] = Field(default_factory=list)

    def to_json_dict(self) -> dict:
        return self.model_dump(mode="json")

    def render_row(self) -> str:
        """Row in the AP | s | (min,med,max) | min(ESS)/s layout"""
        seconds = "NA" if self.seconds is None else f"{self.seconds:.2E}"
        per_sec = "NA" if self.min_ess_per_sec is None else f"{self.min_ess_per_sec:.2f}"
        triple = f"({self.ess_min:.0f},{self.ess_med:.0f},{self.ess_max:.0f})"
        return f"{self.sampler or '-'} | {self.accept_rate:.2f} | {seconds} | {triple} | {per_sec}"


class RegressionData(BaseModel):
    """Standardized design matrix and centered response"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    X: np.ndarray
    y: np.ndarray
    beta_ols: np.ndarray
    sigma2_ols: float = Field(gt=0)
    column_names: List[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_standardized(self) -> "RegressionData":
        n = self.X.shape[0]
        if self.y.shape != (n,):
            raise ValueError("y must have one entry per row of X")
        if not np.allclose(self.X.mean(axis=0), 0.0, atol=1e-8):
            raise ValueError("columns of X must be centered")
        if not np.allclose(np.linalg.norm(self.X, axis=0), math.sqrt(n), rtol=1e-8):
            raise ValueError("columns of X must have norm sqrt(n)")
        if abs(self.y.mean()) > 1e-8 * max(1.0, np.abs(self.y).max()):
            raise ValueError("y must be centered")
        return self

    @property
    def n(self) -> int:
        return int(self.X.shape[0])

    @property
    def dimension(self) -> int:
        return int(self.X.shape[1])

    def ols_norm(self, q: float) -> float:
        """||beta_OLS||_q, the t that corresponds to shrinkage factor s = 1"""
        if math.isinf(q):
            return float(np.abs(self.beta_ols).max())
        return float(np.sum(np.abs(self.beta_ols) ** q) ** (1.0 / q))


class SpikeData(BaseModel):
    """Binary firing indicators, one row per neuron"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    spikes: np.ndarray
    firing_probs: np.ndarray

    @field_validator("spikes")
    @classmethod
    def _check_binary(cls, value: np.ndarray) -> np.ndarray:
        if value.ndim != 2 or not np.isin(value, (0, 1)).all():
            raise ValueError("spikes must be a 2-D array of 0/1 entries")
        return value.astype(np.int8)

    @model_validator(mode="after")
    def _check_probs(self) -> "SpikeData":
        if self.firing_probs.shape != (self.spikes.shape[0],):
            raise ValueError("one firing probability per neuron is required")
        if np.any(self.firing_probs <= 0.0) or np.any(self.firing_probs >= 1.0):
            raise ValueError("firing probabilities must lie strictly inside (0, 1)")
        return self

    @classmethod
    def from_spikes(cls, spikes: np.ndarray) -> "SpikeData":
        """Plug-in marginals: per-neuron empirical firing rates"""
        spikes = np.asarray(spikes)
        return cls(spikes=spikes, firing_probs=spikes.mean(axis=1).astype(float))

    @property
    def n_neurons(self) -> int:
        return int(self.spikes.shape[0])

    @property
    def n_bins(self) -> int:
        return int(self.spikes.shape[1])

    @property
    def num_pairs(self) -> int:
        return self.n_neurons * (self.n_neurons - 1) // 2


class DataIngestionEntity(BaseModel):
    """Return type for Data Ingestion Component"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    source_path: Optional[Path] = None
    synthetic: bool = Field(default=False)
    regression: Optional[RegressionData] = None
    spikes: Optional[SpikeData] = None
    beta_true: Optional[List[float]] = None


class ExperimentSpec(BaseModel):
    """Validated experiment configuration"""

    model_config = ConfigDict(extra="forbid")

    kind: ExperimentKind
    dimension: Optional[int] = Field(default=None, ge=1)
    constraint: Optional[dict] = None

    # truncated Gaussian
    mean: Optional[List[float]] = None
    covariance: Optional[List[List[float]]] = None

    # regression
    data_path: Optional[Path] = None
    sigma2: Optional[float] = Field(default=None, gt=0)
    q: Optional[float] = Field(default=None, gt=0)
    shrinkage: float = Field(default=1.0, gt=0)
    s_grid: Optional[List[float]] = None

    # copula
    spikes_path: Optional[Path] = None
    n_neurons: Optional[int] = Field(default=None, ge=2, le=15)
    n_bins: int = Field(default=2000, ge=1)
    coupling: Optional[List[float]] = None
    firing_probs: Optional[List[float]] = None
    data_seed: int = Field(default=0, ge=0)

    # sampling
    samplers: List[SamplerKind] = Field(default_factory=lambda: ["sph"], min_length=1)
    sampler_settings: dict[SamplerKind, SamplerConfig] = Field(default_factory=dict)
    num_iter: int = Field(default=11000, ge=1)
    burn_in: int = Field(default=1000, ge=0)
    seeds: List[int] = Field(default_factory=lambda: [0], min_length=1)
    output_dir: Path = Field(default=HARNESS_CONSTANTS.ARTIFACTS_DIR)
    estimator: EstimatorMode = Field(default="weighted")
    workers: int = Field(default=1, ge=1)

    @field_validator("s_grid")
    @classmethod
    def _check_s_grid(cls, value: Optional[List[float]]) -> Optional[List[float]]:
        if value is not None:
            if not value:
                raise ValueError("s_grid must not be empty")
            if any(not 0.0 < s <= 1.0 for s in value):
                raise ValueError("every s in s_grid must lie in (0, 1]")
        return value

    @field_validator("seeds")
    @classmethod
    def _check_seeds(cls, value: List[int]) -> List[int]:
        if any(not 0 <= s < 2**64 for s in value):
            raise ValueError("seeds must be unsigned 64-bit integers")
        return value

    @model_validator(mode="after")
    def _check_iterations(self) -> "ExperimentSpec":
        if self.burn_in >= self.num_iter:
            raise ValueError("burn_in must be smaller than num_iter")
        return self


class CellResultEntity(BaseModel):
    """Outcome of one (sampler, seed) cell"""

    sampler: str
    seed: int
    report: EssReport
    mean: List[float]
    covariance: List[List[float]]
    mcse: List[float]
    tail_probabilities: List[float]
    bounces_per_iteration: float
    out_of_domain_fraction: float
    shrinkage: Optional[float] = None
    radius: Optional[float] = None
    draws_path: Optional[Path] = None
    report_path: Optional[Path] = None


class ExperimentResultEntity(BaseModel):
    """Return type of the sampling pipeline"""

    output_dir: Path
    summary_path: Optional[Path] = None
    manifest_path: Path
    cells: List[CellResultEntity] = Field(default_factory=list)
    complete: bool = Field(default=True)


class DiagnosticsEntity(BaseModel):
    """Return type of the standalone diagnostics pipeline"""

    draws_path: Path
    report: EssReport
    mean: List[float]
    covariance: List[List[float]]
    mcse: List[float]


class ShrinkagePathEntity(BaseModel):
    """Return type of the shrinkage-path pipeline"""

    output_dir: Path
    path_file: Path
    efficiency_file: Path
    manifest_path: Path
    s_grid: List[float]
    radii: List[float]
    estimates: List[List[float]]


__all__ = [
    "SamplerKind",
    "ExperimentKind",
    "EstimatorMode",
    "SamplerConfig",
    "Chain",
    "EssReport",
    "RegressionData",
    "SpikeData",
    "DataIngestionEntity",
    "ExperimentSpec",
    "CellResultEntity",
    "ExperimentResultEntity",
    "DiagnosticsEntity",
    "ShrinkagePathEntity",
]
