# Constants for Spherical HMC
# Each pipeline has its own constants class

import math

from pydantic import BaseModel, Field
from pathlib import Path


class GeometryConstants(BaseModel):
    """Constants for sphere embedding and geodesic flow"""

    # Slack allowed on ||theta||_2 <= 1 at construction
    BALL_TOLERANCE: float = Field(default=1e-12)

    # Below this speed the great circle degenerates to a point
    MIN_SPEED: float = Field(default=1e-14)


class ConstraintConstants(BaseModel):
    """Constants for constraint domains and their maps"""

    # Membership slack used by contains() / to_ball()
    MEMBERSHIP_TOLERANCE: float = Field(default=1e-10)

    # |theta_i| floor inside q > 2 weights (negative exponent)
    WEIGHT_CLAMP: float = Field(default=1e-12)


class SamplerConstants(BaseModel):
    """Constants for the MCMC drivers"""

    SPHERICAL: str = Field(default="sph")
    WALL: str = Field(default="wall")
    RWM: str = Field(default="rwm")

    # Wall HMC aborts a proposal after this many reflections
    MAX_REFLECTIONS: int = Field(default=1_000_000)

    # Bisection iterations for the l1-diamond hit time
    BISECTION_ITERATIONS: int = Field(default=80)

    # SamplerConfig defaults
    DEFAULT_EPSILON: float = Field(default=0.1)
    DEFAULT_NUM_LEAPFROG: int = Field(default=10)
    DEFAULT_PROPOSAL_SCALE: float = Field(default=0.1)

    # Spherical HMC default trajectory length is FULL_ROTATION / D
    FULL_ROTATION: float = Field(default=2.0 * math.pi)

    # Regression targets: Spherical HMC step = CURVATURE_STEP / estimated stiffest frequency at radius t
    CURVATURE_STEP: float = Field(default=0.8)


class DiagnosticsConstants(BaseModel):
    """Constants for ESS and moment estimation"""

    MIN_SERIES_LENGTH: int = Field(default=10)

    # Autocorrelations are summed up to lag B * MAX_LAG_FRACTION
    MAX_LAG_FRACTION: float = Field(default=0.5)

    WEIGHTED: str = Field(default="weighted")
    RESAMPLE: str = Field(default="resample")


class DataConstants(BaseModel):
    """Constants for data ingestion"""

    DIABETES_COLUMNS: list[str] = Field(
        default=["age", "sex", "bmi", "map", "tc", "ldl", "hdl", "tch", "ltg", "glu", "y"]
    )
    DIABETES_ROWS: int = Field(default=442)
    SYNTHETIC_SEED: int = Field(default=20140101)

    # 2^n inclusion-exclusion is feasible up to this many neurons
    MAX_NEURONS: int = Field(default=15)


class HarnessConstants(BaseModel):
    """Constants for experiment orchestration and result files"""

    # Paths
    ARTIFACTS_DIR: Path = Field(default=Path("artifacts"))
    RAW_CONFIG_DIR: Path = Field(default=Path(__file__).resolve().parents[1] / "config" / "raw")

    # File names
    DRAWS_FILE: str = Field(default="draws_{sampler}_seed{seed}.csv")
    REPORT_FILE: str = Field(default="report_{sampler}_seed{seed}.json")
    SUMMARY_FILE: str = Field(default="summary.csv")
    MANIFEST_FILE: str = Field(default="manifest.yaml")
    PATH_FILE: str = Field(default="shrinkage_path.csv")
    PATH_EFFICIENCY_FILE: str = Field(default="shrinkage_efficiency.csv")

    # Draws CSV columns
    DIM_COLUMN: str = Field(default="dim_{index}")
    WEIGHT_COLUMN: str = Field(default="weight")
    ACCEPTED_COLUMN: str = Field(default="accepted")
    FLOAT_FORMAT: str = Field(default="%.17g")

    # Covariance columns are written to the summary up to this dimension
    MAX_SUMMARY_COV_DIM: int = Field(default=5)

    # Cells below this acceptance rate are flagged in the manifest
    MIN_ACCEPT_RATE: float = Field(default=0.05)


# Instantiate constants
GEOMETRY_CONSTANTS = GeometryConstants()
CONSTRAINT_CONSTANTS = ConstraintConstants()
SAMPLER_CONSTANTS = SamplerConstants()
DIAGNOSTICS_CONSTANTS = DiagnosticsConstants()
DATA_CONSTANTS = DataConstants()
HARNESS_CONSTANTS = HarnessConstants()

__all__ = [
    "GeometryConstants",
    "ConstraintConstants",
    "SamplerConstants",
    "DiagnosticsConstants",
    "DataConstants",
    "HarnessConstants",
    "GEOMETRY_CONSTANTS",
    "CONSTRAINT_CONSTANTS",
    "SAMPLER_CONSTANTS",
    "DIAGNOSTICS_CONSTANTS",
    "DATA_CONSTANTS",
    "HARNESS_CONSTANTS",
]
