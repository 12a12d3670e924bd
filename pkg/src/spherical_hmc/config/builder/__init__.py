# Config Builder - Creates the resolved experiment configuration from a yaml/toml file and constants

import sys
from pathlib import Path
from typing import Any, Optional

from pydantic import ValidationError

from ...constants import DATA_CONSTANTS, HARNESS_CONSTANTS, SAMPLER_CONSTANTS
from ...entity import ExperimentSpec, SamplerConfig
from ...exception import ConfigValidationError
from ...utils import load_config_file
from ...components.constraints import build_domain
from ...components.models import (
    copula_pairs,
    truncated_gaussian_bounds,
    truncated_gaussian_covariance,
)


def _field_errors(error: ValidationError, prefix: str = "") -> str:
    """One 'field: message' clause per pydantic error"""
    parts = []
    for item in error.errors():
        loc = ".".join(str(p) for p in item["loc"]) or "<root>"
        parts.append(f"{prefix}{loc}: {item['msg']}")
    return "; ".join(parts)


def _derived_dimension(spec: ExperimentSpec) -> Optional[int]:
    if spec.kind in ("lasso", "bridge"):
        return len(DATA_CONSTANTS.DIABETES_COLUMNS) - 1
    if spec.kind == "copula":
        if spec.n_neurons is None:
            raise ConfigValidationError("n_neurons: required for a copula experiment", sys)
        return len(copula_pairs(spec.n_neurons))
    if spec.dimension is not None:
        return spec.dimension
    if spec.mean is not None:
        return len(spec.mean)
    raise ConfigValidationError("dimension: required for a truncated-gaussian experiment", sys)


def _resolve_sampler_settings(spec: ExperimentSpec, dimension: int) -> dict[str, SamplerConfig]:
    """
    SamplerConfig defaults per sampler. Untuned Spherical HMC gets a curvature_step on
    lasso/bridge q-norm balls and trajectory_length = 2 pi / D everywhere else.
    """
    on_qnorm_ball = spec.kind in ("lasso", "bridge") and (
        spec.constraint is None or spec.constraint.get("type") == "qnorm"
    )
    settings = {}
    for sampler in spec.samplers:
        cfg = spec.sampler_settings.get(sampler, SamplerConfig())
        if cfg.curvature_step is not None:
            if sampler != SAMPLER_CONSTANTS.SPHERICAL or not on_qnorm_ball:
                raise ConfigValidationError(
                    "curvature_step: only Spherical HMC on a lasso or bridge q-norm ball uses it", sys
                )
            if cfg.trajectory_length is not None:
                raise ConfigValidationError("curvature_step: conflicts with trajectory_length", sys)
        elif (
            sampler == SAMPLER_CONSTANTS.SPHERICAL
            and cfg.trajectory_length is None
            and "epsilon" not in cfg.model_fields_set
        ):
            if on_qnorm_ball:
                cfg = cfg.model_copy(update={"curvature_step": SAMPLER_CONSTANTS.CURVATURE_STEP})
            else:
                cfg = cfg.model_copy(update={"trajectory_length": SAMPLER_CONSTANTS.FULL_ROTATION / dimension})
        settings[sampler] = cfg
    unused = sorted(set(spec.sampler_settings) - set(spec.samplers))
    if unused:
        raise ConfigValidationError(f"sampler_settings: settings given for unused sampler(s) {unused}", sys)
    return settings


def _resolve_constraint(spec: ExperimentSpec, dimension: int) -> Optional[dict]:
    constraint = spec.constraint
    if constraint is None and spec.kind == "truncated-gaussian":
        lower, upper = truncated_gaussian_bounds(dimension)
        constraint = {"type": "rectangle", "lower": lower, "upper": upper}
    if constraint is None:
        # regression radii follow the data, copula uses the unit diamond
        return None
    try:
        domain = build_domain(constraint)
    except ValidationError as e:
        raise ConfigValidationError(_field_errors(e, prefix="constraint."), sys)
    if domain.dimension != dimension:
        raise ConfigValidationError(
            f"constraint: has dimension {domain.dimension}, the experiment has dimension {dimension}", sys
        )
    return domain.model_dump()


def resolve_spec(spec: ExperimentSpec) -> ExperimentSpec:
    """Apply every default; resolving an already resolved spec returns an equal spec"""
    dimension = _derived_dimension(spec)
    if spec.dimension is not None and spec.dimension != dimension:
        raise ConfigValidationError(
            f"dimension: {spec.dimension} conflicts with the {dimension} parameters of a {spec.kind} experiment", sys
        )
    update: dict[str, Any] = {
        "dimension": dimension,
        "sampler_settings": _resolve_sampler_settings(spec, dimension),
        "constraint": _resolve_constraint(spec, dimension),
    }

    if spec.kind == "truncated-gaussian":
        mean = spec.mean if spec.mean is not None else [0.0] * dimension
        covariance = spec.covariance
        if covariance is None:
            covariance = truncated_gaussian_covariance(dimension).tolist()
        if len(mean) != dimension or len(covariance) != dimension:
            raise ConfigValidationError(f"mean/covariance: need dimension {dimension}", sys)
        update.update(mean=[float(m) for m in mean], covariance=[[float(c) for c in row] for row in covariance])

    if spec.kind == "lasso":
        if spec.q not in (None, 1.0):
            raise ConfigValidationError(f"q: a lasso experiment has q = 1, got {spec.q}", sys)
        update["q"] = 1.0
    if spec.kind == "bridge" and spec.q is None:
        raise ConfigValidationError("q: required for a bridge experiment", sys)

    if spec.kind == "copula":
        if spec.coupling is not None and len(spec.coupling) not in (1, dimension):
            raise ConfigValidationError(f"coupling: needs 1 or {dimension} values, got {len(spec.coupling)}", sys)
        if spec.firing_probs is not None and len(spec.firing_probs) != spec.n_neurons:
            raise ConfigValidationError(f"firing_probs: needs {spec.n_neurons} values", sys)

    if spec.s_grid is not None and spec.kind not in ("lasso", "bridge"):
        raise ConfigValidationError("s_grid: only regression experiments have a shrinkage path", sys)

    if SAMPLER_CONSTANTS.WALL in spec.samplers:
        wall_ok = spec.kind in ("truncated-gaussian", "lasso", "copula") or spec.q == 1.0
        constraint = update["constraint"]
        if constraint is not None:
            wall_ok = constraint["type"] == "rectangle" or (constraint["type"] == "qnorm" and constraint["q"] == 1.0)
        if not wall_ok:
            raise ConfigValidationError("samplers: wall HMC needs a rectangle or a q = 1 constraint", sys)

    return spec.model_copy(update=update)


class ExperimentConfig:
    """Configuration for the Sampling, Shrinkage Path and Diagnostics Pipelines"""

    def __init__(self, spec: ExperimentSpec, source: Optional[Path] = None):
        self.spec = spec
        self.source = source
        self.constants = HARNESS_CONSTANTS

    @property
    def dimension(self) -> int:
        return self.spec.dimension

    @property
    def output_dir(self) -> Path:
        return Path(self.spec.output_dir)

    @property
    def summary_path(self) -> Path:
        return self.output_dir / self.constants.SUMMARY_FILE

    @property
    def manifest_path(self) -> Path:
        return self.output_dir / self.constants.MANIFEST_FILE

    @property
    def path_file(self) -> Path:
        return self.output_dir / self.constants.PATH_FILE

    @property
    def path_efficiency_file(self) -> Path:
        return self.output_dir / self.constants.PATH_EFFICIENCY_FILE

    @property
    def synthetic_diabetes_path(self) -> Path:
        return self.output_dir / "data" / "diabetes_synthetic.csv"

    @property
    def synthetic_spikes_path(self) -> Path:
        return self.output_dir / "data" / "spikes_synthetic.csv"

    def draws_path(self, sampler: str, seed: int, directory: Optional[Path] = None) -> Path:
        return (directory or self.output_dir) / self.constants.DRAWS_FILE.format(sampler=sampler, seed=seed)

    def report_path(self, sampler: str, seed: int, directory: Optional[Path] = None) -> Path:
        return (directory or self.output_dir) / self.constants.REPORT_FILE.format(sampler=sampler, seed=seed)

    def sampler_config(self, sampler: str, seed: int) -> SamplerConfig:
        return self.spec.sampler_settings[sampler].model_copy(update={"seed": seed})

    def resolved(self) -> dict:
        """The resolved spec as plain data, as echoed into the manifest"""
        return self.spec.model_dump(mode="json")


def build_config(raw: dict, overrides: Optional[dict] = None, source: Optional[Path] = None) -> ExperimentConfig:
    """
    Validate configuration data and apply defaults.

    Args:
        raw: key-value configuration, e.g. a parsed yaml file
        overrides: CLI values for output_dir, seeds and samplers
    """
    data = dict(raw)
    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value
    if (overrides or {}).get("samplers") is not None and isinstance(data.get("sampler_settings"), dict):
        # a CLI sampler selection keeps only the settings it still uses
        data["sampler_settings"] = {
            name: cfg for name, cfg in data["sampler_settings"].items() if name in overrides["samplers"]
        }
    try:
        spec = ExperimentSpec.model_validate(data)
    except ValidationError as e:
        raise ConfigValidationError(_field_errors(e), sys)
    return ExperimentConfig(resolve_spec(spec), source)


def validate_config(path: str | Path, overrides: Optional[dict] = None) -> ExperimentConfig:
    """Read a yaml or toml experiment file into a fully resolved ExperimentConfig"""
    path = Path(path)
    if not path.is_file():
        raise ConfigValidationError(f"config: file not found: {path}", sys)
    raw = load_config_file(path)
    raw = raw.to_dict() if hasattr(raw, "to_dict") else dict(raw)
    return build_config(raw, overrides, source=path)


__all__ = ["ExperimentConfig", "resolve_spec", "build_config", "validate_config"]
