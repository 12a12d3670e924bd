# Config module - exports configuration classes

from .builder import (
    ExperimentConfig,
    resolve_spec,
    build_config,
    validate_config,
)

__all__ = [
    "ExperimentConfig",
    "resolve_spec",
    "build_config",
    "validate_config",
]
