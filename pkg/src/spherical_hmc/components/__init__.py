# Components module - exports all component classes

from .data_ingestion import DataIngestionComponents
from .experiment import ExperimentComponents
from .shrinkage import ShrinkagePathComponents
from .diagnostics import DiagnosticsComponents

__all__ = [
    "DataIngestionComponents",
    "ExperimentComponents",
    "ShrinkagePathComponents",
    "DiagnosticsComponents",
]
