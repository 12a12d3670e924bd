# Pipeline module - exports all pipeline classes

from .sampling import SamplingPipeline
from .shrinkage_path import ShrinkagePathPipeline
from .diagnostics import DiagnosticsPipeline

__all__ = [
    "SamplingPipeline",
    "ShrinkagePathPipeline",
    "DiagnosticsPipeline"
]
