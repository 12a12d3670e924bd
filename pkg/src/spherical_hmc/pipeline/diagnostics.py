# Diagnostics Pipeline
# Summarises a draws CSV written by an earlier run

from pathlib import Path

from src.spherical_hmc import logging
from src.spherical_hmc.components import DiagnosticsComponents
from src.spherical_hmc.entity import DiagnosticsEntity


class DiagnosticsPipeline:
    """
    Pipeline for standalone diagnostics.

    Usage:
        pipeline = DiagnosticsPipeline("artifacts/draws_sph_seed0.csv")
        result = pipeline.run()
    """

    def __init__(self, draws_path: str | Path):
        self.draws_path = Path(draws_path)

    def run(self) -> DiagnosticsEntity:
        logging.info(f"Initializing Diagnostics Pipeline for {self.draws_path}")

        result = DiagnosticsComponents(self.draws_path).run()

        logging.info(f"Diagnostics Pipeline completed: {result.report.render_row()}")

        return result


__all__ = ["DiagnosticsPipeline"]
