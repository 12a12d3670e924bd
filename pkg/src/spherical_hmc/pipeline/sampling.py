# Sampling Pipeline
# Orchestrates data ingestion and the (sampler, seed) experiment grid

from src.spherical_hmc import logging
from src.spherical_hmc.components import DataIngestionComponents, ExperimentComponents
from src.spherical_hmc.config import ExperimentConfig
from src.spherical_hmc.entity import ExperimentResultEntity


class SamplingPipeline:
    """
    Pipeline for running an experiment.

    Resolves the data the experiment needs, runs every sampler for every seed,
    and writes draws, reports, the summary table and the manifest.

    Usage:
        pipeline = SamplingPipeline(validate_config("config.yaml"))
        result = pipeline.run()
    """

    def __init__(self, config: ExperimentConfig):
        self.config = config

    def run(self) -> ExperimentResultEntity:
        """
        Execute the sampling pipeline.

        Returns:
            ExperimentResultEntity: output paths and per-cell summaries
        """
        logging.info("=" * 50)
        logging.info(f"Initializing Sampling Pipeline: {self.config.spec.kind}, D={self.config.dimension}")

        data = DataIngestionComponents(self.config).run()
        result = ExperimentComponents(self.config, data).run()

        logging.info(f"Sampling Pipeline completed: {len(result.cells)} cells written to {result.output_dir}")
        logging.info("=" * 50)

        return result


__all__ = ["SamplingPipeline"]
