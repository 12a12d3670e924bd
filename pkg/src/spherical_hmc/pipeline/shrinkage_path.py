# Shrinkage Path Pipeline
# Orchestrates the sweep over the shrinkage factor of a regression experiment

from src.spherical_hmc import logging
from src.spherical_hmc.components import DataIngestionComponents, ShrinkagePathComponents
from src.spherical_hmc.config import ExperimentConfig
from src.spherical_hmc.entity import ShrinkagePathEntity


class ShrinkagePathPipeline:
    """
    Pipeline for the shrinkage path of a lasso or bridge experiment.

    Usage:
        pipeline = ShrinkagePathPipeline(validate_config("lasso.yaml"))
        result = pipeline.run()
    """

    def __init__(self, config: ExperimentConfig):
        self.config = config

    def run(self) -> ShrinkagePathEntity:
        """
        Execute the shrinkage path pipeline.

        Returns:
            ShrinkagePathEntity: grid, radii, posterior means and output paths
        """
        logging.info("=" * 50)
        logging.info(f"Initializing Shrinkage Path Pipeline: {self.config.spec.kind}, q={self.config.spec.q}")

        data = DataIngestionComponents(self.config).run()
        result = ShrinkagePathComponents(self.config, data).run()

        logging.info(f"Shrinkage Path Pipeline completed: {len(result.s_grid)} values of s, path in {result.path_file}")
        logging.info("=" * 50)

        return result


__all__ = ["ShrinkagePathPipeline"]
