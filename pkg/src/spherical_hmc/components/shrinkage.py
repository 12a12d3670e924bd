# Shrinkage Path Component
# Posterior means of the regression coefficients as the q-norm bound t = s ||beta_OLS||_q grows

import sys
from typing import TYPE_CHECKING

import numpy as np
import pandas as pd

from src.spherical_hmc import logging
from src.spherical_hmc.exception import ConfigValidationError, CustomException
from src.spherical_hmc.entity import CellResultEntity, DataIngestionEntity, ShrinkagePathEntity
from src.spherical_hmc.utils import create_dirs, dump_csv
from src.spherical_hmc.components.experiment import run_cells, summary_frame, write_manifest

if TYPE_CHECKING:
    from src.spherical_hmc.config import ExperimentConfig


DEFAULT_S_GRID = [round(0.1 * k, 1) for k in range(1, 11)]


def path_frame(cells: list[CellResultEntity]) -> pd.DataFrame:
    """Tidy (s, t, sampler, seed, coefficient, estimate) rows"""
    rows = [
        {
            "s": cell.shrinkage,
            "t": cell.radius,
            "sampler": cell.sampler,
            "seed": cell.seed,
            "coefficient": j,
            "estimate": value,
        }
        for cell in cells
        for j, value in enumerate(cell.mean)
    ]
    return pd.DataFrame(rows, columns=["s", "t", "sampler", "seed", "coefficient", "estimate"])


def efficiency_frame(cells: list[CellResultEntity]) -> pd.DataFrame:
    columns = ["s", "t", "sampler", "seed", "accept_rate", "seconds", "ess_min", "ess_med", "ess_max",
               "min_ess_per_sec", "bounces_per_iteration", "out_of_domain_fraction"]
    return summary_frame(cells)[columns]


class ShrinkagePathComponents:
    """
    Component for sweeping the shrinkage factor s of a lasso or bridge experiment.

    Usage:
        component = ShrinkagePathComponents(config, data)
        result = component.run()
    """

    def __init__(self, config: "ExperimentConfig", data: DataIngestionEntity):
        """Initialize with configuration and the ingested regression data"""
        self.config = config
        self.data = data

    @property
    def s_grid(self) -> list[float]:
        return list(self.config.spec.s_grid or DEFAULT_S_GRID)

    def _check(self) -> None:
        if self.config.spec.kind not in ("lasso", "bridge"):
            raise ConfigValidationError(
                f"kind: a shrinkage path needs a lasso or bridge experiment, got '{self.config.spec.kind}'", sys
            )

    def run(self) -> ShrinkagePathEntity:
        """
        Run every (s, sampler, seed) cell and write the path and efficiency tables.

        Returns:
            ShrinkagePathEntity: grid, radii and the cell-averaged posterior mean per s
        """
        try:
            self._check()
            spec = self.config.spec
            create_dirs(self.config.output_dir)
            cells = [(sampler, seed, s) for s in self.s_grid for sampler in spec.samplers for seed in spec.seeds]
            logging.info(f"Shrinkage path over s = {self.s_grid} ({len(cells)} cells)")

            results, error = run_cells(self.config, self.data, cells)
            if results:
                dump_csv(path_frame(results), self.config.path_file, float_format="%.17g")
                dump_csv(efficiency_frame(results), self.config.path_efficiency_file)
            manifest_path = write_manifest(self.config, self.data, results, error is None, error)
            if error is not None:
                logging.error(f"{len(results)} of {len(cells)} path cells finished; manifest marked incomplete")
                raise error

            radii, estimates = [], []
            for s in self.s_grid:
                at_s = [cell for cell in results if cell.shrinkage == s]
                radii.append(float(at_s[0].radius))
                estimates.append(np.mean([cell.mean for cell in at_s], axis=0).tolist())
                logging.info(f"s={s:g}: t={radii[-1]:.4g}, ||estimate||_1={np.abs(estimates[-1]).sum():.4g}")

            return ShrinkagePathEntity(
                output_dir=self.config.output_dir,
                path_file=self.config.path_file,
                efficiency_file=self.config.path_efficiency_file,
                manifest_path=manifest_path,
                s_grid=self.s_grid,
                radii=radii,
                estimates=estimates,
            )

        except CustomException:
            raise
        except Exception as e:
            logging.exception(e)
            raise CustomException(e, sys)


__all__ = ["DEFAULT_S_GRID", "path_frame", "efficiency_frame", "ShrinkagePathComponents"]
