# Experiment Component
# Runs every (sampler, seed) cell of an experiment and writes draws, reports, summary and manifest

import sys
from concurrent.futures import ProcessPoolExecutor, as_completed
from pathlib import Path
from typing import TYPE_CHECKING, Optional

import numpy as np
import pandas as pd

from src.spherical_hmc import logging
from src.spherical_hmc.exception import ConfigValidationError, CustomException, DataIngestionError
from src.spherical_hmc.constants import HARNESS_CONSTANTS
from src.spherical_hmc.entity import (
    CellResultEntity,
    DataIngestionEntity,
    ExperimentResultEntity,
    RegressionData,
    SamplerConfig,
)
from src.spherical_hmc.utils import create_dirs, dump_csv, dump_json, dump_yaml
from src.spherical_hmc.components.constraints import QNormBall, build_domain
from src.spherical_hmc.components.models import (
    TargetModel,
    bridge_model,
    curvature_frequency,
    fgm_copula_model,
    lasso_model,
    truncated_gaussian_model,
)
from src.spherical_hmc.components.samplers import run_chain
from src.spherical_hmc.components.diagnostics import (
    efficiency_report,
    estimate,
    monte_carlo_standard_error,
    tail_probabilities,
)
from src.spherical_hmc.components.draws import write_draws

if TYPE_CHECKING:
    from src.spherical_hmc.config import ExperimentConfig


# (sampler, seed, shrinkage factor or None)
Cell = tuple[str, int, Optional[float]]


def regression_sigma2(config: "ExperimentConfig", regression: RegressionData) -> float:
    """Configured sigma2, else the OLS residual variance"""
    return config.spec.sigma2 if config.spec.sigma2 is not None else regression.sigma2_ols


def build_target(
    config: "ExperimentConfig", data: DataIngestionEntity, shrinkage: Optional[float] = None
) -> tuple[TargetModel, object, Optional[float]]:
    """
    Model and constraint domain of one experiment.

    Returns:
        (model, domain, radius): radius is the q-norm bound t for regression
        experiments, None otherwise.
    """
    spec = config.spec
    if spec.kind == "truncated-gaussian":
        model = truncated_gaussian_model(np.asarray(spec.mean), np.asarray(spec.covariance))
        return model, build_domain(spec.constraint), None

    if spec.kind in ("lasso", "bridge"):
        if data.regression is None:
            raise DataIngestionError("a regression experiment needs regression data", sys)
        regression = data.regression
        sigma2 = regression_sigma2(config, regression)
        if spec.kind == "lasso":
            model = lasso_model(regression, sigma2)
        else:
            model = bridge_model(regression, sigma2, spec.q)
        s = spec.shrinkage if shrinkage is None else shrinkage
        if spec.constraint is not None and shrinkage is None:
            domain = build_domain(spec.constraint)
            return model, domain, getattr(domain, "t", None)
        radius = s * regression.ols_norm(spec.q)
        return model, QNormBall(q=spec.q, t=radius, dim=regression.dimension), radius

    if data.spikes is None:
        raise DataIngestionError("a copula experiment needs spike data", sys)
    if data.spikes.n_neurons != spec.n_neurons:
        raise DataIngestionError(
            f"spike data has {data.spikes.n_neurons} neurons, the experiment expects {spec.n_neurons}", sys
        )
    model = fgm_copula_model(data.spikes)
    if spec.constraint is not None:
        return model, build_domain(spec.constraint), None
    return model, QNormBall(q=1.0, t=1.0, dim=model.dimension), None


def cell_sampler_config(
    config: "ExperimentConfig", data: DataIngestionEntity, sampler: str, seed: int, domain
) -> SamplerConfig:
    """
    Sampler settings of one cell.

    A curvature_step is turned into epsilon = curvature_step / curvature_frequency at the
    cell's radius, so the Spherical HMC step shrinks as the q-norm bound t grows.
    """
    cfg = config.sampler_config(sampler, seed)
    if cfg.curvature_step is None:
        return cfg
    if data.regression is None or not isinstance(domain, QNormBall):
        raise ConfigValidationError("curvature_step: needs a regression experiment on a q-norm ball", sys)
    frequency = curvature_frequency(data.regression, regression_sigma2(config, data.regression), domain.q, domain.t)
    epsilon = cfg.curvature_step / frequency
    logging.info(f"{sampler} step at t={domain.t:.4g}: epsilon={epsilon:.4g} (frequency {frequency:.4g})")
    return cfg.model_copy(update={"epsilon": epsilon, "trajectory_length": None})


def run_cell(
    config: "ExperimentConfig",
    data: DataIngestionEntity,
    sampler: str,
    seed: int,
    shrinkage: Optional[float] = None,
    directory: Optional[Path] = None,
) -> CellResultEntity:
    """
    Run one chain and summarise it; writes the draws CSV and report JSON when a directory is given.

    Module-level so process pools can pickle it; the model is rebuilt in the worker.
    """
    spec = config.spec
    model, domain, radius = build_target(config, data, shrinkage)
    cfg = cell_sampler_config(config, data, sampler, seed, domain)
    chain = run_chain(sampler, model, domain, cfg, spec.num_iter, spec.burn_in)

    report = efficiency_report(chain)
    mean, covariance = estimate(chain.draws, chain.weights, spec.estimator, np.random.default_rng(seed))
    mcse = monte_carlo_standard_error(chain.draws, chain.weights)
    tails = tail_probabilities(chain.draws, chain.weights)

    draws_path = report_path = None
    if directory is not None:
        draws_path = write_draws(chain, domain, config.draws_path(sampler, seed, directory))
        report_path = config.report_path(sampler, seed, directory)

    result = CellResultEntity(
        sampler=sampler,
        seed=seed,
        report=report,
        mean=mean.tolist(),
        covariance=covariance.tolist(),
        mcse=mcse.tolist(),
        tail_probabilities=tails.tolist(),
        bounces_per_iteration=chain.bounces_per_iteration,
        out_of_domain_fraction=chain.out_of_domain_rejections / chain.num_draws,
        shrinkage=shrinkage,
        radius=radius,
        draws_path=draws_path,
        report_path=report_path,
    )
    if report_path is not None:
        dump_json(
            {
                **report.to_json_dict(),
                "mean": result.mean,
                "covariance": result.covariance,
                "mcse": result.mcse,
                "tail_probabilities": result.tail_probabilities,
                "bounces_per_iteration": result.bounces_per_iteration,
                "out_of_domain_fraction": result.out_of_domain_fraction,
            },
            report_path,
        )
    logging.info(
        f"cell {sampler}/seed={seed}"
        + ("" if shrinkage is None else f"/s={shrinkage:g}")
        + f": AP={report.accept_rate:.3f}, min(ESS)/s={report.min_ess_per_sec}, "
        f"bounces/iter={result.bounces_per_iteration:.2f}"
    )
    return result


def run_cells(
    config: "ExperimentConfig",
    data: DataIngestionEntity,
    cells: list[Cell],
    directory: Optional[Path] = None,
) -> tuple[list[CellResultEntity], Optional[Exception]]:
    """
    Run the cells sequentially or in a process pool.

    Returns:
        (results, error): results of the cells that finished, in cell order, and
        the first failure if any cell failed.
    """
    results: dict[Cell, CellResultEntity] = {}
    error: Optional[Exception] = None
    workers = config.spec.workers

    if workers == 1:
        for cell in cells:
            try:
                results[cell] = run_cell(config, data, *cell, directory=directory)
            except Exception as e:
                error = e
                break
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(run_cell, config, data, *cell, directory=directory): cell for cell in cells}
            for future in as_completed(futures):
                try:
                    results[futures[future]] = future.result()
                except Exception as e:
                    error = error or e

    return [results[cell] for cell in cells if cell in results], error


def summary_frame(cells: list[CellResultEntity]) -> pd.DataFrame:
    """One row per (sampler, seed): efficiency columns, then mean and (small D) covariance entries"""
    rows = []
    for cell in cells:
        report = cell.report
        row = {
            "sampler": cell.sampler,
            "seed": cell.seed,
            "accept_rate": report.accept_rate,
            "seconds": report.seconds,
            "ess_min": report.ess_min,
            "ess_med": report.ess_med,
            "ess_max": report.ess_max,
            "min_ess_per_sec": report.min_ess_per_sec,
            "bounces_per_iteration": cell.bounces_per_iteration,
            "out_of_domain_fraction": cell.out_of_domain_fraction,
        }
        if cell.shrinkage is not None:
            row["s"] = cell.shrinkage
            row["t"] = cell.radius
        row.update({f"mean_{j}": m for j, m in enumerate(cell.mean)})
        if len(cell.mean) <= HARNESS_CONSTANTS.MAX_SUMMARY_COV_DIM:
            for i, values in enumerate(cell.covariance):
                row.update({f"cov_{i}_{j}": values[j] for j in range(i, len(values))})
        rows.append(row)
    return pd.DataFrame(rows)


def low_acceptance_cells(cells: list[CellResultEntity]) -> list[dict]:
    """Cells whose chain barely moved; their estimates are close to a single point"""
    return [
        {"sampler": c.sampler, "seed": c.seed, "s": c.shrinkage, "accept_rate": c.report.accept_rate}
        for c in cells
        if c.report.accept_rate < HARNESS_CONSTANTS.MIN_ACCEPT_RATE
    ]


def write_manifest(
    config: "ExperimentConfig",
    data: DataIngestionEntity,
    cells: list[CellResultEntity],
    complete: bool,
    error: Optional[Exception] = None,
) -> Path:
    """Echo of the resolved configuration plus the list of cells that produced files"""
    stuck = low_acceptance_cells(cells)
    for cell in stuck:
        s = "" if cell["s"] is None else f", s={cell['s']:g}"
        logging.error(
            f"cell {cell['sampler']}/seed={cell['seed']}{s} accepted {cell['accept_rate']:.3f} of its proposals; "
            f"its estimates are unreliable, retune the step size"
        )
    manifest = {
        "complete": complete,
        "error": None if error is None else str(error),
        "low_acceptance": stuck,
        "source": None if config.source is None else str(config.source),
        "data": {
            "source_path": None if data.source_path is None else str(data.source_path),
            "synthetic": data.synthetic,
            "beta_true": data.beta_true,
        },
        "cells": [
            {
                "sampler": c.sampler,
                "seed": c.seed,
                "s": c.shrinkage,
                "draws": None if c.draws_path is None else str(c.draws_path),
                "report": None if c.report_path is None else str(c.report_path),
            }
            for c in cells
        ],
        "spec": config.resolved(),
    }
    dump_yaml(manifest, config.manifest_path)
    return config.manifest_path


class ExperimentComponents:
    """
    Component for running an experiment grid of samplers and seeds.

    Usage:
        component = ExperimentComponents(config, data)
        result = component.run()
    """

    def __init__(self, config: "ExperimentConfig", data: DataIngestionEntity):
        """Initialize with configuration and the ingested data"""
        self.config = config
        self.data = data

    def _cells(self) -> list[Cell]:
        spec = self.config.spec
        return [(sampler, seed, None) for sampler in spec.samplers for seed in spec.seeds]

    def run(self) -> ExperimentResultEntity:
        """
        Execute every cell and write the result files.

        Returns:
            ExperimentResultEntity: output paths and per-cell summaries
        """
        try:
            create_dirs(self.config.output_dir)
            cells = self._cells()
            logging.info(f"Running {len(cells)} cell(s) with {self.config.spec.workers} worker(s)")

            results, error = run_cells(self.config, self.data, cells, directory=self.config.output_dir)
            complete = error is None

            summary_path = None
            if results:
                summary_path = self.config.summary_path
                dump_csv(summary_frame(results), summary_path)
            manifest_path = write_manifest(self.config, self.data, results, complete, error)

            if error is not None:
                logging.error(f"{len(results)} of {len(cells)} cells finished; manifest marked incomplete")
                raise error

            return ExperimentResultEntity(
                output_dir=self.config.output_dir,
                summary_path=summary_path,
                manifest_path=manifest_path,
                cells=results,
                complete=complete,
            )

        except CustomException:
            raise
        except Exception as e:
            logging.exception(e)
            raise CustomException(e, sys)


__all__ = [
    "build_target",
    "run_cell",
    "run_cells",
    "summary_frame",
    "low_acceptance_cells",
    "write_manifest",
    "regression_sigma2",
    "cell_sampler_config",
    "ExperimentComponents",
]
