# Data Ingestion Component
# Loads the diabetes regression data and spike trains, or generates seeded synthetic stand-ins

import sys
from pathlib import Path
from typing import TYPE_CHECKING, Optional

import numpy as np
import pandas as pd

from src.spherical_hmc import logging
from src.spherical_hmc.exception import CustomException, DataIngestionError, ModelConstructionError
from src.spherical_hmc.entity import DataIngestionEntity, RegressionData, SpikeData
from src.spherical_hmc.constants import CONSTRAINT_CONSTANTS, DATA_CONSTANTS
from src.spherical_hmc.components.models import copula_pairs, copula_pmf_table
from src.spherical_hmc.utils import create_dirs, dump_csv

if TYPE_CHECKING:
    from src.spherical_hmc.config import ExperimentConfig


def _standardize(raw: pd.DataFrame, columns: list[str]) -> np.ndarray:
    """Center every column and scale it to norm sqrt(n)"""
    values = raw[columns].to_numpy(dtype=float)
    centered = values - values.mean(axis=0)
    scale = centered.std(axis=0)
    constant = [c for c, s in zip(columns, scale) if s == 0.0]
    if constant:
        raise DataIngestionError(f"cannot standardize zero-variance column(s): {constant}", sys)
    return centered / scale


def regression_data_from_frame(raw: pd.DataFrame) -> RegressionData:
    """Standardize predictors, center the response and record the OLS fit"""
    predictors, response = list(raw.columns[:-1]), raw.columns[-1]
    X = _standardize(raw, predictors)
    y = raw[response].to_numpy(dtype=float)
    y = y - y.mean()
    beta_ols, *_ = np.linalg.lstsq(X, y, rcond=None)
    residual = y - X @ beta_ols
    # the centering used up one degree of freedom for the intercept
    dof = max(X.shape[0] - X.shape[1] - 1, 1)
    sigma2 = float(residual @ residual) / dof
    return RegressionData(X=X, y=y, beta_ols=beta_ols, sigma2_ols=sigma2, column_names=predictors)


def load_diabetes(path: str | Path) -> RegressionData:
    """
    Read the diabetes CSV (header age,sex,bmi,map,tc,ldl,hdl,tch,ltg,glu,y).

    Returns:
        RegressionData: standardized predictors, centered response, OLS summary
    """
    path = Path(path)
    expected = DATA_CONSTANTS.DIABETES_COLUMNS
    if not path.is_file():
        raise DataIngestionError(f"diabetes file not found: {path}", sys)
    try:
        raw = pd.read_csv(path, dtype=str, skipinitialspace=True)
    except pd.errors.ParserError as e:
        raise DataIngestionError(f"malformed rows in {path}: {e}", sys)
    except pd.errors.EmptyDataError:
        raise DataIngestionError(f"diabetes file is empty: {path}", sys)

    if raw.shape[1] != len(expected):
        raise DataIngestionError(
            f"expected {len(expected)} columns ({','.join(expected)}), found {raw.shape[1]} in {path}", sys
        )
    if [c.strip().lower() for c in raw.columns] != expected:
        logging.warning(f"diabetes header {list(raw.columns)} differs from {expected}; using column order")
    raw.columns = expected

    numeric = raw.apply(pd.to_numeric, errors="coerce")
    bad_rows = numeric.index[numeric.isna().any(axis=1)]
    if len(bad_rows):
        # +2: one header line, one-based numbering
        lines = [int(i) + 2 for i in bad_rows[:10]]
        raise DataIngestionError(f"malformed rows in {path} at lines {lines}: missing or non-numeric values", sys)

    if len(numeric) != DATA_CONSTANTS.DIABETES_ROWS:
        logging.warning(f"diabetes file has {len(numeric)} rows, expected {DATA_CONSTANTS.DIABETES_ROWS}")

    data = regression_data_from_frame(numeric)
    logging.info(f"Loaded diabetes data from {path}: n={data.n}, D={data.dimension}")
    return data


def synthetic_diabetes_frame(
    seed: int = DATA_CONSTANTS.SYNTHETIC_SEED, n: int = DATA_CONSTANTS.DIABETES_ROWS
) -> tuple[pd.DataFrame, np.ndarray]:
    """
    Diabetes-shaped data with known coefficients on the standardized scale.

    Returns:
        (frame, beta_true): raw columns in diabetes order, and the coefficients
        applied to the standardized predictors.
    """
    rng = np.random.default_rng(seed)
    columns = DATA_CONSTANTS.DIABETES_COLUMNS
    d = len(columns) - 1
    # mildly correlated predictors
    mixing = np.eye(d) + 0.3 * rng.standard_normal((d, d)) / np.sqrt(d)
    z = rng.standard_normal((n, d)) @ mixing.T
    z = (z - z.mean(axis=0)) / z.std(axis=0)
    beta_true = np.array([0.0, -11.0, 25.0, 15.0, -30.0, 18.0, 0.0, 6.0, 34.0, 3.0])[:d]
    y = 152.0 + z @ beta_true + 54.0 * rng.standard_normal(n)

    location = rng.uniform(1.0, 100.0, size=d)
    spread = rng.uniform(0.5, 20.0, size=d)
    frame = pd.DataFrame(location + spread * z, columns=columns[:-1])
    frame[columns[-1]] = y
    return frame, beta_true


def write_synthetic_diabetes(path: str | Path, seed: int = DATA_CONSTANTS.SYNTHETIC_SEED) -> np.ndarray:
    """Write the synthetic fallback in the documented CSV format and return beta_true"""
    frame, beta_true = synthetic_diabetes_frame(seed)
    create_dirs(Path(path).parent)
    dump_csv(frame, path, float_format="%.17g")
    return beta_true


def load_spikes(path: str | Path) -> SpikeData:
    """Read a spikes CSV: rows are neurons, columns are time bins, 0/1 entries, no header"""
    path = Path(path)
    if not path.is_file():
        raise DataIngestionError(f"spikes file not found: {path}", sys)
    try:
        raw = pd.read_csv(path, header=None, dtype=str)
    except pd.errors.ParserError as e:
        raise DataIngestionError(f"malformed rows in {path}: {e}", sys)
    except pd.errors.EmptyDataError:
        raise DataIngestionError(f"spikes file is empty: {path}", sys)
    values = raw.apply(pd.to_numeric, errors="coerce").to_numpy()
    if np.isnan(values).any() or not np.isin(values, (0, 1)).all():
        raise DataIngestionError(f"spikes file {path} must contain only 0/1 entries", sys)
    try:
        return SpikeData.from_spikes(values.astype(np.int8))
    except ValueError as e:
        raise DataIngestionError(f"invalid spike data in {path}: {e}", sys)


def write_spikes(data: SpikeData, path: str | Path) -> None:
    create_dirs(Path(path).parent)
    pd.DataFrame(data.spikes).to_csv(path, header=False, index=False)


def synth_spikes(
    n_neurons: int,
    n_bins: int,
    coupling: float | list[float] | np.ndarray,
    seed: int,
    firing_probs: Optional[list[float] | np.ndarray] = None,
) -> SpikeData:
    """
    Sample firing patterns from the FGM joint pmf.

    Args:
        coupling: pair interactions beta_{j1j2} in copula_pairs order, or one value for every pair
        firing_probs: marginal P(Y_i = 1); defaults to rates spread over [0.2, 0.4]

    Returns:
        SpikeData whose plug-in marginals are the empirical rates of the sample
    """
    pairs = copula_pairs(n_neurons)
    beta = np.broadcast_to(np.asarray(coupling, dtype=float), (len(pairs),)).copy()
    if np.abs(beta).sum() > 1.0 + CONSTRAINT_CONSTANTS.MEMBERSHIP_TOLERANCE:
        raise ModelConstructionError(
            f"coupling violates sum |beta_j1j2| <= 1 (sum = {np.abs(beta).sum():.6g})", sys
        )
    if firing_probs is None:
        firing_probs = np.linspace(0.2, 0.4, n_neurons)
    firing_probs = np.asarray(firing_probs, dtype=float)
    if firing_probs.shape != (n_neurons,) or np.any(firing_probs <= 0) or np.any(firing_probs >= 1):
        raise ModelConstructionError("firing_probs needs one value in (0, 1) per neuron", sys)

    pmf = np.clip(copula_pmf_table(beta, firing_probs), 0.0, None)
    rng = np.random.default_rng(seed)
    codes = rng.choice(pmf.size, size=n_bins, p=pmf / pmf.sum())
    spikes = ((codes[None, :] >> np.arange(n_neurons)[:, None]) & 1).astype(np.int8)
    try:
        return SpikeData.from_spikes(spikes)
    except ValueError as e:
        raise ModelConstructionError(f"synthetic spikes are degenerate, increase n_bins: {e}", sys)


class DataIngestionComponents:
    """
    Component for resolving the data an experiment needs.

    Usage:
        component = DataIngestionComponents(config)
        result = component.run()
    """

    def __init__(self, config: "ExperimentConfig"):
        """Initialize with configuration"""
        self.config = config

    def _regression(self) -> DataIngestionEntity:
        spec = self.config.spec
        if spec.data_path is not None:
            return DataIngestionEntity(source_path=spec.data_path, regression=load_diabetes(spec.data_path))

        path = self.config.synthetic_diabetes_path
        logging.info(f"No data_path given; writing synthetic diabetes data to {path}")
        beta_true = write_synthetic_diabetes(path, spec.data_seed or DATA_CONSTANTS.SYNTHETIC_SEED)
        return DataIngestionEntity(
            source_path=path,
            synthetic=True,
            regression=load_diabetes(path),
            beta_true=beta_true.tolist(),
        )

    def _spikes(self) -> DataIngestionEntity:
        spec = self.config.spec
        if spec.spikes_path is not None:
            return DataIngestionEntity(source_path=spec.spikes_path, spikes=load_spikes(spec.spikes_path))

        coupling = spec.coupling if spec.coupling is not None else 0.0
        data = synth_spikes(spec.n_neurons, spec.n_bins, coupling, spec.data_seed, spec.firing_probs)
        path = self.config.synthetic_spikes_path
        write_spikes(data, path)
        logging.info(f"Synthetic spikes: {data.n_neurons} neurons x {data.n_bins} bins written to {path}")
        return DataIngestionEntity(
            source_path=path,
            synthetic=True,
            spikes=data,
            beta_true=np.broadcast_to(np.asarray(coupling, dtype=float), (data.num_pairs,)).tolist(),
        )

    def run(self) -> DataIngestionEntity:
        """
        Execute data ingestion for the configured experiment kind.

        Returns:
            DataIngestionEntity: regression or spike data, or nothing for the truncated Gaussian
        """
        try:
            kind = self.config.spec.kind
            logging.info(f"Resolving data for a '{kind}' experiment")
            if kind in ("lasso", "bridge"):
                return self._regression()
            if kind == "copula":
                return self._spikes()
            return DataIngestionEntity()

        except CustomException:
            raise
        except Exception as e:
            logging.exception(e)
            raise CustomException(e, sys)


__all__ = [
    "DataIngestionComponents",
    "regression_data_from_frame",
    "load_diabetes",
    "synthetic_diabetes_frame",
    "write_synthetic_diabetes",
    "load_spikes",
    "write_spikes",
    "synth_spikes",
]
