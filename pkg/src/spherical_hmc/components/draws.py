# Draws files
# CSV layout dim_0,...,dim_{D-1},weight,accepted; one row per retained draw

import sys
from pathlib import Path

import numpy as np
import pandas as pd

from src.spherical_hmc.exception import DataIngestionError, DomainViolationError
from src.spherical_hmc.constants import HARNESS_CONSTANTS
from src.spherical_hmc.entity import Chain
from src.spherical_hmc.utils import dump_csv


def draws_frame(chain: Chain) -> pd.DataFrame:
    columns = [HARNESS_CONSTANTS.DIM_COLUMN.format(index=j) for j in range(chain.dimension)]
    frame = pd.DataFrame(chain.draws, columns=columns)
    frame[HARNESS_CONSTANTS.WEIGHT_COLUMN] = chain.weights
    frame[HARNESS_CONSTANTS.ACCEPTED_COLUMN] = chain.accepts.astype(int)
    return frame


def write_draws(chain: Chain, domain, path: str | Path) -> Path:
    """Write the retained draws after checking every row against the domain"""
    inside = np.atleast_1d(domain.contains(chain.draws))
    if not inside.all():
        rows = np.flatnonzero(~inside)[:10].tolist()
        raise DomainViolationError(
            f"{int((~inside).sum())} draws of the {chain.sampler} chain (seed {chain.seed}) lie outside "
            f"{domain.describe()}, first rows {rows}",
            sys,
        )
    path = Path(path)
    dump_csv(draws_frame(chain), path, float_format=HARNESS_CONSTANTS.FLOAT_FORMAT)
    return path


def read_draws(path: str | Path, sampler: str | None = None, seed: int = 0) -> Chain:
    """Read a draws CSV back into a Chain with unknown timing"""
    path = Path(path)
    if not path.is_file():
        raise DataIngestionError(f"draws file not found: {path}", sys)
    try:
        frame = pd.read_csv(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DataIngestionError(f"cannot parse draws file {path}: {e}", sys)

    weight, accepted = HARNESS_CONSTANTS.WEIGHT_COLUMN, HARNESS_CONSTANTS.ACCEPTED_COLUMN
    dims = [c for c in frame.columns if c.startswith("dim_")]
    expected = [HARNESS_CONSTANTS.DIM_COLUMN.format(index=j) for j in range(len(dims))]
    if not dims or dims != expected or weight not in frame or accepted not in frame:
        raise DataIngestionError(
            f"draws file {path} needs the header {','.join(expected or ['dim_0'])},{weight},{accepted}", sys
        )
    values = frame[dims + [weight, accepted]].apply(pd.to_numeric, errors="coerce")
    if values.isna().any().any():
        raise DataIngestionError(f"draws file {path} has missing or non-numeric entries", sys)

    return Chain(
        sampler=sampler or path.stem,
        seed=seed,
        draws=values[dims].to_numpy(dtype=float),
        weights=values[weight].to_numpy(dtype=float),
        accepts=values[accepted].to_numpy().astype(bool),
        energy_errors=np.zeros(len(values)),
    )


__all__ = ["draws_frame", "write_draws", "read_draws"]
