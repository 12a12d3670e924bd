# Command-line entry point for Spherical HMC experiments
# sample: run an experiment grid | path: shrinkage sweep | ess: diagnostics of a draws file

import argparse
import json
import sys
from typing import Optional, Sequence

from src.spherical_hmc import logging
from src.spherical_hmc.config import validate_config
from src.spherical_hmc.exception import CustomException
from src.spherical_hmc.pipeline import DiagnosticsPipeline, SamplingPipeline, ShrinkagePathPipeline


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spherical-hmc",
        description="Spherical HMC, Wall HMC and RWM on norm-constrained targets",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sample = sub.add_parser("sample", help="Run every (sampler, seed) cell of an experiment")
    sample.add_argument("--config", required=True, help="yaml or toml experiment file")
    sample.add_argument("--out", default=None, help="Output directory (overrides output_dir)")
    sample.add_argument("--seed", type=int, default=None, help="Run this single seed (overrides seeds)")
    sample.add_argument("--sampler", choices=["sph", "wall", "rwm"], default=None,
                        help="Run this single sampler (overrides samplers)")

    path = sub.add_parser("path", help="Sweep the shrinkage factor s of a lasso or bridge experiment")
    path.add_argument("--config", required=True, help="yaml or toml experiment file")
    path.add_argument("--out", default=None, help="Output directory (overrides output_dir)")

    ess = sub.add_parser("ess", help="ESS report and weighted moments of a draws CSV")
    ess.add_argument("--draws", required=True, help="CSV with header dim_0,...,weight,accepted")

    return parser


def _overrides(args: argparse.Namespace) -> dict:
    return {
        "output_dir": getattr(args, "out", None),
        "seeds": None if getattr(args, "seed", None) is None else [args.seed],
        "samplers": None if getattr(args, "sampler", None) is None else [args.sampler],
    }


def run_sample(args: argparse.Namespace) -> None:
    config = validate_config(args.config, _overrides(args))
    result = SamplingPipeline(config).run()
    print("sampler | AP | s | (min,med,max) | min(ESS)/s")
    for cell in result.cells:
        print(cell.report.render_row())
    print(f"summary: {result.summary_path}")
    print(f"manifest: {result.manifest_path}")


def run_path(args: argparse.Namespace) -> None:
    config = validate_config(args.config, _overrides(args))
    result = ShrinkagePathPipeline(config).run()
    for s, t in zip(result.s_grid, result.radii):
        print(f"s={s:g} t={t:.6g}")
    print(f"path: {result.path_file}")
    print(f"efficiency: {result.efficiency_file}")


def run_ess(args: argparse.Namespace) -> None:
    result = DiagnosticsPipeline(args.draws).run()
    print(json.dumps(
        {
            **result.report.to_json_dict(),
            "mean": result.mean,
            "covariance": result.covariance,
            "mcse": result.mcse,
        },
        indent=4,
    ))


COMMANDS = {"sample": run_sample, "path": run_path, "ess": run_ess}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
        return 0
    except CustomException as e:
        logging.error(str(e))
        print(str(e), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
