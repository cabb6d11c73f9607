#!/usr/bin/env python3
"""
NuMIT Command Line
Subcommands for PID, null-model normalisation, sweeps, VAR analysis and group statistics
"""

import argparse
import logging
import os
import sys
import time
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from dotenv import load_dotenv

from config.settings import (
    LOG_LEVEL_ENV,
    DiscreteRunConfig,
    NoiseSweepConfig,
    NormalizeConfig,
    PidConfig,
    PipelineConfig,
    RegressConfig,
    TmiSweepConfig,
    VarPidConfig,
    VarSimulateConfig,
    load_config,
    resolve_seed,
    resolve_workers,
)
from core import __version__
from core.exceptions import ConfigError, NumitError
from core.var_model import simulate_var

from .analysis import interaction_regression
from .experiments import discrete_row, gaussian_row, noise_sweep, pipeline_subsets, tmi_sweep, var_row
from .records import (
    read_regression_input,
    read_time_series,
    rows_to_frame,
    sibling_path,
    write_sidecar,
    write_table,
    write_time_series,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2

Outcome = Tuple[List[Path], Dict[str, object]]


def _run_pid(cfg: PidConfig, args, seed: int, workers: int) -> Outcome:
    system = cfg.system.to_system()
    row = gaussian_row(system, system.g, cfg.n_null, seed, workers, normalize=False)
    return [write_table(rows_to_frame([row], "g"), args.out)], {}


def _run_normalize(cfg: NormalizeConfig, args, seed: int, workers: int) -> Outcome:
    system = cfg.system.to_system()
    row = gaussian_row(system, system.g, cfg.n_null, seed, workers, cfg.retry_budget)
    return [write_table(rows_to_frame([row], "g"), args.out)], {"n_failed": row.n_failed}


def _run_discrete(cfg: DiscreteRunConfig, args, seed: int, workers: int) -> Outcome:
    row = discrete_row(cfg.system.to_system(), cfg.n_null, seed, workers, cfg.alpha,
                       cfg.gate_sampling, cfg.retry_budget)
    return [write_table(rows_to_frame([row], "p_eps"), args.out)], {"n_failed": row.n_failed}


def _run_sweep_noise(cfg: NoiseSweepConfig, args, seed: int, workers: int) -> Outcome:
    rows = noise_sweep(cfg, seed, workers)
    path = write_table(rows_to_frame(rows, cfg.param_name), args.out)
    skipped = sum(1 for r in rows if r.shares is None)
    return [path], {"n_failed": sum(r.n_failed for r in rows), "zero_tmi_rows": skipped}


def _run_sweep_tmi(cfg: TmiSweepConfig, args, seed: int, workers: int) -> Outcome:
    result = tmi_sweep(cfg, seed, workers)
    paths = [
        write_table(result.means, args.out),
        write_table(result.histograms, sibling_path(args.out, "_hist")),
    ]
    return paths, {"n_failed": result.n_failed}


def _run_var_pid(cfg: VarPidConfig, args, seed: int, workers: int) -> Outcome:
    row = var_row(cfg.model.to_model(), cfg.model.to_partition(), cfg.n_null, seed, workers,
                  cfg.retry_budget, normalize=cfg.normalize)
    return [write_table(rows_to_frame([row], "order"), args.out)], {"n_failed": row.n_failed}


def _run_var_simulate(cfg: VarSimulateConfig, args, seed: int, workers: int) -> Outcome:
    ts = simulate_var(cfg.model.to_model(), cfg.steps, cfg.burn_in, np.random.default_rng(seed),
                      epochs=cfg.epochs)
    return [write_time_series(ts, args.out)], {"epochs": cfg.epochs, "steps": cfg.steps}


def _run_pipeline(cfg: PipelineConfig, args, seed: int, workers: int) -> Outcome:
    ts = read_time_series(cfg.data)
    result = pipeline_subsets(ts, cfg.subset_size, cfg.n_subsets, cfg.epochs, cfg.order,
                              cfg.n_null, seed, workers, cfg.retry_budget)
    paths = [
        write_table(result.subsets, args.out),
        write_table(result.summary, sibling_path(args.out, "_summary")),
    ]
    counts = {"n_failed": result.n_failed, "skipped_subsets": result.n_skipped,
              "zero_tmi_subsets": result.n_zero_tmi}
    return paths, counts


def _run_regress(cfg: RegressConfig, args, seed: int, workers: int) -> Outcome:
    data = read_regression_input(cfg.data)
    fit = interaction_regression(data["a_nmi"], data["a_numit"], data["b_nmi"], data["b_numit"],
                                 standardize=cfg.standardize)
    table = pd.DataFrame(fit.coefficient_table())
    table["r_nmi"] = fit.r_nmi
    table["r_numit"] = fit.r_numit
    table["n"] = fit.n
    return [write_table(table, args.out)], {"n_pairs": fit.n}


COMMANDS: Dict[str, Tuple[type, Callable[..., Outcome], str]] = {
    "pid": (PidConfig, _run_pid, "MMI PID of a Gaussian system with TMI shares"),
    "normalize": (NormalizeConfig, _run_normalize, "NuMIT quantiles of a Gaussian system"),
    "sweep-noise": (NoiseSweepConfig, _run_sweep_noise, "raw, NMI and NuMIT atoms across a noise grid"),
    "sweep-tmi": (TmiSweepConfig, _run_sweep_tmi, "null-family atom distributions across a TMI grid"),
    "var-pid": (VarPidConfig, _run_var_pid, "past-to-future PID of a VAR model"),
    "var-simulate": (VarSimulateConfig, _run_var_simulate, "simulate a VAR model to a time-series CSV"),
    "discrete": (DiscreteRunConfig, _run_discrete, "PID and NuMIT of a logic-gate system"),
    "pipeline": (PipelineConfig, _run_pipeline, "random-subset VAR(p) PID over a time-series CSV"),
    "regress": (RegressConfig, _run_regress, "interaction regression between two normalisations"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON run configuration")
    common.add_argument("--out", required=True, help="Output CSV path")
    common.add_argument("--seed", type=int, default=None, help="Master seed (overrides config and NUMIT_SEED)")
    common.add_argument("--workers", type=int, default=None, help="Worker processes (1 = serial)")
    common.add_argument(
        "--log-level",
        default=os.getenv(LOG_LEVEL_ENV, "INFO"),
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level",
    )

    parser = argparse.ArgumentParser(
        prog="numit", description="Partial information decomposition with null-model normalisation"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command", required=True)
    for name, (_, _, summary) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=summary, description=summary)
    return parser


def cli_dispatch(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )

    model, handler, _ = COMMANDS[args.command]
    started = time.perf_counter()
    try:
        cfg = load_config(args.config, model)
        seed = resolve_seed(args.seed, cfg)
        workers = resolve_workers(args.workers, cfg)
        logger.info(f"Running {args.command} with seed={seed}, workers={workers}")
        paths, counts = handler(cfg, args, seed, workers)
        elapsed = time.perf_counter() - started
        sidecar = write_sidecar(args.out, {
            "command": args.command,
            "config": cfg.model_dump(mode="json"),
            "seed": seed,
            "workers": workers,
            "wall_time_s": round(elapsed, 3),
            "version": __version__,
            **counts,
        })
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_USAGE
    except (NumitError, ValueError, OSError) as e:
        logger.error(f"{args.command} failed: {type(e).__name__}: {e}")
        return EXIT_RUNTIME

    print(f"✅ {args.command} completed in {elapsed:.2f}s")
    for path in paths:
        print(f"   • {path}")
    print(f"   • {sidecar}")
    for key, value in counts.items():
        print(f"   {key}: {value}")
    return EXIT_OK


def main() -> None:
    sys.exit(cli_dispatch())


if __name__ == "__main__":
    main()
