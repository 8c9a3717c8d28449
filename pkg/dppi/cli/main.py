"""
dppi command line.

Subcommands: simulate, fit, kstar, envelope, summarize. Every command reads
an optional JSON run configuration (``--config``), applies the flag
overrides, validates everything before computing, and writes its outputs
plus ``manifest.json`` to the output directory. Failures print one line on
stderr and exit with status 2.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np
from pydantic import ValidationError

from ..contracts.errors import DPPIError
from ..contracts.models import TimeGrid
from ..contracts.settings import settings
from ..inference.diagnostics import half_chain_ks
from ..inference.samplers import fit_chains
from ..io.config import RunConfig, default_config_json, load_run_config
from ..io.store import RunStore
from ..io.tracks import (
    format_curve,
    format_envelope,
    format_latent,
    format_samples,
    format_tracks,
    load_samples,
    load_tracks,
    samples_metadata,
)
from ..model.scenarios import default_start, get_scenario
from ..model.simulate import simulate_dppi, simulate_independent
from ..summaries.envelope import posterior_predictive_envelope
from ..summaries.kstar import default_distance_grid, kstar
from ..summaries.posterior import summarize_posterior

logger = logging.getLogger(__name__)

EXIT_FAILURE = 2


def _config(args: argparse.Namespace) -> RunConfig:
    cfg = load_run_config(args.config)
    return cfg.with_overrides(seed=args.seed, model=args.model, scenario=args.scenario, output_dir=args.out)


def _store(cfg: RunConfig, command: str) -> RunStore:
    store = RunStore(cfg.output_dir or settings.output_dir, command=command)
    store.write_json("run_config.json", cfg.model_dump(mode="json", exclude={"output_dir"}))
    return store


def _distances(cfg: RunConfig, panel) -> np.ndarray:
    if cfg.kstar.max_distance is not None:
        return np.linspace(0.0, cfg.kstar.max_distance, cfg.kstar.grid_points)
    return default_distance_grid(panel, cfg.kstar.grid_points)


def cmd_simulate(args: argparse.Namespace) -> None:
    cfg = _config(args)
    sim = cfg.simulation
    scenario = get_scenario(cfg.scenario)
    movement, iparams = sim.parameters(scenario)
    rng = np.random.default_rng(cfg.seed)
    start = default_start(sim.k, sim.spacing, sim.origin)
    grid = TimeGrid.regular(sim.n, sim.dt)
    logger.info("simulating %s model, scenario %s: K=%d N=%d", cfg.model, scenario.name, sim.k, sim.n)
    if cfg.model == "dppi":
        paths, obs = simulate_dppi(
            start, movement, iparams, grid,
            inner_iters=cfg.chain.inner_sim_iters, rng=rng,
        )
    else:
        paths, obs = simulate_independent(start, movement, grid, rng=rng)
    store = _store(cfg, "simulate")
    store.write_text("tracks.csv", format_tracks(obs))
    if sim.save_latent:
        store.write_text("latent.csv", format_latent(paths, obs.ids))


def cmd_fit(args: argparse.Namespace) -> None:
    cfg = _config(args)
    obs = load_tracks(args.tracks, cfg.tracks)
    runs = fit_chains(cfg.model, obs, cfg.priors, cfg.chain, chains=cfg.chains, seed=cfg.seed)
    store = _store(cfg, "fit")
    for run in runs:
        stem = "samples" if len(runs) == 1 else f"samples_chain{run.chain_id}"
        store.write_text(f"{stem}.csv", format_samples(run))
        store.write_json(f"{stem}.json", samples_metadata(run))
    summary = summarize_posterior(runs)
    payload = summary.model_dump(mode="json")
    if runs[0].n >= 2:
        payload["half_chain_ks"] = {
            name: res._asdict() for name, res in half_chain_ks(runs[0]).items()
        }
    store.write_json("summary.json", payload)
    store.write_text("summary.txt", summary.render_table() + "\n")
    print(summary.render_table())


def cmd_kstar(args: argparse.Namespace) -> None:
    cfg = _config(args)
    obs = load_tracks(args.tracks, cfg.tracks)
    curve = kstar(obs, _distances(cfg, obs))
    _store(cfg, "kstar").write_text("kstar.csv", format_curve(curve))


def cmd_envelope(args: argparse.Namespace) -> None:
    cfg = _config(args)
    obs = load_tracks(args.tracks, cfg.tracks)
    samples = load_samples(args.samples)
    model = args.model or samples.model
    distances = _distances(cfg, obs)
    env = posterior_predictive_envelope(
        samples,
        model,
        obs.obs[0],
        obs.grid,
        distances,
        nsim=cfg.kstar.nsim,
        rng=np.random.default_rng(cfg.seed),
        inner_iters=cfg.chain.inner_sim_iters,
        level=cfg.kstar.level,
        observed=cfg.kstar.observed,
    )
    store = _store(cfg, "envelope")
    store.write_text(f"envelope_{model}.csv", format_envelope(env))
    store.write_text("kstar.csv", format_curve(kstar(obs, distances)))


def cmd_summarize(args: argparse.Namespace) -> None:
    cfg = _config(args)
    runs = [load_samples(p) for p in args.samples]
    summary = summarize_posterior(runs)
    store = _store(cfg, "summarize")
    store.write_json("summary.json", summary)
    store.write_text("summary.txt", summary.render_table() + "\n")
    print(summary.render_table())


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="JSON run configuration")
    common.add_argument("--seed", type=int, default=None, help="Master seed (overrides the config)")
    common.add_argument("--out", type=Path, default=None, help="Output directory")
    common.add_argument("--model", choices=["independent", "dppi"], default=None)
    common.add_argument("--scenario", choices=["medium", "strong", "weak"], default=None)

    parser = argparse.ArgumentParser(prog="dppi", description="Group movement simulation and inference")
    parser.add_argument("--print-defaults", action="store_true", help="Print the default run configuration")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("simulate", parents=[common], help="Simulate a scenario")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", parents=[common], help="Fit a model to a track file")
    p.add_argument("tracks", type=Path)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("kstar", parents=[common], help="K* curve of a track file")
    p.add_argument("tracks", type=Path)
    p.set_defaults(func=cmd_kstar)

    p = sub.add_parser("envelope", parents=[common], help="Posterior-predictive K* envelope")
    p.add_argument("tracks", type=Path)
    p.add_argument("samples", type=Path)
    p.set_defaults(func=cmd_envelope)

    p = sub.add_parser("summarize", parents=[common], help="Summarise posterior draws")
    p.add_argument("samples", type=Path, nargs="+")
    p.set_defaults(func=cmd_summarize)
    return parser


def _one_line(e: ValidationError) -> str:
    first = e.errors()[0]
    where = ".".join(str(p) for p in first.get("loc", ()))
    return f"BAD_CONFIG: {e.error_count()} validation error(s); {where}: {first.get('msg')}"


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.print_defaults:
        sys.stdout.write(default_config_json())
        return 0
    if args.command is None:
        parser.print_help()
        return EXIT_FAILURE
    settings.configure_logging()
    logger.info("dppi %s", args.command)
    try:
        args.func(args)
    except DPPIError as e:
        print(str(e), file=sys.stderr)
        return EXIT_FAILURE
    except ValidationError as e:
        print(_one_line(e), file=sys.stderr)
        return EXIT_FAILURE
    except (OSError, ValueError) as e:
        print(f"ERROR: {e}", file=sys.stderr)
        return EXIT_FAILURE
    logger.info("dppi %s done", args.command)
    return 0


if __name__ == "__main__":
    sys.exit(main())
