from pathlib import Path
import argparse

import numpy as np

from dppi.contracts.models import TimeGrid
from dppi.contracts.settings import settings
from dppi.io.config import SimulationConfig
from dppi.io.store import RunStore
from dppi.io.tracks import format_latent, format_tracks
from dppi.model.scenarios import SCENARIOS, default_start
from dppi.model.simulate import simulate_dppi

if __name__ == "__main__":
    p = argparse.ArgumentParser(description="Write the medium, strong and weak synthetic scenarios")
    p.add_argument("--out", type=Path, default=Path("data/scenarios"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--inner-iters", type=int, default=200)
    args = p.parse_args()
    settings.configure_logging()

    sim = SimulationConfig()
    grid = TimeGrid.regular(sim.n, sim.dt)
    start = default_start(sim.k, sim.spacing, sim.origin)
    children = np.random.SeedSequence(args.seed).spawn(len(SCENARIOS))
    for (name, scenario), child in zip(sorted(SCENARIOS.items()), children):
        paths, obs = simulate_dppi(
            start,
            *sim.parameters(scenario),
            grid,
            inner_iters=args.inner_iters,
            rng=np.random.default_rng(child),
        )
        store = RunStore(args.out / name, command="generate_scenarios")
        store.write_text("tracks.csv", format_tracks(obs))
        store.write_text("latent.csv", format_latent(paths, obs.ids))
        print(f"[OK] {name}: K={obs.k} N={obs.n} written to {store.out_dir.resolve()}")
