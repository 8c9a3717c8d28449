"""
Tests for the file formats, run storage and the command line.

Tests verify track parsing and its error codes, bit-exact round trips,
manifest bookkeeping and the deterministic behaviour of every subcommand.
"""

import hashlib
import json
import math

import numpy as np
import pytest

from dppi.cli.main import main
from dppi.contracts.errors import TrackFormatError
from dppi.contracts.models import ObservationSet, TimeGrid
from dppi.inference.samplers import PosteriorSamples
from dppi.io.config import RunConfig
from dppi.io.store import RunStore
from dppi.io.tracks import (
    TrackColumns,
    format_tracks,
    load_samples,
    load_tracks,
    parse_tracks,
    save_samples,
    save_tracks,
)
from dppi.model.scenarios import SCENARIOS

TRACKS = "time,id,x,y\n0,a,1,2\n0,b,3,4\n0.1,a,1.5,2\n0.1,b,3,4.5\n0.2,a,2,2\n0.2,b,3,5\n"

SMALL_RUN = {
    "simulation": {"k": 3, "n": 6},
    "chain": {"iterations": 12, "burn_in": 2, "nested_length": 2, "inner_sim_iters": 5},
    "kstar": {"nsim": 2, "grid_points": 5},
}


class TestTrackFormat:
    """Test parsing and writing of track files."""

    def test_parse_panel(self):
        """Test a two-individual, three-time file becomes a (3, 2, 2) panel."""
        obs = parse_tracks(TRACKS)
        assert obs.obs.shape == (3, 2, 2)
        assert obs.ids == ["a", "b"]
        assert obs.grid.times == [0.0, 0.1, 0.2]
        assert obs.obs[1, 1].tolist() == [3.0, 4.5]

    def test_missing_cell(self):
        """Test a missing (time, id) cell is reported by name."""
        text = TRACKS.replace("0.1,b,3,4.5\n", "")
        with pytest.raises(TrackFormatError) as exc:
            parse_tracks(text)
        assert exc.value.code == "NON_RECTANGULAR"
        assert "(0.1, b)" in str(exc.value)

    def test_non_monotone_time(self):
        """Test a time that does not increase for its individual is rejected."""
        text = "time,id,x,y\n0,a,1,2\n0.2,a,1,2\n0.1,a,1,2\n"
        with pytest.raises(TrackFormatError) as exc:
            parse_tracks(text)
        assert exc.value.code == "NON_MONOTONE_TIME"

    def test_duplicate_row(self):
        """Test a repeated (time, id) row is rejected."""
        with pytest.raises(TrackFormatError) as exc:
            parse_tracks(TRACKS + "0.2,a,9,9\n")
        assert exc.value.code == "NON_MONOTONE_TIME"

    def test_bad_columns(self):
        """Test missing headers and unparsable numbers raise BAD_COLUMNS."""
        with pytest.raises(TrackFormatError) as exc:
            parse_tracks(TRACKS.replace("time,", "t,", 1))
        assert exc.value.code == "BAD_COLUMNS"
        with pytest.raises(TrackFormatError) as exc:
            parse_tracks(TRACKS.replace("1.5", "one"))
        assert exc.value.code == "BAD_COLUMNS"

    def test_column_adapter(self):
        """Test other column names and delimiters are mapped onto the panel."""
        text = TRACKS.replace(",", ";").replace("time;id;x;y", "frame;fish;px;py")
        columns = TrackColumns(time="frame", id="fish", x="px", y="py", delimiter=";")
        assert np.array_equal(parse_tracks(text, columns).obs, parse_tracks(TRACKS).obs)

    def test_round_trip_is_exact(self, tmp_path):
        """Test written tracks read back bit for bit."""
        rng = np.random.default_rng(0)
        obs = ObservationSet(
            obs=rng.normal(300, 100, size=(5, 3, 2)), grid=TimeGrid(times=np.cumsum(rng.uniform(0.05, 0.2, 5)).tolist()), ids=["f1", "f2", "f3"]
        )
        back = load_tracks(save_tracks(obs, tmp_path / "tracks.csv"))
        assert np.array_equal(back.obs, obs.obs)
        assert back.grid.times == obs.grid.times
        assert back.ids == obs.ids
        assert format_tracks(back) == format_tracks(obs)

    def test_samples_round_trip(self, tmp_path):
        """Test draws and metadata survive save and load."""
        rng = np.random.default_rng(1)
        samples = PosteriorSamples(
            draws=rng.normal(size=(4, 2)), names=["beta", "sigma2"], acceptance={"beta": 0.4}, radius=3.5, model="dppi", burn_in=7
        )
        back = load_samples(save_samples(samples, tmp_path / "samples.csv"))
        assert np.array_equal(back.draws, samples.draws)
        assert back.names == samples.names
        assert back.acceptance == samples.acceptance
        assert (back.radius, back.model, back.burn_in) == (3.5, "dppi", 7)
        assert math.isnan(back.latent_acceptance)


class TestRunStore:
    """Test output files and the manifest."""

    @pytest.fixture(scope="class")
    def store(self, tmp_path_factory):
        """Create a store in a temporary directory."""
        return RunStore(tmp_path_factory.mktemp("run"), command="simulate")

    def test_manifest_hashes(self, store):
        """Test entries are sorted and carry the SHA-256 of the written bytes."""
        store.write_text("b.csv", "x\n1\n")
        store.write_json("a.json", {"k": 1})
        manifest = json.loads(store.manifest_path.read_text(encoding="utf-8"))
        assert manifest["command"] == "simulate"
        assert [e["path"] for e in manifest["files"]] == ["a.json", "b.csv"]
        for entry in manifest["files"]:
            digest = hashlib.sha256(store.path(entry["path"]).read_bytes()).hexdigest()
            assert entry["sha256"] == digest

    def test_rewrite_replaces_entry(self, store):
        """Test writing a file twice keeps one entry with the new hash."""
        store.write_text("b.csv", "x\n2\n")
        entries = [e for e in store.get_manifest()["files"] if e["path"] == "b.csv"]
        assert len(entries) == 1
        assert entries[0]["sha256"] == RunStore.sha256("x\n2\n")

    def test_reused_directory_lists_only_new_files(self, tmp_path):
        """Test a second command in the same directory drops entries it did not write."""
        first = RunStore(tmp_path, command="fit")
        first.write_text("samples_chain0.csv", "beta\n1\n")
        first.write_text("samples_chain1.csv", "beta\n2\n")
        second = RunStore(tmp_path, command="fit")
        second.write_text("samples.csv", "beta\n3\n")
        manifest = json.loads(second.manifest_path.read_text(encoding="utf-8"))
        assert [e["path"] for e in manifest["files"]] == ["samples.csv"]


class TestCommandLine:
    """Test every subcommand end to end on a small configuration."""

    @pytest.fixture(scope="class")
    def workdir(self, tmp_path_factory):
        root = tmp_path_factory.mktemp("cli")
        (root / "small.json").write_text(json.dumps(SMALL_RUN), encoding="utf-8")
        return root

    @pytest.fixture(scope="class")
    def simulated(self, workdir):
        """Simulate the same scenario twice with one seed."""
        for name in ("sim1", "sim2"):
            code = main(["simulate", "--config", str(workdir / "small.json"), "--seed", "3", "--out", str(workdir / name)])
            assert code == 0
        return workdir / "sim1" / "tracks.csv"

    def test_simulate_is_deterministic(self, workdir, simulated):
        """Test equal seeds write byte-identical outputs and manifests."""
        for name in ("tracks.csv", "latent.csv", "manifest.json", "run_config.json"):
            assert (workdir / "sim1" / name).read_bytes() == (workdir / "sim2" / name).read_bytes()
        obs = load_tracks(simulated)
        assert obs.obs.shape == (6, 3, 2)

    def test_fit_summarize_and_envelope(self, workdir, simulated):
        """Test fitting twice is reproducible and the outputs feed the other commands."""
        cfg = str(workdir / "small.json")
        for name in ("fit1", "fit2"):
            assert main(["fit", str(simulated), "--config", cfg, "--model", "independent", "--out", str(workdir / name)]) == 0
        samples = workdir / "fit1" / "samples.csv"
        assert samples.read_bytes() == (workdir / "fit2" / "samples.csv").read_bytes()
        summary = json.loads((workdir / "fit1" / "summary.json").read_text(encoding="utf-8"))
        assert [r["name"] for r in summary["rows"]] == ["beta", "gamma1", "gamma2", "sigma2", "sigma_e2"]
        assert "half_chain_ks" in summary

        assert main(["summarize", str(samples), "--out", str(workdir / "summary")]) == 0
        assert (workdir / "summary" / "summary.txt").exists()

        assert main(["envelope", str(simulated), str(samples), "--config", cfg, "--out", str(workdir / "env")]) == 0
        lines = (workdir / "env" / "envelope_independent.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == "d,lower,upper"
        assert len(lines) == 6
        data = (workdir / "env" / "kstar.csv").read_text(encoding="utf-8").splitlines()
        assert data[0] == "d,count"
        assert [row.split(",")[0] for row in data[1:]] == [row.split(",")[0] for row in lines[1:]]
        manifest = json.loads((workdir / "env" / "manifest.json").read_text(encoding="utf-8"))
        assert [e["path"] for e in manifest["files"]] == ["envelope_independent.csv", "kstar.csv", "run_config.json"]

    def test_fit_dppi(self, workdir, simulated):
        """Test a short interacting fit writes all eight parameters."""
        out = workdir / "fit_dppi"
        assert main(["fit", str(simulated), "--config", str(workdir / "small.json"), "--out", str(out)]) == 0
        header = (out / "samples.csv").read_text(encoding="utf-8").splitlines()[0]
        assert header == "beta,gamma1,gamma2,sigma2,sigma_e2,theta1,theta2,theta3"

    def test_kstar(self, workdir, simulated):
        """Test the K* command writes one row per grid point."""
        out = workdir / "kstar"
        assert main(["kstar", str(simulated), "--config", str(workdir / "small.json"), "--out", str(out)]) == 0
        lines = (out / "kstar.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == "d,count"
        assert len(lines) == 6

    def test_print_defaults(self, capsys):
        """Test the printed defaults parse back into the default configuration."""
        assert main(["--print-defaults"]) == 0
        out = capsys.readouterr().out
        assert RunConfig.model_validate_json(out).model_dump() == RunConfig().model_dump()

    def test_invalid_config(self, workdir, capsys):
        """Test an invalid configuration exits with status 2 before computing."""
        bad = workdir / "bad.json"
        bad.write_text(json.dumps({"chain": {"iterations": 0}}), encoding="utf-8")
        assert main(["simulate", "--config", str(bad), "--out", str(workdir / "never")]) == 2
        assert "BAD_CONFIG" in capsys.readouterr().err
        assert not (workdir / "never").exists()

    def test_unknown_key(self, workdir):
        """Test unknown configuration keys are rejected."""
        bad = workdir / "typo.json"
        bad.write_text(json.dumps({"simulaton": {}}), encoding="utf-8")
        assert main(["simulate", "--config", str(bad)]) == 2

    def test_vanishing_noise_gives_straight_lines(self, workdir):
        """Test configured movement parameters with almost no noise drift in straight lines."""
        quiet = {
            "model": "independent",
            "simulation": {
                "k": 2,
                "n": 5,
                "dt": 1.0,
                "movement": {"beta": 0.15, "gamma1": -1.2, "gamma2": 1.5, "sigma2": 1e-14, "sigma_e2": 1e-14},
            },
        }
        (workdir / "quiet.json").write_text(json.dumps(quiet), encoding="utf-8")
        out = workdir / "quiet"
        assert main(["simulate", "--config", str(workdir / "quiet.json"), "--out", str(out)]) == 0
        obs = load_tracks(out / "tracks.csv")
        t = np.asarray(obs.grid.times)[:, None]
        assert np.allclose(obs.obs[:, :, 0] - obs.obs[0, :, 0], -1.2 * t, atol=1e-4)
        assert np.allclose(obs.obs[:, :, 1] - obs.obs[0, :, 1], 1.5 * t, atol=1e-4)

    def test_interaction_override(self, workdir):
        """Test interaction overrides replace the scenario values and are validated up front."""
        cfg = RunConfig.model_validate({"scenario": "weak", "simulation": {"radius": 2.0, "interaction": {"theta2": 15.0}}})
        movement, iparams = cfg.simulation.parameters(SCENARIOS["weak"])
        assert movement == SCENARIOS["weak"].movement
        assert (iparams.theta1, iparams.theta2, iparams.theta3, iparams.radius) == (10.0, 15.0, 0.5, 2.0)

        bad = workdir / "core.json"
        bad.write_text(json.dumps({"simulation": {"interaction": {"theta2": 3.0}}}), encoding="utf-8")
        assert main(["simulate", "--config", str(bad), "--out", str(workdir / "core_out")]) == 2
        assert not (workdir / "core_out").exists()

    def test_fixed_value_outside_prior(self, workdir, simulated, capsys):
        """Test fit refuses a fixed value with zero prior density before writing anything."""
        bad = workdir / "fixed.json"
        bad.write_text(json.dumps({**SMALL_RUN, "chain": {**SMALL_RUN["chain"], "fixed": {"theta3": 1.5}}}), encoding="utf-8")
        assert main(["fit", str(simulated), "--config", str(bad), "--out", str(workdir / "fixed_out")]) == 2
        assert "BAD_CONFIG" in capsys.readouterr().err
        assert not (workdir / "fixed_out").exists()

    def test_bad_tracks(self, workdir, capsys):
        """Test a ragged track file exits with status 2 and names the code."""
        ragged = workdir / "ragged.csv"
        ragged.write_text(TRACKS.replace("0.1,b,3,4.5\n", ""), encoding="utf-8")
        assert main(["kstar", str(ragged), "--out", str(workdir / "ragged_out")]) == 2
        assert "NON_RECTANGULAR" in capsys.readouterr().err

    def test_missing_file(self, workdir):
        """Test an unreadable input exits with status 2."""
        assert main(["kstar", str(workdir / "absent.csv"), "--out", str(workdir / "absent_out")]) == 2
