"""
Tests for the K* statistic, posterior-predictive envelopes and posterior tables.
"""

import itertools
import os

import numpy as np
import pytest

from dppi.contracts.errors import DomainError
from dppi.contracts.models import ObservationSet, TimeGrid
from dppi.inference.samplers import PosteriorSamples
from dppi.model.scenarios import GUPPY_MOVEMENT, SCENARIOS, default_start
from dppi.model.simulate import simulate_dppi, simulate_independent
from dppi.summaries.envelope import Envelope, envelope_from_curves, posterior_predictive_envelope
from dppi.summaries.kstar import KStarCurve, default_distance_grid, kstar
from dppi.summaries.posterior import summarize_posterior


def _samples(draws, names, model="independent", radius=0.0):
    return PosteriorSamples(draws=np.asarray(draws, dtype=float), names=names, radius=radius, model=model)


class TestKStar:
    """Test pair counts below each distance."""

    def test_two_static_individuals(self):
        """Test K* is zero up to and including the separation, then N."""
        loc = np.array([[[0.0, 0.0], [5.0, 0.0]]] * 4)
        curve = kstar(loc, [0.0, 4.9, 5.0, 5.1, 100.0])
        assert curve.counts.tolist() == [0, 0, 0, 4, 4]
        assert curve.total_pairs == 4

    def test_brute_force(self):
        """Test counts against a direct loop over times and pairs."""
        rng = np.random.default_rng(8)
        loc = rng.uniform(0, 50, size=(7, 5, 2))
        distances = np.linspace(0, 60, 31)
        expected = [
            sum(
                np.linalg.norm(loc[i, a] - loc[i, b]) < d
                for i in range(7)
                for a, b in itertools.combinations(range(5), 2)
            )
            for d in distances
        ]
        assert kstar(loc, distances).counts.tolist() == expected

    def test_accepts_panels(self, guppy):
        """Test observation and path panels use their own locations."""
        paths, obs = simulate_independent(default_start(3), guppy, TimeGrid.regular(4, 0.1), rng=np.random.default_rng(0))
        d = default_distance_grid(obs, 10)
        assert kstar(obs, d).counts[-1] == 4 * 3 - 1
        assert kstar(paths, [1e6]).counts.tolist() == [12]

    def test_needs_two_individuals(self):
        """Test a single individual raises DomainError."""
        with pytest.raises(DomainError):
            kstar(np.zeros((3, 1, 2)), [1.0])

    def test_curve_validation(self):
        """Test decreasing counts are rejected."""
        with pytest.raises(ValueError):
            KStarCurve(distances=[1.0, 2.0], counts=[3, 2], total_pairs=3)


class TestEnvelope:
    """Test pointwise envelopes."""

    def test_two_curves_give_min_and_max(self):
        """Test nsim = 2 at level 0.95 interpolates between the two curves."""
        curves = np.array([[0.0, 2.0, 4.0], [2.0, 2.0, 8.0]])
        env = envelope_from_curves(curves, [1.0, 2.0, 3.0])
        assert np.allclose(env.lower, [0.05, 2.0, 4.1])
        assert np.allclose(env.upper, [1.95, 2.0, 7.9])
        assert env.nsim == 2

    def test_full_level_is_range(self):
        """Test a level near one approaches the pointwise range."""
        curves = np.random.default_rng(0).integers(0, 100, size=(50, 6)).astype(float)
        env = envelope_from_curves(curves, np.arange(6.0), level=1 - 1e-12)
        assert np.allclose(env.lower, curves.min(axis=0))
        assert np.allclose(env.upper, curves.max(axis=0))

    def test_contains(self):
        """Test membership is inclusive at both ends."""
        env = Envelope(distances=[0.0, 1.0], lower=[1.0, 2.0], upper=[3.0, 4.0], nsim=10)
        assert env.contains([1.0, 5.0]).tolist() == [True, False]

    def test_needs_two_simulations(self, guppy):
        """Test nsim < 2 raises DomainError."""
        samples = _samples([list(guppy.model_dump().values())], list(guppy.model_dump()))
        with pytest.raises(DomainError):
            posterior_predictive_envelope(samples, "independent", default_start(2), TimeGrid.regular(3, 0.1), [1.0], nsim=1)

    def test_independent_draws_cannot_drive_dppi(self, guppy):
        """Test movement-only draws are refused by the interacting simulator."""
        samples = _samples([list(guppy.model_dump().values())], list(guppy.model_dump()))
        with pytest.raises(DomainError):
            posterior_predictive_envelope(samples, "dppi", default_start(2), TimeGrid.regular(3, 0.1), [1.0], nsim=2)

    def test_deterministic(self, guppy):
        """Test equal seeds give equal envelopes."""
        samples = _samples([list(guppy.model_dump().values())] * 3, list(guppy.model_dump()))
        grid, d = TimeGrid.regular(5, 0.1), np.linspace(0, 30, 7)
        a, b = (
            posterior_predictive_envelope(samples, "independent", default_start(3), grid, d, nsim=4, rng=np.random.default_rng(2))
            for _ in range(2)
        )
        assert np.array_equal(a.lower, b.lower)
        assert np.array_equal(a.upper, b.upper)

    @pytest.mark.slow
    def test_envelopes_discriminate_cohesive_data(self):
        """Test medium-scenario data rise above the independent envelope at small d and stay inside the DPPI one.

        Envelopes are simulated at the true parameters. A replicate succeeds
        when the data exceed the independent upper band somewhere up to 40 px
        and lie inside the DPPI band at every grid point.
        """
        grid = TimeGrid.regular(200, 0.1)
        iparams = SCENARIOS["medium"].interaction(4.0)
        names = list(GUPPY_MOVEMENT.model_dump()) + ["theta1", "theta2", "theta3"]
        row = list(GUPPY_MOVEMENT.model_dump().values()) + [iparams.theta1, iparams.theta2, iparams.theta3]
        truth = _samples([row], names, model="dppi", radius=4.0)
        distances = np.linspace(0.0, 80.0, 17)
        small = distances <= 40.0
        workers = os.cpu_count() or 1

        successes = 0
        for seed in np.random.SeedSequence(2024).spawn(10):
            rng = np.random.default_rng(seed)
            _, obs = simulate_dppi(default_start(), GUPPY_MOVEMENT, iparams, grid, inner_iters=50, rng=rng)
            data = kstar(obs, distances).counts
            start = obs.obs[0]
            indep = posterior_predictive_envelope(truth, "independent", start, grid, distances, nsim=100, rng=rng, workers=workers)
            dppi = posterior_predictive_envelope(
                truth, "dppi", start, grid, distances, nsim=100, rng=rng, inner_iters=50, workers=workers
            )
            escapes = bool(np.any(data[small] > indep.upper[small]))
            successes += int(escapes and np.all(dppi.contains(data)))
        assert successes >= 9


class TestSummarize:
    """Test posterior tables."""

    def test_constant_column(self):
        """Test a constant column has equal mean and quantiles and zero MCSE."""
        summary = summarize_posterior(_samples(np.full((200, 1), 0.25), ["beta"]))
        row = summary.row("beta")
        assert row.mean == row.lower == row.upper == 0.25
        assert row.mcse == 0.0

    def test_quantiles_match_sorted_interpolation(self):
        """Test the 2.5% and 97.5% quantiles against linear interpolation of sorted draws."""
        x = np.random.default_rng(4).normal(size=501)
        row = summarize_posterior(_samples(x[:, None], ["gamma1"])).row("gamma1")
        s = np.sort(x)
        for q, got in ((0.025, row.lower), (0.975, row.upper)):
            h = (len(s) - 1) * q
            lo = int(np.floor(h))
            assert got == pytest.approx(s[lo] + (h - lo) * (s[lo + 1] - s[lo]), rel=1e-12)
        assert row.mean == pytest.approx(x.mean())

    def test_short_chain_has_no_mcse(self):
        """Test MCSE is unset below the batch-means minimum."""
        row = summarize_posterior(_samples(np.arange(50.0)[:, None], ["beta"])).row("beta")
        assert row.mcse is None

    def test_pooled_chains(self):
        """Test chains are pooled and MCSE combines per-chain errors."""
        rng = np.random.default_rng(6)
        runs = [_samples(rng.normal(size=(400, 2)), ["beta", "sigma2"]) for _ in range(2)]
        summary = summarize_posterior(runs)
        assert summary.draws == 800
        assert summary.chains == 2
        assert summary.row("sigma2").mcse < summary.row("sigma2").upper - summary.row("sigma2").lower

    def test_render_table(self):
        """Test the table names every parameter."""
        summary = summarize_posterior(_samples(np.ones((120, 2)), ["beta", "theta3"]))
        table = summary.render_table()
        assert "beta" in table and "theta3" in table
        assert table.splitlines()[0].startswith("model=independent")

    def test_no_draws(self):
        """Test an empty run raises DomainError."""
        with pytest.raises(DomainError):
            summarize_posterior(_samples(np.empty((0, 1)), ["beta"]))

    def test_unknown_row(self):
        """Test asking for a missing parameter raises KeyError."""
        with pytest.raises(KeyError):
            summarize_posterior(_samples(np.ones((5, 1)), ["beta"])).row("theta1")
