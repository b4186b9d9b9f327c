import math

import numpy as np
import pytest
from scipy import stats

from mzmemory import (
    DEFAULT_GRID,
    EnsembleFailure,
    FitDiverged,
    NoiseConfig,
    RedrawExhausted,
    blp_channel,
    ensemble,
    fit_decoherence,
    kappa_path,
    noisy_trace_distance_trajectory,
    perturb_state,
    plus_state,
    substream,
    validate_state,
)

from conftest import config_at

FIG5_DIP = 104910e-9  # fringe minimum where P_0 ~ 0.27
FIG5_FLANK = FIG5_DIP - 10e-9


class TestSubstream:
    def test_deterministic(self):
        a = substream(42, 3).normal(size=5)
        b = substream(42, 3).normal(size=5)
        assert np.array_equal(a, b)

    def test_distinct_runs(self):
        a = substream(42, 0).normal(size=5)
        b = substream(42, 1).normal(size=5)
        assert not np.array_equal(a, b)


class TestPerturbState:
    def test_zero_noise_is_identity(self):
        rng = substream(0, 0)
        mixed = np.diag([0.5, 0.5]).astype(complex)
        assert np.allclose(perturb_state(mixed, 0.0, rng), mixed)

    def test_trace_preserved_exactly(self):
        rng = substream(1, 0)
        mixed = np.diag([0.5, 0.5]).astype(complex)
        for _ in range(100):
            out = perturb_state(mixed, 0.01, rng)
            assert np.trace(out).real == 1.0
            validate_state(out)

    def test_half_normal_offdiagonal_mean(self):
        # |eps_2| is half-normal: mean sigma_tilde * sqrt(2/pi)
        rng = substream(2, 0)
        sigma_tilde = 0.01
        mixed = np.diag([0.5, 0.5]).astype(complex)
        n = 20000
        mags = np.empty(n)
        for i in range(n):
            out = perturb_state(mixed, sigma_tilde, rng)
            mags[i] = abs(out[0, 1])
        expected = sigma_tilde * math.sqrt(2.0 / math.pi)
        assert np.mean(mags) == pytest.approx(expected, rel=0.02)

    def test_redraw_exhausted_on_pure_state_with_huge_noise(self):
        with pytest.raises(RedrawExhausted):
            perturb_state(plus_state(), 50.0, substream(3, 0))


class TestNoisyTrajectory:
    def test_noiseless_limit(self, reference_config):
        noise = NoiseConfig(full_width=0.0, seed=0, repetitions=2)
        traj = noisy_trace_distance_trajectory(reference_config, 0, noise, substream(0, 0))
        expected = np.abs(kappa_path(DEFAULT_GRID.points(), reference_config, 0))
        assert np.max(np.abs(traj.values - expected)) < 1e-12

    def test_same_seed_same_trajectory(self, reference_config):
        noise = NoiseConfig(full_width=0.06, seed=7, repetitions=2)
        a = noisy_trace_distance_trajectory(reference_config, 0, noise, substream(7, 0))
        b = noisy_trace_distance_trajectory(reference_config, 0, noise, substream(7, 0))
        assert np.array_equal(a.values, b.values)

    def test_bounded_and_clamped(self, reference_config):
        noise = NoiseConfig(full_width=0.3, seed=8, repetitions=2)
        traj = noisy_trace_distance_trajectory(reference_config, 0, noise, substream(8, 0))
        assert np.all(traj.values >= 0.0)
        assert np.all(traj.values <= 1.0)

    def test_noise_is_unbiased_away_from_bounds(self):
        # average of many noisy trajectories tracks |kappa_j| where the
        # clamp is inactive
        cfg = config_at(FIG5_FLANK)
        noise = NoiseConfig(full_width=0.06, seed=9, repetitions=2)
        expected = np.abs(kappa_path(DEFAULT_GRID.points(), cfg, 0))
        sigma_tilde = noise.sigma_tilde
        keep = (expected > 3 * sigma_tilde) & (expected < 1 - 3 * sigma_tilde)
        n = 400
        acc = np.zeros_like(expected)
        for rep in range(n):
            acc += noisy_trace_distance_trajectory(cfg, 0, noise, substream(9, rep)).values
        bias = acc / n - expected
        # residual convexity bias of the modulus is ~2*sigma_tilde**2/|kappa|,
        # at most ~2*sigma_tilde/3 at the 3-sigma_tilde cutoff
        assert np.max(np.abs(bias[keep])) < sigma_tilde


class TestFitDecoherence:
    def test_self_fit_is_exact(self):
        cfg = config_at(FIG5_FLANK)
        traj = np.abs(kappa_path(DEFAULT_GRID.points(), cfg, 0))
        dx_hat, fitted = fit_decoherence(traj, cfg, 0)
        assert dx_hat == cfg.delta_x
        assert np.array_equal(fitted, traj)

    def test_offset_template_recovers_truth(self):
        cfg = config_at(FIG5_FLANK - 90e-9)
        traj = np.abs(kappa_path(DEFAULT_GRID.points(), cfg, 0))
        from dataclasses import replace

        dx_hat, _ = fit_decoherence(traj, replace(cfg, delta_x=cfg.delta_x + 5e-9), 0)
        assert abs(dx_hat - cfg.delta_x) < 1e-11

    def test_diverged_when_optimum_leaves_bracket(self):
        cfg = config_at(FIG5_DIP)
        traj = np.abs(kappa_path(DEFAULT_GRID.points(), cfg, 0))
        from dataclasses import replace

        with pytest.raises(FitDiverged):
            fit_decoherence(traj, replace(cfg, delta_x=cfg.delta_x + 390e-9), 0)


class TestEnsemble:
    def test_zero_noise_ensemble(self):
        cfg = config_at(FIG5_FLANK)
        res = ensemble(cfg, 0, NoiseConfig(full_width=0.0, seed=1, repetitions=3), threads=1)
        assert res.std_measure == 0.0
        assert res.failures == 0
        noiseless = blp_channel(cfg, 0, DEFAULT_GRID).measure
        assert res.mean_measure == pytest.approx(noiseless, abs=1e-10)

    def test_determinism_and_parallel_equivalence(self):
        cfg = config_at(FIG5_FLANK)
        noise = NoiseConfig(full_width=0.05, seed=9, repetitions=12)
        serial = ensemble(cfg, 0, noise, threads=1)
        again = ensemble(cfg, 0, noise, threads=1)
        parallel = ensemble(cfg, 0, noise, threads=8)
        assert serial == again == parallel

    def test_spread_grows_with_noise_width(self):
        # Spearman correlation between FW and the measure spread over many
        # seeds, significant at 95%
        cfg = config_at(FIG5_FLANK)
        fws = [0.01, 0.03, 0.06, 0.1]
        xs, ys = [], []
        for seed in range(10):
            for fw in fws:
                res = ensemble(
                    cfg, 0, NoiseConfig(full_width=fw, seed=seed, repetitions=10), threads=1
                )
                xs.append(fw)
                ys.append(res.std_measure)
        rho, pvalue = stats.spearmanr(xs, ys)
        assert rho > 0
        assert pvalue < 0.05

    def test_all_failures_raises(self):
        cfg = config_at(FIG5_FLANK)
        with pytest.raises(EnsembleFailure):
            ensemble(cfg, 0, NoiseConfig(full_width=30.0, seed=2, repetitions=4), threads=1)
