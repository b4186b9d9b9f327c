import numpy as np
import pytest

from mzmemory import (
    DEFAULT_GRID,
    SPEED_OF_LIGHT,
    DegeneratePath,
    NonPhysical,
    PhysicalConfig,
    TimeGrid,
    apply_dephasing,
    kappa,
    kappa_path,
    minus_state,
    path_probability,
    plus_state,
    reduce,
    validate_state,
)

from conftest import config_at, config_from_reduced, random_state


class TestReduce:
    def test_reference_constants(self, reference_config):
        rc = reduce(reference_config)
        # mu = 299792458 / 780e-9 Hz, sigma = 5.68e11 Hz, by hand:
        assert rc.r == pytest.approx(676.671, abs=1e-3)
        assert rc.tau_s == pytest.approx(0.0603553, rel=1e-5)
        assert rc.phi == pytest.approx(40.8407, rel=1e-5)

    def test_zero_path_difference(self):
        rc = reduce(config_at(0.0))
        assert rc.tau_s == 0.0
        assert rc.phi == 0.0

    def test_phi_is_r_times_tau_s(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            rc = reduce(config_from_reduced(rng.uniform(10, 1000), rng.uniform(0.01, 10)))
            assert rc.phi == pytest.approx(rc.r * rc.tau_s, rel=1e-12)

    def test_invalid_config_rejected(self):
        with pytest.raises(ValueError):
            PhysicalConfig(mu=1e14, sigma=-1.0, delta_n=0.009, delta_x=0.0)
        with pytest.raises(ValueError):
            PhysicalConfig(mu=1e14, sigma=1e11, delta_n=0.0, delta_x=0.0)
        with pytest.raises(ValueError):
            PhysicalConfig(mu=-1e14, sigma=1e11, delta_n=0.009, delta_x=0.0)


class TestKappa:
    def test_at_zero(self):
        assert kappa(0.0, 676.0) == pytest.approx(1.0 + 0.0j)

    def test_modulus_at_one(self):
        assert abs(kappa(1.0, 123.4)) == pytest.approx(np.exp(-0.5), rel=1e-12)

    def test_negative_time_is_conjugate(self):
        k = kappa(1.0, 55.0)
        assert kappa(-1.0, 55.0) == pytest.approx(np.conj(k), rel=1e-12)

    def test_array_input(self):
        taus = np.linspace(-3, 3, 11)
        vals = kappa(taus, 10.0)
        assert vals.shape == taus.shape
        assert np.allclose(np.abs(vals), np.exp(-0.5 * taus**2))


class TestPathProbability:
    def test_balanced_interferometer(self):
        cfg = config_at(0.0)
        assert path_probability(cfg, 0) == 1.0
        assert path_probability(cfg, 1) == 0.0

    def test_reference_dark_port(self, reference_config):
        assert path_probability(reference_config, 0) < 0.01

    def test_large_delta_x_limit(self):
        cfg = config_at(5e-3)  # tau_s >> 1, envelope dead
        assert path_probability(cfg, 0) == pytest.approx(0.5, abs=1e-6)
        assert path_probability(cfg, 1) == pytest.approx(0.5, abs=1e-6)

    def test_completeness_exact(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            cfg = config_at(rng.uniform(-2e-4, 2e-4))
            assert path_probability(cfg, 0) + path_probability(cfg, 1) == 1.0

    def test_invalid_path_index(self, reference_config):
        with pytest.raises(ValueError):
            path_probability(reference_config, 2)


class TestKappaPath:
    def test_balanced_reduces_to_kappa(self):
        cfg = config_at(0.0)
        taus = np.linspace(0, 5, 51)
        assert np.allclose(kappa_path(taus, cfg, 0), kappa(taus, reduce(cfg).r), atol=1e-14)

    def test_normalization_at_zero(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            cfg = config_from_reduced(rng.uniform(10, 1000), rng.uniform(0, 10))
            for j in (0, 1):
                if path_probability(cfg, j) > 1e-6:
                    assert kappa_path(0.0, cfg, j) == pytest.approx(1.0, abs=1e-12)

    def test_revival_at_reference_point(self, reference_config):
        moduli = np.abs(kappa_path(DEFAULT_GRID.points(), reference_config, 0))
        assert np.any(np.diff(moduli) > 1e-3), "expected a modulus revival"

    def test_degenerate_path_raises(self):
        with pytest.raises(DegeneratePath):
            kappa_path(1.0, config_at(0.0), 1)

    def test_mixture_identity(self):
        rng = np.random.default_rng(3)
        taus = DEFAULT_GRID.points()
        for _ in range(100):
            cfg = config_from_reduced(rng.uniform(10, 1000), rng.uniform(0.05, 10))
            p0 = path_probability(cfg, 0)
            p1 = path_probability(cfg, 1)
            if min(p0, p1) <= 1e-12:
                continue
            mix = p0 * kappa_path(taus, cfg, 0) + p1 * kappa_path(taus, cfg, 1)
            assert np.max(np.abs(mix - kappa(taus, reduce(cfg).r))) < 1e-10

    def test_modulus_bound(self):
        rng = np.random.default_rng(4)
        taus = DEFAULT_GRID.points()
        for _ in range(100):
            cfg = config_from_reduced(rng.uniform(10, 1000), rng.uniform(0, 10))
            for j in (0, 1):
                if path_probability(cfg, j) > 1e-12:
                    assert np.max(np.abs(kappa_path(taus, cfg, j))) <= 1.0 + 1e-9

    def test_sign_symmetry(self):
        rng = np.random.default_rng(5)
        taus = np.linspace(0, 5, 100)
        for _ in range(20):
            dx = rng.uniform(1e-7, 1e-4)
            for j in (0, 1):
                assert np.allclose(
                    kappa_path(taus, config_at(dx), j),
                    kappa_path(taus, config_at(-dx), j),
                    atol=1e-12,
                )
                assert path_probability(config_at(dx), j) == path_probability(
                    config_at(-dx), j
                )


class TestApplyDephasing:
    def test_identity_channel(self):
        rng = np.random.default_rng(6)
        rho = random_state(rng)
        assert np.allclose(apply_dephasing(rho, 1.0), rho)

    def test_full_dephasing(self):
        out = apply_dephasing(plus_state(), 0.0)
        assert np.allclose(out, np.diag([0.5, 0.5]))

    def test_partial_dephasing(self):
        out = apply_dephasing(plus_state(), np.exp(-0.5))
        assert out[0, 1] == pytest.approx(0.5 * np.exp(-0.5), rel=1e-12)

    def test_preserves_state_invariants(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            rho = random_state(rng)
            k = rng.uniform(0, 1) * np.exp(1j * rng.uniform(0, 2 * np.pi))
            out = apply_dephasing(rho, k)
            validate_state(out)
            assert np.allclose(np.diag(out), np.diag(rho))

    def test_rejects_superunitary_kappa(self):
        with pytest.raises(NonPhysical):
            apply_dephasing(plus_state(), 1.5)


class TestTimeGrid:
    def test_default_grid_has_501_points(self):
        assert DEFAULT_GRID.n_points == 501
        pts = DEFAULT_GRID.points()
        assert pts[0] == 0.0
        assert pts[-1] == pytest.approx(5.0, abs=1e-12)

    def test_invalid_grid(self):
        with pytest.raises(ValueError):
            TimeGrid(tau_step=0.0)
        with pytest.raises(ValueError):
            TimeGrid(tau_min=2.0, tau_max=1.0)


def test_speed_of_light_constant():
    assert SPEED_OF_LIGHT == 299792458.0
