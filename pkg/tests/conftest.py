import numpy as np
import pytest

from mzmemory import SPEED_OF_LIGHT, PhysicalConfig

REF_MU = SPEED_OF_LIGHT / 780e-9
REF_SIGMA = 5.68e11
REF_DELTA_N = 0.009

# 2*pi*sigma/c at the reference parameters, 1/m: converts delta_x to the
# reduced echo shift tau_s.
TAU_S_PER_METER = 2.0 * np.pi * REF_SIGMA / SPEED_OF_LIGHT


@pytest.fixture
def reference_config():
    """Reference parameters of the figure captions, delta_x = 5070 nm."""
    return PhysicalConfig(
        mu=REF_MU, sigma=REF_SIGMA, delta_n=REF_DELTA_N, delta_x=5070e-9
    )


def config_at(delta_x: float) -> PhysicalConfig:
    return PhysicalConfig(
        mu=REF_MU, sigma=REF_SIGMA, delta_n=REF_DELTA_N, delta_x=delta_x
    )


def config_from_reduced(r: float, tau_s: float) -> PhysicalConfig:
    """Build a physical configuration realizing given reduced parameters."""
    sigma = REF_SIGMA
    delta_x = tau_s * SPEED_OF_LIGHT / (2.0 * np.pi * sigma)
    return PhysicalConfig(mu=r * sigma, sigma=sigma, delta_n=REF_DELTA_N, delta_x=delta_x)


def random_state(rng) -> np.ndarray:
    """Random qubit density matrix (mixture of two random pure states)."""
    def pure():
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        v /= np.linalg.norm(v)
        return np.outer(v, v.conj())

    w = rng.uniform()
    return w * pure() + (1.0 - w) * pure()
