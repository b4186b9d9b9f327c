"""
Closed-form dephasing physics of the unbalanced Mach-Zehnder interferometer.

All dynamics are computed in the dimensionless time tau = 2*pi*sigma*delta_n*t
with the phase ratio r = mu/sigma.  Physical-unit inputs (Hz, meters) are
converted once at the boundary by :func:`reduce`; this keeps the internal
arithmetic free of the ~1e14 * 1e-13 magnitude spread of Hz-times-seconds
products and makes the standard time grid exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePath, NonPhysical

SPEED_OF_LIGHT = 299_792_458.0  # m/s, exact

# Numerical tolerances used throughout the package.
HERMITICITY_ATOL = 1e-12
TRACE_ATOL = 1e-12
PSD_ATOL = 1e-12
DEGENERATE_PATH_THRESHOLD = 1e-12
MODULUS_SLACK = 1e-9


@dataclass(frozen=True)
class PhysicalConfig:
    """Experiment parameters in physical units.

    mu, sigma: center frequency and spectral standard deviation of the
    Gaussian photon spectrum, in Hz.  delta_n is the birefringence of the
    crystals (n_H - n_V, dimensionless).  delta_x is the interferometer path
    difference x_0 - x_1 in meters; either sign is allowed.
    """

    mu: float
    sigma: float
    delta_n: float
    delta_x: float
    c: float = SPEED_OF_LIGHT

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if self.delta_n == 0:
            raise ValueError("delta_n must be nonzero")
        if self.c != SPEED_OF_LIGHT:
            raise ValueError("c is a fixed constant")


@dataclass(frozen=True)
class ReducedConfig:
    """Dimensionless internal parameters.

    r = mu/sigma, tau_s = 2*pi*sigma*delta_x/c (the echo shift on the reduced
    time axis), phi = 2*pi*mu*delta_x/c (the interferometric phase).  The
    identity phi = r*tau_s holds by construction.
    """

    r: float
    tau_s: float
    phi: float


def reduce(config: PhysicalConfig) -> ReducedConfig:
    """Convert a physical configuration to dimensionless internal units."""
    r = config.mu / config.sigma
    tau_s = 2.0 * np.pi * config.sigma * config.delta_x / config.c
    phi = 2.0 * np.pi * config.mu * config.delta_x / config.c
    return ReducedConfig(r=r, tau_s=tau_s, phi=phi)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid on the dimensionless time axis tau = 2*pi*sigma*delta_n*t.

    The default covers tau in [0, 5] with step 0.01 (501 points inclusive).
    """

    tau_min: float = 0.0
    tau_max: float = 5.0
    tau_step: float = 0.01

    def __post_init__(self):
        if self.tau_min > self.tau_max:
            raise ValueError("tau_min must not exceed tau_max")
        if not self.tau_step > 0:
            raise ValueError(f"tau_step must be positive, got {self.tau_step}")

    @property
    def n_points(self) -> int:
        return int(np.floor((self.tau_max - self.tau_min) / self.tau_step + 1e-9)) + 1

    def points(self) -> np.ndarray:
        n = self.n_points
        return self.tau_min + self.tau_step * np.arange(n)


DEFAULT_GRID = TimeGrid()


@dataclass
class Trajectory:
    """Per-grid-point samples: complex decoherence values or real trace distances."""

    grid: TimeGrid
    values: np.ndarray
    kind: str = "kappa"  # "kappa" | "trace_distance"

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if len(self.values) != self.grid.n_points:
            raise ValueError(
                f"trajectory length {len(self.values)} does not match "
                f"grid point count {self.grid.n_points}"
            )
        if self.kind == "kappa" and np.any(np.abs(self.values) > 1.0 + MODULUS_SLACK):
            raise NonPhysical("decoherence values exceed unit modulus")


def kappa(tau, r):
    """Decoherence function of the Gaussian spectrum in reduced units.

    kappa(tau) = exp(i*r*tau - tau**2/2); accepts scalars or arrays.
    """
    tau = np.asarray(tau, dtype=float)
    out = np.exp(1j * r * tau - 0.5 * tau * tau)
    return out if out.ndim else complex(out)


def path_probability(config: PhysicalConfig, j: int) -> float:
    """Probability of detecting the photon on interferometer exit path j.

    P_1 is computed as 1 - P_0 so completeness holds exactly.
    """
    if j not in (0, 1):
        raise ValueError(f"path index must be 0 or 1, got {j}")
    rc = reduce(config)
    p0 = 0.5 * (1.0 + np.exp(-0.5 * rc.tau_s**2) * np.cos(rc.phi))
    p0 = min(max(p0, 0.0), 1.0)
    return p0 if j == 0 else 1.0 - p0


def kappa_path(tau, config: PhysicalConfig, j: int):
    """Path-conditioned decoherence function.

    Mixes the unconditioned kappa with echo terms shifted by the reduced
    path delay tau_s, normalized by the path probability.  Accepts scalar or
    array tau.
    """
    p = path_probability(config, j)
    if p < DEGENERATE_PATH_THRESHOLD:
        raise DegeneratePath(
            f"path probability P_{j} = {p:.3e} below degeneracy threshold"
        )
    rc = reduce(config)
    sign = 1.0 if j == 0 else -1.0
    out = (
        2.0 * kappa(tau, rc.r)
        + sign * kappa(np.asarray(tau, dtype=float) + rc.tau_s, rc.r)
        + sign * kappa(np.asarray(tau, dtype=float) - rc.tau_s, rc.r)
    ) / (4.0 * p)
    return out if np.ndim(out) else complex(out)


def plus_state() -> np.ndarray:
    """Density matrix of (|H> + |V>)/sqrt(2)."""
    return np.full((2, 2), 0.5, dtype=complex)


def minus_state() -> np.ndarray:
    """Density matrix of (|H> - |V>)/sqrt(2)."""
    return np.array([[0.5, -0.5], [-0.5, 0.5]], dtype=complex)


def min_eigenvalue(rho: np.ndarray) -> float:
    """Smallest eigenvalue of a 2x2 Hermitian matrix, closed form."""
    half_trace = 0.5 * float(np.real(rho[0, 0] + rho[1, 1]))
    det = float(np.real(rho[0, 0] * rho[1, 1] - rho[0, 1] * rho[1, 0]))
    disc = max(half_trace * half_trace - det, 0.0)
    return half_trace - np.sqrt(disc)


def validate_state(rho: np.ndarray, atol: float = HERMITICITY_ATOL) -> np.ndarray:
    """Check the polarization density matrix invariants; returns the input."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise NonPhysical(f"expected a 2x2 matrix, got shape {rho.shape}")
    if not np.allclose(rho, rho.conj().T, atol=atol, rtol=0):
        raise NonPhysical("state is not Hermitian")
    if abs(np.trace(rho) - 1.0) > TRACE_ATOL:
        raise NonPhysical(f"trace is {np.trace(rho)}, expected 1")
    if min_eigenvalue(rho) < -PSD_ATOL:
        raise NonPhysical("state has a negative eigenvalue")
    return rho


def apply_dephasing(state: np.ndarray, kappa_value: complex) -> np.ndarray:
    """Apply the dephasing channel with decoherence value kappa_value.

    Populations are preserved exactly; the coherences are scaled by
    kappa_value and its conjugate.
    """
    if abs(kappa_value) > 1.0 + MODULUS_SLACK:
        raise NonPhysical(f"|kappa| = {abs(kappa_value)} exceeds 1")
    out = np.asarray(state, dtype=complex).copy()
    out[0, 1] *= kappa_value
    out[1, 0] *= np.conj(kappa_value)
    if min_eigenvalue(out) < -PSD_ATOL:
        raise NonPhysical("dephased state lost positivity")
    return out
