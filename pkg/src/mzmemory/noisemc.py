"""
Monte-Carlo noise pipeline: perturb the path-conditioned states with random
Hermitian traceless noise, enforce physicality by redraw, fit the model
decoherence modulus to the noisy trace-distance trajectory, and aggregate
the spread of the perturbed memory-effect measures.

Randomness comes from numpy's counter-based Philox generator.  Substream
derivation: repetition k of a run with seed s uses
Philox(SeedSequence(entropy=s, spawn_key=(k,))), so parallel and serial
execution of the repetitions produce bit-identical results.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .dephasing import (
    DEFAULT_GRID,
    PhysicalConfig,
    TimeGrid,
    Trajectory,
    kappa_path,
    min_eigenvalue,
    path_probability,
    validate_state,
)
from .errors import DegeneratePath, EnsembleFailure, FitDiverged, RedrawExhausted
from .nonmarkov import blp_from_samples

FIT_TOLERANCE_M = 1e-11  # 0.01 nm absolute tolerance on the fitted delta_x
COARSE_POINTS = 41
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI_SQ = (3.0 - math.sqrt(5.0)) / 2.0

THREADS_ENV_VAR = "MZMEMORY_THREADS"


def thread_count() -> int:
    """Worker count for parallel loops; MZMEMORY_THREADS overrides."""
    value = os.environ.get(THREADS_ENV_VAR)
    if value:
        return max(int(value), 1)
    return os.cpu_count() or 1


@dataclass(frozen=True)
class NoiseConfig:
    """Monte-Carlo noise settings.

    full_width is the full width FW of the additive noise; the normal draws
    use sigma_tilde = FW/6.
    """

    full_width: float
    seed: int
    repetitions: int = 100
    grid: TimeGrid = field(default_factory=lambda: DEFAULT_GRID)
    max_redraws: int = 1000

    def __post_init__(self):
        if self.full_width < 0:
            raise ValueError("full_width must be nonnegative")
        if self.repetitions < 2:
            raise ValueError("repetitions must be at least 2")

    @property
    def sigma_tilde(self) -> float:
        return self.full_width / 6.0


@dataclass(frozen=True)
class EnsembleResult:
    mean_measure: float
    std_measure: float
    fitted_delta_x_samples: tuple
    failures: int


def substream(seed: int, run_index: int) -> np.random.Generator:
    """Independent Philox stream for one repetition of a seeded run."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(run_index,))
    return np.random.Generator(np.random.Philox(ss))


def perturb_state(state: np.ndarray, sigma_tilde: float, rng: np.random.Generator) -> np.ndarray:
    """Add Hermitian traceless noise to a state, redrawing until physical.

    eps_1 and eps_2 are normal(0, sigma_tilde), the phase eps_3 is uniform on
    [0, 2*pi); the perturbation preserves the trace exactly.  Raises
    RedrawExhausted after 1000 nonphysical draws.
    """
    state = validate_state(state)
    if sigma_tilde < 0:
        raise ValueError("sigma_tilde must be nonnegative")
    for _ in range(1000):
        eps1 = rng.normal(0.0, sigma_tilde)
        eps2 = rng.normal(0.0, sigma_tilde)
        eps3 = rng.uniform(0.0, 2.0 * np.pi)
        off = eps2 * np.exp(1j * eps3)
        candidate = state + np.array([[eps1, off], [np.conj(off), -eps1]])
        if min_eigenvalue(candidate) >= 0.0:
            return candidate
    raise RedrawExhausted("no physical perturbation found in 1000 draws")


def _perturbed_components(kappa_vals, sign, sigma_tilde, rng, max_redraws):
    """Noise applied to the dephased |+> or |-> family, one draw per grid point.

    The dephased state is [[1/2, s*k/2], [s*k*/2, 1/2]]; the perturbed state
    is physical iff 1/4 - eps1**2 >= |s*k/2 + eps2*e^{i eps3}|**2.  Returns
    the population shifts eps1 and the full coherences.
    """
    n = len(kappa_vals)
    eps1 = rng.normal(0.0, sigma_tilde, n)
    eps2 = rng.normal(0.0, sigma_tilde, n)
    eps3 = rng.uniform(0.0, 2.0 * np.pi, n)
    coh = sign * kappa_vals / 2.0 + eps2 * np.exp(1j * eps3)
    bad = 0.25 - eps1 * eps1 < np.abs(coh) ** 2
    attempts = 1
    while np.any(bad):
        if attempts >= max_redraws:
            raise RedrawExhausted(
                f"{np.count_nonzero(bad)} grid points still nonphysical "
                f"after {max_redraws} redraws"
            )
        idx = np.flatnonzero(bad)
        e1 = rng.normal(0.0, sigma_tilde, idx.size)
        e2 = rng.normal(0.0, sigma_tilde, idx.size)
        e3 = rng.uniform(0.0, 2.0 * np.pi, idx.size)
        eps1[idx] = e1
        coh[idx] = sign * kappa_vals[idx] / 2.0 + e2 * np.exp(1j * e3)
        bad = 0.25 - eps1 * eps1 < np.abs(coh) ** 2
        attempts += 1
    return eps1, coh


def noisy_trace_distance_trajectory(
    config: PhysicalConfig,
    j: int,
    noise: NoiseConfig,
    rng: np.random.Generator,
) -> Trajectory:
    """Trace distance of the independently perturbed |+->-pair along the grid.

    The pair difference is traceless Hermitian, so the trace distance is
    sqrt(x**2 + |y|**2) with x the population shift difference and y the
    coherence difference.  Values are clamped to [0, 1].
    """
    taus = noise.grid.points()
    kvals = kappa_path(taus, config, j)
    sig = noise.sigma_tilde
    eps1_p, coh_p = _perturbed_components(kvals, +1.0, sig, rng, noise.max_redraws)
    eps1_m, coh_m = _perturbed_components(kvals, -1.0, sig, rng, noise.max_redraws)
    x = eps1_p - eps1_m
    y = coh_p - coh_m
    distances = np.minimum(np.sqrt(x * x + np.abs(y) ** 2), 1.0)
    return Trajectory(grid=noise.grid, values=distances, kind="trace_distance")


def _golden_section(objective, a, b, fa_best, x_best, tol):
    """Golden-section minimization on [a, b], tracking the best point seen."""
    h = b - a
    if h <= tol:
        return x_best, fa_best
    n = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))
    c = a + INV_PHI_SQ * h
    d = a + INV_PHI * h
    yc = objective(c)
    yd = objective(d)
    for _ in range(n):
        if yc < fa_best:
            fa_best, x_best = yc, c
        if yd < fa_best:
            fa_best, x_best = yd, d
        if yc < yd:
            b, d, yd = d, c, yc
            h *= INV_PHI
            c = a + INV_PHI_SQ * h
            yc = objective(c)
        else:
            a, c, yc = c, d, yd
            h *= INV_PHI
            d = a + INV_PHI * h
            yd = objective(d)
    for x, y in ((c, yc), (d, yd)):
        if y < fa_best:
            fa_best, x_best = y, x
    return x_best, fa_best


def fit_decoherence(noisy, config_template: PhysicalConfig, j: int):
    """Least-squares fit of |kappa_j| to a noisy trace-distance trajectory.

    The only free parameter is delta_x; all other parameters stay at the
    template values.  A 41-point coarse scan spanning one fringe period
    (half a period to each side of the template delta_x, so the periodic
    alias one fringe away stays outside the bracket) locates the optimum,
    then golden-section search refines it to 0.01 nm.  Returns
    (fitted delta_x, fitted model values).
    """
    if isinstance(noisy, Trajectory):
        grid = noisy.grid
        samples = np.asarray(noisy.values, dtype=float)
    else:
        grid = DEFAULT_GRID
        samples = np.asarray(noisy, dtype=float)
    taus = grid.points()
    if samples.shape != taus.shape:
        raise ValueError("noisy trajectory does not match the evaluation grid")

    def objective(dx):
        cfg = replace(config_template, delta_x=dx)
        try:
            residual = np.abs(kappa_path(taus, cfg, j)) - samples
        except DegeneratePath:
            return np.inf
        return float(residual @ residual)

    half_fringe = 0.5 * config_template.c / config_template.mu
    xs = np.linspace(
        config_template.delta_x - half_fringe,
        config_template.delta_x + half_fringe,
        COARSE_POINTS,
    )
    fs = np.array([objective(x) for x in xs])
    i = int(np.argmin(fs))
    if i == 0 or i == COARSE_POINTS - 1:
        raise FitDiverged("coarse-scan optimum at the bracket boundary")
    # |kappa_j| is nearly even about fringe extrema, so the scan can hold
    # near-degenerate mirror minima, sometimes two inside one coarse cell.
    # Sub-scan each candidate bracket before the golden refinement and keep
    # the best refined point overall.
    best_x, best_f = xs[i], fs[i]
    for k in range(1, COARSE_POINTS - 1):
        if not (fs[k] <= fs[k - 1] and fs[k] <= fs[k + 1]):
            continue
        sub = np.linspace(xs[k - 1], xs[k + 1], 21)
        sub_f = np.array([objective(x) for x in sub])
        m = int(np.argmin(sub_f))
        lo, hi = max(m - 1, 0), min(m + 1, 20)
        cand_x, cand_f = _golden_section(
            objective, sub[lo], sub[hi], sub_f[m], sub[m], FIT_TOLERANCE_M
        )
        if cand_f < best_f:
            best_x, best_f = cand_x, cand_f
    fitted = np.abs(kappa_path(taus, replace(config_template, delta_x=best_x), j))
    return best_x, fitted


def _single_repetition(config, j, noise, rep):
    rng = substream(noise.seed, rep)
    trajectory = noisy_trace_distance_trajectory(config, j, noise, rng)
    dx_hat, fitted = fit_decoherence(trajectory, config, j)
    measure = blp_from_samples(fitted).measure
    return dx_hat, measure


def ensemble(config: PhysicalConfig, j: int, noise: NoiseConfig, threads: int | None = None) -> EnsembleResult:
    """Repeat the noise-fit-measure cycle and aggregate the measure spread.

    Each repetition draws from its own RNG substream, so the aggregate is
    independent of execution order and of the worker count.  std_measure is
    the sample standard deviation (n - 1 divisor) of the perturbed measures.
    """
    path_probability(config, j)  # raises early on invalid path index
    workers = threads if threads is not None else thread_count()
    results = [None] * noise.repetitions

    def run(rep):
        try:
            return _single_repetition(config, j, noise, rep)
        except (RedrawExhausted, FitDiverged):
            return None

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(noise.repetitions)))
    else:
        results = [run(rep) for rep in range(noise.repetitions)]

    ok = [res for res in results if res is not None]
    failures = noise.repetitions - len(ok)
    if failures > noise.repetitions / 2:
        raise EnsembleFailure(
            f"{failures} of {noise.repetitions} repetitions failed"
        )
    measures = np.array([m for _, m in ok])
    dxs = tuple(dx for dx, _ in ok)
    # identical measures (e.g. full_width = 0) must give exactly zero spread
    spread = 0.0 if np.all(measures == measures[0]) else float(np.std(measures, ddof=1))
    return EnsembleResult(
        mean_measure=float(np.mean(measures)),
        std_measure=spread,
        fitted_delta_x_samples=dxs,
        failures=failures,
    )
