"""
Command-line interface: trajectory, sweep, sensitivity, and QCRB outputs as
CSV/JSON, each accompanied by a JSON run manifest that reproduces the output
bit-exactly when replayed with --manifest.

Physical inputs are accepted in Hz and nm only; conversion to SI internals
happens in one place (_config_from_params).  Floats are serialized with
repr (shortest round-trip), divergent sensitivities as "inf", and absent
noise-dependent columns as "na".
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .dephasing import SPEED_OF_LIGHT, PhysicalConfig, TimeGrid, kappa_path
from .errors import DegeneratePath, EnsembleFailure
from .metrology import (
    SINGLE_ARM,
    SweepSpec,
    qcrb,
    qfi_closed_form,
    qfi_numeric_oracle,
    sensitivity_blp_point,
    sensitivity_probability,
    sweep,
)
from .noisemc import NoiseConfig, thread_count
from .nonmarkov import Classification

# Reference-reproduction defaults: mu = c/(780 nm), sigma = 5.68e11 Hz,
# delta_n = 0.009.
DEFAULT_MU_HZ = SPEED_OF_LIGHT / 780e-9
DEFAULT_SIGMA_HZ = 5.68e11
DEFAULT_DELTA_N = 0.009

EXIT_CONFIG_ERROR = 2
EXIT_DEGENERATE = 3
EXIT_ENSEMBLE_FAILURE = 4


class ConfigError(ValueError):
    pass


def _fmt(value) -> str:
    if value is None:
        return "na"
    if isinstance(value, Classification):
        return value.value
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isinf(value):
        return "inf"
    return repr(value)


def _write_csv(path: str, header, rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(cell) for cell in row) for row in rows)
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_manifest(output_path: str, command: str, params: dict) -> None:
    manifest = {
        "tool": "mzmemory",
        "version": __version__,
        "command": command,
        "params": params,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    with open(output_path + ".manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


def _config_from_params(params: dict) -> PhysicalConfig:
    try:
        return PhysicalConfig(
            mu=float(params["mu_hz"]),
            sigma=float(params["sigma_hz"]),
            delta_n=float(params["delta_n"]),
            delta_x=float(params["delta_x_nm"]) * 1e-9,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid physical configuration: {exc}") from exc


def _grid_from_params(params: dict) -> TimeGrid:
    try:
        return TimeGrid(
            tau_min=float(params.get("tau_min", 0.0)),
            tau_max=float(params.get("tau_max", 5.0)),
            tau_step=float(params.get("tau_step", 0.01)),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid time grid: {exc}") from exc


def _merge_config_file(args: argparse.Namespace) -> dict:
    """Flag values layered over an optional flat JSON config file."""
    params = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                params.update(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
    for key in vars(args):
        if key in ("command", "config", "manifest", "output", "func"):
            continue
        value = getattr(args, key)
        if value is not None:
            params[key] = value
    return params


# ---------------------------------------------------------------------------
# Command implementations, each a pure function of a params dict.


def run_trajectory(params: dict, output: str) -> None:
    config = _config_from_params(params)
    grid = _grid_from_params(params)
    j = int(params.get("path", 0))
    if j not in (0, 1):
        raise ConfigError(f"path must be 0 or 1, got {j}")
    taus = grid.points()
    kvals = kappa_path(taus, config, j)
    moduli = np.abs(kvals)
    rows = [
        (tau, kv.real, kv.imag, mod, mod)
        for tau, kv, mod in zip(taus, kvals, moduli)
    ]
    _write_csv(
        output, ["tau", "re_kappa", "im_kappa", "abs_kappa", "trace_distance"], rows
    )


def run_sweep(params: dict, output: str) -> None:
    config = _config_from_params({**params, "delta_x_nm": params.get("delta_x_nm", 0.0) or 0.0})
    grid = _grid_from_params(params)
    noise = None
    if params.get("noise_fw") is not None:
        fws = params["noise_fw"]
        fw = fws[0] if isinstance(fws, list) else fws
        noise = NoiseConfig(
            full_width=float(fw),
            seed=int(params.get("seed", 0)),
            repetitions=int(params.get("reps", 100)),
            grid=grid,
        )
    try:
        spec = SweepSpec(
            delta_x_min=float(params["dx_min_nm"]) * 1e-9,
            delta_x_max=float(params["dx_max_nm"]) * 1e-9,
            steps=int(params["steps"]),
            j=int(params.get("path", 0)),
            grid=grid,
            noise=noise,
            fd_step=float(params.get("fd_step_nm", 0.1)) * 1e-9,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid sweep bounds: {exc}") from exc
    records = sweep(spec, config)
    rows = [
        (
            rec.delta_x * 1e9,
            rec.p0,
            rec.n0,
            rec.n1,
            rec.concurrence,
            None if rec.sens_p is None else rec.sens_p * 1e9,
            None if rec.sens_n is None else rec.sens_n * 1e9,
            rec.qcrb_m1 * 1e9,
            rec.class0,
            rec.class1,
        )
        for rec in records
    ]
    _write_csv(
        output,
        [
            "delta_x_nm",
            "p0",
            "n0",
            "n1",
            "concurrence",
            "sens_p_nm",
            "sens_n_nm",
            "qcrb_m1_nm",
            "class0",
            "class1",
        ],
        rows,
    )


def run_sensitivity(params: dict, output: str) -> None:
    config = _config_from_params({**params, "delta_x_nm": params.get("delta_x_nm", 0.0) or 0.0})
    grid = _grid_from_params(params)
    fws = params.get("noise_fw")
    if fws is None:
        raise ConfigError("--noise-fw is required for the sensitivity command")
    if not isinstance(fws, list):
        fws = [fws]
    try:
        dx_min = float(params["dx_min_nm"]) * 1e-9
        dx_max = float(params["dx_max_nm"]) * 1e-9
        steps = int(params["steps"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid sweep bounds: {exc}") from exc
    seed = int(params.get("seed", 0))
    reps = int(params.get("reps", 100))
    j = int(params.get("path", 0))
    fd_step = float(params.get("fd_step_nm", 0.1)) * 1e-9
    dxs = np.linspace(dx_min, dx_max, steps)
    qcrb_m1 = qcrb(qfi_closed_form(config))

    def point(task):
        fw, dx = task
        cfg = replace(config, delta_x=dx)
        noise = NoiseConfig(full_width=float(fw), seed=seed, repetitions=reps, grid=grid)
        detail = sensitivity_blp_point(cfg, j, grid, noise, fd_step, threads=1)
        return (
            dx * 1e9,
            float(fw),
            detail.sensitivity * 1e9,
            sensitivity_probability(cfg, j) * 1e9,
            qcrb_m1 * 1e9,
            detail.measure_std,
            detail.measure_derivative,
        )

    tasks = [(fw, dx) for fw in fws for dx in dxs]
    workers = thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(point, tasks))
    else:
        rows = [point(task) for task in tasks]
    _write_csv(
        output,
        [
            "delta_x_nm",
            "noise_fw",
            "sens_n_nm",
            "sens_p_nm",
            "qcrb_m1_nm",
            "delta_n_std",
            "dn_ddx",
        ],
        rows,
    )


def run_qcrb(params: dict, output: str | None) -> None:
    config = _config_from_params({**params, "delta_x_nm": params.get("delta_x_nm", 0.0) or 0.0})
    m = int(params.get("m", 1))
    mode = params.get("mode", SINGLE_ARM)
    h_closed = qfi_closed_form(config, mode=mode)
    result = {"h_closed": h_closed, "m": m, "mode": mode}
    if params.get("oracle"):
        result["h_numeric"] = qfi_numeric_oracle(config, mode=mode)
    result["qcrb_m"] = qcrb(h_closed, m)
    text = json.dumps(result, indent=2) + "\n"
    sys.stdout.write(text)
    if output:
        with open(output, "w") as fh:
            fh.write(text)


def run_figures_data(params: dict, output: str) -> None:
    """Produce the CSV bundle behind the three reference figures."""
    import os

    os.makedirs(output, exist_ok=True)
    base = {
        "mu_hz": params.get("mu_hz", DEFAULT_MU_HZ),
        "sigma_hz": params.get("sigma_hz", DEFAULT_SIGMA_HZ),
        "delta_n": params.get("delta_n", DEFAULT_DELTA_N),
    }
    for dx_nm in params.get("fig3_dx_nm", [5060.0, 5070.0, 5080.0]):
        path = os.path.join(output, f"fig3_dx{dx_nm:g}nm.csv")
        traj_params = {**base, "delta_x_nm": dx_nm, "path": 0}
        run_trajectory(traj_params, path)
        _write_manifest(path, "trajectory", traj_params)
    sweep_params = {
        **base,
        "dx_min_nm": params.get("fig4_dx_min_nm", 4900.0),
        "dx_max_nm": params.get("fig4_dx_max_nm", 5250.0),
        "steps": params.get("fig4_steps", 701),
    }
    path = os.path.join(output, "fig4_sweep.csv")
    run_sweep(sweep_params, path)
    _write_manifest(path, "sweep", sweep_params)
    # sensitivity window: one fringe dip of the region where min P_0 ~ 0.27
    dip_nm = 134.5 * (SPEED_OF_LIGHT / base["mu_hz"]) * 1e9
    sens_params = {
        **base,
        "dx_min_nm": params.get("fig5_dx_min_nm", dip_nm - 40.0),
        "dx_max_nm": params.get("fig5_dx_max_nm", dip_nm + 40.0),
        "steps": params.get("fig5_steps", 17),
        "noise_fw": params.get("noise_fw") or [0.01, 0.02, 0.05, 0.1],
        "reps": params.get("reps", 100),
        "seed": params.get("seed", 1234),
    }
    path = os.path.join(output, "fig5_sensitivity.csv")
    run_sensitivity(sens_params, path)
    _write_manifest(path, "sensitivity", sens_params)


RUNNERS = {
    "trajectory": run_trajectory,
    "sweep": run_sweep,
    "sensitivity": run_sensitivity,
    "qcrb": run_qcrb,
    "figures-data": run_figures_data,
}


def _add_config_flags(parser):
    parser.add_argument("--config", help="flat JSON config file; flags override it")
    parser.add_argument("--manifest", help="replay a previously written run manifest")
    parser.add_argument("--mu-hz", dest="mu_hz", type=float, default=None)
    parser.add_argument("--sigma-hz", dest="sigma_hz", type=float, default=None)
    parser.add_argument("--delta-n", dest="delta_n", type=float, default=None)
    parser.add_argument("--delta-x-nm", dest="delta_x_nm", type=float, default=None)


def _add_grid_flags(parser):
    parser.add_argument("--tau-min", dest="tau_min", type=float, default=None)
    parser.add_argument("--tau-max", dest="tau_max", type=float, default=None)
    parser.add_argument("--tau-step", dest="tau_step", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mzmemory",
        description="Open-system Mach-Zehnder dephasing dynamics and "
        "memory-effect metrology",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("trajectory", help="path-conditioned decoherence trajectory CSV")
    _add_config_flags(p)
    _add_grid_flags(p)
    p.add_argument("--path", type=int, default=None, choices=(0, 1))
    p.add_argument("--output", required=True)

    p = sub.add_parser("sweep", help="delta_x sweep CSV (probabilities, measures, sensitivities)")
    _add_config_flags(p)
    _add_grid_flags(p)
    p.add_argument("--dx-min-nm", dest="dx_min_nm", type=float, default=None)
    p.add_argument("--dx-max-nm", dest="dx_max_nm", type=float, default=None)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--path", type=int, default=None, choices=(0, 1))
    p.add_argument("--noise-fw", dest="noise_fw", type=float, action="append", default=None)
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--fd-step-nm", dest="fd_step_nm", type=float, default=None)
    p.add_argument("--output", required=True)

    p = sub.add_parser("sensitivity", help="long-format sensitivity CSV over noise widths")
    _add_config_flags(p)
    _add_grid_flags(p)
    p.add_argument("--dx-min-nm", dest="dx_min_nm", type=float, default=None)
    p.add_argument("--dx-max-nm", dest="dx_max_nm", type=float, default=None)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--path", type=int, default=None, choices=(0, 1))
    p.add_argument("--noise-fw", dest="noise_fw", type=float, action="append", default=None)
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--fd-step-nm", dest="fd_step_nm", type=float, default=None)
    p.add_argument("--output", required=True)

    p = sub.add_parser("qcrb", help="quantum Fisher information and Cramer-Rao bound JSON")
    _add_config_flags(p)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--mode", choices=(SINGLE_ARM, "symmetric"), default=None)
    p.add_argument("--oracle", action="store_true", default=None)
    p.add_argument("--output", default=None)

    p = sub.add_parser("figures-data", help="CSV bundle for the reference figures")
    _add_config_flags(p)
    p.add_argument("--noise-fw", dest="noise_fw", type=float, action="append", default=None)
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--output", required=True, help="output directory")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.manifest:
            with open(args.manifest) as fh:
                manifest = json.load(fh)
            command = manifest["command"]
            params = manifest["params"]
        else:
            command = args.command
            params = _merge_config_file(args)
            params.setdefault("mu_hz", DEFAULT_MU_HZ)
            params.setdefault("sigma_hz", DEFAULT_SIGMA_HZ)
            params.setdefault("delta_n", DEFAULT_DELTA_N)
            params.setdefault("delta_x_nm", 0.0)
        output = getattr(args, "output", None)
        RUNNERS[command](params, output)
        if output and command != "figures-data":
            _write_manifest(output, command, params)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except DegeneratePath as exc:
        print(f"error: degenerate physics: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except ValueError as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except EnsembleFailure as exc:
        print(f"error: ensemble failure: {exc}", file=sys.stderr)
        return EXIT_ENSEMBLE_FAILURE
    return 0


if __name__ == "__main__":
    sys.exit(main())
