"""
Render publication-style figures from mzmemory CSV outputs.

Every plotted value is taken verbatim from the CSV (only string-to-float
parsing and unit relabeling happen here), so the figures cannot drift from
the data they claim to show.  Rendering is deterministic: fixed style, Agg
backend, no timestamps in the saved files.
"""

from __future__ import annotations

import csv
import json
import math
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

STYLE = {
    "figure.figsize": (6.4, 4.0),
    "figure.dpi": 120,
    "savefig.dpi": 120,
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.25,
    "svg.hashsalt": "mzfiggen",
}

# caption-matching encoding: black dashed probability, blue solid/dotted
# memory measure, red solid quantum bound
PROBABILITY_STYLE = {"color": "black", "linestyle": "--"}
MEASURE_COLOR = "tab:blue"
BOUND_STYLE = {"color": "red", "linestyle": "-"}


class MissingColumn(ValueError):
    """A required CSV column is absent."""


class GridMismatch(ValueError):
    """Trajectory files do not share a common time grid."""


def read_table(path: str) -> dict[str, list[str]]:
    """Load a CSV file as a column-name -> list-of-cell-strings mapping."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValueError(f"{path}: empty CSV")
        table = {name: [] for name in reader.fieldnames}
        for row in reader:
            for name in reader.fieldnames:
                table[name].append(row[name])
    return table


def column(table: dict, name: str, path: str) -> list[float]:
    """Numeric column; 'inf' and 'na' become nan so they leave plot gaps."""
    if name not in table:
        raise MissingColumn(f"{path}: missing column '{name}'")
    out = []
    for cell in table[name]:
        if cell in ("na", "inf"):
            out.append(math.nan)
        else:
            out.append(float(cell))
    return out


def divergent_count(table: dict, name: str) -> int:
    return sum(1 for cell in table.get(name, []) if cell == "inf")


def _manifest_delta_x_nm(csv_path: str) -> float:
    manifest_path = csv_path + ".manifest.json"
    try:
        with open(manifest_path) as fh:
            manifest = json.load(fh)
        return float(manifest["params"]["delta_x_nm"])
    except (OSError, KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"{csv_path}: no usable run manifest ({exc})") from exc


def _save(fig, output: str) -> None:
    """Write the requested file plus a companion in the other format.

    A raster output gets a vector sibling and vice versa; SVG metadata is
    stripped of the date so reruns are byte-identical.
    """
    base, ext = os.path.splitext(output)
    companion = base + (".svg" if ext.lower() == ".png" else ".png")
    for path in (output, companion):
        kwargs = {}
        if path.lower().endswith(".svg"):
            kwargs["metadata"] = {"Date": None}
        fig.savefig(path, **kwargs)
    plt.close(fig)


def render_fig3(trajectory_csvs, output: str, title: str | None = None) -> None:
    """Family of trace-distance trajectories, one labeled curve per delta_x."""
    if not trajectory_csvs:
        raise ValueError("at least one trajectory CSV is required")
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        reference_taus = None
        reference_path = None
        for path in trajectory_csvs:
            table = read_table(path)
            taus = column(table, "tau", path)
            values = column(table, "trace_distance", path)
            if reference_taus is None:
                reference_taus, reference_path = taus, path
            elif taus != reference_taus:
                raise GridMismatch(
                    f"time grids differ between {reference_path} and {path}"
                )
            dx_nm = _manifest_delta_x_nm(path)
            ax.plot(taus, values, label=rf"$\Delta x$ = {dx_nm:g} nm")
        ax.set_xlabel(r"$\tau$")
        ax.set_ylabel("trace distance")
        if title:
            ax.set_title(title)
        ax.legend()
        _save(fig, output)


def render_fig4(sweep_csv: str, output: str, zoom_csv: str | None = None) -> None:
    """Exit-path probability (black dashed) against the memory measure
    (blue solid) over delta_x; an optional second sweep adds a zoom panel
    with its range shaded on the main one."""
    with plt.rc_context(STYLE):
        panels = [sweep_csv] if zoom_csv is None else [sweep_csv, zoom_csv]
        fig, axes = plt.subplots(
            len(panels), 1, figsize=(6.4, 3.2 * len(panels)), squeeze=False
        )
        zoom_range = None
        if zoom_csv is not None:
            zoom_dx = column(read_table(zoom_csv), "delta_x_nm", zoom_csv)
            zoom_range = (min(zoom_dx), max(zoom_dx))
        for ax, path in zip(axes[:, 0], panels):
            table = read_table(path)
            dx = column(table, "delta_x_nm", path)
            p0 = column(table, "p0", path)
            n0 = column(table, "n0", path)
            ax.plot(dx, p0, **PROBABILITY_STYLE, label=r"$P_0$")
            ax.set_ylabel(r"$P_0$")
            twin = ax.twinx()
            twin.plot(dx, n0, color=MEASURE_COLOR, linestyle="-", label=r"$N(\Phi_0)$")
            twin.set_ylabel(r"$N(\Phi_0)$", color=MEASURE_COLOR)
            twin.tick_params(axis="y", labelcolor=MEASURE_COLOR)
            twin.grid(False)
            ax.set_xlabel(r"$\Delta x$ (nm)")
            if path is sweep_csv and zoom_range is not None:
                ax.axvspan(*zoom_range, color=MEASURE_COLOR, alpha=0.12)
            lines = ax.get_lines() + twin.get_lines()
            ax.legend(lines, [line.get_label() for line in lines], loc="upper right")
        fig.tight_layout()
        _save(fig, output)


def render_fig5(sensitivity_csv: str, output: str) -> None:
    """Sensitivities against the quantum bound, log scale.

    Memory-measure sensitivities are dot series in blue shades (one per
    noise width), the probability sensitivity is a dashed curve with gaps
    at divergent points, and the bound is a red solid line.  Divergent
    ("inf") points are dropped from the plot; their count is noted in the
    figure margin.
    """
    table = read_table(sensitivity_csv)
    dx = column(table, "delta_x_nm", sensitivity_csv)
    fw_cells = table.get("noise_fw")
    if fw_cells is None:
        raise MissingColumn(f"{sensitivity_csv}: missing column 'noise_fw'")
    sens_n = column(table, "sens_n_nm", sensitivity_csv)
    sens_p = column(table, "sens_p_nm", sensitivity_csv)
    bound = column(table, "qcrb_m1_nm", sensitivity_csv)

    fws = sorted({float(cell) for cell in fw_cells})
    shades = plt.cm.Blues([0.45 + 0.5 * i / max(len(fws) - 1, 1) for i in range(len(fws))])
    dropped = divergent_count(table, "sens_n_nm") + divergent_count(table, "sens_p_nm")

    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for fw, shade in zip(fws, shades):
            xs = [x for x, c in zip(dx, fw_cells) if float(c) == fw]
            ys = [y for y, c in zip(sens_n, fw_cells) if float(c) == fw]
            ax.plot(xs, ys, "o", color=shade, label=f"memory readout, FW = {fw:g}")
        first_group = [i for i, c in enumerate(fw_cells) if float(c) == fws[0]]
        ax.plot(
            [dx[i] for i in first_group],
            [sens_p[i] for i in first_group],
            **PROBABILITY_STYLE,
            label="probability readout",
        )
        finite_bounds = [b for b in bound if not math.isnan(b)]
        if finite_bounds:
            ax.axhline(finite_bounds[0], **BOUND_STYLE, label="quantum bound")
        ax.set_yscale("log")
        ax.set_xlabel(r"$\Delta x$ (nm)")
        ax.set_ylabel("smallest detectable shift (nm)")
        ax.legend(fontsize=8)
        if dropped:
            fig.text(
                0.99, 0.01, f"{dropped} divergent point(s) omitted",
                ha="right", va="bottom", fontsize=7, color="gray",
            )
        fig.tight_layout()
        _save(fig, output)
