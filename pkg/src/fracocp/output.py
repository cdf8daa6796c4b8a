"""CSV trajectory files, the scenario summary table and SVG figures."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from .fracode import TimeGrid
from .model import COMPARTMENTS

TRAJECTORY_HEADER = ("t", "S", "E", "I", "R", "u1", "u2", "lambda1", "lambda2", "lambda3", "lambda4")
SUMMARY_HEADER = ("variant", "alpha", "objective", "iterations", "converged", "stationarity_residual")


def format_float(value: float) -> str:
    """Shortest decimal string that parses back to the same double."""
    text = repr(float(value))
    return text[:-2] if text.endswith(".0") else text


def format_alpha(alpha: float) -> str:
    return format_float(alpha)


def trajectory_filename(variant: str, alpha: float) -> str:
    return f"{variant}_alpha{format_alpha(alpha)}.csv"


def write_csv(
    path: str | Path,
    grid: TimeGrid,
    states: NDArray,
    controls: NDArray | None = None,
    adjoints: NDArray | None = None,
) -> Path:
    """One row per node; missing controls or adjoints are written as zeros."""
    n = grid.n_nodes
    states = np.asarray(states, dtype=float)
    controls = np.zeros((n, 2)) if controls is None else np.asarray(controls, dtype=float)
    adjoints = np.zeros((n, 4)) if adjoints is None else np.asarray(adjoints, dtype=float)
    if states.shape != (n, 4) or controls.shape != (n, 2) or adjoints.shape != (n, 4):
        raise ValueError(
            f"trajectories do not match a {n}-node grid: "
            f"states {states.shape}, controls {controls.shape}, adjoints {adjoints.shape}"
        )
    table = np.column_stack([grid.times, states, controls, adjoints])
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRAJECTORY_HEADER)
        writer.writerows([format_float(v) for v in row] for row in table)
    return path


def read_csv(path: str | Path) -> dict[str, NDArray]:
    """Columns of a trajectory file keyed by header name."""
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != TRAJECTORY_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        rows = [[float(v) for v in row] for row in reader]
    table = np.array(rows, dtype=float).reshape(-1, len(header))
    return {name: table[:, i] for i, name in enumerate(header)}


def write_summary(path: str | Path, rows: list[dict]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_HEADER)
        for row in rows:
            residual = row.get("stationarity_residual")
            writer.writerow(
                [
                    row["variant"],
                    format_alpha(row["alpha"]),
                    format_float(row["objective"]),
                    row["iterations"],
                    "true" if row["converged"] else "false",
                    "" if residual is None else format_float(residual),
                ]
            )
    return path


def read_summary(path: str | Path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        out = []
        for row in csv.DictReader(fh):
            out.append(
                {
                    "variant": row["variant"],
                    "alpha": float(row["alpha"]),
                    "objective": float(row["objective"]),
                    "iterations": int(row["iterations"]),
                    "converged": row["converged"] == "true",
                    "stationarity_residual": (
                        float(row["stationarity_residual"]) if row["stationarity_residual"] else None
                    ),
                }
            )
    return out


def write_figures(output_dir: str | Path, grid: TimeGrid, runs: dict) -> list[Path]:
    """Four 600x400 SVGs, one per compartment.

    ``runs`` maps alpha to ``{"controlled": states, "uncontrolled": states}``.
    Controlled curves are solid, uncontrolled dotted, one colour per alpha.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from matplotlib.lines import Line2D

    plt.rcParams["svg.hashsalt"] = "fracocp"
    t = grid.times
    alphas = sorted(runs)
    colours = plt.get_cmap("viridis")(np.linspace(0.0, 0.85, max(len(alphas), 1)))
    paths = []
    for idx, name in enumerate(COMPARTMENTS):
        fig, ax = plt.subplots(figsize=(600 / 72, 400 / 72), dpi=72)
        for colour, alpha in zip(colours, alphas):
            variants = runs[alpha]
            if "controlled" in variants:
                ax.plot(t, variants["controlled"][:, idx], "-", color=colour)
            if "uncontrolled" in variants:
                ax.plot(t, variants["uncontrolled"][:, idx], ":", color=colour)
        handles = [
            Line2D([], [], color="black", linestyle="-", label="with control"),
            Line2D([], [], color="black", linestyle=":", label="without control"),
        ] + [
            Line2D([], [], color=c, linestyle="-", label=f"alpha = {format_alpha(a)}")
            for c, a in zip(colours, alphas)
        ]
        ax.legend(handles=handles, fontsize="small")
        ax.set_xlabel("t (days)")
        ax.set_ylabel(f"{name}(t)")
        fig.tight_layout()
        path = Path(output_dir) / f"fig_{name}.svg"
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
        paths.append(path)
    return paths
