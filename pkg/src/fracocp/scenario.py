"""Scenario runs: uncontrolled and optimally controlled solves over a list of orders."""

from __future__ import annotations

import logging
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .config import ScenarioConfig
from .fracode import integrate_caputo_ivp
from .focp import fbsm_solve
from .model import objective, rhs_uncontrolled
from .output import trajectory_filename, write_csv, write_figures, write_summary

log = logging.getLogger(__name__)

UNCONTROLLED = "uncontrolled"
CONTROLLED = "controlled"
VARIANTS = (UNCONTROLLED, CONTROLLED)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3


class ScenarioError(RuntimeError):
    def __init__(self, message: str, exit_code: int, alpha: float | None = None, variant: str | None = None):
        super().__init__(message)
        self.exit_code = exit_code
        self.alpha = alpha
        self.variant = variant


@dataclass
class ItemResult:
    variant: str
    alpha: float
    path: Path
    states: np.ndarray
    objective: float
    iterations: int = 0
    converged: bool = True
    stationarity_residual: float | None = None
    controls: np.ndarray | None = None
    adjoints: np.ndarray | None = None

    def summary_row(self) -> dict:
        return {
            "variant": self.variant,
            "alpha": self.alpha,
            "objective": self.objective,
            "iterations": self.iterations,
            "converged": self.converged,
            "stationarity_residual": self.stationarity_residual,
        }


@dataclass
class ScenarioResult:
    items: list[ItemResult]
    summary_path: Path
    figure_paths: list[Path] = field(default_factory=list)

    def get(self, variant: str, alpha: float) -> ItemResult:
        for item in self.items:
            if item.variant == variant and item.alpha == alpha:
                return item
        raise KeyError((variant, alpha))


def run_item(config: ScenarioConfig, alpha: float, variant: str, output_dir: Path) -> ItemResult:
    """Solve one (alpha, variant) pair and write its CSV."""
    params = config.model.with_alpha(alpha)
    grid = config.grid
    x0 = np.array(config.initial_state, dtype=float)
    path = output_dir / trajectory_filename(variant, alpha)
    try:
        if variant == UNCONTROLLED:
            states = integrate_caputo_ivp(
                lambda t, x: rhs_uncontrolled(params, x), x0, grid, alpha,
                config.sweep.corrector_iterations,
            )
            controls = np.zeros((grid.n_nodes, 2))
            result = ItemResult(variant, alpha, path, states, objective(config.weights, grid, states, controls))
            adjoints = None
        elif variant == CONTROLLED:
            sol = fbsm_solve(params, config.weights, x0, grid, config.sweep)
            states, controls, adjoints = sol.states, sol.controls, sol.adjoints
            result = ItemResult(
                variant, alpha, path, states, sol.objective_value,
                sol.iterations_used, sol.converged, sol.stationarity_residual,
            )
        else:
            raise ValueError(f"unknown variant {variant!r}")
    except ArithmeticError as exc:
        raise ScenarioError(f"alpha={alpha} {variant}: {exc}", EXIT_NUMERICAL, alpha, variant) from exc
    result.controls, result.adjoints = controls, adjoints
    try:
        write_csv(path, grid, states, controls, adjoints)
    except OSError as exc:
        raise ScenarioError(f"alpha={alpha} {variant}: cannot write {path}: {exc}", EXIT_IO, alpha, variant) from exc
    log.info("alpha=%s %s: J=%.10g -> %s", alpha, variant, result.objective, path)
    return result


def _prepare_output_dir(output_dir: Path) -> None:
    try:
        output_dir.mkdir(parents=True, exist_ok=True)
        with tempfile.TemporaryFile(dir=output_dir):
            pass
        if not os.access(output_dir, os.W_OK):
            raise PermissionError(f"{output_dir} is not writable")
    except OSError as exc:
        raise ScenarioError(f"output directory {output_dir} unusable: {exc}", EXIT_IO) from exc


def run_scenario(
    config: ScenarioConfig,
    variants: tuple[str, ...] = VARIANTS,
    alphas: tuple[float, ...] | None = None,
    svg: bool = False,
    jobs: int = 1,
    output_dir: str | Path | None = None,
) -> ScenarioResult:
    """Run every (alpha, variant) item, then write summary.csv and optional figures.

    The summary is written only once all items have succeeded; a failing item
    raises ScenarioError carrying the CLI exit code and the failing alpha.
    """
    output_dir = Path(output_dir) if output_dir is not None else config.output_dir
    alphas = tuple(alphas) if alphas is not None else config.alphas
    _prepare_output_dir(output_dir)
    work = [(a, v) for a in alphas for v in variants]

    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(run_item, config, a, v, output_dir) for a, v in work]
            items = [f.result() for f in futures]
    else:
        items = [run_item(config, a, v, output_dir) for a, v in work]

    figures = []
    try:
        if svg:
            runs: dict[float, dict] = {}
            for item in items:
                runs.setdefault(item.alpha, {})[item.variant] = item.states
            figures = write_figures(output_dir, config.grid, runs)
        summary = write_summary(output_dir / "summary.csv", [item.summary_row() for item in items])
    except OSError as exc:
        raise ScenarioError(f"cannot write results in {output_dir}: {exc}", EXIT_IO) from exc
    return ScenarioResult(items, summary, figures)


def with_overrides(config: ScenarioConfig, **sweep_overrides) -> ScenarioConfig:
    return replace(config, sweep=replace(config.sweep, **sweep_overrides))
