"""Forward-backward sweep for the fractional optimal control problem.

Minimises A3*S(tf) + A4*E(tf) + int_0^tf A1*I - A2*R + (r1*u1^2 + r2*u2^2)/2 dt
subject to the controlled fractional model. Each sweep integrates the state
forward, the costate backward from its transversality data, then relaxes the
control toward the clamped stationary control.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .fracode import IntegrationError, TimeGrid, integrate_adjoint_tvp, integrate_caputo_ivp
from .model import ModelParams, ObjectiveWeights, objective, rhs_controlled

log = logging.getLogger(__name__)


class AdjointMode(str, enum.Enum):
    FULL_HAMILTONIAN = "full_hamiltonian"
    PAPER_PRINTED = "paper_printed"


@dataclass(frozen=True)
class SweepConfig:
    max_iterations: int = 200
    omega: float = 0.5
    delta: float = 1e-3
    u_min: float = 0.0
    u_max: float = 1.0
    adjoint_mode: AdjointMode = AdjointMode.FULL_HAMILTONIAN
    adjoint_rl_correction: bool = False
    corrector_iterations: int = 1

    def __post_init__(self):
        object.__setattr__(self, "adjoint_mode", AdjointMode(self.adjoint_mode))
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise ValueError("max_iterations: must be a positive integer")
        if not (0 < self.omega <= 1):
            raise ValueError("omega: must lie in (0,1]")
        if not self.delta > 0:
            raise ValueError("delta: must be positive")
        # a degenerate box [c, c] is allowed: it pins the controls
        if not self.u_min <= self.u_max:
            raise ValueError("u_min: must not exceed u_max")
        if int(self.corrector_iterations) != self.corrector_iterations or self.corrector_iterations < 1:
            raise ValueError("corrector_iterations: must be a positive integer")

    @property
    def bounds(self) -> tuple[float, float]:
        return (self.u_min, self.u_max)


@dataclass
class SweepSolution:
    grid: TimeGrid
    states: NDArray
    adjoints: NDArray
    controls: NDArray
    objective_history: list[float] = field(default_factory=list)
    converged: bool = False
    iterations_used: int = 0
    stationarity_residual: float = float("nan")
    objective_value: float = float("nan")


class SweepError(ArithmeticError):
    """The sweep hit a non-finite state or costate."""


def rhs_adjoint(
    params: ModelParams,
    weights: ObjectiveWeights,
    x: ArrayLike,
    u: ArrayLike,
    lam: ArrayLike,
    mode: AdjointMode | str = AdjointMode.FULL_HAMILTONIAN,
) -> NDArray:
    """Gradient of the Hamiltonian with respect to the state.

    This is the right-hand side of the right-sided costate equation. In
    ``paper_printed`` mode the control-dependent terms are dropped.
    """
    S, E, I, _ = x  # noqa: E741
    l1, l2, l3, l4 = lam
    b1, b2, mu, rho = params.beta1, params.beta2, params.mu, params.rho
    dl = np.array(
        [
            -l1 * b1 * E - l1 * b2 * I - l1 * mu + l2 * b1 * E + l2 * b2 * I,
            -l1 * b1 * S + l2 * b1 * S - l2 * mu - l2 * rho + l3 * rho,
            weights.A1
            - b2 * l1 * S
            + b2 * l2 * S
            - (params.gamma + params.d + mu) * l3
            + params.gamma * l4,
            params.tau * l1 - l4 * (params.tau + mu) - weights.A2,
        ]
    )
    if AdjointMode(mode) is AdjointMode.FULL_HAMILTONIAN:
        u1, u2 = u
        p = params.p
        dl[0] += -l1 * u1 + l4 * u1
        dl[1] += -l2 * u2 + l3 * (1.0 - p) * u2 + l4 * p * u2
    return dl


def _unclamped_controls(params, weights, states, adjoints) -> NDArray:
    states = np.atleast_2d(states)
    lam = np.atleast_2d(adjoints)
    p = params.p
    u1 = (lam[:, 0] - lam[:, 3]) * states[:, 0] / weights.r1
    u2 = (lam[:, 1] - (1.0 - p) * lam[:, 2] - p * lam[:, 3]) * states[:, 1] / weights.r2
    return np.column_stack([u1, u2])


def stationary_controls(
    params: ModelParams,
    weights: ObjectiveWeights,
    x: ArrayLike,
    lam: ArrayLike,
    bounds: tuple[float, float] = (0.0, 1.0),
) -> NDArray:
    """Minimiser of the Hamiltonian over the control box.

    Accepts a single node (4-vectors) or whole trajectories (node x 4).
    """
    u = np.clip(_unclamped_controls(params, weights, x, lam), *bounds)
    return u[0] if np.ndim(x) == 1 else u


def control_gradient(
    params: ModelParams, weights: ObjectiveWeights, states: NDArray, adjoints: NDArray, controls: NDArray
) -> NDArray:
    """dH/du per node: r_i u_i minus the stationary numerator."""
    r = np.array([weights.r1, weights.r2])
    return r * (np.atleast_2d(controls) - _unclamped_controls(params, weights, states, adjoints))


def stationarity_residual(
    solution: SweepSolution,
    params: ModelParams,
    weights: ObjectiveWeights,
    bounds: tuple[float, float] = (0.0, 1.0),
) -> float:
    """Largest projected violation of dH/du = 0 over the interior time nodes.

    Components strictly inside the bounds contribute |dH/du|; at the lower
    bound only a negative gradient is a violation, at the upper bound only a
    positive one. The end nodes t0 and tf are excluded.
    """
    lo, hi = bounds
    u = solution.controls[1:-1]
    g = control_gradient(params, weights, solution.states[1:-1], solution.adjoints[1:-1], u)
    viol = np.abs(g)
    viol = np.where(u <= lo, np.maximum(-g, 0.0), viol)
    viol = np.where(u >= hi, np.maximum(g, 0.0), viol)
    return float(viol.max(initial=0.0))


def _node_lookup(grid: TimeGrid):
    t0, h = grid.t0, grid.h
    return lambda t: int(round((t - t0) / h))


def solve_state(params: ModelParams, x0: ArrayLike, grid: TimeGrid, controls: NDArray, corrector_iterations: int = 1) -> NDArray:
    """Forward integration of the controlled model with controls sampled per node."""
    node = _node_lookup(grid)
    return integrate_caputo_ivp(
        lambda t, x: rhs_controlled(params, x, controls[node(t)]),
        x0,
        grid,
        params.alpha,
        corrector_iterations,
    )


def solve_adjoint(
    params: ModelParams,
    weights: ObjectiveWeights,
    grid: TimeGrid,
    states: NDArray,
    controls: NDArray,
    mode: AdjointMode | str = AdjointMode.FULL_HAMILTONIAN,
    rl_correction: bool = False,
    corrector_iterations: int = 1,
) -> NDArray:
    """Backward integration of the costate from lambda(tf) = (A3, A4, 0, 0)."""
    node = _node_lookup(grid)
    mode = AdjointMode(mode)

    def field(t, lam):
        j = node(t)
        return -rhs_adjoint(params, weights, states[j], controls[j], lam, mode)

    return integrate_adjoint_tvp(
        field, weights.terminal_adjoint, grid, params.alpha, corrector_iterations, rl_correction
    )


def fbsm_solve(
    params: ModelParams,
    weights: ObjectiveWeights,
    x0: ArrayLike,
    grid: TimeGrid,
    config: SweepConfig = SweepConfig(),
) -> SweepSolution:
    """Forward-backward sweep starting from u = 0.

    Non-convergence within ``config.max_iterations`` is reported through
    ``converged = False``; a non-finite state or costate raises SweepError.
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (4,) or np.any(x0 < 0):
        raise ValueError("initial state must be four non-negative values")
    lo, hi = config.bounds
    u = np.clip(np.zeros((grid.n_nodes, 2)), lo, hi)
    history: list[float] = []
    converged = False

    def sweep(u, it):
        try:
            x = solve_state(params, x0, grid, u, config.corrector_iterations)
            lam = solve_adjoint(
                params, weights, grid, x, u,
                config.adjoint_mode, config.adjoint_rl_correction, config.corrector_iterations,
            )
        except IntegrationError as exc:
            raise SweepError(f"iteration {it}: {exc}") from exc
        return x, lam

    for it in range(1, config.max_iterations + 1):
        x, lam = sweep(u, it)
        history.append(objective(weights, grid, x, u))
        u_star = stationary_controls(params, weights, x, lam, config.bounds)
        u_new = (1.0 - config.omega) * u + config.omega * u_star
        change = np.max(np.abs(u_new - u))
        scale = np.max(np.abs(u_new))
        u = u_new
        log.debug("sweep %d: J=%.12g change=%.3e", it, history[-1], change)
        if change <= config.delta * (scale + 1e-12):
            converged = True
            break

    # Return the unrelaxed stationary control of the last sweep, so that nodes
    # pinned at a bound sit exactly on it, and re-solve state and costate for it.
    u = u_star
    x, lam = sweep(u, it)
    solution = SweepSolution(grid, x, lam, u, history, converged, it)
    solution.objective_value = objective(weights, grid, x, u)
    solution.stationarity_residual = stationarity_residual(solution, params, weights, config.bounds)
    return solution
