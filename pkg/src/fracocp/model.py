"""Fractional SEIR-type COVID-19 model with media and quarantine controls.

Compartments are ordered (S, E, I, R); controls are (u1, u2), where u1 moves
susceptibles to the recovered class and u2 removes exposed individuals, a
fraction p of whom recover while the rest become infectious.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .fracode import TimeGrid

COMPARTMENTS = ("S", "E", "I", "R")


class State(NamedTuple):
    S: float
    E: float
    I: float  # noqa: E741
    R: float


class Control(NamedTuple):
    u1: float
    u2: float


@dataclass(frozen=True)
class ModelParams:
    """Epidemiological constants and the fractional order."""

    Lambda: float
    beta1: float
    beta2: float
    mu: float
    rho: float
    gamma: float
    tau: float
    d: float
    p: float
    alpha: float = 1.0

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not math.isfinite(value):
                raise ValueError(f"{name}: must be finite")
            if value < 0:
                raise ValueError(f"{name}: must be non-negative")
        if self.mu <= 0:
            raise ValueError("mu: must be positive")
        if self.p > 1:
            raise ValueError("p: must lie in [0,1]")
        if not (0 < self.alpha <= 1):
            raise ValueError("alpha: must lie in (0,1]")

    def with_alpha(self, alpha: float) -> "ModelParams":
        return ModelParams(**{**asdict(self), "alpha": alpha})


@dataclass(frozen=True)
class ObjectiveWeights:
    """Terminal weights A3, A4, running weights A1, A2 and control costs r1, r2."""

    A1: float = 1.0
    A2: float = 1.0
    A3: float = 1.0
    A4: float = 1.0
    r1: float = 10.0
    r2: float = 10.0

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not math.isfinite(value):
                raise ValueError(f"{name}: must be finite")
        for name in ("A1", "A2", "A3", "A4"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name}: must be non-negative")
        for name in ("r1", "r2"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name}: must be positive")

    @property
    def terminal_adjoint(self) -> NDArray:
        """Gradient of the terminal cost A3*S + A4*E with respect to (S, E, I, R)."""
        return np.array([self.A3, self.A4, 0.0, 0.0])


def rhs_uncontrolled(params: ModelParams, x: ArrayLike) -> NDArray:
    S, E, I, R = x  # noqa: E741
    infection = params.beta1 * S * E + params.beta2 * S * I
    return np.array(
        [
            params.Lambda - infection - params.mu * S + params.tau * R,
            infection - (params.mu + params.rho) * E,
            params.rho * E - (params.gamma + params.d + params.mu) * I,
            params.gamma * I - (params.mu + params.tau) * R,
        ]
    )


def rhs_controlled(params: ModelParams, x: ArrayLike, u: ArrayLike) -> NDArray:
    S, E, _, _ = x
    u1, u2 = u
    dx = rhs_uncontrolled(params, x)
    moved_s = u1 * S
    moved_e = u2 * E
    dx[0] -= moved_s
    dx[1] -= moved_e
    dx[2] += (1.0 - params.p) * moved_e
    dx[3] += moved_s + params.p * moved_e
    return dx


def total_population(x: ArrayLike) -> float:
    return float(np.sum(x, axis=-1))


def running_cost(weights: ObjectiveWeights, states: NDArray, controls: NDArray) -> NDArray:
    """Integrand A1*I - A2*R + (r1*u1^2 + r2*u2^2)/2 evaluated per node."""
    states = np.atleast_2d(states)
    controls = np.atleast_2d(controls)
    return (
        weights.A1 * states[:, 2]
        - weights.A2 * states[:, 3]
        + 0.5 * (weights.r1 * controls[:, 0] ** 2 + weights.r2 * controls[:, 1] ** 2)
    )


def objective(
    weights: ObjectiveWeights, grid: TimeGrid, states: ArrayLike, controls: ArrayLike
) -> float:
    """Terminal cost plus trapezoid quadrature of the running cost."""
    states = np.asarray(states, dtype=float)
    controls = np.asarray(controls, dtype=float)
    if states.shape != (grid.n_nodes, 4):
        raise ValueError(f"states must have shape ({grid.n_nodes}, 4), got {states.shape}")
    if controls.shape != (grid.n_nodes, 2):
        raise ValueError(f"controls must have shape ({grid.n_nodes}, 2), got {controls.shape}")
    terminal = weights.A3 * states[-1, 0] + weights.A4 * states[-1, 1]
    integral = np.trapezoid(running_cost(weights, states, controls), dx=grid.h)
    return float(terminal + integral)
