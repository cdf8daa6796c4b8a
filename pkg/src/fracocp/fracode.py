"""Numerical core for Caputo fractional-order systems.

The integrator is the fractional Adams-Bashforth-Moulton predictor-corrector
applied to the Volterra form

    x(t) = x0 + 1/Gamma(alpha) * int_0^t (t - s)^(alpha - 1) f(s, x(s)) ds

on a uniform grid, with the full memory kernel (no short-memory truncation).
Terminal-value problems are handled by time reversal, and an L1 evaluator of
the Caputo derivative is provided for residual checks on computed trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

VectorField = Callable[[float, NDArray], ArrayLike]

ML_MAX_TERMS = 10_000
ML_Z_GUARD = 100.0


class IntegrationError(ArithmeticError):
    """Raised when a vector field produces non-finite values during a solve."""

    def __init__(self, message: str, node: int | None = None):
        super().__init__(message)
        self.node = node


class OracleError(ArithmeticError):
    """Raised when a reference evaluation (Mittag-Leffler series) fails."""


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid on [t0, tf] with ``n_steps`` intervals."""

    tf: float
    n_steps: int
    t0: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.tf) and self.tf > self.t0):
            raise ValueError(f"tf must be finite and greater than t0={self.t0}, got {self.tf}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 2:
            raise ValueError(f"n_steps must be an integer >= 2, got {self.n_steps}")

    @property
    def h(self) -> float:
        return (self.tf - self.t0) / self.n_steps

    @property
    def n_nodes(self) -> int:
        return self.n_steps + 1

    @property
    def times(self) -> NDArray:
        return self.t0 + np.arange(self.n_nodes) * self.h


class AbmWeights(NamedTuple):
    """Predictor row ``b[0..k]`` and corrector row ``a[0..k+1]`` for step k -> k+1."""

    alpha: float
    b: NDArray
    a: NDArray


def _check_alpha(alpha: float) -> None:
    if not (0.0 < alpha <= 1.0):
        raise ValueError(f"alpha must lie in (0,1], got {alpha}")


def _predictor_kernel(alpha: float, size: int) -> NDArray:
    # b depends only on m = k - j
    m = np.arange(size, dtype=float)
    return (m + 1.0) ** alpha - m**alpha


def _corrector_kernel(alpha: float, size: int) -> NDArray:
    # interior corrector weights, indexed by m = k - j
    m = np.arange(size, dtype=float)
    p = alpha + 1.0
    return (m + 2.0) ** p + m**p - 2.0 * (m + 1.0) ** p


def _corrector_first(alpha: float, k: NDArray | float) -> NDArray | float:
    return k ** (alpha + 1.0) - (k - alpha) * (k + 1.0) ** alpha


def abm_weights(alpha: float, k: int) -> AbmWeights:
    """Weights used to advance from node k to node k+1.

    >>> w = abm_weights(1.0, 3)
    >>> w.b.tolist(), w.a.tolist()
    ([1.0, 1.0, 1.0, 1.0], [1.0, 2.0, 2.0, 2.0, 1.0])
    """
    _check_alpha(alpha)
    if int(k) != k or k < 0:
        raise ValueError(f"k must be a non-negative integer, got {k}")
    k = int(k)
    b = _predictor_kernel(alpha, k + 1)[::-1]
    a = np.empty(k + 2)
    a[0] = _corrector_first(alpha, float(k))
    a[1 : k + 1] = _corrector_kernel(alpha, k)[::-1]
    a[k + 1] = 1.0
    return AbmWeights(alpha, b, a)


def _abm_solve(
    field_at: Callable[[int, NDArray], ArrayLike],
    base: NDArray,
    n_steps: int,
    h: float,
    alpha: float,
    corrector_iterations: int,
) -> NDArray:
    """Core predictor-corrector loop.

    ``field_at(j, x)`` evaluates the right-hand side at node j. ``base`` holds the
    non-integral part of the Volterra equation per node (x0 everywhere unless a
    forcing with a known fractional integral has been folded in).
    """
    if corrector_iterations < 1 or int(corrector_iterations) != corrector_iterations:
        raise ValueError(f"corrector_iterations must be a positive integer, got {corrector_iterations}")
    dim = base.shape[1]
    x = np.empty((n_steps + 1, dim))
    F = np.empty((n_steps + 1, dim))
    x[0] = base[0]

    def evaluate(j: int, xj: NDArray) -> NDArray:
        fj = np.asarray(field_at(j, xj), dtype=float)
        if fj.shape != (dim,):
            raise ValueError(f"field returned shape {fj.shape} at node {j}, expected ({dim},)")
        if not np.all(np.isfinite(fj)):
            raise IntegrationError(f"non-finite field value at node {j}: {fj}", node=j)
        return fj

    F[0] = evaluate(0, x[0])
    bm = _predictor_kernel(alpha, n_steps)
    am = _corrector_kernel(alpha, n_steps)
    a0 = _corrector_first(alpha, np.arange(n_steps, dtype=float))
    cp = h**alpha / math.gamma(alpha + 1.0)
    cc = h**alpha / math.gamma(alpha + 2.0)

    for k in range(n_steps):
        pred_sum = bm[k::-1] @ F[: k + 1]
        corr_hist = a0[k] * F[0]
        if k > 0:
            corr_hist = corr_hist + am[k - 1 :: -1] @ F[1 : k + 1]
        xk1 = base[k + 1] + cp * pred_sum
        for _ in range(corrector_iterations):
            xk1 = base[k + 1] + cc * (evaluate(k + 1, xk1) + corr_hist)
        x[k + 1] = xk1
        F[k + 1] = evaluate(k + 1, xk1)
    return x


def _as_initial(x0: ArrayLike) -> NDArray:
    x0 = np.array(x0, dtype=float)
    if x0.ndim != 1 or x0.size == 0:
        raise ValueError(f"initial data must be a non-empty vector, got shape {x0.shape}")
    if not np.all(np.isfinite(x0)):
        raise ValueError("initial data must be finite")
    return x0


def integrate_caputo_ivp(
    field: VectorField,
    x0: ArrayLike,
    grid: TimeGrid,
    alpha: float,
    corrector_iterations: int = 1,
) -> NDArray:
    """Solve ``D^alpha x = field(t, x)``, ``x(t0) = x0`` (Caputo, left-sided).

    Returns an array of shape ``(grid.n_nodes, dim)``; row 0 is ``x0`` exactly.
    """
    _check_alpha(alpha)
    x0 = _as_initial(x0)
    times = grid.times
    base = np.broadcast_to(x0, (grid.n_nodes, x0.size))
    return _abm_solve(
        lambda j, x: field(times[j], x), base, grid.n_steps, grid.h, alpha, corrector_iterations
    )


def integrate_adjoint_tvp(
    field: VectorField,
    lambda_tf: ArrayLike,
    grid: TimeGrid,
    alpha: float,
    corrector_iterations: int = 1,
    rl_correction: bool = False,
) -> NDArray:
    """Solve a terminal-value problem backward from ``lambda(tf) = lambda_tf``.

    ``field`` is oriented like a forward problem: for alpha = 1 it is
    ``d lambda / dt``. The substitution s = tf - t turns the problem into a
    left-sided Caputo IVP with field ``-field(tf - s, .)``, which is integrated
    with the same predictor-corrector and then flipped back. The last row is
    ``lambda_tf`` exactly.

    With ``rl_correction`` the reversed problem is read as a Riemann-Liouville
    equation, which subtracts ``lambda_tf * s^(-alpha) / Gamma(1 - alpha)`` from
    the reversed field. Its fractional integral is exactly ``-lambda_tf`` for
    s > 0, so it is folded into the Volterra base term rather than sampled at
    the singular node.
    """
    _check_alpha(alpha)
    lam_tf = _as_initial(lambda_tf)
    times = grid.times
    n = grid.n_steps
    base = np.tile(lam_tf, (grid.n_nodes, 1))
    if rl_correction and alpha < 1.0:
        base[1:] -= lam_tf

    def reversed_field(j, x):
        return -np.asarray(field(times[n - j], x), dtype=float)

    try:
        mu = _abm_solve(reversed_field, base, n, grid.h, alpha, corrector_iterations)
    except IntegrationError as exc:
        # report the node in forward-time numbering
        raise IntegrationError(
            f"non-finite adjoint field at node {n - exc.node}", node=n - exc.node
        ) from exc
    return mu[::-1].copy()


def l1_caputo_derivative(samples: ArrayLike, grid: TimeGrid, alpha: float) -> NDArray:
    """L1 approximation of the Caputo derivative at nodes 1..n_steps.

    ``samples`` is either a vector of length ``n_nodes`` or an
    ``(n_nodes, dim)`` array; the output has ``n_steps`` rows accordingly.
    """
    if alpha == 1.0:
        raise ValueError("alpha = 1 is not supported by the L1 scheme; use a finite difference")
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0,1), got {alpha}")
    x = np.asarray(samples, dtype=float)
    if x.shape[0] != grid.n_nodes:
        raise ValueError(f"expected {grid.n_nodes} samples, got {x.shape[0]}")
    n = grid.n_steps
    m = np.arange(n, dtype=float)
    w = (m + 1.0) ** (1.0 - alpha) - m ** (1.0 - alpha)
    d = np.diff(x, axis=0)
    scale = grid.h ** (-alpha) / math.gamma(2.0 - alpha)
    if d.ndim == 1:
        return scale * np.convolve(w, d)[:n]
    out = np.column_stack([np.convolve(w, d[:, i])[:n] for i in range(d.shape[1])])
    return scale * out


def mittag_leffler(alpha: float, z: float) -> float:
    """One-parameter Mittag-Leffler function ``sum z^k / Gamma(alpha k + 1)``.

    Summed in double precision; when alternating terms cancel badly (z < 0 with
    terms far larger than the result) the series is re-summed with mpmath at a
    working precision sized to the largest term.
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if not math.isfinite(z) or abs(z) > ML_Z_GUARD:
        raise ValueError(f"|z| must not exceed {ML_Z_GUARD}, got {z}")
    if z == 0.0:
        return 1.0

    log_abs_z = math.log(abs(z))
    terms = []
    max_log = 0.0
    prev = math.inf
    running = 0.0
    for k in range(ML_MAX_TERMS):
        log_mag = k * log_abs_z - math.lgamma(alpha * k + 1.0)
        if log_mag > 700.0:
            raise OracleError(f"Mittag-Leffler series overflows for alpha={alpha}, z={z}")
        max_log = max(max_log, log_mag)
        mag = math.exp(log_mag)
        terms.append(-mag if (z < 0 and k % 2) else mag)
        running += terms[-1]
        if mag < prev and mag <= 1e-16 * abs(running):
            break
        prev = mag
    else:
        raise OracleError(f"Mittag-Leffler series did not converge in {ML_MAX_TERMS} terms")

    result = math.fsum(terms)
    if z < 0 and max_log - math.log(max(abs(result), 1e-300)) > math.log(1e3):
        result = _mittag_leffler_mp(alpha, z, len(terms), max_log)
    return result


def _mittag_leffler_mp(alpha: float, z: float, n_terms: int, max_log: float) -> float:
    import mpmath

    dps = 30 + int(math.ceil(max_log / math.log(10.0)))
    with mpmath.workdps(dps):
        zz = mpmath.mpf(z)
        a = mpmath.mpf(alpha)
        total = mpmath.mpf(0)
        k = 0
        while True:
            term = zz**k / mpmath.gamma(a * k + 1)
            total += term
            if k >= n_terms and abs(term) < mpmath.mpf(10) ** (-20) * abs(total):
                break
            k += 1
            if k > ML_MAX_TERMS:
                raise OracleError(f"Mittag-Leffler series did not converge in {ML_MAX_TERMS} terms")
        return float(total)
