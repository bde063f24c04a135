"""Shared optimizers: bounded scalar search and full-batch gradient descent.

The scalar minimizer runs a golden-section search over the logarithm of
the variable, so the positivity constraint on temperatures and scale
factors disappears and the search is well-conditioned across several
orders of magnitude.  Golden section assumes a unimodal objective; a
coarse 50-point log-grid cross-check guards against that assumption.  If
the grid finds a strictly better value more than two cells away from the
returned point, a warning is emitted and the search is re-run inside the
better grid cell's neighborhood, keeping whichever result is lower.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ScalarSearchConfig:
    lower: float = 1e-3
    upper: float = 1e3
    tolerance: float = 1e-6          # on log(t)
    max_iterations: int = 200
    grid_points: int = 50

    def __post_init__(self):
        if not 0.0 < self.lower < self.upper:
            raise ValueError(f"need 0 < lower < upper, got [{self.lower}, {self.upper}]")
        if not self.tolerance > 0.0:
            raise ValueError(f"tolerance must be > 0, got {self.tolerance}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class ScalarSearchResult:
    argmin: float
    value: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class GradientDescentConfig:
    learning_rate: float = 0.01
    max_iterations: int = 5000
    gradient_tolerance: float = 1e-6
    l2_penalty: float = 0.0

    def __post_init__(self):
        if not self.learning_rate > 0.0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.l2_penalty < 0.0:
            raise ValueError(f"l2_penalty must be >= 0, got {self.l2_penalty}")


@dataclass(frozen=True)
class GradientDescentResult:
    params: np.ndarray
    value: float
    iterations: int
    converged: bool


def _check_finite(value: float, point: float) -> float:
    if not math.isfinite(value):
        raise ValueError(f"objective returned non-finite value {value} at t={point:.6g}")
    return value


def _golden_section(fn: Callable[[float], float], a: float, b: float,
                    tolerance: float, max_iterations: int):
    """Golden section on [a, b]; returns (best_x, best_value, iterations, converged)."""
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc = _check_finite(fn(c), math.exp(c))
    fd = _check_finite(fn(d), math.exp(d))
    best_x, best_f = (c, fc) if fc <= fd else (d, fd)
    iterations = 0
    while b - a > tolerance and iterations < max_iterations:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = _check_finite(fn(c), math.exp(c))
            if fc < best_f:
                best_x, best_f = c, fc
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = _check_finite(fn(d), math.exp(d))
            if fd < best_f:
                best_x, best_f = d, fd
        iterations += 1
    return best_x, best_f, iterations, (b - a) <= tolerance


def minimize_scalar(objective: Callable[[float], float],
                    config: ScalarSearchConfig | None = None) -> ScalarSearchResult:
    """Minimize a positive-argument scalar objective over a bounded range.

    The objective is assumed unimodal in log-space; see module docstring
    for the grid cross-check that backstops this assumption.
    """
    cfg = config or ScalarSearchConfig()

    def in_log(u: float) -> float:
        return float(objective(math.exp(u)))

    lo, hi = math.log(cfg.lower), math.log(cfg.upper)
    x, fx, iters, converged = _golden_section(in_log, lo, hi, cfg.tolerance,
                                              cfg.max_iterations)

    grid = np.linspace(lo, hi, cfg.grid_points)
    grid_values = [_check_finite(in_log(u), math.exp(u)) for u in grid]
    j = int(np.argmin(grid_values))
    cell = grid[1] - grid[0]
    if grid_values[j] < fx - 1e-12 * (1.0 + abs(fx)) and abs(grid[j] - x) > 2.0 * cell:
        warnings.warn(
            "scalar search: coarse grid found a better minimum away from the "
            "returned solution; objective is not unimodal, refining around the "
            "grid minimum",
            RuntimeWarning,
            stacklevel=2,
        )
        x2, fx2, iters2, conv2 = _golden_section(
            in_log, max(lo, grid[j] - 2.0 * cell), min(hi, grid[j] + 2.0 * cell),
            cfg.tolerance, cfg.max_iterations)
        iters += iters2
        if fx2 < fx:
            x, fx, converged = x2, fx2, conv2
    return ScalarSearchResult(argmin=math.exp(x), value=fx,
                              iterations=iters, converged=converged)


def minimize_gd(value_and_grad: Callable[[np.ndarray], tuple[float, np.ndarray]],
                init: np.ndarray,
                config: GradientDescentConfig | None = None) -> GradientDescentResult:
    """Fixed-step gradient descent with gradient-norm stopping.

    ``value_and_grad`` maps a parameter vector to (objective, gradient).
    An optional ridge penalty ``l2_penalty * ||p||^2`` is added here.
    Raises if the objective exceeds 1e12 or becomes non-finite, which is
    treated as divergence.
    """
    cfg = config or GradientDescentConfig()
    p = np.array(init, dtype=np.float64)
    iterations = 0
    while True:
        value, grad = value_and_grad(p)
        if cfg.l2_penalty:
            value = value + cfg.l2_penalty * float(p @ p)
            grad = grad + 2.0 * cfg.l2_penalty * p
        if not math.isfinite(value) or value > 1e12:
            raise ValueError(f"gradient descent diverged: objective {value} "
                             f"after {iterations} iterations")
        gnorm = float(np.linalg.norm(grad))
        if gnorm <= cfg.gradient_tolerance:
            return GradientDescentResult(p, float(value), iterations, True)
        if iterations >= cfg.max_iterations:
            return GradientDescentResult(p, float(value), iterations, False)
        p = p - cfg.learning_rate * grad
        iterations += 1
