"""Two-block composite problems.

The objective being minimized is

    Phi(x, y) = J(x) + (1/n) * sum_i F_i(x, y) + R(y)

with smooth components ``F_i`` (given through per-component partial
gradients) and prox-capable, possibly non-smooth regularizers ``J`` and
``R``.  Indicator constraints are encoded as regularizers taking the value
``+inf`` outside the feasible set, so ``objective`` may legitimately return
``inf``; a NaN objective is always an error.

Problem objects are immutable after construction and safe to share between
threads.  Component sums always run in fixed index order 0..n-1 so results
are reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

Vector = np.ndarray
GradFn = Callable[[int, np.ndarray, np.ndarray], np.ndarray]
ValueFn = Callable[[int, np.ndarray, np.ndarray], float]
RegFn = Callable[[np.ndarray], float]
ProxFn = Callable[[float, np.ndarray], np.ndarray]


def _zero_reg(_v: np.ndarray) -> float:
    return 0.0


def _identity_prox(_gamma: float, v: np.ndarray) -> np.ndarray:
    return np.asarray(v, dtype=float)


@dataclass(frozen=True)
class BlockProblem:
    """Finite-sum two-block problem: n components, block dims (dim_x, dim_y).

    ``component_grad_x(i, x, y)`` returns the partial gradient of F_i with
    respect to x (length dim_x); ``component_grad_y`` the y-partial (length
    dim_y).  ``prox_x(gamma, v)`` returns one element of the prox of J at v
    with parameter gamma (single-valued by a documented tie-break when J is
    non-convex), and likewise ``prox_y`` for R.
    """

    n: int
    dim_x: int
    dim_y: int
    component_value: ValueFn
    component_grad_x: GradFn
    component_grad_y: GradFn
    reg_x_value: RegFn = _zero_reg
    reg_y_value: RegFn = _zero_reg
    prox_x: ProxFn = _identity_prox
    prox_y: ProxFn = _identity_prox
    # Optional adapter hooks, used by the step-size machinery when present.
    # Signature: (x, y, batch_or_None, rng) -> positive float.
    lipschitz_x: Callable | None = None
    lipschitz_y: Callable | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        if self.dim_x < 1 or self.dim_y < 1:
            raise ValueError(f"block dims must be positive, got ({self.dim_x}, {self.dim_y})")


@dataclass(frozen=True)
class Iterate:
    """One block pair z = (x, y), stored as flat float64 vectors."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float))
        if self.x.ndim != 1 or self.y.ndim != 1:
            raise ValueError("iterate blocks must be flat vectors")
        if not (np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.y))):
            raise ValueError("iterate contains non-finite entries")


def check_dims(problem: BlockProblem, z: Iterate) -> None:
    if z.x.shape != (problem.dim_x,) or z.y.shape != (problem.dim_y,):
        raise ValueError(
            f"iterate dims ({z.x.shape[0]}, {z.y.shape[0]}) do not match problem "
            f"({problem.dim_x}, {problem.dim_y})"
        )


def dist_sq(a: Iterate, b: Iterate) -> float:
    """Squared distance ||z_a - z_b||^2 over both blocks."""
    dx = a.x - b.x
    dy = a.y - b.y
    return float(dx @ dx + dy @ dy)


def smooth_value(problem: BlockProblem, z: Iterate) -> float:
    """(1/n) sum_i F_i(x, y), accumulated in fixed index order."""
    check_dims(problem, z)
    total = 0.0
    for i in range(problem.n):
        total += float(problem.component_value(i, z.x, z.y))
    return total / problem.n


def objective(problem: BlockProblem, z: Iterate) -> float:
    """Full objective J(x) + (1/n) sum F_i + R(y); +inf outside indicators."""
    check_dims(problem, z)
    jx = float(problem.reg_x_value(z.x))
    ry = float(problem.reg_y_value(z.y))
    if np.isnan(jx) or np.isnan(ry):
        raise FloatingPointError("regularizer value is NaN")
    if np.isinf(jx) or np.isinf(ry):
        return float("inf")
    val = jx + smooth_value(problem, z) + ry
    if np.isnan(val):
        raise FloatingPointError("objective evaluated to NaN (numerical failure)")
    return val


def _mean_grad(problem: BlockProblem, z: Iterate, grad_fn: GradFn, dim: int) -> np.ndarray:
    check_dims(problem, z)
    acc = np.zeros(dim)
    for i in range(problem.n):
        g = np.asarray(grad_fn(i, z.x, z.y), dtype=float)
        if g.shape != (dim,):
            raise ValueError(f"component gradient {i} has length {g.shape}, expected ({dim},)")
        acc += g
    return acc / problem.n


def full_grad_x(problem: BlockProblem, z: Iterate) -> np.ndarray:
    """(1/n) sum_i grad_x F_i(x, y), deterministic summation order."""
    return _mean_grad(problem, z, problem.component_grad_x, problem.dim_x)


def full_grad_y(problem: BlockProblem, z: Iterate) -> np.ndarray:
    """(1/n) sum_i grad_y F_i(x, y), deterministic summation order."""
    return _mean_grad(problem, z, problem.component_grad_y, problem.dim_y)


def prox_generic(prox: ProxFn, gamma: float, v: np.ndarray) -> np.ndarray:
    """Apply a prox map after validating the step parameter gamma > 0."""
    if not gamma > 0:
        raise ValueError(f"prox step must be positive, got {gamma}")
    return np.asarray(prox(gamma, np.asarray(v, dtype=float)), dtype=float)


@dataclass
class OracleCounter:
    """Mutable tally of component partial-gradient evaluations.

    Used for double-entry bookkeeping against the solver's reported SFO
    count: ``grad_x + grad_y`` must equal ``sfo_calls`` exactly when the
    solver's diagnostic evaluations are disabled.
    """

    grad_x: int = 0
    grad_y: int = 0
    value: int = 0

    @property
    def total_grads(self) -> int:
        return self.grad_x + self.grad_y


def with_oracle_counter(problem: BlockProblem) -> tuple[BlockProblem, OracleCounter]:
    """Wrap a problem so every component oracle call increments a counter."""
    counter = OracleCounter()
    inner_gx, inner_gy, inner_val = (
        problem.component_grad_x,
        problem.component_grad_y,
        problem.component_value,
    )

    def gx(i, x, y):
        counter.grad_x += 1
        return inner_gx(i, x, y)

    def gy(i, x, y):
        counter.grad_y += 1
        return inner_gy(i, x, y)

    def val(i, x, y):
        counter.value += 1
        return inner_val(i, x, y)

    counted = replace(problem, component_grad_x=gx, component_grad_y=gy, component_value=val)
    return counted, counter
