"""Convergence measures and brute-force verification oracles.

The generalized gradient map is the scaled displacement of a prox-gradient
step computed with exact full gradients; its squared norm is the criticality
measure traced by the solver.  Note the asymmetry inherited from the
Gauss-Seidel update order: the y-row is evaluated at the post-x-update
point, which the caller must supply (pass x itself for a symmetric
standalone check).

Everything in the second half of the module exists to check the fast paths
against slow, independent computations: finite differences for gradients,
support enumeration for the sparse prox, exhaustive batch enumeration for
estimator mean-squared errors.  These run only at test scale (n <= 8,
dim <= 12).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .core import BlockProblem, Iterate, check_dims, dist_sq, full_grad_x, full_grad_y, objective, prox_generic
from .estimators import SagaState, SarahState, saga_combine, batch_grads_x, batch_grads_y


@dataclass(frozen=True)
class GradMapEval:
    """Both rows of the generalized gradient map and their squared norm."""

    g_x: np.ndarray
    g_y: np.ndarray
    norm_sq: float
    gamma1: float
    gamma2: float


def generalized_gradient_map(
    problem: BlockProblem,
    z: Iterate,
    z_x_next: np.ndarray,
    gamma1: float,
    gamma2: float,
) -> GradMapEval:
    """Evaluate the gradient map at z with parameters (gamma1, gamma2).

    g_x = (x - prox_{g1 J}(x - g1 grad_x F(x, y))) / g1
    g_y = (y - prox_{g2 R}(y - g2 grad_y F(x_next, y))) / g2

    where ``z_x_next`` is the post-x-update point the y-gradient is
    evaluated at.
    """
    if gamma1 <= 0 or gamma2 <= 0:
        raise ValueError(f"gradient-map parameters must be positive, got ({gamma1}, {gamma2})")
    check_dims(problem, z)
    gx_full = full_grad_x(problem, z)
    g_x = (z.x - prox_generic(problem.prox_x, gamma1, z.x - gamma1 * gx_full)) / gamma1
    z_shift = Iterate(np.asarray(z_x_next, dtype=float), z.y)
    gy_full = full_grad_y(problem, z_shift)
    g_y = (z.y - prox_generic(problem.prox_y, gamma2, z.y - gamma2 * gy_full)) / gamma2
    return GradMapEval(
        g_x=g_x,
        g_y=g_y,
        norm_sq=float(g_x @ g_x + g_y @ g_y),
        gamma1=gamma1,
        gamma2=gamma2,
    )


def is_eps_critical(eval: GradMapEval, eps: float) -> bool:
    """True when the gradient-map norm is at most eps (boundary inclusive)."""
    return math.sqrt(eval.norm_sq) <= eps


def lyapunov_psi(
    problem: BlockProblem,
    z_k: Iterate,
    z_prev: Iterate,
    upsilon: float,
    v1: float,
    v_upsilon: float,
    rho: float,
) -> float:
    """Objective plus variance and displacement penalties.

    Psi = Phi(z_k) + upsilon / (2 rho sqrt(2 A)) + sqrt(A/2) ||z_k - z_prev||^2
    with A = V1 + V_upsilon / rho.  A monitor only: its expected decrease is
    a statistical trend, never asserted per step.
    """
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    a = v1 + v_upsilon / rho
    phi = objective(problem, z_k)
    if a == 0.0:
        return phi if upsilon == 0.0 else float("inf")
    return phi + upsilon / (2.0 * rho * math.sqrt(2.0 * a)) + math.sqrt(a / 2.0) * dist_sq(z_k, z_prev)


# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------


def fd_gradient_check(problem: BlockProblem, z: Iterate, h: float = 1e-6) -> float:
    """Worst relative error between analytic and central-difference gradients.

    For each component, each coordinate of each block is perturbed by +-h and
    the error is ||fd - grad|| / (1 + ||grad||); the maximum over components
    and blocks is returned.
    """
    check_dims(problem, z)
    worst = 0.0
    for i in range(problem.n):
        for block, dim, grad_fn in (
            ("x", problem.dim_x, problem.component_grad_x),
            ("y", problem.dim_y, problem.component_grad_y),
        ):
            g = np.asarray(grad_fn(i, z.x, z.y), dtype=float)
            fd = np.empty(dim)
            for j in range(dim):
                if block == "x":
                    xp, xm = z.x.copy(), z.x.copy()
                    xp[j] += h
                    xm[j] -= h
                    fp = problem.component_value(i, xp, z.y)
                    fm = problem.component_value(i, xm, z.y)
                else:
                    yp, ym = z.y.copy(), z.y.copy()
                    yp[j] += h
                    ym[j] -= h
                    fp = problem.component_value(i, z.x, yp)
                    fm = problem.component_value(i, z.x, ym)
                fd[j] = (fp - fm) / (2.0 * h)
            err = float(np.linalg.norm(fd - g)) / (1.0 + float(np.linalg.norm(g)))
            worst = max(worst, err)
    return worst


def bruteforce_prox_l0_nonneg(v: np.ndarray, s: int, gamma: float = 1.0) -> np.ndarray:
    """Exact projection onto {p >= 0, ||p||_0 <= s} by support enumeration.

    Enumerates supports in lexicographic order and keeps the first strict
    minimizer of 0.5 ||p - v||^2, matching the lowest-index tie-break of the
    fast prox.  ``gamma`` is irrelevant for an indicator; kept for signature
    parity.  Test-scale only: dim <= 12.
    """
    del gamma
    v = np.asarray(v, dtype=float)
    d = v.shape[0]
    if d > 12:
        raise ValueError(f"brute-force prox is limited to dim <= 12, got {d}")
    if s < 1:
        raise ValueError(f"sparsity level must be >= 1, got {s}")
    s = min(s, d)
    best_cost = math.inf
    best = np.zeros(d)
    for support in combinations(range(d), s):
        p = np.zeros(d)
        idx = list(support)
        p[idx] = np.maximum(v[idx], 0.0)
        diff = p - v
        cost = 0.5 * float(diff @ diff)
        if cost < best_cost:
            best_cost = cost
            best = p
    return best


def _all_batches(n: int, b: int):
    if n > 8:
        raise ValueError(f"exhaustive enumeration is limited to n <= 8, got {n}")
    for batch in combinations(range(n), b):
        yield np.asarray(batch, dtype=int)


def exhaustive_mse(
    problem: BlockProblem,
    kind: str,
    b: int,
    z: Iterate,
    state: SagaState | SarahState | None = None,
    z_old: Iterate | None = None,
    block: str = "x",
) -> float:
    """Mean squared estimator error over ALL size-b batches.

    kind 'sgd' and 'saga' measure the estimate at z against the full partial
    gradient at z; 'sarah' measures one recursive step from the estimates in
    ``state`` (taken at ``z_old``) to ``z``.  The previous-estimate vectors
    in a SarahState are not mutated.
    """
    check_dims(problem, z)
    if block not in ("x", "y"):
        raise ValueError(f"block must be 'x' or 'y', got {block!r}")
    grads = batch_grads_x if block == "x" else batch_grads_y
    full = full_grad_x(problem, z) if block == "x" else full_grad_y(problem, z)
    total = 0.0
    count = 0
    for batch in _all_batches(problem.n, b):
        if kind == "sgd":
            est = grads(problem, batch, z.x, z.y).mean(axis=0)
        elif kind == "saga":
            fresh = grads(problem, batch, z.x, z.y)
            table = state.table_x if block == "x" else state.table_y
            mean = state.mean_x if block == "x" else state.mean_y
            est = saga_combine(fresh, batch, table, mean)
        elif kind == "sarah":
            if z_old is None:
                raise ValueError("SARAH MSE needs the previous iterate z_old")
            prev = state.est_x if block == "x" else state.est_y
            diffs = grads(problem, batch, z.x, z.y) - grads(problem, batch, z_old.x, z_old.y)
            est = diffs.mean(axis=0) + prev
        else:
            raise ValueError(f"unknown estimator kind {kind!r}")
        err = est - full
        total += float(err @ err)
        count += 1
    return total / count
