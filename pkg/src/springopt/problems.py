"""Benchmark problem adapters and their proximal operators.

Three families, each exposed through the two-block ``BlockProblem`` surface
with closed-form component gradients:

* sparse nonnegative matrix factorization:
  min ||A - XY||_F^2  s.t.  X, Y >= 0 and every column of X has at most s
  nonzeros (hard L0 constraint);
* sparse PCA: min ||A - XY||_F^2 + lam1 ||X||_1 + lam2 ||Y||_1;
* blind deconvolution: min ||Z - X (*) Y||_F^2 + lam sum log(1 + theta v^2)
  over the forward-difference entries v of the image X, with 0 <= X <= 1,
  0 <= Y <= 1, ||Y||_1 <= 1.  (*) is valid-region 2D correlation.

The factorization problems split the finite sum over the d columns of A with
F_i = d * ||A_i - X Y_i||^2 so that the component mean equals the monolithic
objective.  Blind deconvolution splits the residual grid into contiguous
tiles; the smooth edge regularizer is carried by every component (divided by
the component count through the mean), keeping each F_i differentiable.

Matrix blocks are flattened row-major into the solver's vector view.

Defaults lam=5e-4 for deconvolution and lam1=lam2=0.1 for sparse PCA are
pragmatic choices for the bundled benchmarks, not reference values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .core import BlockProblem, Iterate
from .lipschitz import PowerMethodConfig, power_estimate_sq_norm

# ---------------------------------------------------------------------------
# Proximal operators
# ---------------------------------------------------------------------------


def prox_nonneg(v: np.ndarray) -> np.ndarray:
    """Entrywise projection onto the nonnegative orthant."""
    return np.maximum(np.asarray(v, dtype=float), 0.0)


def prox_l1(v: np.ndarray, tau: float) -> np.ndarray:
    """Entrywise soft threshold by tau >= 0."""
    if tau < 0:
        raise ValueError(f"threshold must be nonnegative, got {tau}")
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)


def prox_l0_nonneg_columns(v: np.ndarray, s: int) -> np.ndarray:
    """Exact prox of the indicator of {columns >= 0 with at most s nonzeros}.

    Per column: clamp negatives to zero, keep the s largest remaining
    entries and zero the rest.  Ties keep the lowest row index (stable
    sort), which makes the prox a deterministic single-valued map.
    """
    if s < 1:
        raise ValueError(f"sparsity level must be >= 1, got {s}")
    v = np.atleast_2d(np.asarray(v, dtype=float))
    clipped = np.maximum(v, 0.0)
    if s >= v.shape[0]:
        return clipped
    out = np.zeros_like(clipped)
    for col in range(v.shape[1]):
        keep = np.argsort(-clipped[:, col], kind="stable")[:s]
        out[keep, col] = clipped[keep, col]
    return out


def project_box_l1(v: np.ndarray, bound: float = 1.0) -> np.ndarray:
    """Euclidean projection onto {0 <= p <= 1, sum(p) <= bound}.

    Clip to the box; if the sum constraint is inactive we are done,
    otherwise bisect on the shift t solving sum clip(v - t, 0, 1) = bound
    to within 1e-12 in t.
    """
    v = np.asarray(v, dtype=float)
    p = np.clip(v, 0.0, 1.0)
    if p.sum() <= bound:
        return p
    lo, hi = 0.0, float(v.max())
    while hi - lo > 1e-12:
        t = 0.5 * (lo + hi)
        if np.clip(v - t, 0.0, 1.0).sum() > bound:
            lo = t
        else:
            hi = t
    # The upper bracket end keeps sum <= bound exactly (bisection invariant),
    # so the output is feasible in floating point, not just up to tolerance.
    return np.clip(v - hi, 0.0, 1.0)


# ---------------------------------------------------------------------------
# Matrix factorization family (sparse NMF and sparse PCA)
# ---------------------------------------------------------------------------


def nmf_component_grads(A: np.ndarray, i: int, X: np.ndarray, Y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Gradients of F_i = d * ||A_i - X Y_i||^2 for column i.

    grad_X = 2d (X Y_i - A_i) Y_i^T; grad_Y is zero outside column i, where
    it equals 2d X^T (X Y_i - A_i).  The d factor makes the component mean
    equal ||A - XY||_F^2.
    """
    d = A.shape[1]
    resid = X @ Y[:, i] - A[:, i]
    grad_x = 2.0 * d * np.outer(resid, Y[:, i])
    grad_y = np.zeros_like(Y)
    grad_y[:, i] = 2.0 * d * (X.T @ resid)
    return grad_x, grad_y


def _factorization_block_problem(A, r, reg_x_value, reg_y_value, prox_x, prox_y):
    m, d = A.shape
    dim_x, dim_y = m * r, r * d

    def value(i, xv, yv):
        X, Y = xv.reshape(m, r), yv.reshape(r, d)
        resid = X @ Y[:, i] - A[:, i]
        return d * float(resid @ resid)

    def grad_x(i, xv, yv):
        X, Y = xv.reshape(m, r), yv.reshape(r, d)
        resid = X @ Y[:, i] - A[:, i]
        return (2.0 * d * np.outer(resid, Y[:, i])).ravel()

    def grad_y(i, xv, yv):
        X, Y = xv.reshape(m, r), yv.reshape(r, d)
        resid = X @ Y[:, i] - A[:, i]
        g = np.zeros((r, d))
        g[:, i] = 2.0 * d * (X.T @ resid)
        return g.ravel()

    def lip_x(xv, yv, batch, rng, iterations=5):
        # The x-gradient is linear through 2 (d/b) Y_B Y_B^T, so its
        # Lipschitz constant is estimated as 2 (d/b) ||Y_B||^2 by power
        # iteration (full batch: 2 ||Y||^2).
        Y = yv.reshape(r, d)
        cols = Y if batch is None else Y[:, np.asarray(batch, dtype=int)]
        scale = 2.0 if batch is None else 2.0 * d / cols.shape[1]
        cfg = PowerMethodConfig(iterations=iterations, rng=rng)
        return scale * power_estimate_sq_norm(lambda v: cols @ (cols.T @ v), r, cfg)

    def lip_y(xv, yv, batch, rng, iterations=5):
        # Per sampled column the y-gradient acts through 2 (d/b) X^T X.
        X = xv.reshape(m, r)
        scale = 2.0 if batch is None else 2.0 * d / len(batch)
        cfg = PowerMethodConfig(iterations=iterations, rng=rng)
        return scale * power_estimate_sq_norm(lambda v: X.T @ (X @ v), r, cfg)

    return BlockProblem(
        n=d,
        dim_x=dim_x,
        dim_y=dim_y,
        component_value=value,
        component_grad_x=grad_x,
        component_grad_y=grad_y,
        reg_x_value=reg_x_value,
        reg_y_value=reg_y_value,
        prox_x=prox_x,
        prox_y=prox_y,
        lipschitz_x=lip_x,
        lipschitz_y=lip_y,
    )


@dataclass(frozen=True)
class SparseNmfProblem:
    """||A - XY||_F^2 with X, Y >= 0 and s-sparse columns of X."""

    A: np.ndarray
    r: int
    s: int

    def __post_init__(self):
        object.__setattr__(self, "A", np.asarray(self.A, dtype=float))
        m, d = self.A.shape
        if not 1 <= self.s <= m:
            raise ValueError(f"sparsity must satisfy 1 <= s <= {m}, got {self.s}")
        if not 1 <= self.r <= d:
            raise ValueError(f"rank must satisfy 1 <= r <= {d}, got {self.r}")

    def block_problem(self) -> BlockProblem:
        m, d = self.A.shape
        r, s = self.r, self.s

        def reg_x(xv):
            X = xv.reshape(m, r)
            feasible = np.all(X >= 0) and np.all(np.count_nonzero(X, axis=0) <= s)
            return 0.0 if feasible else float("inf")

        def reg_y(yv):
            return 0.0 if np.all(yv >= 0) else float("inf")

        def px(_gamma, xv):
            return prox_l0_nonneg_columns(xv.reshape(m, r), s).ravel()

        def py(_gamma, yv):
            return prox_nonneg(yv)

        return _factorization_block_problem(self.A, r, reg_x, reg_y, px, py)

    def initial_iterate(self, seed: int = 0) -> Iterate:
        m, d = self.A.shape
        rng = np.random.default_rng(seed)
        scale = math.sqrt(max(self.A.mean(), 1e-12) / self.r)
        X = scale * rng.random((m, self.r))
        Y = scale * rng.random((self.r, d))
        X = prox_l0_nonneg_columns(X, self.s)
        return Iterate(X.ravel(), Y.ravel())


@dataclass(frozen=True)
class SparsePcaProblem:
    """||A - XY||_F^2 + lam1 ||X||_1 + lam2 ||Y||_1."""

    A: np.ndarray
    r: int
    lam1: float = 0.1
    lam2: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "A", np.asarray(self.A, dtype=float))
        if self.lam1 < 0 or self.lam2 < 0:
            raise ValueError("l1 weights must be nonnegative")
        if not 1 <= self.r <= self.A.shape[1]:
            raise ValueError(f"rank must satisfy 1 <= r <= {self.A.shape[1]}, got {self.r}")

    def block_problem(self) -> BlockProblem:
        lam1, lam2 = self.lam1, self.lam2

        def reg_x(xv):
            return lam1 * float(np.abs(xv).sum())

        def reg_y(yv):
            return lam2 * float(np.abs(yv).sum())

        def px(gamma, xv):
            return prox_l1(xv, gamma * lam1)

        def py(gamma, yv):
            return prox_l1(yv, gamma * lam2)

        return _factorization_block_problem(self.A, self.r, reg_x, reg_y, px, py)

    def initial_iterate(self, seed: int = 0) -> Iterate:
        m, d = self.A.shape
        rng = np.random.default_rng(seed)
        scale = math.sqrt(max(np.abs(self.A).mean(), 1e-12) / self.r)
        X = scale * rng.standard_normal((m, self.r))
        Y = scale * rng.standard_normal((self.r, d))
        return Iterate(X.ravel(), Y.ravel())


# ---------------------------------------------------------------------------
# Blind deconvolution
# ---------------------------------------------------------------------------


def bid_forward(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Valid-region 2D correlation of image X with kernel Y.

    out[p, q] = sum_{a, b} X[p + a, q + b] Y[a, b], output shape
    (h - kh + 1, w - kw + 1).
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if Y.shape[0] > X.shape[0] or Y.shape[1] > X.shape[1]:
        raise ValueError(f"kernel {Y.shape} larger than image {X.shape}")
    windows = sliding_window_view(X, Y.shape)
    return np.einsum("pqab,ab->pq", windows, Y)


def bid_adjoint_image(U: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Adjoint of X -> bid_forward(X, Y): <fwd(X,Y), U> = <X, adj(U,Y)>."""
    kh, kw = Y.shape
    padded = np.pad(U, ((kh - 1, kh - 1), (kw - 1, kw - 1)))
    return bid_forward(padded, Y[::-1, ::-1])


def bid_adjoint_kernel(U: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Adjoint of Y -> bid_forward(X, Y); correlation of X with U."""
    return bid_forward(X, U)


def image_gradients(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Forward differences (horizontal, vertical) with zero boundary rows."""
    dh = np.zeros_like(X)
    dh[:, :-1] = X[:, 1:] - X[:, :-1]
    dv = np.zeros_like(X)
    dv[:-1, :] = X[1:, :] - X[:-1, :]
    return dh, dv


def image_gradients_adjoint(Wh: np.ndarray, Wv: np.ndarray) -> np.ndarray:
    """Adjoint of ``image_gradients`` (negative discrete divergence)."""
    out = np.zeros_like(Wh)
    out[:, 1:] += Wh[:, :-1]
    out[:, :-1] -= Wh[:, :-1]
    out[1:, :] += Wv[:-1, :]
    out[:-1, :] -= Wv[:-1, :]
    return out


def bid_component_split(shape: tuple[int, int], n_blocks: int) -> list[tuple[slice, slice]]:
    """Partition a residual grid into n_blocks contiguous tiles.

    The grid is cut into a tr x tc layout where tr is the divisor of
    n_blocks closest to its square root; rows/cols are split as evenly as
    possible.  Tiles cover the grid exactly once.
    """
    h, w = shape
    if n_blocks < 1 or n_blocks > h * w:
        raise ValueError(f"need 1 <= n_blocks <= {h * w}, got {n_blocks}")
    tr = max(t for t in range(1, int(math.isqrt(n_blocks)) + 1) if n_blocks % t == 0)
    tc = n_blocks // tr
    if tr > h or tc > w:  # fall back to whichever orientation fits
        tr, tc = tc, tr
    if tr > h or tc > w:
        raise ValueError(f"cannot tile {shape} into {n_blocks} contiguous blocks")
    row_edges = np.linspace(0, h, tr + 1, dtype=int)
    col_edges = np.linspace(0, w, tc + 1, dtype=int)
    tiles = []
    for i in range(tr):
        for j in range(tc):
            tiles.append((slice(row_edges[i], row_edges[i + 1]), slice(col_edges[j], col_edges[j + 1])))
    return tiles


def bid_potential(v: np.ndarray, theta: float) -> np.ndarray:
    """Edge-preserving potential log(1 + theta v^2), applied entrywise."""
    return np.log1p(theta * v * v)


def bid_potential_deriv(v: np.ndarray, theta: float) -> np.ndarray:
    """Derivative 2 theta v / (1 + theta v^2)."""
    return 2.0 * theta * v / (1.0 + theta * v * v)


def bid_grads(
    X: np.ndarray,
    Y: np.ndarray,
    Z: np.ndarray,
    lam: float,
    theta: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Full gradients of ||Z - X (*) Y||_F^2 + lam sum Phi(D(X))."""
    resid = bid_forward(X, Y) - Z
    grad_x = 2.0 * bid_adjoint_image(resid, Y)
    dh, dv = image_gradients(X)
    grad_x += lam * image_gradients_adjoint(
        bid_potential_deriv(dh, theta), bid_potential_deriv(dv, theta)
    )
    grad_y = 2.0 * bid_adjoint_kernel(resid, X)
    return grad_x, grad_y


@dataclass(frozen=True)
class BlindDeblurProblem:
    """Recover image X and kernel Y from the blurred observation Z.

    Z has shape (h, w); the image variable has shape (h + kh - 1, w + kw - 1)
    so the valid correlation matches Z exactly.  The residual grid is split
    into ``n_tiles`` components; the smooth edge regularizer rides along in
    every component.
    """

    Z: np.ndarray
    kernel_shape: tuple[int, int]
    lam: float = 5e-4
    theta: float = 1e3
    n_tiles: int = 16

    def __post_init__(self):
        object.__setattr__(self, "Z", np.asarray(self.Z, dtype=float))
        kh, kw = self.kernel_shape
        if kh < 1 or kw < 1:
            raise ValueError("kernel must be at least 1x1")
        if self.lam <= 0 or self.theta <= 0:
            raise ValueError("lam and theta must be positive")

    @property
    def image_shape(self) -> tuple[int, int]:
        kh, kw = self.kernel_shape
        return self.Z.shape[0] + kh - 1, self.Z.shape[1] + kw - 1

    def block_problem(self) -> BlockProblem:
        Z, lam, theta = self.Z, self.lam, self.theta
        kh, kw = self.kernel_shape
        hx, wx = self.image_shape
        tiles = bid_component_split(Z.shape, self.n_tiles)
        n = len(tiles)

        def reg_value(X):
            dh, dv = image_gradients(X)
            return lam * float(bid_potential(dh, theta).sum() + bid_potential(dv, theta).sum())

        def value(i, xv, yv):
            X, Y = xv.reshape(hx, wx), yv.reshape(kh, kw)
            resid = bid_forward(X, Y) - Z
            tile = resid[tiles[i]]
            return n * float((tile * tile).sum()) + reg_value(X)

        def grad_x(i, xv, yv):
            X, Y = xv.reshape(hx, wx), yv.reshape(kh, kw)
            resid = bid_forward(X, Y) - Z
            masked = np.zeros_like(resid)
            masked[tiles[i]] = resid[tiles[i]]
            g = 2.0 * n * bid_adjoint_image(masked, Y)
            dh, dv = image_gradients(X)
            g += lam * image_gradients_adjoint(
                bid_potential_deriv(dh, theta), bid_potential_deriv(dv, theta)
            )
            return g.ravel()

        def grad_y(i, xv, yv):
            X, Y = xv.reshape(hx, wx), yv.reshape(kh, kw)
            resid = bid_forward(X, Y) - Z
            masked = np.zeros_like(resid)
            masked[tiles[i]] = resid[tiles[i]]
            return (2.0 * n * bid_adjoint_kernel(masked, X)).ravel()

        def reg_x(xv):
            return 0.0 if np.all(xv >= 0) and np.all(xv <= 1) else float("inf")

        def reg_y(yv):
            feasible = np.all(yv >= 0) and np.all(yv <= 1) and yv.sum() <= 1.0
            return 0.0 if feasible else float("inf")

        def px(_gamma, xv):
            return np.clip(xv, 0.0, 1.0)

        def py(_gamma, yv):
            return project_box_l1(yv.reshape(kh, kw)).ravel()

        def masked_scale(batch):
            if batch is None:
                return None, 2.0
            mask = np.zeros(Z.shape, dtype=bool)
            for j in batch:
                mask[tiles[int(j)]] = True
            return mask, 2.0 * n / len(batch)

        def lip_x(xv, yv, batch, rng, iterations=5):
            Y = yv.reshape(kh, kw)
            mask, scale = masked_scale(batch)

            def apply(v):
                V = v.reshape(hx, wx)
                out = bid_forward(V, Y)
                if mask is not None:
                    out = np.where(mask, out, 0.0)
                return (scale * bid_adjoint_image(out, Y)).ravel()

            cfg = PowerMethodConfig(iterations=iterations, rng=rng)
            # Smooth-regularizer curvature: Phi'' <= 2 theta, ||D^T D|| <= 8.
            return power_estimate_sq_norm(apply, hx * wx, cfg) + 16.0 * lam * theta

        def lip_y(xv, yv, batch, rng, iterations=5):
            X = xv.reshape(hx, wx)
            mask, scale = masked_scale(batch)

            def apply(w):
                W = w.reshape(kh, kw)
                out = bid_forward(X, W)
                if mask is not None:
                    out = np.where(mask, out, 0.0)
                return (scale * bid_adjoint_kernel(out, X)).ravel()

            cfg = PowerMethodConfig(iterations=iterations, rng=rng)
            return power_estimate_sq_norm(apply, kh * kw, cfg)

        return BlockProblem(
            n=n,
            dim_x=hx * wx,
            dim_y=kh * kw,
            component_value=value,
            component_grad_x=grad_x,
            component_grad_y=grad_y,
            reg_x_value=reg_x,
            reg_y_value=reg_y,
            prox_x=px,
            prox_y=py,
            lipschitz_x=lip_x,
            lipschitz_y=lip_y,
        )

    def initial_iterate(self) -> Iterate:
        """Blurred image padded to the image shape; uniform feasible kernel."""
        kh, kw = self.kernel_shape
        top, left = (kh - 1) // 2, (kw - 1) // 2
        X0 = np.pad(
            np.clip(self.Z, 0.0, 1.0),
            ((top, kh - 1 - top), (left, kw - 1 - left)),
            mode="edge",
        )
        # Re-project so the uniform kernel's sum is feasible in floating point.
        Y0 = project_box_l1(np.full((kh, kw), 1.0 / (kh * kw)))
        return Iterate(X0.ravel(), Y0.ravel())


# ---------------------------------------------------------------------------
# Quadratic toys (testing and calibration)
# ---------------------------------------------------------------------------


def make_separable_quadratic(
    dim_x: int = 4,
    dim_y: int = 4,
    n: int = 10,
    seed: int = 0,
    spread: float = 1.0,
) -> tuple[BlockProblem, dict]:
    """Least-squares toy: F_i = 0.5||x - a_i||^2 + 0.5||y - b_i||^2.

    The offsets average exactly to (a, b), so the mean objective is
    0.5||x - a||^2 + 0.5||y - b||^2 plus a known constant (the minimum
    value).  Partial gradients are 1-Lipschitz.  Returned info holds the
    targets and the optimal value.
    """
    rng = np.random.default_rng(seed)
    a = rng.standard_normal(dim_x)
    b = rng.standard_normal(dim_y)
    ea = rng.standard_normal((n, dim_x)) * spread
    eb = rng.standard_normal((n, dim_y)) * spread
    ea -= ea.mean(axis=0)
    eb -= eb.mean(axis=0)
    a_i = a + ea
    b_i = b + eb

    def value(i, x, y):
        dx = x - a_i[i]
        dy = y - b_i[i]
        return 0.5 * float(dx @ dx + dy @ dy)

    problem = BlockProblem(
        n=n,
        dim_x=dim_x,
        dim_y=dim_y,
        component_value=value,
        component_grad_x=lambda i, x, y: x - a_i[i],
        component_grad_y=lambda i, x, y: y - b_i[i],
        lipschitz_x=lambda x, y, batch, rng_, iterations=5: 1.0,
        lipschitz_y=lambda x, y, batch, rng_, iterations=5: 1.0,
    )
    phi_star = 0.5 * float((ea * ea).sum() + (eb * eb).sum()) / n
    info = {"a": a, "b": b, "phi_star": phi_star, "a_i": a_i, "b_i": b_i, "L": 1.0}
    return problem, info


def make_random_quadratic(
    dim_x: int = 4,
    dim_y: int = 4,
    n: int = 5,
    seed: int = 0,
    coupling: float = 0.3,
) -> tuple[BlockProblem, dict]:
    """Coupled quadratic components with known curvature.

    F_i = 0.5 x'P_i x + 0.5 y'Q_i y + coupling * x'R_i y + s_i'x + t_i'y with
    P_i, Q_i positive definite.  Info carries the mean matrices, the exact
    block Lipschitz constants of the mean gradient, and the worst
    per-component full-Hessian norm (a valid joint Lipschitz constant).
    """
    rng = np.random.default_rng(seed)
    Ps = np.empty((n, dim_x, dim_x))
    Qs = np.empty((n, dim_y, dim_y))
    Rs = rng.standard_normal((n, dim_x, dim_y)) * coupling
    ss = rng.standard_normal((n, dim_x))
    ts = rng.standard_normal((n, dim_y))
    for i in range(n):
        Bx = rng.standard_normal((dim_x, dim_x))
        By = rng.standard_normal((dim_y, dim_y))
        Ps[i] = Bx.T @ Bx / dim_x + 0.5 * np.eye(dim_x)
        Qs[i] = By.T @ By / dim_y + 0.5 * np.eye(dim_y)

    def value(i, x, y):
        return float(
            0.5 * x @ Ps[i] @ x + 0.5 * y @ Qs[i] @ y + x @ Rs[i] @ y + ss[i] @ x + ts[i] @ y
        )

    P_bar, Q_bar, R_bar = Ps.mean(axis=0), Qs.mean(axis=0), Rs.mean(axis=0)
    lip_x_exact = float(np.linalg.norm(P_bar, 2))
    lip_y_exact = float(np.linalg.norm(Q_bar, 2))
    worst_joint = 0.0
    for i in range(n):
        H = np.block([[Ps[i], Rs[i]], [Rs[i].T, Qs[i]]])
        worst_joint = max(worst_joint, float(np.linalg.norm(H, 2)))

    problem = BlockProblem(
        n=n,
        dim_x=dim_x,
        dim_y=dim_y,
        component_value=value,
        component_grad_x=lambda i, x, y: Ps[i] @ x + Rs[i] @ y + ss[i],
        component_grad_y=lambda i, x, y: Qs[i] @ y + Rs[i].T @ x + ts[i],
        lipschitz_x=lambda x, y, batch, rng_, iterations=5: lip_x_exact,
        lipschitz_y=lambda x, y, batch, rng_, iterations=5: lip_y_exact,
    )
    info = {
        "P": Ps, "Q": Qs, "R": Rs, "s": ss, "t": ts,
        "P_bar": P_bar, "Q_bar": Q_bar, "R_bar": R_bar,
        "lip_x": lip_x_exact, "lip_y": lip_y_exact, "L_joint": worst_joint,
    }
    return problem, info
