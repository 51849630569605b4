"""Weighted elliptic machinery: Hardy inequality and Hodge decompositions.

Both decompositions are least-squares fits with the grid's own first
derivative stencils, solved by conjugate gradients on the Gram (normal
equation) operators.  Potentials are restricted to fields supported away
from the outermost grid rings; on that subspace the co-exact and exact
pieces are exactly orthogonal because the one-sided boundary stencils are
never engaged and the two central differences commute.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .fields import Grid, OneForm, ScalarField
from .linalg import ConvergenceError, pcg
from .perturb import SUPPORT_RINGS, check_interior_support
from .weights import VortexWeight

_DIFF_CACHE: dict[tuple[int, float], tuple[sp.csr_matrix, sp.csr_matrix]] = {}


def _diff_matrices(grid: Grid) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """1D differentiation matrix (and its transpose) matching d_scalar."""
    key = (grid.n, grid.spacing)
    if key not in _DIFF_CACHE:
        n, h = grid.n, grid.spacing
        d = sp.lil_matrix((n, n))
        d[0, 0], d[0, 1], d[0, 2] = -1.5 / h, 2.0 / h, -0.5 / h
        d[n - 1, n - 1], d[n - 1, n - 2], d[n - 1, n - 3] = 1.5 / h, -2.0 / h, 0.5 / h
        for i in range(1, n - 1):
            d[i, i - 1] = -0.5 / h
            d[i, i + 1] = 0.5 / h
        dcsr = d.tocsr()
        _DIFF_CACHE[key] = (dcsr, dcsr.T.tocsr())
    return _DIFF_CACHE[key]


class GradOps:
    """Discrete gradient and its plain-dot-product adjoint on one grid."""

    def __init__(self, grid: Grid):
        self.grid = grid
        self.d1, self.d1t = _diff_matrices(grid)
        self.d1sq = self.d1.multiply(self.d1).tocsr()
        self.d1sqt = self.d1sq.T.tocsr()

    def dx(self, f: np.ndarray) -> np.ndarray:
        return f @ self.d1t  # rows act along axis 1

    def dy(self, f: np.ndarray) -> np.ndarray:
        return self.d1 @ f

    def dx_t(self, y: np.ndarray) -> np.ndarray:
        return y @ self.d1

    def dy_t(self, y: np.ndarray) -> np.ndarray:
        return self.d1t @ y

    def gram_apply(self, coeff: np.ndarray, f: np.ndarray) -> np.ndarray:
        """(Dx^T c Dx + Dy^T c Dy) f for a nodewise coefficient c."""
        return self.dx_t(coeff * self.dx(f)) + self.dy_t(coeff * self.dy(f))


def interior_mask(grid: Grid, rings: int = SUPPORT_RINGS) -> np.ndarray:
    mask = np.zeros((grid.n, grid.n), dtype=bool)
    mask[rings:-rings, rings:-rings] = True
    return mask


def _gram_jacobi_diag(ops: GradOps, coeff: np.ndarray) -> np.ndarray:
    """Exact diagonal of Dx^T c Dx + Dy^T c Dy: column sums of c against
    the squared stencil entries."""
    diag = coeff @ ops.d1sq + ops.d1sqt @ coeff
    return np.maximum(diag, 1e-300)


def _solve_gram(ops: GradOps, coeff: np.ndarray, rhs: np.ndarray,
                mask: np.ndarray, tol: float, max_iter: int = 20000,
                x0: np.ndarray | None = None) -> np.ndarray:
    diag = _gram_jacobi_diag(ops, coeff)

    def apply_a(x):
        return np.where(mask, ops.gram_apply(coeff, x), 0.0)

    def apply_m(r):
        return np.where(mask, r / diag, 0.0)

    b = np.where(mask, rhs, 0.0)
    # reconstruction residuals are checked by the callers; keep the best
    # iterate rather than failing the whole decomposition mid-solve
    x, _ = pcg(apply_a, b, apply_m=apply_m, tol=tol, max_iter=max_iter, x0=x0,
               raise_on_fail=False)
    return x


@dataclass
class HodgeParts:
    """Potentials of the weighted (v, f) and standard (p, q) splittings."""

    b_input: OneForm
    weight: VortexWeight | None = None
    v: ScalarField | None = None
    f: ScalarField | None = None
    p: ScalarField | None = None
    q: ScalarField | None = None
    weighted_residual: float | None = None
    standard_residual: float | None = None


def hardy_gap(weight: VortexWeight, f: ScalarField) -> tuple[float, float]:
    """(integral |grad w|^2 f^2, integral w^2 |df|^2); caller asserts lhs <= rhs."""
    grid = f.grid
    check_interior_support(grid, f.values, what="f")
    ops = GradOps(grid)
    m = grid.quad_weights()
    w2 = weight.on_grid(grid) ** 2
    gw2 = weight.grad_norm2_on_grid(grid)
    lhs = float(np.sum(m * gw2 * f.values ** 2))
    df2 = ops.dx(f.values) ** 2 + ops.dy(f.values) ** 2
    rhs = float(np.sum(m * w2 * df2))
    return lhs, rhs


def _weighted_floor(w: np.ndarray) -> np.ndarray:
    """w with exact zeros lifted to the smallest positive node value."""
    positive = w[w > 0]
    if positive.size == 0:
        raise ValueError("weight vanishes identically on the grid")
    return np.where(w > 0, w, float(positive.min()))


def _line_integrate(grid: Grid, g1: np.ndarray, g2: np.ndarray) -> np.ndarray:
    """Potential from trapezoidal path integration (rows after column 0)."""
    h = grid.spacing
    f = np.zeros((grid.n, grid.n))
    f[:, 0] = np.concatenate(([0.0], np.cumsum(0.5 * h * (g2[:-1, 0] + g2[1:, 0]))))
    f[:, 1:] = f[:, :1] + np.cumsum(0.5 * h * (g1[:, :-1] + g1[:, 1:]), axis=1)
    return f - f.mean()


def weighted_hodge_decompose(b: OneForm, weight: VortexWeight,
                             tol: float = 1e-8) -> HodgeParts:
    """Split w b = * w dv + w^{-1} df with v the weighted LSQ minimizer.

    v minimizes the weighted functional over interior-supported fields; f
    is fitted to the closed remainder g = w^2 (b - *dv) by path integration
    plus a least-squares projection onto gradients in the w^{-2} metric.
    The reconstruction residual is reported relative to ||w b||.
    """
    grid = b.grid
    ops = GradOps(grid)
    m = grid.quad_weights()
    mask = interior_mask(grid)
    w = weight.on_grid(grid)
    w_safe = _weighted_floor(w)
    w2 = w_safe ** 2

    coeff = m * w2
    rhs = ops.dx_t(coeff * b.a2) - ops.dy_t(coeff * b.a1)
    v = _solve_gram(ops, coeff, rhs, mask, tol=min(1e-10, 0.01 * tol))

    g1 = w2 * (b.a1 + ops.dy(v))   # b - *dv with *dv = (-dy v, dx v)
    g2 = w2 * (b.a2 - ops.dx(v))
    # Fit metric ~ w^{-2} with the dynamic range capped: the uncapped normal
    # equations are numerically singular next to the weight's zeros.
    w_fit = np.maximum(w_safe, 1e-2 * float(w_safe.max()))
    winv2 = m / w_fit ** 2
    f0 = _line_integrate(grid, g1, g2)
    rhs_f = ops.dx_t(winv2 * g1) + ops.dy_t(winv2 * g2)
    full = np.ones_like(mask, dtype=bool)
    f = _solve_gram(ops, winv2, rhs_f, full, tol=min(1e-10, 0.01 * tol), x0=f0)

    res1 = w_safe * (b.a1 + ops.dy(v)) - ops.dx(f) / w_safe
    res2 = w_safe * (b.a2 - ops.dx(v)) - ops.dy(f) / w_safe
    norm_wb = np.sqrt(np.sum(m * w2 * (b.a1 ** 2 + b.a2 ** 2)))
    residual = float(np.sqrt(np.sum(m * (res1 ** 2 + res2 ** 2))) / (norm_wb or 1.0))
    if residual > tol:
        raise ConvergenceError("weighted reconstruction residual above tol", residual)
    return HodgeParts(b_input=b, weight=weight,
                      v=ScalarField(grid, v), f=ScalarField(grid, f),
                      weighted_residual=residual)


def standard_hodge_decompose(b: OneForm, tol: float = 1e-8,
                             parts: HodgeParts | None = None) -> HodgeParts:
    """Split b = *dp + dq over interior-supported potentials.

    The two normal-equation solves decouple exactly on this subspace; the
    reported residual is ||b - *dp - dq|| / ||b||.
    """
    grid = b.grid
    ops = GradOps(grid)
    m = grid.quad_weights()
    mask = interior_mask(grid)

    rhs_p = ops.dx_t(m * b.a2) - ops.dy_t(m * b.a1)
    p = _solve_gram(ops, m, rhs_p, mask, tol=min(1e-10, 0.01 * tol))
    rhs_q = ops.dx_t(m * b.a1) + ops.dy_t(m * b.a2)
    q = _solve_gram(ops, m, rhs_q, mask, tol=min(1e-10, 0.01 * tol))

    res1 = b.a1 + ops.dy(p) - ops.dx(q)
    res2 = b.a2 - ops.dx(p) - ops.dy(q)
    norm_b = np.sqrt(np.sum(m * (b.a1 ** 2 + b.a2 ** 2)))
    residual = float(np.sqrt(np.sum(m * (res1 ** 2 + res2 ** 2))) / (norm_b or 1.0))
    if residual > tol:
        raise ConvergenceError("standard reconstruction residual above tol", residual)
    if parts is None:
        parts = HodgeParts(b_input=b)
    parts.p = ScalarField(grid, p)
    parts.q = ScalarField(grid, q)
    parts.standard_residual = residual
    return parts


def gap_constant(eps: float) -> float:
    """Constant in the co-exact gap estimate, (8 eps^2 + 5(1+eps)^4) / (8(1+eps)^2)."""
    return (8.0 * eps ** 2 + 5.0 * (1.0 + eps) ** 4) / (8.0 * (1.0 + eps) ** 2)


def hodge_gap_check(parts: HodgeParts, weight: VortexWeight,
                    eps: float) -> tuple[float, float, float]:
    """(lhs, rhs, C) of  ||w^{1+eps} d(v-p)||^2 <= C sup(w^{2eps})/eps^2 ||w^{-1}df||^2."""
    if parts.v is None or parts.p is None or parts.f is None:
        raise ValueError("need both decompositions of the same one-form")
    if eps <= 0:
        raise ValueError("eps must be positive")
    grid = parts.b_input.grid
    ops = GradOps(grid)
    m = grid.quad_weights()
    w = weight.on_grid(grid)
    w_safe = _weighted_floor(w)

    diff = parts.v.values - parts.p.values
    d2 = ops.dx(diff) ** 2 + ops.dy(diff) ** 2
    lhs = float(np.sum(m * w ** (2.0 + 2.0 * eps) * d2))
    df2 = ops.dx(parts.f.values) ** 2 + ops.dy(parts.f.values) ** 2
    f_norm = float(np.sum(m * df2 / w_safe ** 2))
    c = gap_constant(eps)
    rhs = c * float(np.max(w ** (2.0 * eps))) / eps ** 2 * f_norm
    return lhs, rhs, c
