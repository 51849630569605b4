"""Linear solvers used by the PDE and decomposition modules.

Everything is matrix-free on (m, m) arrays of interior unknowns.  The fast
Poisson solve diagonalizes the 5-point Dirichlet Laplacian with the type-I
discrete sine transform and is used both directly and as a preconditioner
for conjugate gradients.
"""

from __future__ import annotations

import numpy as np
from scipy.fft import dstn, idstn


class ConvergenceError(RuntimeError):
    """Iterative solve failed; carries the last residual in .residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


def laplace5_interior(u: np.ndarray, h: float) -> np.ndarray:
    """5-point Laplacian of an interior block, zero Dirichlet outside."""
    out = -4.0 * u
    out[1:, :] += u[:-1, :]
    out[:-1, :] += u[1:, :]
    out[:, 1:] += u[:, :-1]
    out[:, :-1] += u[:, 1:]
    return out / (h * h)


class PoissonDST:
    """Solver for (-laplace5 + shift) u = f with zero Dirichlet data."""

    def __init__(self, m: int, h: float, shift: float = 0.0):
        self.m = m
        self.h = h
        self.shift = float(shift)
        k = np.arange(1, m + 1)
        lam = (2.0 - 2.0 * np.cos(np.pi * k / (m + 1))) / (h * h)
        self.denom = lam[:, None] + lam[None, :] + self.shift

    def solve(self, f: np.ndarray) -> np.ndarray:
        coef = dstn(f, type=1)
        coef /= self.denom
        return idstn(coef, type=1)


def pcg(apply_a, b: np.ndarray, apply_m=None, tol: float = 1e-10,
        max_iter: int = 2000, x0: np.ndarray | None = None,
        raise_on_fail: bool = True):
    """Preconditioned CG for SPD apply_a; returns (x, relative_residual).

    Stops when ||b - A x|| <= tol * ||b||.  When the budget runs out or the
    recurrence degenerates (possible at extreme condition numbers or when b
    sits at round-off level), either raises ConvergenceError or, with
    raise_on_fail=False, returns the best iterate seen so far.
    """
    x = np.zeros_like(b) if x0 is None else x0.copy()
    r = b - apply_a(x) if x0 is not None else b.copy()
    norm_b = float(np.linalg.norm(b)) or 1.0
    z = apply_m(r) if apply_m is not None else r
    p = z.copy()
    rz = float(np.vdot(r, z).real)
    res = float(np.linalg.norm(r)) / norm_b
    best_x, best_res = x.copy(), res
    if res <= tol:
        return x, res

    def fail(message: str):
        if raise_on_fail:
            raise ConvergenceError(message, best_res)
        return best_x, best_res

    for _ in range(max_iter):
        ap = apply_a(p)
        pap = float(np.vdot(p, ap).real)
        if pap <= 0 or not np.isfinite(pap):
            return fail("CG lost positive-definiteness")
        alpha = rz / pap
        x += alpha * p
        r -= alpha * ap
        res = float(np.linalg.norm(r)) / norm_b
        if res < best_res:
            best_x, best_res = x.copy(), res
        if res <= tol:
            return x, res
        if not np.isfinite(res) or res > 1e8:
            return fail("CG diverged")
        z = apply_m(r) if apply_m is not None else r
        rz_new = float(np.vdot(r, z).real)
        p = z + (rz_new / rz) * p
        rz = rz_new
    return fail("CG did not converge")
