"""Construction of exact-to-discretization vortex minimizers.

The modulus of the minimizer with prescribed zeros a_1..a_N factors as
r0 = w * exp(h) where w = prod|x - a_k| and the regular part h solves

    lap h = (w^2 exp(2h) - 1) / 2        in the box,
    h = -log w                           on the boundary,

so r0 = 1 on the boundary.  Every stored field is smooth: the connection is
A0 = -*dh because the singular phase gradient of prod(z - a_k) is exactly
the harmonic conjugate of d log w.  The nonlinear problem is solved by a
damped inexact Newton iteration; the linearizations  -lap + r0^2  are SPD
and are inverted by conjugate gradients with a fast-Poisson preconditioner.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import k0 as bessel_k0

from .fields import (ComplexField, Grid, OneForm, ScalarField, d_scalar,
                     laplacian, star_oneform)
from .fieldio import read_field, write_field
from .linalg import ConvergenceError, PoissonDST, laplace5_interior, pcg
from .weights import VortexWeight

MAX_NEWTON_ITERS = 50


@dataclass(frozen=True)
class ZeroSet:
    """Prescribed zeros with multiplicity encoded by repetition."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if not self.points:
            raise ValueError("at least one zero required")

    @classmethod
    def of(cls, *points) -> "ZeroSet":
        return cls(tuple((float(x), float(y)) for x, y in points))

    @property
    def count(self) -> int:
        return len(self.points)

    def validate_for(self, grid: Grid) -> None:
        margin = grid.half_width / 2.0
        for x, y in self.points:
            if max(abs(x), abs(y)) > margin:
                raise ValueError(
                    f"zero too close to boundary: ({x}, {y}) outside half-box "
                    f"|x|,|y| <= {margin}"
                )


@dataclass
class VortexSolution:
    zeros: ZeroSet
    grid: Grid
    h_reg: ScalarField
    r0: ScalarField
    u0: ComplexField
    A0: OneForm
    energy: float
    residual_sup: float
    tol: float
    iterations: int

    @property
    def degree(self) -> int:
        return self.zeros.count

    def weight(self) -> VortexWeight:
        return VortexWeight.unit(self.zeros.points)


def _initial_guess(grid: Grid, zeros: ZeroSet) -> np.ndarray:
    # one-vortex ansatz r ~ rho/sqrt(rho^2 + 4) superposed multiplicatively
    X, Y = grid.meshes()
    h = np.zeros((grid.n, grid.n))
    for cx, cy in zeros.points:
        h -= 0.5 * np.log((X - cx) ** 2 + (Y - cy) ** 2 + 4.0)
    return h


def solve_taubes(zeros: ZeroSet, grid: Grid, tol: float = 1e-10) -> VortexSolution:
    """Damped Newton solve of the regular-part equation, then field assembly."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    zeros.validate_for(grid)

    n, h_sp = grid.n, grid.spacing
    weight = VortexWeight.unit(zeros.points)
    X, Y = grid.meshes()
    w = weight.omega(X, Y)
    log_w_boundary = weight.log_omega(X, Y)  # finite on the boundary ring

    h = _initial_guess(grid, zeros)
    h[0, :] = -log_w_boundary[0, :]
    h[-1, :] = -log_w_boundary[-1, :]
    h[:, 0] = -log_w_boundary[:, 0]
    h[:, -1] = -log_w_boundary[:, -1]

    def newton_residual(h_full: np.ndarray) -> np.ndarray:
        # interior residual of lap h - (w^2 e^{2h} - 1)/2, 5-point stencil
        lap = (h_full[:-2, 1:-1] + h_full[2:, 1:-1] + h_full[1:-1, :-2]
               + h_full[1:-1, 2:] - 4.0 * h_full[1:-1, 1:-1]) / (h_sp * h_sp)
        r0_sq = (w[1:-1, 1:-1] * np.exp(h_full[1:-1, 1:-1])) ** 2
        return lap - 0.5 * (r0_sq - 1.0)

    res = newton_residual(h)
    res_sup = float(np.max(np.abs(res)))
    iterations = 0
    while res_sup > tol and iterations < MAX_NEWTON_ITERS:
        iterations += 1
        v = (w[1:-1, 1:-1] * np.exp(h[1:-1, 1:-1])) ** 2  # r0^2 at interior
        poisson = PoissonDST(n - 2, h_sp, shift=float(np.mean(v)))

        def apply_a(x):
            return -laplace5_interior(x, h_sp) + v * x

        delta, _ = pcg(apply_a, res, apply_m=poisson.solve,
                       tol=0.1, max_iter=500)
        step = 1.0
        for _ in range(12):
            h_try = h.copy()
            h_try[1:-1, 1:-1] += step * delta
            res_try = newton_residual(h_try)
            sup_try = float(np.max(np.abs(res_try)))
            if sup_try < res_sup:
                break
            step *= 0.5
        else:
            raise ConvergenceError("Newton line search failed", res_sup)
        h, res, res_sup = h_try, res_try, sup_try

    if res_sup > tol:
        raise ConvergenceError(
            f"Newton did not reach tol={tol:g} in {MAX_NEWTON_ITERS} iterations",
            res_sup,
        )

    h_field = ScalarField(grid, h)
    r0 = ScalarField(grid, w * np.exp(h))
    poly = np.ones((n, n), dtype=complex)
    Z = X + 1j * Y
    for cx, cy in zeros.points:
        poly *= Z - complex(cx, cy)
    u0 = ComplexField.from_complex(grid, poly * np.exp(h))
    dh = d_scalar(h_field)
    star_dh = star_oneform(dh)
    A0 = OneForm(grid, -star_dh.a1, -star_dh.a2)

    from .energy import PairState, energy_direct

    energy = energy_direct(PairState(u=u0, A=A0))
    return VortexSolution(
        zeros=zeros, grid=grid, h_reg=h_field, r0=r0, u0=u0, A0=A0,
        energy=energy, residual_sup=res_sup, tol=tol, iterations=iterations,
    )


def vortex_equation_residuals(sol: VortexSolution) -> tuple[float, float]:
    """(sup regular-part residual, sup curvature residual) at interior nodes.

    The first is the Newton residual  lap h - (w^2 e^{2h} - 1)/2  with the
    solver's 5-point stencil; the second checks  *dA0 = (1 - r0^2)/2  with
    the chained first-derivative stencils and carries their O(h^2) floor.
    """
    grid = sol.grid
    h = sol.h_reg.values
    h_sp = grid.spacing
    w = sol.weight().on_grid(grid)
    lap5 = (h[:-2, 1:-1] + h[2:, 1:-1] + h[1:-1, :-2] + h[1:-1, 2:]
            - 4.0 * h[1:-1, 1:-1]) / (h_sp * h_sp)
    rhs = 0.5 * ((w[1:-1, 1:-1] * np.exp(h[1:-1, 1:-1])) ** 2 - 1.0)
    newton_sup = float(np.max(np.abs(lap5 - rhs)))

    lap_c = laplacian(sol.h_reg).values  # *dA0 = -lap_c h by construction
    curv = -lap_c - 0.5 * (1.0 - sol.r0.values ** 2)
    curvature_sup = float(np.max(np.abs(curv[1:-1, 1:-1])))
    return newton_sup, curvature_sup


def taubes_residual(sol: VortexSolution) -> float:
    return max(vortex_equation_residuals(sol))


@dataclass
class RadialProfile:
    """Single-vortex modulus profile f(rho) from the shooting oracle."""

    rho: np.ndarray
    f: np.ndarray
    slope_log: float  # log of the core slope c in f ~ c*rho

    def __call__(self, rho) -> np.ndarray:
        return np.interp(rho, self.rho, self.f)


def _shoot_once(w0: float, rho_end: float):
    """Integrate w'' + w'/rho = (rho^2 e^{2w} - 1)/2 for w = log(f/rho).

    Returns (status, solution); status is 'over' if f overshoots 1,
    'under' if f turns back down early, 'ok' otherwise.
    """
    rho0 = 1e-8

    def rhs(rho, y):
        wv, wp = y
        return [wp, -wp / rho + 0.5 * (rho * rho * np.exp(2.0 * wv) - 1.0)]

    def ev_over(rho, y):
        return y[0] + np.log(rho) - 0.2  # log f = 0.2 -> overshoot

    ev_over.terminal = True
    ev_over.direction = 1

    def ev_under(rho, y):
        if y[0] + np.log(rho) > -0.05:  # only flag while f is clearly below 1
            return 1.0
        return y[1] + 1.0 / rho  # f' sign

    ev_under.terminal = True
    ev_under.direction = -1

    y0 = [w0 - rho0 ** 2 / 8.0, -rho0 / 4.0]
    sol = solve_ivp(rhs, (rho0, rho_end), y0, rtol=1e-11, atol=1e-12,
                    events=(ev_over, ev_under), dense_output=True)
    if sol.t_events[0].size:
        return "over", sol
    if sol.t_events[1].size:
        return "under", sol
    return "ok", sol


def radial_profile_oracle(rho_max: float = 14.0, steps: int = 2801) -> RadialProfile:
    """Shooting solve of the radial vortex profile, f(0)=0, f(inf)=1.

    Bisects the core slope, then replaces the exponentially unstable tail
    with the matched K0 asymptotics once 1 - f < 5e-4.
    """
    if rho_max < 8:
        raise ValueError("rho_max must be at least 8")
    rho_end = max(float(rho_max), 12.0)

    lo, hi = -2.0, 0.5  # brackets for w0 = log c
    status_lo, _ = _shoot_once(lo, rho_end)
    status_hi, _ = _shoot_once(hi, rho_end)
    if status_lo != "under" or status_hi != "over":
        raise ConvergenceError("shooting bracket failure", 1.0)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        status, _ = _shoot_once(mid, rho_end)
        if status == "over":
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-15:
            break
    w0 = lo
    _, sol = _shoot_once(w0, rho_end)

    rho = np.linspace(0.0, float(rho_max), int(steps))
    f = np.empty_like(rho)
    f[0] = 0.0
    t_hi = float(sol.t[-1])
    inside = rho[1:] <= t_hi
    wv = sol.sol(np.clip(rho[1:], sol.t[0], t_hi))[0]
    f[1:] = np.where(inside, np.exp(wv) * rho[1:], 1.0)

    # matched asymptotic tail: 1 - f = kappa K0(rho)
    near_one = np.nonzero(1.0 - f < 5e-4)[0]
    if near_one.size:
        i0 = int(near_one[0])
        if 0 < i0 < len(rho) - 1:
            kappa = (1.0 - f[i0]) / bessel_k0(rho[i0])
            f[i0:] = 1.0 - kappa * bessel_k0(rho[i0:])
    return RadialProfile(rho=rho, f=f, slope_log=w0)


MANIFEST_NAME = "manifest.json"


def save_solution(sol: VortexSolution, directory) -> None:
    os.makedirs(directory, exist_ok=True)
    write_field(sol.h_reg, os.path.join(directory, "h_reg.ahf"))
    write_field(sol.r0, os.path.join(directory, "r0.ahf"))
    write_field(sol.u0, os.path.join(directory, "u0.ahf"))
    write_field(sol.A0, os.path.join(directory, "A0.ahf"))
    manifest = {
        "zeros": [list(p) for p in sol.zeros.points],
        "n": sol.grid.n,
        "L": sol.grid.half_width,
        "tol": sol.tol,
        "energy": sol.energy,
        "residual_sup": sol.residual_sup,
        "iterations": sol.iterations,
    }
    with open(os.path.join(directory, MANIFEST_NAME), "w") as fh:
        json.dump(manifest, fh, indent=2)


def load_solution(directory) -> VortexSolution:
    with open(os.path.join(directory, MANIFEST_NAME)) as fh:
        manifest = json.load(fh)
    h_reg = read_field(os.path.join(directory, "h_reg.ahf"))
    r0 = read_field(os.path.join(directory, "r0.ahf"))
    u0 = read_field(os.path.join(directory, "u0.ahf"))
    A0 = read_field(os.path.join(directory, "A0.ahf"))
    zeros = ZeroSet.of(*manifest["zeros"])
    return VortexSolution(
        zeros=zeros, grid=h_reg.grid, h_reg=h_reg, r0=r0, u0=u0, A0=A0,
        energy=float(manifest["energy"]),
        residual_sup=float(manifest["residual_sup"]),
        tol=float(manifest["tol"]),
        iterations=int(manifest["iterations"]),
    )
