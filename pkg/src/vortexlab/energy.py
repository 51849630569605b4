"""Gauge-invariant functionals of a pair (u, A).

The energy is evaluated in complex variables.  The discrepancy of a
perturbed pair (u0 e^{h'}, A0 + B) is evaluated in the smooth gauge-fixed
variables, where the two residuals of the first-order vortex equations are

    e1 = *dh' + B          (one-form),
    e2 = *dB + r0^2 (e^{2h'} - 1)/2

and the discrepancy is the quadrature of r^2|e1|^2 + |e2|^2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, NamedTuple

import numpy as np

from .fields import (ComplexField, OneForm, ScalarField, TwoForm,
                     d_oneform, d_scalar, d_scalar_arrays, integrate_values,
                     oneform_norm2, star_oneform)

if TYPE_CHECKING:
    from .taubes import VortexSolution

MODULUS_SANITY_BOUND = 10.0


@dataclass
class PairState:
    """Section and connection; optionally carries its perturbative origin."""

    u: ComplexField
    A: OneForm
    base: "VortexSolution | None" = None
    h_pert: ScalarField | None = None
    b_pert: OneForm | None = None

    def __post_init__(self):
        if self.u.grid != self.A.grid:
            raise ValueError("u and A live on different grids")
        sup = float(np.max(self.u.modulus()))
        if sup > MODULUS_SANITY_BOUND:
            raise ValueError(f"|u| = {sup:.3g} exceeds sanity bound {MODULUS_SANITY_BOUND}")

    @property
    def grid(self):
        return self.u.grid

    def is_perturbative(self) -> bool:
        return self.base is not None and self.h_pert is not None and self.b_pert is not None


def energy_density(p: PairState) -> np.ndarray:
    u = p.u.to_complex()
    du1, du2 = d_scalar_arrays(p.grid, u)
    cov1 = du1 - 1j * u * p.A.a1
    cov2 = du2 - 1j * u * p.A.a2
    curv = d_oneform(p.A).density
    mod2 = p.u.re ** 2 + p.u.im ** 2
    return (np.abs(cov1) ** 2 + np.abs(cov2) ** 2 + curv ** 2
            + 0.25 * (1.0 - mod2) ** 2)


def energy_direct(p: PairState) -> float:
    """Quadrature of |du - iuA|^2 + |dA|^2 + (1-|u|^2)^2/4."""
    return integrate_values(p.grid, energy_density(p))


@dataclass
class DiscrepancyReport:
    total: float
    first_term: float
    second_term: float
    e1: OneForm
    e2: ScalarField

    def to_json_dict(self) -> dict:
        return {"total": self.total, "first_term": self.first_term,
                "second_term": self.second_term}


def discrepancy_perturbative(base: "VortexSolution", h_pert: ScalarField,
                             b_pert: OneForm) -> DiscrepancyReport:
    grid = base.grid
    if h_pert.grid != grid or b_pert.grid != grid:
        raise ValueError("perturbation fields must live on the base grid")
    star_dh = star_oneform(d_scalar(h_pert))
    e1 = OneForm(grid, star_dh.a1 + b_pert.a1, star_dh.a2 + b_pert.a2)
    r0 = base.r0.values
    e2_vals = d_oneform(b_pert).density + 0.5 * r0 ** 2 * np.expm1(2.0 * h_pert.values)
    e2 = ScalarField(grid, e2_vals)
    r_sq = (r0 * np.exp(h_pert.values)) ** 2
    first = integrate_values(grid, r_sq * oneform_norm2(e1))
    second = integrate_values(grid, e2_vals ** 2)
    return DiscrepancyReport(total=first + second, first_term=first,
                             second_term=second, e1=e1, e2=e2)


class DegreeResult(NamedTuple):
    value: int
    defect: float


def _bilinear(grid, values: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    h = grid.spacing
    gx = (xs + grid.half_width) / h
    gy = (ys + grid.half_width) / h
    ix = np.clip(gx.astype(int), 0, grid.n - 2)
    iy = np.clip(gy.astype(int), 0, grid.n - 2)
    fx = gx - ix
    fy = gy - iy
    v00 = values[iy, ix]
    v01 = values[iy, ix + 1]
    v10 = values[iy + 1, ix]
    v11 = values[iy + 1, ix + 1]
    return ((1 - fy) * ((1 - fx) * v00 + fx * v01)
            + fy * ((1 - fx) * v10 + fx * v11))


def degree(u: ComplexField, radius_fraction: float = 0.9,
           samples: int = 2048) -> DegreeResult:
    """Winding number of u along the circle of radius radius_fraction * L.

    Sums principal-branch phase increments between consecutive bilinear
    samples; the sum of a closed loop is an exact multiple of 2*pi, so the
    reported defect is pure round-off unless the contour is under-resolved.
    """
    if not 0.0 < radius_fraction < 1.0:
        raise ValueError("radius_fraction must lie in (0, 1)")
    grid = u.grid
    radius = radius_fraction * grid.half_width
    theta = np.linspace(0.0, 2.0 * np.pi, samples, endpoint=False)
    xs = radius * np.cos(theta)
    ys = radius * np.sin(theta)
    vals = (_bilinear(grid, u.re, xs, ys) + 1j * _bilinear(grid, u.im, xs, ys))
    moduli = np.abs(vals)
    if float(np.min(moduli)) < 0.1:
        raise ValueError("degree undefined on contour: |u| < 0.1 on the circle")
    ratios = np.roll(vals, -1) / vals
    total = float(np.sum(np.angle(ratios)))
    winding = total / (2.0 * np.pi)
    value = int(np.rint(winding))
    return DegreeResult(value=value, defect=abs(winding - value))


def l2_distance(p: PairState, base: "VortexSolution") -> tuple[float, float]:
    """(||u - u0||^2, ||F - F0||^2) by quadrature."""
    grid = p.grid
    if grid != base.grid:
        raise ValueError("pair and base live on different grids")
    du = (p.u.re - base.u0.re) ** 2 + (p.u.im - base.u0.im) ** 2
    dist_u_sq = integrate_values(grid, du)
    curv = d_oneform(p.A).density - d_oneform(base.A0).density
    dist_f_sq = integrate_values(grid, curv ** 2)
    return dist_u_sq, dist_f_sq


def _jacobian_density(base: "VortexSolution", h_vals: np.ndarray,
                      b1: np.ndarray, b2: np.ndarray) -> np.ndarray:
    """(1 - r^2) dA - 2 dr ^ (r(A - dtheta)) in smooth variables.

    r(A - dtheta) = e^{h'}(r0 B - *dr0); the phase gradient never appears.
    """
    grid = base.grid
    r0 = base.r0.values
    expz = np.exp(h_vals)
    r = r0 * expz
    dr1, dr2 = d_scalar_arrays(grid, r)
    dr0 = d_scalar(base.r0)
    star_dr0 = star_oneform(dr0)
    w1 = expz * (r0 * b1 - star_dr0.a1)
    w2 = expz * (r0 * b2 - star_dr0.a2)
    da = d_oneform(OneForm(grid, base.A0.a1 + b1, base.A0.a2 + b2)).density
    return (1.0 - r * r) * da - 2.0 * (dr1 * w2 - dr2 * w1)


def jacobian_field(p: PairState, base: "VortexSolution") -> TwoForm:
    if not p.is_perturbative():
        raise ValueError("jacobian_field needs a PairState with perturbative data")
    if p.base.grid != base.grid or p.base.zeros != base.zeros:
        raise ValueError("pair was built over a different base solution")
    dens = _jacobian_density(base, p.h_pert.values, p.b_pert.a1, p.b_pert.a2)
    return TwoForm(base.grid, dens)


def jacobian_base(base: "VortexSolution") -> TwoForm:
    zeros = np.zeros((base.grid.n, base.grid.n))
    return TwoForm(base.grid, _jacobian_density(base, zeros, zeros, zeros))


def jacobian_l1_diff(p: PairState, base: "VortexSolution") -> float:
    """L1 norm of J(u, A) - J(u0, A0), both in the same smooth variables."""
    j_pert = jacobian_field(p, base)
    j_base = jacobian_base(base)
    return integrate_values(base.grid, np.abs(j_pert.density - j_base.density))


def weighted_sobolev_lhs(base: "VortexSolution", h_pert: ScalarField,
                         b_pert: OneForm, eps: float) -> float:
    """Quadrature of r0^{2+2eps} (|dh'|^2 + |B|^2)."""
    grid = base.grid
    dh = d_scalar(h_pert)
    dens = base.r0.values ** (2.0 + 2.0 * eps) * (oneform_norm2(dh)
                                                  + oneform_norm2(b_pert))
    return integrate_values(grid, dens)
