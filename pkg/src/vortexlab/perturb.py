"""Controlled perturbations of a base vortex solution.

Perturbed pairs are built in the gauge where u and u0 share phases:
u = u0 e^{h'}, A = A0 + B with h' and B supported away from the outermost
four grid rings.  The modulus cap sup|h'| <= 2 keeps e^{2h'} in a safe
range; it is the regime every stability statement assumes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import gaussian_filter

from .energy import PairState
from .fields import ComplexField, Grid, OneForm, ScalarField, d_scalar
from .taubes import VortexSolution

SUPPORT_RINGS = 4
MAX_LOG_MODULUS = 2.0
TRUNCATION_LEVEL = 3.0


def _cutoff_ramp(t: np.ndarray) -> np.ndarray:
    """C-infinity ramp: 0 for t <= 0, 1 for t >= 1."""
    t = np.clip(t, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        g = np.where(t > 0.0, np.exp(-1.0 / np.maximum(t, 1e-300)), 0.0)
        g1 = np.where(t < 1.0, np.exp(-1.0 / np.maximum(1.0 - t, 1e-300)), 0.0)
    return g / (g + g1)


def bump_profile(s: np.ndarray) -> np.ndarray:
    """Mollified ball indicator: 1 on [0, 1/2], 0 on [1, inf)."""
    return _cutoff_ramp(2.0 * (1.0 - np.asarray(s, dtype=float)))


def check_interior_support(grid: Grid, values: np.ndarray,
                           rings: int = SUPPORT_RINGS, what: str = "field") -> None:
    r = rings
    border = np.concatenate([
        values[:r, :].ravel(), values[-r:, :].ravel(),
        values[:, :r].ravel(), values[:, -r:].ravel(),
    ])
    if np.any(border != 0.0):
        raise ValueError(f"{what} must vanish on the outermost {rings} grid rings")


def bump_field(grid: Grid, center: tuple[float, float], radius: float,
               amplitude: float) -> ScalarField:
    """amplitude * phi(|x - center| / radius) with the standard cutoff phi."""
    cx, cy = center
    margin = grid.half_width - SUPPORT_RINGS * grid.spacing
    if abs(cx) + radius >= margin or abs(cy) + radius >= margin:
        raise ValueError("bump ball touches the interior margin")
    X, Y = grid.meshes()
    s = np.hypot(X - cx, Y - cy) / radius
    return ScalarField(grid, amplitude * bump_profile(s))


def random_smooth_field(grid: Grid, seed: int, amplitude: float,
                        corr_len: float) -> ScalarField:
    """Seeded Gaussian-filtered noise, windowed to the interior margin,
    rescaled to sup-norm == amplitude."""
    h = grid.spacing
    if corr_len < 4.0 * h:
        raise ValueError("corr_len must be at least 4 grid spacings")
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((grid.n, grid.n))
    smooth = gaussian_filter(noise, sigma=corr_len / h, mode="constant")

    edge = grid.half_width - SUPPORT_RINGS * h
    band = max(2.0 * corr_len, 8.0 * h)
    coords = grid.coords
    taper = _cutoff_ramp((edge - np.abs(coords)) / band)
    windowed = smooth * taper[None, :] * taper[:, None]

    sup = float(np.max(np.abs(windowed)))
    if sup > 0.0 and amplitude != 0.0:
        windowed = windowed * (amplitude / sup)
    else:
        windowed = np.zeros_like(windowed)
    return ScalarField(grid, windowed)


@dataclass
class Perturbation:
    """Gauge-fixed perturbation (h', B) of a base solution, with provenance."""

    base: VortexSolution
    h_pert: ScalarField
    b_pert: OneForm
    descriptor: dict = field(default_factory=dict)

    def __post_init__(self):
        grid = self.base.grid
        if self.h_pert.grid != grid or self.b_pert.grid != grid:
            raise ValueError("perturbation fields must live on the base grid")
        check_interior_support(grid, self.h_pert.values, what="h'")
        check_interior_support(grid, self.b_pert.a1, what="B")
        check_interior_support(grid, self.b_pert.a2, what="B")

    @property
    def sup_h(self) -> float:
        return float(np.max(np.abs(self.h_pert.values)))


def apply_perturbation(pert: Perturbation) -> PairState:
    """(u0 e^{h'}, A0 + B), carrying the perturbative data along."""
    if pert.sup_h > MAX_LOG_MODULUS:
        raise ValueError(f"sup|h'| = {pert.sup_h:.3g} exceeds {MAX_LOG_MODULUS}")
    base = pert.base
    scale = np.exp(pert.h_pert.values)
    u = ComplexField(base.grid, base.u0.re * scale, base.u0.im * scale)
    A = OneForm(base.grid, base.A0.a1 + pert.b_pert.a1,
                base.A0.a2 + pert.b_pert.a2)
    return PairState(u=u, A=A, base=base, h_pert=pert.h_pert, b_pert=pert.b_pert)


def truncate_modulus(p: PairState) -> PairState:
    """Rescale u to modulus 3 wherever |u| >= 3; never increases the energy."""
    mod = p.u.modulus()
    over = mod > TRUNCATION_LEVEL
    if not np.any(over):
        return p
    scale = np.where(over, TRUNCATION_LEVEL / np.where(over, mod, 1.0), 1.0)
    u = ComplexField(p.grid, p.u.re * scale, p.u.im * scale)
    h_pert = p.h_pert
    if p.is_perturbative():
        # |u| >= 3 forces r0 >= 3 e^{-sup h'} > 0, so the log is safe there
        r0 = p.base.r0.values
        new_h = np.where(over,
                         np.log(TRUNCATION_LEVEL) - np.log(np.where(over, r0, 1.0)),
                         p.h_pert.values)
        h_pert = ScalarField(p.grid, new_h)
    return PairState(u=u, A=p.A, base=p.base, h_pert=h_pert, b_pert=p.b_pert)


def gauge_transform(p: PairState, xi: ScalarField) -> PairState:
    """(u e^{i xi}, A + d xi); drops perturbative data unless xi == 0."""
    if xi.grid != p.grid:
        raise ValueError("xi must live on the pair's grid")
    check_interior_support(p.grid, xi.values, what="xi")
    phase = np.exp(1j * xi.values)
    u = ComplexField.from_complex(p.grid, p.u.to_complex() * phase)
    dxi = d_scalar(xi)
    A = OneForm(p.grid, p.A.a1 + dxi.a1, p.A.a2 + dxi.a2)
    if np.any(xi.values != 0.0):
        return PairState(u=u, A=A)
    return PairState(u=u, A=A, base=p.base, h_pert=p.h_pert, b_pert=p.b_pert)
