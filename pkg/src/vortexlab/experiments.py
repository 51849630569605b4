"""Experiment drivers shared by the command line and the test suite.

Each driver is a pure function of its configuration; sweep rows only ever
contain primary quadratures plus ratio columns recomputable from the same
row.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .cover import cover_vortex_set
from .energy import (discrepancy_perturbative, energy_direct,
                     jacobian_l1_diff, l2_distance, weighted_sobolev_lhs)
from .fields import OneForm, ScalarField, build_grid, d_scalar
from .hodge import (hardy_gap, hodge_gap_check,
                    standard_hodge_decompose, weighted_hodge_decompose)
from .perturb import Perturbation, apply_perturbation, bump_field, random_smooth_field
from .polyperturb import (ComplexPoly, SampledPerturbation, comparable_polynomial,
                          measure_cn_norm)
from .selection import selection_iterate
from .taubes import VortexSolution
from .weights import VortexWeight


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("VORTEXLAB_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class SweepRow:
    t: float
    discrepancy: float
    dist_u_sq: float
    dist_f_sq: float
    sobolev_lhs: dict[float, float]
    jacobian_l1_diff: float

    @property
    def ratio_disc_dist2(self) -> float:
        denom = self.dist_u_sq + self.dist_f_sq
        return self.discrepancy / denom if denom > 0 else float("nan")

    def ratio_sobolev(self, eps: float) -> float:
        if self.discrepancy <= 0:
            return float("nan")
        return eps ** 2 * self.sobolev_lhs[eps] / self.discrepancy

    @property
    def ratio_jac(self) -> float:
        if self.discrepancy <= 0:
            return float("nan")
        return float(self.jacobian_l1_diff / np.sqrt(self.discrepancy))


def _shape_fields(sol: VortexSolution, kind: str, params: dict):
    grid = sol.grid
    if kind == "bump":
        hp = bump_field(grid, tuple(params["center"]), params["radius"], 1.0)
        b = OneForm.zeros(grid)
    elif kind == "random":
        hp = random_smooth_field(grid, params["seed"], 1.0, params["corr_len"])
        b1 = random_smooth_field(grid, params["seed"] + 1000, params.get("b_amplitude", 0.0),
                                 params["corr_len"])
        b2 = random_smooth_field(grid, params["seed"] + 2000, params.get("b_amplitude", 0.0),
                                 params["corr_len"])
        b = OneForm(grid, b1.values, b2.values)
    else:
        raise ValueError(f"unknown perturbation kind {kind!r}")
    return hp, b


def sweep_stability(sol: VortexSolution, t_list: list[float], eps_list: list[float],
                    kind: str = "bump", params: dict | None = None) -> list[SweepRow]:
    """One row per scale t of the configured perturbation family."""
    params = params or {"center": (1.0, 1.0), "radius": 2.0}
    hp_shape, b_shape = _shape_fields(sol, kind, params)

    def one_row(t: float) -> SweepRow:
        grid = sol.grid
        hp = ScalarField(grid, t * hp_shape.values)
        b = OneForm(grid, t * b_shape.a1, t * b_shape.a2)
        pair = apply_perturbation(Perturbation(sol, hp, b))
        rep = discrepancy_perturbative(sol, hp, b)
        du, df = l2_distance(pair, sol)
        jl1 = jacobian_l1_diff(pair, sol)
        sob = {eps: weighted_sobolev_lhs(sol, hp, b, eps) for eps in eps_list}
        return SweepRow(t=t, discrepancy=rep.total, dist_u_sq=du, dist_f_sq=df,
                        sobolev_lhs=sob, jacobian_l1_diff=jl1)

    workers = thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one_row, t_list))
    return [one_row(t) for t in t_list]


@dataclass
class SharpnessRow:
    radius: float
    discrepancy: float
    dist_u_sq: float

    @property
    def ratio_dist2_disc(self) -> float:
        return self.dist_u_sq / self.discrepancy


def sharpness_family(sol: VortexSolution, center: tuple[float, float],
                     radius_list: list[float], amplitude: float = 1.0) -> list[SharpnessRow]:
    """Mollified-ball modulus perturbations far from the vortex set."""
    cover = cover_vortex_set(sol)
    for ball in cover.balls:
        dist = float(np.hypot(center[0] - ball.cx, center[1] - ball.cy))
        if dist <= 2.0 * ball.rho + max(radius_list):
            raise ValueError("sharpness ball intersects the covering region")
    rows = []
    for radius in radius_list:
        hp = bump_field(sol.grid, center, radius, amplitude)
        b = OneForm.zeros(sol.grid)
        pair = apply_perturbation(Perturbation(sol, hp, b))
        rep = discrepancy_perturbative(sol, hp, b)
        du, _ = l2_distance(pair, sol)
        rows.append(SharpnessRow(radius=radius, discrepancy=rep.total, dist_u_sq=du))
    return rows


def hardy_suite(n: int = 129, box: float = 8.0, cases: int = 100,
                seed: int = 0) -> dict:
    """Seeded (f, weight) pairs; returns the worst lhs/rhs ratio found."""
    grid = build_grid(n, box)
    rng = np.random.default_rng(seed)
    exponents = [0.5, 1.0, 2.0]
    worst = 0.0
    results = []
    for k in range(cases):
        n_centers = int(rng.integers(1, 4))
        centers = [(float(rng.uniform(-box / 3, box / 3)),
                    float(rng.uniform(-box / 3, box / 3))) for _ in range(n_centers)]
        alphas = tuple(float(rng.choice(exponents)) for _ in range(n_centers))
        w = VortexWeight(tuple(centers), alphas)
        corr = max(float(rng.uniform(0.5, 1.5)), 4.0 * grid.spacing)
        f = random_smooth_field(grid, seed + 7 * k + 1, 1.0, corr)
        lhs, rhs = hardy_gap(w, f)
        ratio = lhs / rhs if rhs > 0 else 0.0
        worst = max(worst, ratio)
        results.append(ratio)
    return {"cases": cases, "max_ratio": worst,
            "mean_ratio": float(np.mean(results))}


def hodge_suite(n: int = 257, box: float = 8.0, eps_list: list[float] | None = None,
                seed: int = 0) -> dict:
    """Reconstruction residuals plus the co-exact gap inequality check."""
    eps_list = eps_list or [0.5, 0.25, 0.125]
    grid = build_grid(n, box)
    w = VortexWeight(((0.37, -0.21),), (1.0,))

    phi = bump_field(grid, (0.5, -0.3), 2.0, 1.0)
    dphi = d_scalar(phi)
    b_coexact = OneForm(grid, -dphi.a2, dphi.a1)
    parts_co = weighted_hodge_decompose(b_coexact, w, tol=1e-6)
    parts_co = standard_hodge_decompose(b_coexact, tol=1e-6, parts=parts_co)

    r1 = random_smooth_field(grid, seed + 11, 0.8, 1.0)
    r2 = random_smooth_field(grid, seed + 12, 0.5, 1.0)
    d1, d2 = d_scalar(r1), d_scalar(r2)
    b_mixed = OneForm(grid, -d1.a2 + d2.a1, d1.a1 + d2.a2)
    # exact-part content leaves an O(h^2) consistency floor in the weighted
    # reconstruction; the tolerance follows that scale
    mixed_tol = max(5e-2, 10.0 * grid.spacing ** 2)
    parts_mx = weighted_hodge_decompose(b_mixed, w, tol=mixed_tol)
    parts_mx = standard_hodge_decompose(b_mixed, tol=1e-6, parts=parts_mx)

    gap = {}
    for eps in eps_list:
        lhs, rhs, c = hodge_gap_check(parts_mx, w, eps)
        gap[str(eps)] = {"lhs": lhs, "rhs": rhs, "constant": c,
                         "holds_with_slack": bool(lhs <= 1.1 * rhs)}
    return {
        "coexact": {"weighted_residual": parts_co.weighted_residual,
                    "standard_residual": parts_co.standard_residual},
        "mixed": {"weighted_residual": parts_mx.weighted_residual,
                  "standard_residual": parts_mx.standard_residual},
        "gap": gap,
    }


def selection_run(sol: VortexSolution, amplitude: float = 0.3, seed: int = 0,
                  rounds: int | None = None, grad_tol: float = 1e-3,
                  max_iters: int = 400) -> dict:
    """Rough-noise anchor, full selection iteration, guarantee report."""
    grid = sol.grid
    corr = 4.0 * grid.spacing
    hp = random_smooth_field(grid, seed, amplitude, corr)
    b1 = random_smooth_field(grid, seed + 1000, amplitude, corr)
    b2 = random_smooth_field(grid, seed + 2000, amplitude, corr)
    anchor = apply_perturbation(Perturbation(sol, hp, OneForm(grid, b1.values, b2.values)))
    e_anchor = energy_direct(anchor)
    out, rep = selection_iterate(anchor, rounds=rounds, grad_tol=grad_tol,
                                 max_iters=max_iters)
    two_pi_n = 2.0 * np.pi * sol.degree
    excess = e_anchor - two_pi_n
    dist = rep.dist_u_sq + rep.dist_f_sq
    g_monotone = all(
        chain[i + 1].g_value <= chain[i].g_value + 1e-10
        for chain in rep.g_chains for i in range(len(chain) - 1))
    return {
        "energy_anchor": e_anchor,
        "energy_chain": rep.energy_chain,
        "two_pi_n": two_pi_n,
        "dist_u_sq": rep.dist_u_sq,
        "dist_f_sq": rep.dist_f_sq,
        "distance_total": dist,
        "bound_constant": dist / excess if excess > 0 else float("inf"),
        "g_monotone": g_monotone,
        "degree_in": rep.degree_in,
        "degree_out": rep.degree_out,
        "modulus_ratio": [rep.modulus_ratio_min, rep.modulus_ratio_max],
        "iteration_rows": [
            [row.iteration, row.g_value, row.energy, row.grad_norm, row.step_size]
            for chain in rep.g_chains for row in chain
        ],
    }


def _seeded_poly_case(seed: int, deg: int):
    rng = np.random.default_rng(seed)
    roots = rng.uniform(-0.3, 0.3, deg) + 1j * rng.uniform(-0.3, 0.3, deg)
    poly = ComplexPoly(tuple(roots))
    c = rng.standard_normal(6) + 1j * rng.standard_normal(6)

    def smooth(z):
        z = np.asarray(z, dtype=complex)
        x, y = z.real, z.imag
        return (c[0] + c[1] * x + c[2] * y + c[3] * x * y
                + c[4] * (x ** 2 - y ** 2) + c[5] * np.sin(x) * np.cos(y))

    scale = 0.99e-3 / measure_cn_norm(smooth, deg)

    def scaled(z):
        return scale * smooth(z)

    return poly, SampledPerturbation(fn=scaled, order=deg)


def poly_suite(seeds: int = 5, max_degree: int = 5) -> dict:
    cases = []
    for seed in range(1, seeds + 1):
        for deg in range(1, max_degree + 1):
            poly, pert = _seeded_poly_case(seed, deg)
            q, lam, rep = comparable_polynomial(poly, pert)
            cases.append({
                "seed": seed, "degree": deg, "lambda": lam,
                "cn_norm": rep.cn_norm,
                "max_root_abs": max(abs(b) for b in rep.roots_q),
                "max_residual": max(rep.residuals),
            })
    return {
        "cases": cases,
        "max_lambda": max(c["lambda"] for c in cases),
        "all_roots_in_b23": all(c["max_root_abs"] <= 2.0 / 3.0 for c in cases),
        "max_residual": max(c["max_residual"] for c in cases),
    }
