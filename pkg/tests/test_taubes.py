import numpy as np
import pytest

from vortexlab.fields import ScalarField, build_grid
from vortexlab.linalg import ConvergenceError
from vortexlab.taubes import (RadialProfile, ZeroSet, load_solution,
                              radial_profile_oracle, save_solution, solve_taubes,
                              taubes_residual, vortex_equation_residuals)

TWO_PI = 2.0 * np.pi


def test_energy_one_vortex_coarse(sol_n1_coarse):
    assert sol_n1_coarse.energy == pytest.approx(TWO_PI, rel=1e-2)


def test_energy_two_vortices_coarse(sol_n2_coarse):
    assert sol_n2_coarse.energy == pytest.approx(2 * TWO_PI, rel=1e-2)


def test_r0_vanishes_exactly_at_prescribed_zero(sol_n1_coarse):
    ic = (sol_n1_coarse.grid.n - 1) // 2
    assert sol_n1_coarse.r0.values[ic, ic] == 0.0


def test_maximum_principle(sol_n1_coarse, sol_n2_coarse):
    for sol in (sol_n1_coarse, sol_n2_coarse):
        assert float(np.max(sol.r0.values)) <= 1.0 + 1e-8


def test_newton_residual_below_tol(sol_n1_coarse):
    newton_sup, curvature_sup = vortex_equation_residuals(sol_n1_coarse)
    assert newton_sup <= 1e-8
    assert sol_n1_coarse.residual_sup == newton_sup
    # the curvature check runs through the chained stencils: O(h^2) floor
    assert curvature_sup < 5e-2


def test_taubes_residual_flags_corruption(sol_n1_coarse):
    from dataclasses import replace
    from vortexlab.perturb import bump_field
    bump = bump_field(sol_n1_coarse.grid, (1.0, 1.0), 1.5, 0.1)
    h_bad = ScalarField(sol_n1_coarse.grid,
                        sol_n1_coarse.h_reg.values + bump.values)
    corrupted = replace(sol_n1_coarse, h_reg=h_bad)
    assert taubes_residual(corrupted) > 1e-3
    assert taubes_residual(sol_n1_coarse) < 1e-2


def test_zero_too_close_to_boundary():
    grid = build_grid(65, 8.0)
    with pytest.raises(ValueError, match="too close to boundary"):
        solve_taubes(ZeroSet.of((7.0, 0.0)), grid)


def test_unreachable_tolerance_raises():
    grid = build_grid(65, 8.0)
    with pytest.raises(ConvergenceError) as err:
        solve_taubes(ZeroSet.of((0.0, 0.0)), grid, tol=1e-30)
    assert err.value.residual > 0


def test_translation_equivariance(grid_coarse, sol_n1_coarse):
    h = grid_coarse.spacing
    shifted = solve_taubes(ZeroSet.of((h, 0.0)), grid_coarse, tol=1e-10)
    # comparing r0 shifted by one cell on the interior overlap
    a = sol_n1_coarse.r0.values[:, :-1]
    b = shifted.r0.values[:, 1:]
    inner = np.s_[20:-20, 20:-20]
    assert float(np.max(np.abs(a[inner] - b[inner]))) < 1e-5


def test_off_node_zero(grid_coarse):
    # nothing requires the prescribed zeros to sit on lattice nodes
    sol = solve_taubes(ZeroSet.of((0.1, 0.23)), grid_coarse, tol=1e-9)
    assert sol.energy == pytest.approx(TWO_PI, rel=1e-2)
    assert float(np.min(sol.r0.values)) >= 0.0
    assert float(np.max(sol.r0.values)) <= 1.0 + 1e-8


def test_double_zero_multiplicity(grid_coarse):
    sol = solve_taubes(ZeroSet.of((0.0, 0.0), (0.0, 0.0)), grid_coarse, tol=1e-9)
    assert sol.energy == pytest.approx(2 * TWO_PI, rel=2e-2)
    ic = (grid_coarse.n - 1) // 2
    # quadratic zero: r0 ~ rho^2 near the center
    ratio = sol.r0.values[ic, ic + 4] / sol.r0.values[ic, ic + 2]
    assert ratio == pytest.approx(4.0, rel=0.2)


def test_solution_roundtrip(tmp_path, sol_n1_coarse):
    save_solution(sol_n1_coarse, tmp_path / "sol")
    loaded = load_solution(tmp_path / "sol")
    assert np.array_equal(loaded.r0.values, sol_n1_coarse.r0.values)
    assert loaded.energy == sol_n1_coarse.energy
    assert loaded.zeros == sol_n1_coarse.zeros
    assert loaded.iterations == sol_n1_coarse.iterations


@pytest.fixture(scope="module")
def profile() -> RadialProfile:
    return radial_profile_oracle(rho_max=14.0, steps=2801)


class TestRadialOracle:
    def test_zero_at_origin(self, profile):
        assert profile.f[0] == 0.0

    def test_far_field(self, profile):
        assert abs(profile.f[-1] - 1.0) <= 1e-6

    def test_monotone(self, profile):
        assert np.all(np.diff(profile.f) >= -1e-12)

    def test_core_value_regression(self, profile):
        assert profile(1.0) == pytest.approx(0.537885, abs=1e-4)

    def test_matches_2d_solver_on_ray(self, profile, sol_n1_coarse):
        grid = sol_n1_coarse.grid
        ic = (grid.n - 1) // 2
        xs = grid.coords[ic:]
        sel = xs <= 8.0
        diff = np.abs(sol_n1_coarse.r0.values[ic, ic:][sel] - profile(xs[sel]))
        assert float(np.max(diff)) < 2e-3

    def test_rho_max_validation(self):
        with pytest.raises(ValueError, match="at least 8"):
            radial_profile_oracle(rho_max=4.0)
