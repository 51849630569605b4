import numpy as np
import pytest

from vortexlab.energy import PairState, energy_direct, l2_distance
from vortexlab.fields import ComplexField, OneForm, ScalarField, build_grid, integrate
from vortexlab.perturb import (Perturbation, apply_perturbation, bump_field,
                               bump_profile, gauge_transform, random_smooth_field,
                               truncate_modulus)


@pytest.fixture
def grid():
    return build_grid(129, 8.0)


class TestBump:
    def test_center_value(self, grid):
        f = bump_field(grid, (0.0, 0.0), 2.0, 1.7)
        ic = (grid.n - 1) // 2
        assert f.values[ic, ic] == pytest.approx(1.7, abs=1e-14)

    def test_vanishes_outside_ball(self, grid):
        f = bump_field(grid, (0.0, 0.0), 2.0, 1.0)
        X, Y = grid.meshes()
        outside = np.hypot(X, Y) > 2.0
        assert np.all(f.values[outside] == 0.0)

    def test_plateau_inside_half_radius(self, grid):
        f = bump_field(grid, (0.0, 0.0), 2.0, 1.0)
        X, Y = grid.meshes()
        inner = np.hypot(X, Y) < 1.0 - 1e-9
        assert np.allclose(f.values[inner], 1.0, atol=1e-12)

    def test_squared_mass_against_radial_quadrature(self, grid):
        # independent 1D oracle: integral = 2 pi R^2 int phi(s)^2 s ds
        s = np.linspace(0.0, 1.0, 200001)
        radial = 2.0 * np.pi * np.trapezoid(bump_profile(s) ** 2 * s, s)
        for radius in (1.0, 2.0):
            f = bump_field(grid, (0.5, -0.5), radius, 1.0)
            mass = integrate(ScalarField(grid, f.values ** 2))
            assert mass == pytest.approx(radius ** 2 * radial, rel=5e-3)

    def test_margin_rejected(self, grid):
        with pytest.raises(ValueError, match="margin"):
            bump_field(grid, (6.0, 0.0), 2.0, 1.0)


class TestRandomField:
    def test_deterministic_in_seed(self, grid):
        a = random_smooth_field(grid, 12, 0.5, 0.8)
        b = random_smooth_field(grid, 12, 0.5, 0.8)
        assert np.array_equal(a.values, b.values)
        c = random_smooth_field(grid, 13, 0.5, 0.8)
        assert not np.array_equal(a.values, c.values)

    def test_zero_amplitude(self, grid):
        assert np.all(random_smooth_field(grid, 3, 0.0, 0.8).values == 0.0)

    def test_sup_norm_equals_amplitude(self, grid):
        f = random_smooth_field(grid, 5, 0.37, 0.8)
        assert float(np.max(np.abs(f.values))) == pytest.approx(0.37, abs=1e-12)

    def test_interior_support(self, grid):
        f = random_smooth_field(grid, 5, 1.0, 0.8)
        assert np.all(f.values[:4, :] == 0.0) and np.all(f.values[-4:, :] == 0.0)
        assert np.all(f.values[:, :4] == 0.0) and np.all(f.values[:, -4:] == 0.0)

    def test_short_correlation_rejected(self, grid):
        with pytest.raises(ValueError, match="corr_len"):
            random_smooth_field(grid, 1, 1.0, grid.spacing)


class TestApplyPerturbation:
    def test_zero_perturbation_reproduces_base(self, sol_n1_coarse):
        grid = sol_n1_coarse.grid
        pair = apply_perturbation(Perturbation(sol_n1_coarse, ScalarField.zeros(grid),
                                               OneForm.zeros(grid)))
        assert np.array_equal(pair.u.re, sol_n1_coarse.u0.re)
        assert np.array_equal(pair.A.a1, sol_n1_coarse.A0.a1)

    def test_modulus_scaling(self, sol_n1_coarse):
        grid = sol_n1_coarse.grid
        t = 0.4
        bump = bump_field(grid, (1.0, 0.0), 1.5, t)
        pair = apply_perturbation(Perturbation(sol_n1_coarse, bump, OneForm.zeros(grid)))
        expected = sol_n1_coarse.r0.values * np.exp(bump.values)
        assert np.allclose(pair.u.modulus(), expected, atol=1e-13)

    def test_connection_only_keeps_modulus(self, sol_n1_coarse):
        grid = sol_n1_coarse.grid
        b = random_smooth_field(grid, 8, 0.5, 1.0)
        pair = apply_perturbation(Perturbation(
            sol_n1_coarse, ScalarField.zeros(grid), OneForm(grid, b.values, -b.values)))
        assert np.allclose(pair.u.modulus(), sol_n1_coarse.r0.values, atol=1e-13)

    def test_distance_positive_iff_modulus_perturbed(self, sol_n1_coarse):
        grid = sol_n1_coarse.grid
        b = random_smooth_field(grid, 8, 0.5, 1.0)
        pair_b = apply_perturbation(Perturbation(
            sol_n1_coarse, ScalarField.zeros(grid), OneForm(grid, b.values, -b.values)))
        du_b, _ = l2_distance(pair_b, sol_n1_coarse)
        assert du_b == 0.0
        pair_h = apply_perturbation(Perturbation(
            sol_n1_coarse, bump_field(grid, (1.0, 1.0), 1.5, 0.1), OneForm.zeros(grid)))
        du_h, _ = l2_distance(pair_h, sol_n1_coarse)
        assert du_h > 0.0

    def test_large_h_rejected(self, sol_n1_coarse):
        grid = sol_n1_coarse.grid
        big = bump_field(grid, (0.0, 0.0), 2.0, 2.5)
        with pytest.raises(ValueError, match="exceeds"):
            apply_perturbation(Perturbation(sol_n1_coarse, big, OneForm.zeros(grid)))

    def test_support_validation(self, sol_n1_coarse):
        grid = sol_n1_coarse.grid
        bad = np.ones((grid.n, grid.n))
        with pytest.raises(ValueError, match="outermost"):
            Perturbation(sol_n1_coarse, ScalarField(grid, bad), OneForm.zeros(grid))


class TestTruncateModulus:
    def test_no_op_below_level(self, sol_n1_coarse):
        grid = sol_n1_coarse.grid
        pair = apply_perturbation(Perturbation(sol_n1_coarse, ScalarField.zeros(grid),
                                               OneForm.zeros(grid)))
        out = truncate_modulus(pair)
        assert out is pair

    def test_constant_five_becomes_three(self, grid):
        vals = 5.0 * np.ones((grid.n, grid.n))
        p = PairState(u=ComplexField(grid, vals, np.zeros_like(vals)),
                      A=OneForm.zeros(grid))
        out = truncate_modulus(p)
        assert np.allclose(out.u.modulus(), 3.0, atol=1e-14)

    def test_energy_never_increases(self, grid):
        bump = bump_field(grid, (0.0, 0.0), 2.0, 1.0)
        vals = 3.0 + bump.values
        p = PairState(u=ComplexField(grid, vals, np.zeros_like(vals)),
                      A=OneForm.zeros(grid))
        out = truncate_modulus(p)
        assert energy_direct(out) <= energy_direct(p) + 1e-12

    def test_perturbative_data_kept_consistent(self, sol_n1_coarse):
        grid = sol_n1_coarse.grid
        hp = bump_field(grid, (1.5, 1.5), 1.5, 1.5)
        pair = apply_perturbation(Perturbation(sol_n1_coarse, hp, OneForm.zeros(grid)))
        out = truncate_modulus(pair)
        assert float(np.max(out.u.modulus())) <= 3.0 + 1e-12
        rebuilt = sol_n1_coarse.r0.values * np.exp(out.h_pert.values)
        assert np.allclose(rebuilt, out.u.modulus(), atol=1e-12)


class TestGaugeTransform:
    def test_identity(self, sol_n1_coarse):
        grid = sol_n1_coarse.grid
        pair = apply_perturbation(Perturbation(sol_n1_coarse, ScalarField.zeros(grid),
                                               OneForm.zeros(grid)))
        out = gauge_transform(pair, ScalarField.zeros(grid))
        assert np.array_equal(out.u.re, pair.u.re)
        assert out.is_perturbative()

    def test_distance_gauge_covariance(self, sol_n1_coarse):
        # a gauge transform moves u off the base pair even though the state
        # is physically equivalent; distance is measured in the fixed gauge
        grid = sol_n1_coarse.grid
        pair = apply_perturbation(Perturbation(sol_n1_coarse, ScalarField.zeros(grid),
                                               OneForm.zeros(grid)))
        xi = bump_field(grid, (1.0, -1.0), 2.0, 0.7)
        out = gauge_transform(pair, xi)
        du, _ = l2_distance(out, sol_n1_coarse)
        assert du > 0.0
        assert not out.is_perturbative()

    def test_interior_support_required(self, sol_n1_coarse):
        grid = sol_n1_coarse.grid
        pair = PairState(u=sol_n1_coarse.u0, A=sol_n1_coarse.A0)
        with pytest.raises(ValueError, match="outermost"):
            gauge_transform(pair, ScalarField(grid, np.ones((grid.n, grid.n))))
