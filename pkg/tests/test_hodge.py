import numpy as np
import pytest

from vortexlab.fields import OneForm, ScalarField, build_grid, d_scalar
from vortexlab.hodge import (GradOps, gap_constant, hardy_gap, hodge_gap_check,
                             interior_mask, standard_hodge_decompose,
                             weighted_hodge_decompose)
from vortexlab.linalg import ConvergenceError
from vortexlab.perturb import bump_field, random_smooth_field
from vortexlab.weights import VortexWeight


@pytest.fixture(scope="module")
def grid():
    return build_grid(129, 8.0)


@pytest.fixture(scope="module")
def weight():
    # single center off the lattice so all analytic gradients stay finite
    return VortexWeight(((0.37, -0.21),), (1.0,))


def coexact_input(grid, center=(0.5, -0.3), radius=2.0, amplitude=1.0):
    phi = bump_field(grid, center, radius, amplitude)
    dphi = d_scalar(phi)
    return phi, OneForm(grid, -dphi.a2, dphi.a1)


class TestGradOps:
    def test_matches_d_scalar(self, grid):
        ops = GradOps(grid)
        f = random_smooth_field(grid, 3, 1.0, 0.6)
        df = d_scalar(f)
        assert np.allclose(ops.dx(f.values), df.a1, atol=1e-13)
        assert np.allclose(ops.dy(f.values), df.a2, atol=1e-13)

    def test_adjoint_identity(self, grid):
        ops = GradOps(grid)
        rng = np.random.default_rng(0)
        a = rng.standard_normal((grid.n, grid.n))
        b = rng.standard_normal((grid.n, grid.n))
        assert np.sum(ops.dx(a) * b) == pytest.approx(np.sum(a * ops.dx_t(b)), rel=1e-12)
        assert np.sum(ops.dy(a) * b) == pytest.approx(np.sum(a * ops.dy_t(b)), rel=1e-12)


class TestHardy:
    def test_bump_away_from_center_strict(self, grid, weight):
        f = bump_field(grid, (2.0, 2.0), 1.5, 1.0)
        lhs, rhs = hardy_gap(weight, f)
        assert 0 < lhs < rhs

    def test_zero_function(self, grid, weight):
        lhs, rhs = hardy_gap(weight, ScalarField.zeros(grid))
        assert lhs == 0.0 and rhs == 0.0

    def test_exponent_sweep_toward_degenerate(self, grid):
        # alpha -> 0 approaches the (excluded) constant weight monotonically
        f = bump_field(grid, (1.5, 0.0), 1.5, 1.0)
        ratios = []
        for alpha in (1.0, 0.5, 0.25):
            w = VortexWeight(((0.37, -0.21),), (alpha,))
            lhs, rhs = hardy_gap(w, f)
            assert lhs <= 1.05 * rhs
            ratios.append(lhs / rhs)
        assert all(r > 0 for r in ratios)

    def test_seeded_random_cases(self, grid):
        rng = np.random.default_rng(17)
        for k in range(30):
            n_centers = int(rng.integers(1, 4))
            centers = tuple((float(rng.uniform(-2.5, 2.5)), float(rng.uniform(-2.5, 2.5)))
                            for _ in range(n_centers))
            alphas = tuple(float(rng.choice([0.5, 1.0, 2.0])) for _ in range(n_centers))
            w = VortexWeight(centers, alphas)
            f = random_smooth_field(grid, 1000 + k, 1.0, float(rng.uniform(0.5, 1.2)))
            lhs, rhs = hardy_gap(w, f)
            assert lhs <= 1.05 * rhs

    def test_unsupported_f_rejected(self, grid, weight):
        with pytest.raises(ValueError, match="outermost"):
            hardy_gap(weight, ScalarField(grid, np.ones((grid.n, grid.n))))


class TestWeightedDecomposition:
    def test_coexact_recovers_potential(self, grid, weight):
        phi, b = coexact_input(grid)
        parts = weighted_hodge_decompose(b, weight, tol=1e-6)
        assert parts.weighted_residual <= 1e-6
        assert float(np.max(np.abs(parts.v.values - phi.values))) < 1e-6
        assert float(np.max(np.abs(parts.f.values - np.mean(parts.f.values)))) < 1e-5

    def test_zero_input(self, grid, weight):
        parts = weighted_hodge_decompose(OneForm.zeros(grid), weight, tol=1e-6)
        assert parts.weighted_residual == 0.0
        assert np.all(parts.v.values == 0.0)

    def test_exact_input_has_small_weighted_v(self, grid, weight):
        psi = bump_field(grid, (-1.0, 0.8), 1.8, 0.7)
        b = d_scalar(psi)
        parts = weighted_hodge_decompose(b, weight, tol=5e-2)
        assert parts.weighted_residual <= 5e-2
        m = grid.quad_weights()
        w = weight.on_grid(grid)
        v_norm = float(np.sum(m * w ** 2 * parts.v.values ** 2))
        psi_norm = float(np.sum(m * w ** 2 * psi.values ** 2))
        assert v_norm < 0.5 * psi_norm

    def test_unattainable_tol_raises(self, grid, weight):
        psi = bump_field(grid, (-1.0, 0.8), 1.8, 0.7)
        with pytest.raises(ConvergenceError):
            weighted_hodge_decompose(d_scalar(psi), weight, tol=1e-9)

    def test_minimizer_stationarity(self, grid, weight):
        _, b = coexact_input(grid)
        parts = weighted_hodge_decompose(b, weight, tol=1e-6)
        ops = GradOps(grid)
        m = grid.quad_weights()
        w2 = weight.on_grid(grid) ** 2
        mask = interior_mask(grid)

        def functional(v):
            r1 = b.a1 + ops.dy(v)
            r2 = b.a2 - ops.dx(v)
            return float(np.sum(m * w2 * (r1 ** 2 + r2 ** 2)))

        f0 = functional(parts.v.values)
        delta = random_smooth_field(grid, 23, 1.0, 0.7).values * mask
        for t in (1e-4, -1e-4):
            assert functional(parts.v.values + t * delta) >= f0 - 1e-10


class TestStandardDecomposition:
    def test_coexact(self, grid):
        phi, b = coexact_input(grid)
        parts = standard_hodge_decompose(b, tol=1e-6)
        assert parts.standard_residual <= 1e-6
        assert float(np.max(np.abs(parts.p.values - phi.values))) < 1e-6
        assert float(np.max(np.abs(parts.q.values))) < 1e-6

    def test_exact(self, grid):
        psi = bump_field(grid, (-0.8, 0.4), 2.0, 0.9)
        parts = standard_hodge_decompose(d_scalar(psi), tol=1e-6)
        assert parts.standard_residual <= 1e-6
        assert float(np.max(np.abs(parts.q.values - psi.values))) < 1e-6
        assert float(np.max(np.abs(parts.p.values))) < 1e-6

    def test_random_interior_oneform(self, grid):
        r1 = random_smooth_field(grid, 31, 0.8, 0.9)
        r2 = random_smooth_field(grid, 32, 0.5, 0.9)
        d1, d2 = d_scalar(r1), d_scalar(r2)
        b = OneForm(grid, -d1.a2 + d2.a1, d1.a1 + d2.a2)
        parts = standard_hodge_decompose(b, tol=1e-6)
        assert parts.standard_residual <= 1e-6


@pytest.fixture(scope="module")
def mixed_parts(grid, weight):
    r1 = random_smooth_field(grid, 11, 0.8, 0.9)
    r2 = random_smooth_field(grid, 12, 0.5, 0.9)
    d1, d2 = d_scalar(r1), d_scalar(r2)
    b = OneForm(grid, -d1.a2 + d2.a1, d1.a1 + d2.a2)
    parts = weighted_hodge_decompose(b, weight, tol=0.2)
    return standard_hodge_decompose(b, tol=1e-6, parts=parts)


class TestGapEstimate:
    def test_constant_value(self):
        eps = 0.25
        assert gap_constant(eps) == pytest.approx(
            (8 * eps ** 2 + 5 * (1 + eps) ** 4) / (8 * (1 + eps) ** 2), rel=1e-15)
        assert gap_constant(1e-9) == pytest.approx(5.0 / 8.0, rel=1e-6)

    def test_inequality_with_slack(self, mixed_parts, weight):
        lhs, rhs, c = hodge_gap_check(mixed_parts, weight, 0.25)
        assert c == pytest.approx(1.0165625, rel=1e-12)
        assert lhs <= 1.1 * rhs

    def test_eps_sweep_rhs_grows(self, mixed_parts, weight):
        rows = {eps: hodge_gap_check(mixed_parts, weight, eps)
                for eps in (0.5, 0.25, 0.125)}
        lhs_vals = [rows[e][0] for e in (0.5, 0.25, 0.125)]
        assert max(lhs_vals) / min(lhs_vals) < 10.0
        assert rows[0.125][1] > rows[0.25][1]

    def test_coexact_gap_trivial(self, grid, weight):
        _, b = coexact_input(grid)
        parts = weighted_hodge_decompose(b, weight, tol=1e-6)
        parts = standard_hodge_decompose(b, tol=1e-6, parts=parts)
        lhs, rhs, _ = hodge_gap_check(parts, weight, 0.25)
        assert lhs < 1e-9

    def test_requires_both_parts(self, grid, weight):
        _, b = coexact_input(grid)
        parts = weighted_hodge_decompose(b, weight, tol=1e-6)
        with pytest.raises(ValueError, match="both decompositions"):
            hodge_gap_check(parts, weight, 0.25)


class TestVortexWeight:
    def test_rejects_bad_exponents(self):
        with pytest.raises(ValueError, match="positive"):
            VortexWeight(((0.0, 0.0),), (0.0,))

    def test_log_harmonic_away_from_centers(self, grid):
        # the admissibility condition: w^2 lap(log w) integrates to zero
        # against interior test functions
        w = VortexWeight(((0.37, -0.21), (1.3, 0.9)), (1.0, 0.5))
        ops = GradOps(grid)
        m = grid.quad_weights()
        X, Y = grid.meshes()
        logw = w.log_omega(X, Y)
        w2 = w.omega(X, Y) ** 2
        phi = bump_field(grid, (-1.5, 1.0), 1.5, 1.0).values
        lap_phi = ops.dx(ops.dx(phi)) + ops.dy(ops.dy(phi))
        gw2 = w.grad_norm2_on_grid(grid)
        # weak form: int 4|dw|^2 phi - w^2 lap(phi) = 0
        val = float(np.sum(m * (4.0 * gw2 * phi - w2 * lap_phi)))
        scale = float(np.sum(m * np.abs(w2 * lap_phi)))
        assert abs(val) < 5e-4 * scale

    def test_gradient_matches_finite_difference(self):
        w = VortexWeight(((0.3, -0.1),), (1.5,))
        x, y, d = 1.234, -0.567, 1e-6
        gx, gy = w.grad_omega(np.array([x]), np.array([y]))
        fx = (w.omega(np.array([x + d]), np.array([y]))
              - w.omega(np.array([x - d]), np.array([y]))) / (2 * d)
        fy = (w.omega(np.array([x]), np.array([y + d]))
              - w.omega(np.array([x]), np.array([y - d]))) / (2 * d)
        assert gx[0] == pytest.approx(fx[0], rel=1e-8)
        assert gy[0] == pytest.approx(fy[0], rel=1e-8)
