"""Selection principle: descent on the penalized functional.

G(u1, A1) = E(u1, A1) + ||u1 - u||^2 + ||A1 - A||^2 penalizes L2 distance
to the anchor pair with unit weights.  Minimizing G from the anchor can
only lower both G and E, and the descent output stays within
E(anchor) - 2 pi N of the anchor in L2, which is the closeness guarantee
being verified.  When the anchor carries perturbative data the descent
runs in the gauge-fixed variables (h', B) over the fixed base, so the
zero set and hence the degree are preserved by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .energy import PairState, degree, energy_direct
from .fields import ComplexField, OneForm, ScalarField, d_oneform, integrate_values
from .hodge import GradOps, interior_mask
from .linalg import ConvergenceError

MAX_LOG_MODULUS_SEARCH = 2.5  # line-search guard on sup|h'|


@dataclass
class IterationRow:
    iteration: int
    g_value: float
    energy: float
    grad_norm: float
    step_size: float


@dataclass
class PenalizedProblem:
    anchor: PairState
    current: PairState
    grad_tol: float = 1e-3
    history: list[IterationRow] = field(default_factory=list)

    def __post_init__(self):
        if self.anchor.grid != self.current.grid:
            raise ValueError("anchor and current must share a grid")


class _Functional:
    """G and its gradient on raw arrays, shared by the public ops and the
    optimizer."""

    def __init__(self, anchor: PairState):
        self.grid = anchor.grid
        self.ops = GradOps(self.grid)
        self.m = self.grid.quad_weights()
        self.u_anchor = anchor.u.to_complex()
        self.a1_anchor = anchor.A.a1
        self.a2_anchor = anchor.A.a2

    def energy(self, u, a1, a2) -> float:
        w1 = self.ops.dx(u) - 1j * u * a1
        w2 = self.ops.dy(u) - 1j * u * a2
        da = self.ops.dx(a2) - self.ops.dy(a1)
        mod2 = (u * u.conj()).real
        dens = (w1 * w1.conj()).real + (w2 * w2.conj()).real + da ** 2 \
            + 0.25 * (1.0 - mod2) ** 2
        return float(np.sum(self.m * dens))

    def value(self, u, a1, a2) -> tuple[float, float]:
        e = self.energy(u, a1, a2)
        du = u - self.u_anchor
        pen = float(np.sum(self.m * ((du * du.conj()).real
                                     + (a1 - self.a1_anchor) ** 2
                                     + (a2 - self.a2_anchor) ** 2)))
        return e + pen, e

    def gradient(self, u, a1, a2):
        """Plain-dot gradients (m-weighted Riesz representatives times m)."""
        ops, m = self.ops, self.m
        w1 = ops.dx(u) - 1j * u * a1
        w2 = ops.dy(u) - 1j * u * a2
        da = ops.dx(a2) - ops.dy(a1)
        mod2 = (u * u.conj()).real

        g_u = 2.0 * (ops.dx_t(m * w1) + ops.dy_t(m * w2)
                     + m * 1j * (a1 * w1 + a2 * w2))
        g_u += -m * (1.0 - mod2) * u
        g_u += 2.0 * m * (u - self.u_anchor)

        g_a1 = 2.0 * m * (u * w1.conj()).imag - ops.dy_t(2.0 * m * da) \
            + 2.0 * m * (a1 - self.a1_anchor)
        g_a2 = 2.0 * m * (u * w2.conj()).imag + ops.dx_t(2.0 * m * da) \
            + 2.0 * m * (a2 - self.a2_anchor)
        return g_u, g_a1, g_a2


def penalized_energy(prob: PenalizedProblem) -> float:
    fn = _Functional(prob.anchor)
    u = prob.current.u.to_complex()
    g, _ = fn.value(u, prob.current.A.a1, prob.current.A.a2)
    return g


def penalized_gradient(prob: PenalizedProblem) -> tuple[ComplexField, OneForm]:
    """L2 gradient of G at the current pair, as Riesz representatives in the
    quadrature inner product."""
    fn = _Functional(prob.anchor)
    u = prob.current.u.to_complex()
    g_u, g_a1, g_a2 = fn.gradient(u, prob.current.A.a1, prob.current.A.a2)
    m = fn.m
    return (ComplexField.from_complex(prob.current.grid, g_u / m),
            OneForm(prob.current.grid, g_a1 / m, g_a2 / m))


def gradient_check(prob: PenalizedProblem, seed: int = 0, n_directions: int = 10,
                   step: float = 1e-6) -> float:
    """Max relative error between the analytic directional derivative and a
    central finite difference of G over random smooth interior directions."""
    from .perturb import random_smooth_field

    grid = prob.current.grid
    fn = _Functional(prob.anchor)
    u = prob.current.u.to_complex()
    a1, a2 = prob.current.A.a1, prob.current.A.a2
    g_u, g_a1, g_a2 = fn.gradient(u, a1, a2)
    corr = max(4.0 * grid.spacing, grid.half_width / 8.0)
    worst = 0.0
    for k in range(n_directions):
        d_re = random_smooth_field(grid, seed + 10 * k, 1.0, corr).values
        d_im = random_smooth_field(grid, seed + 10 * k + 1, 1.0, corr).values
        d_a1 = random_smooth_field(grid, seed + 10 * k + 2, 1.0, corr).values
        d_a2 = random_smooth_field(grid, seed + 10 * k + 3, 1.0, corr).values
        du = d_re + 1j * d_im
        analytic = float(np.sum((g_u.conj() * du).real) + np.sum(g_a1 * d_a1)
                         + np.sum(g_a2 * d_a2))
        gp, _ = fn.value(u + step * du, a1 + step * d_a1, a2 + step * d_a2)
        gm, _ = fn.value(u - step * du, a1 - step * d_a1, a2 - step * d_a2)
        fd = (gp - gm) / (2.0 * step)
        worst = max(worst, abs(analytic - fd) / max(abs(fd), 1e-30))
    return worst


class _PerturbativeVars:
    """Descent variables (h', B) masked to the interior support."""

    def __init__(self, pair: PairState):
        if not pair.is_perturbative():
            raise ValueError("perturbative descent needs perturbative data")
        self.base = pair.base
        self.mask = interior_mask(pair.grid).astype(float)
        self.u0 = pair.base.u0.to_complex()
        self.a01 = pair.base.A0.a1
        self.a02 = pair.base.A0.a2
        self.x = np.stack([pair.h_pert.values, pair.b_pert.a1, pair.b_pert.a2])

    def fields(self, x):
        hp = x[0]
        u = self.u0 * np.exp(hp)
        return u, self.a01 + x[1], self.a02 + x[2]

    def chain_grad(self, x, g_u, g_a1, g_a2):
        u, _, _ = self.fields(x)
        g_h = (g_u.conj() * u).real
        return np.stack([g_h, g_a1, g_a2]) * self.mask

    def pair(self, x) -> PairState:
        u, a1, a2 = self.fields(x)
        grid = self.base.grid
        return PairState(u=ComplexField.from_complex(grid, u),
                         A=OneForm(grid, a1, a2), base=self.base,
                         h_pert=ScalarField(grid, x[0]),
                         b_pert=OneForm(grid, x[1], x[2]))


class _RawVars:
    """Descent variables (Re u, Im u, A1, A2), unconstrained."""

    def __init__(self, pair: PairState):
        u = pair.u.to_complex()
        self.x = np.stack([u.real, u.imag, pair.A.a1, pair.A.a2])
        self.grid = pair.grid

    def fields(self, x):
        return x[0] + 1j * x[1], x[2], x[3]

    def chain_grad(self, x, g_u, g_a1, g_a2):
        return np.stack([g_u.real, g_u.imag, g_a1, g_a2])

    def pair(self, x) -> PairState:
        u, a1, a2 = self.fields(x)
        return PairState(u=ComplexField.from_complex(self.grid, u),
                         A=OneForm(self.grid, a1, a2))


def _lbfgs_direction(s_list, y_list, g):
    q = g.copy()
    alphas = []
    for s, y in zip(reversed(s_list), reversed(y_list)):
        rho = 1.0 / float(np.sum(y * s))
        a = rho * float(np.sum(s * q))
        q -= a * y
        alphas.append((a, rho, s, y))
    if y_list:
        y = y_list[-1]
        s = s_list[-1]
        q *= float(np.sum(s * y)) / float(np.sum(y * y))
    for a, rho, s, y in reversed(alphas):
        b = rho * float(np.sum(y * q))
        q += (a - b) * s
    return -q


def minimize_penalized(prob: PenalizedProblem, max_iters: int = 500,
                       memory: int = 10) -> PairState:
    """Limited-memory quasi-Newton descent with Armijo backtracking.

    Accepted steps strictly decrease G, so G(out) <= G(anchor) and hence
    E(out) <= E(anchor).  Raises ConvergenceError when the line search
    cannot make progress.
    """
    fn = _Functional(prob.anchor)
    if prob.current.is_perturbative():
        vars_ = _PerturbativeVars(prob.current)
    else:
        vars_ = _RawVars(prob.current)
    x = vars_.x.copy()

    def eval_g(xv):
        u, a1, a2 = vars_.fields(xv)
        return fn.value(u, a1, a2)

    def eval_grad(xv):
        u, a1, a2 = vars_.fields(xv)
        return vars_.chain_grad(xv, *fn.gradient(u, a1, a2))

    g_val, e_val = eval_g(x)
    grad = eval_grad(x)
    # tolerance is measured in the quadrature norm of the representative
    def q_norm(gv):
        return float(np.sqrt(np.sum(gv * gv / fn.m)))

    s_list: list[np.ndarray] = []
    y_list: list[np.ndarray] = []
    prob.history.append(IterationRow(0, g_val, e_val, q_norm(grad), 0.0))

    for it in range(1, max_iters + 1):
        if q_norm(grad) <= prob.grad_tol:
            break
        direction = _lbfgs_direction(s_list, y_list, grad)
        slope = float(np.sum(direction * grad))
        if slope >= 0:  # safeguard: fall back to steepest descent
            direction = -grad
            slope = float(np.sum(direction * grad))
        step = 1.0
        accepted = False
        for _ in range(40):
            x_try = x + step * direction
            if isinstance(vars_, _PerturbativeVars) and \
                    float(np.max(np.abs(x_try[0]))) > MAX_LOG_MODULUS_SEARCH:
                step *= 0.5
                continue
            g_try, e_try = eval_g(x_try)
            if g_try <= g_val + 1e-4 * step * slope:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            raise ConvergenceError(
                f"line search failed at iteration {it} (G={g_val:.6e}, "
                f"grad={q_norm(grad):.3e})", q_norm(grad))
        grad_new = eval_grad(x_try)
        s = x_try - x
        y = grad_new - grad
        if float(np.sum(s * y)) > 1e-14 * float(np.sum(s * s)):
            s_list.append(s)
            y_list.append(y)
            if len(s_list) > memory:
                s_list.pop(0)
                y_list.pop(0)
        x, g_val, e_val, grad = x_try, g_try, e_try, grad_new
        prob.history.append(IterationRow(it, g_val, e_val, q_norm(grad), step))

    out = vars_.pair(x)
    prob.current = out
    return out


@dataclass
class SelectionReport:
    energy_chain: list[float]
    g_chains: list[list[IterationRow]]
    dist_u_sq: float
    dist_f_sq: float
    modulus_ratio_min: float
    modulus_ratio_max: float
    degree_in: int
    degree_out: int


def selection_iterate(anchor: PairState, rounds: int | None = None,
                      grad_tol: float = 1e-3, max_iters: int = 400,
                      comparability_level: float = 0.25) -> tuple[PairState, SelectionReport]:
    """Truncate the modulus once, then re-anchor the penalized descent
    `rounds` times (default: the vortex number)."""
    from .perturb import truncate_modulus

    if not anchor.is_perturbative():
        raise ValueError("selection_iterate expects a perturbative anchor")
    base = anchor.base
    if rounds is None:
        rounds = base.degree

    deg_in = degree(anchor.u).value
    current = truncate_modulus(anchor)
    chain = [energy_direct(current)]
    g_chains = []
    for _ in range(rounds):
        prob = PenalizedProblem(anchor=current, current=current, grad_tol=grad_tol)
        out = minimize_penalized(prob, max_iters=max_iters)
        g_chains.append(prob.history)
        chain.append(prob.history[-1].energy)
        current = out

    du_sq, df_sq = _pair_distance(anchor, current)
    mask = base.r0.values >= comparability_level
    ratios = current.u.modulus()[mask] / base.r0.values[mask]
    deg_out = degree(current.u).value
    report = SelectionReport(
        energy_chain=chain, g_chains=g_chains, dist_u_sq=du_sq, dist_f_sq=df_sq,
        modulus_ratio_min=float(np.min(ratios)), modulus_ratio_max=float(np.max(ratios)),
        degree_in=deg_in, degree_out=deg_out,
    )
    return current, report


def _pair_distance(a: PairState, b: PairState) -> tuple[float, float]:
    grid = a.grid
    du = np.abs(a.u.to_complex() - b.u.to_complex()) ** 2
    dist_u = integrate_values(grid, du)
    curv = d_oneform(a.A).density - d_oneform(b.A).density
    dist_f = integrate_values(grid, curv ** 2)
    return dist_u, dist_f


def write_iteration_log(path, rows: list[IterationRow]) -> None:
    with open(path, "w") as fh:
        fh.write("iter,G,E,grad_norm,step_size\n")
        for r in rows:
            fh.write(f"{r.iteration},{r.g_value!r},{r.energy!r},"
                     f"{r.grad_norm!r},{r.step_size!r}\n")
