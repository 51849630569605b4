"""Constructive comparability of perturbed complex polynomials.

Given a monic P with roots in the half disk and a small C^N perturbation R
on the unit disk, the factorization P + R ~ Q proceeds exactly like the
underlying induction: locate one zero of P + R by argument-principle
subdivision (the winding of the image curve counts the enclosed zeros),
divide it out synthetically, push R through the same division with a
series fallback near the zero, and recurse on the lower degree.  The
comparability constant is then measured on a grid over the unit disk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

DEFAULT_ADMISSIBLE_NORM = 1e-3
MAX_DEGREE = 16


@dataclass(frozen=True)
class ComplexPoly:
    """Monic polynomial stored by its roots; the empty product is 1."""

    roots: tuple[complex, ...]

    def __post_init__(self):
        if len(self.roots) > MAX_DEGREE:
            raise ValueError(f"degree limited to {MAX_DEGREE}")

    @classmethod
    def of(cls, *roots) -> "ComplexPoly":
        return cls(tuple(complex(r) for r in roots))

    @property
    def degree(self) -> int:
        return len(self.roots)

    def __call__(self, z):
        out = np.ones_like(np.asarray(z, dtype=complex))
        for r in self.roots:
            out = out * (np.asarray(z, dtype=complex) - r)
        return out if out.shape else complex(out)

    def coefficients(self) -> np.ndarray:
        """Monic coefficients, highest power first."""
        return np.atleast_1d(np.poly(np.asarray(self.roots, dtype=complex))) \
            if self.roots else np.array([1.0 + 0.0j])


_DIRECTIONS = np.exp(1j * np.pi * np.arange(8) / 8.0)


def _directional_derivative_sup(fn, order: int, points: np.ndarray) -> float:
    """Sup over points/directions of the order-th directional derivative,
    by centered differences with order-adapted spacing."""
    if order == 0:
        return float(np.max(np.abs(fn(points))))
    delta = max(1e-3, 0.02 * order)
    coeffs = np.array([(-1) ** k * float(math.comb(order, k))
                       for k in range(order + 1)])
    offsets = (order / 2.0 - np.arange(order + 1)) * delta
    worst = 0.0
    for e in _DIRECTIONS:
        usable = points[np.abs(points) + (order / 2.0) * delta <= 1.0]
        if usable.size == 0:
            continue
        samples = usable[:, None] + e * offsets[None, :]
        vals = fn(samples.ravel()).reshape(samples.shape)
        deriv = (vals @ coeffs) / delta ** order
        worst = max(worst, float(np.max(np.abs(deriv))))
    return worst


def _polar_points(n_r: int = 10, n_t: int = 24) -> np.ndarray:
    radii = np.linspace(0.05, 0.9, n_r)
    angles = np.linspace(0.0, 2.0 * np.pi, n_t, endpoint=False)
    pts = (radii[:, None] * np.exp(1j * angles)[None, :]).ravel()
    return np.concatenate(([0.0 + 0.0j], pts))


@dataclass
class SampledPerturbation:
    """Perturbation R on the unit disk: callback plus measured C^N data."""

    fn: object
    order: int
    cn_norm: float = field(default=-1.0)
    samples: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        pts = _polar_points()
        if self.samples is None:
            self.samples = np.asarray(self.fn(pts), dtype=complex)
        if self.cn_norm < 0:
            self.cn_norm = measure_cn_norm(self.fn, self.order)

    def __call__(self, z):
        return self.fn(z)


def measure_cn_norm(fn, order: int) -> float:
    """Measured sup of directional derivatives up to `order` on the disk."""
    pts = _polar_points()
    return max(_directional_derivative_sup(fn, k, pts) for k in range(order + 1))


def zero_perturbation(order: int) -> SampledPerturbation:
    return SampledPerturbation(fn=lambda z: np.zeros_like(np.asarray(z, dtype=complex)),
                               order=order, cn_norm=0.0)


def constant_perturbation(value: complex, order: int) -> SampledPerturbation:
    c = complex(value)
    return SampledPerturbation(
        fn=lambda z: np.full_like(np.asarray(z, dtype=complex), c),
        order=order, cn_norm=abs(c))


def _winding_on_contour(fvals: np.ndarray) -> int:
    ratios = np.roll(fvals, -1) / fvals
    total = float(np.sum(np.angle(ratios)))
    return int(np.rint(total / (2.0 * np.pi)))


def _square_contour(cx: float, cy: float, half: float, per_side: int = 64) -> np.ndarray:
    t = np.linspace(-half, half, per_side, endpoint=False)
    bottom = (cx + t) + 1j * (cy - half)
    right = (cx + half) + 1j * (cy + t)
    top = (cx - t) + 1j * (cy + half)
    left = (cx - half) + 1j * (cy - t)
    return np.concatenate([bottom, right, top, left])


class RoucheError(ValueError):
    pass


def find_zero(poly: ComplexPoly, pert: SampledPerturbation,
              residual_tol: float = 1e-12) -> complex:
    """One zero of P + R inside the unit disk.

    Counts zeros in shrinking squares by the winding of the image contour,
    then polishes with a Newton iteration on the 2D real system (R need
    not be holomorphic, so the Jacobian is assembled by finite
    differences).
    """
    circle = np.exp(1j * np.linspace(0.0, 2.0 * np.pi, 512, endpoint=False))
    min_p = float(np.min(np.abs(poly(circle))))
    sup_r = float(np.max(np.abs(np.asarray(pert(circle), dtype=complex))))
    if sup_r >= min_p:
        raise RoucheError(
            f"Rouche hypothesis violated: sup |R| {sup_r:.3e} >= "
            f"min |P| {min_p:.3e} on the unit circle")

    def f(z):
        return poly(z) + np.asarray(pert(z), dtype=complex)

    scale = 1.0 + float(np.max(np.abs(poly(circle))))

    cx, cy, half = 0.0, 0.0, 0.7
    contour = _square_contour(cx, cy, half)
    if _winding_on_contour(f(contour)) < 1:
        raise RoucheError("winding count zero on the starting square")

    while 2.0 * half > 1e-8:
        found = False
        for jitter in (0.0, 7.3e-5 * half, -4.1e-5 * half):
            for dx in (-0.5, 0.5):
                for dy in (-0.5, 0.5):
                    sx = cx + dx * half + jitter
                    sy = cy + dy * half + jitter
                    sub = _square_contour(sx, sy, half / 2.0 + abs(jitter))
                    vals = f(sub)
                    if float(np.min(np.abs(vals))) < 1e-13 * scale:
                        continue  # zero hugs this contour; try the jitter
                    if _winding_on_contour(vals) >= 1:
                        cx, cy, half = sx, sy, half / 2.0 + abs(jitter)
                        found = True
                        break
                if found:
                    break
            if found:
                break
        if not found:
            raise RoucheError("subdivision lost the zero")

    z = complex(cx, cy)
    delta = 1e-7
    for _ in range(80):
        fz = complex(f(np.array([z]))[0])
        if abs(fz) <= residual_tol * scale:
            break
        fx = complex(f(np.array([z + delta]))[0]) - fz
        fy = complex(f(np.array([z + 1j * delta]))[0]) - fz
        jac = np.array([[fx.real, fy.real], [fx.imag, fy.imag]]) / delta
        try:
            step = np.linalg.solve(jac, [-fz.real, -fz.imag])
        except np.linalg.LinAlgError:
            break
        z += complex(step[0], step[1])
    fz = complex(f(np.array([z]))[0])
    if abs(fz) > 1e-6 * scale:
        raise RoucheError(f"Newton polish failed: residual {abs(fz):.3e}")
    if abs(z) > 1.0:
        raise RoucheError(f"located zero {z} escaped the unit disk")
    return z


def deflate_once(poly: ComplexPoly, pert: SampledPerturbation,
                 a: complex) -> tuple[ComplexPoly, SampledPerturbation]:
    """Divide the located zero out of both the polynomial and perturbation.

    P' is the synthetic division of P(z) - P(a); R'(z) = (R(z) - R(a))/(z-a)
    with a finite-difference series fallback within 1e-6 of a.
    """
    if abs(a) > 1.0:
        raise ValueError("deflation point must lie in the closed unit disk")
    coeffs = poly.coefficients().astype(complex)
    pa = complex(poly(a))
    coeffs[-1] -= pa
    quotient = np.empty(len(coeffs) - 1, dtype=complex)
    acc = 0.0 + 0.0j
    for i in range(len(coeffs) - 1):
        acc = coeffs[i] + acc * a
        quotient[i] = acc
    # remainder acc*a + coeffs[-1] == 0 exactly by construction
    new_roots = tuple(np.roots(quotient)) if len(quotient) > 1 else ()
    new_poly = ComplexPoly(new_roots)

    ra = complex(np.asarray(pert(np.array([a])), dtype=complex)[0])
    d = 1e-5
    grad_x = (complex(np.asarray(pert(np.array([a + d])), dtype=complex)[0])
              - complex(np.asarray(pert(np.array([a - d])), dtype=complex)[0])) / (2 * d)
    grad_y = (complex(np.asarray(pert(np.array([a + 1j * d])), dtype=complex)[0])
              - complex(np.asarray(pert(np.array([a - 1j * d])), dtype=complex)[0])) / (2 * d)
    inner = pert.fn

    def quotient_pert(z):
        z = np.asarray(z, dtype=complex)
        dz = z - a
        near = np.abs(dz) < 1e-6
        out = np.empty_like(z)
        far = ~near
        if np.any(far):
            out[far] = (np.asarray(inner(z[far]), dtype=complex) - ra) / dz[far]
        if np.any(near):
            linear = grad_x * dz[near].real + grad_y * dz[near].imag
            with np.errstate(invalid="ignore", divide="ignore"):
                vals = np.where(np.abs(dz[near]) > 0, linear / dz[near],
                                0.5 * (grad_x - 1j * grad_y))
            out[near] = vals
        return out

    new_order = max(poly.degree - 1, 0)
    new_pert = SampledPerturbation(fn=quotient_pert, order=new_order)
    return new_poly, new_pert


@dataclass
class ComparabilityReport:
    roots_p: list[complex]
    roots_q: list[complex]
    cn_norm: float
    lambda_measured: float
    residuals: list[float]
    quotient_norms: list[float]

    def to_json_dict(self) -> dict:
        enc = lambda zs: [[z.real, z.imag] for z in zs]
        return {"roots_P": enc(self.roots_p), "roots_Q": enc(self.roots_q),
                "cn_norm": self.cn_norm, "lambda_measured": self.lambda_measured}


def comparable_polynomial(poly: ComplexPoly, pert: SampledPerturbation,
                          admissible_norm: float = DEFAULT_ADMISSIBLE_NORM,
                          grid_points: int = 256
                          ) -> tuple[ComplexPoly, float, ComparabilityReport]:
    """Factor P + R into a comparable monic Q with roots in B_{2/3}.

    Recurses find_zero -> deflate_once down to degree zero, then measures
    the two-sided ratio |P + R| / |Q| on a grid over the unit disk,
    excluding 1e-3 neighborhoods of the roots which are filled in by
    sampling circles around them.
    """
    if any(abs(r) > 0.5 for r in poly.roots):
        raise ValueError("roots of P must lie in the closed half disk")
    if pert.cn_norm > admissible_norm:
        raise ValueError(
            f"perturbation norm {pert.cn_norm:.3e} exceeds admissibility "
            f"{admissible_norm:.3e}")

    roots_q: list[complex] = []
    quotient_norms: list[float] = []
    p_cur, r_cur = poly, pert
    while p_cur.degree >= 1:
        a = find_zero(p_cur, r_cur)
        roots_q.append(a)
        p_cur, r_cur = deflate_once(p_cur, r_cur, a)
        quotient_norms.append(r_cur.cn_norm)

    bad = [b for b in roots_q if abs(b) > 2.0 / 3.0]
    if bad:
        raise RoucheError(
            f"lemma hypothesis violated (eps too large): roots {bad} outside B_2/3")
    q = ComplexPoly(tuple(roots_q))

    def f(z):
        return poly(z) + np.asarray(pert(z), dtype=complex)

    xs = np.linspace(-1.0, 1.0, grid_points)
    Zg = xs[None, :] + 1j * xs[:, None]
    sel = np.abs(Zg) <= 1.0
    pts = Zg[sel]
    for b in roots_q:
        pts = pts[np.abs(pts - b) > 1e-3]
    circles = [b + 1e-3 * np.exp(1j * np.linspace(0, 2 * np.pi, 64, endpoint=False))
               for b in roots_q]
    circles = [c[np.abs(c) <= 1.0] for c in circles]
    pts = np.concatenate([pts] + circles)
    ratio = np.abs(f(pts)) / np.abs(q(pts))
    lam = float(max(np.max(ratio), np.max(1.0 / ratio)))

    residuals = [float(abs(f(np.array([b]))[0])) for b in roots_q]
    report = ComparabilityReport(
        roots_p=list(map(complex, poly.roots)), roots_q=roots_q,
        cn_norm=pert.cn_norm, lambda_measured=lam,
        residuals=residuals, quotient_norms=quotient_norms)
    return q, lam, report
