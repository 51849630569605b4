"""Discrete calculus on a uniform collocated 2D grid.

All fields live on the nodes of a square lattice covering [-L, L]^2 with an
odd number of points per side, so the origin is a node.  Arrays are stored
with shape (n, n) indexed [iy, ix]; the flat row-major order is iy*n + ix.
Derivatives are second-order central differences in the interior and
second-order one-sided stencils on the boundary rows.  The Hodge star uses
the orientation  *dx = dy,  *dy = -dx.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Grid",
    "ScalarField",
    "ComplexField",
    "OneForm",
    "TwoForm",
    "build_grid",
    "d_scalar",
    "d_oneform",
    "hodge_star",
    "star_oneform",
    "star_scalar",
    "star_twoform",
    "integrate",
    "laplacian",
]


@dataclass(frozen=True)
class Grid:
    """Uniform lattice on [-L, L]^2 with n nodes per side (n odd)."""

    n: int
    half_width: float

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / (self.n - 1)

    @property
    def coords(self) -> np.ndarray:
        return -self.half_width + self.spacing * np.arange(self.n)

    def meshes(self) -> tuple[np.ndarray, np.ndarray]:
        """(X, Y) node coordinate arrays, each shape (n, n)."""
        c = self.coords
        return np.meshgrid(c, c, indexing="xy")

    def quad_weights(self) -> np.ndarray:
        """Trapezoidal quadrature weights, shape (n, n)."""
        w = np.full(self.n, self.spacing)
        w[0] *= 0.5
        w[-1] *= 0.5
        return np.outer(w, w)


def build_grid(n: int, half_width: float) -> Grid:
    if n % 2 == 0:
        raise ValueError("n must be odd")
    if n < 65:
        raise ValueError("n must be at least 65")
    if half_width <= 0:
        raise ValueError("half_width must be positive")
    return Grid(n=int(n), half_width=float(half_width))


def _check_values(grid: Grid, values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.n, grid.n):
        raise ValueError(f"field shape {values.shape} does not match grid n={grid.n}")
    if not np.all(np.isfinite(values)):
        raise ValueError("field contains non-finite entries")
    return values


@dataclass
class ScalarField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = _check_values(self.grid, self.values)

    @classmethod
    def zeros(cls, grid: Grid) -> "ScalarField":
        return cls(grid, np.zeros((grid.n, grid.n)))

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "ScalarField":
        X, Y = grid.meshes()
        return cls(grid, np.asarray(fn(X, Y), dtype=float))


@dataclass
class ComplexField:
    """Complex section u; re/im stored as separate real arrays."""

    grid: Grid
    re: np.ndarray
    im: np.ndarray

    def __post_init__(self):
        self.re = _check_values(self.grid, self.re)
        self.im = _check_values(self.grid, self.im)

    @classmethod
    def from_complex(cls, grid: Grid, z: np.ndarray) -> "ComplexField":
        z = np.asarray(z)
        return cls(grid, np.ascontiguousarray(z.real, dtype=float),
                   np.ascontiguousarray(z.imag, dtype=float))

    def to_complex(self) -> np.ndarray:
        return self.re + 1j * self.im

    def modulus(self) -> np.ndarray:
        return np.hypot(self.re, self.im)


@dataclass
class OneForm:
    """a1 dx + a2 dy."""

    grid: Grid
    a1: np.ndarray
    a2: np.ndarray

    def __post_init__(self):
        self.a1 = _check_values(self.grid, self.a1)
        self.a2 = _check_values(self.grid, self.a2)

    @classmethod
    def zeros(cls, grid: Grid) -> "OneForm":
        z = np.zeros((grid.n, grid.n))
        return cls(grid, z, z.copy())


@dataclass
class TwoForm:
    """density dx ^ dy."""

    grid: Grid
    density: np.ndarray

    def __post_init__(self):
        self.density = _check_values(self.grid, self.density)


def _ddx(values: np.ndarray, h: float) -> np.ndarray:
    """d/dx along axis 1, central interior, one-sided O(h^2) at edges."""
    return np.gradient(values, h, axis=1, edge_order=2)


def _ddy(values: np.ndarray, h: float) -> np.ndarray:
    return np.gradient(values, h, axis=0, edge_order=2)


def d_scalar(f: ScalarField) -> OneForm:
    """Exterior derivative df = (d1 f) dx + (d2 f) dy."""
    h = f.grid.spacing
    return OneForm(f.grid, _ddx(f.values, h), _ddy(f.values, h))


def d_scalar_arrays(grid: Grid, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Raw-array version of d_scalar; also used for complex arrays."""
    h = grid.spacing
    return _ddx(values, h), _ddy(values, h)


def d_oneform(alpha: OneForm) -> TwoForm:
    """d(a1 dx + a2 dy) = (d1 a2 - d2 a1) dx ^ dy."""
    h = alpha.grid.spacing
    return TwoForm(alpha.grid, _ddx(alpha.a2, h) - _ddy(alpha.a1, h))


def star_oneform(alpha: OneForm) -> OneForm:
    """*(a1, a2) = (-a2, a1); the convention *dx = dy."""
    return OneForm(alpha.grid, -alpha.a2, alpha.a1.copy())


def star_scalar(f: ScalarField) -> TwoForm:
    return TwoForm(f.grid, f.values.copy())


def star_twoform(tau: TwoForm) -> ScalarField:
    return ScalarField(tau.grid, tau.density.copy())


def hodge_star(obj):
    """Degree-dispatching Hodge star: 0-form -> 2-form, 1 -> 1, 2 -> 0."""
    if isinstance(obj, OneForm):
        return star_oneform(obj)
    if isinstance(obj, ScalarField):
        return star_scalar(obj)
    if isinstance(obj, TwoForm):
        return star_twoform(obj)
    raise TypeError(f"no Hodge star for {type(obj).__name__}")


def integrate(obj) -> float:
    """Trapezoidal integral over the box of a ScalarField or TwoForm."""
    if isinstance(obj, TwoForm):
        values = obj.density
        grid = obj.grid
    elif isinstance(obj, ScalarField):
        values = obj.values
        grid = obj.grid
    else:
        raise TypeError("integrate expects a ScalarField or TwoForm")
    return float(np.sum(grid.quad_weights() * values))


def integrate_values(grid: Grid, values: np.ndarray) -> float:
    return float(np.sum(grid.quad_weights() * values))


def laplacian(f: ScalarField) -> ScalarField:
    """Composed central-difference Laplacian d1(d1 f) + d2(d2 f).

    This is the operator obtained by chaining the grid's first-derivative
    stencils, so  *d(*df) == laplacian(f)  holds to round-off.
    """
    h = f.grid.spacing
    return ScalarField(f.grid, _ddx(_ddx(f.values, h), h) + _ddy(_ddy(f.values, h), h))


def oneform_dot(alpha: OneForm, beta: OneForm) -> np.ndarray:
    return alpha.a1 * beta.a1 + alpha.a2 * beta.a2


def oneform_norm2(alpha: OneForm) -> np.ndarray:
    return alpha.a1 ** 2 + alpha.a2 ** 2
