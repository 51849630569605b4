"""Product weights  w(x) = prod_k |x - a_k|^alpha_k  with analytic gradients.

log w is harmonic away from the centers, which is the admissibility
condition for every weighted inequality in this package.  Gradient
evaluations at a node that coincides with a center return 0 there: the
singularity is integrable in 2D and zeroing the node is the consistent
trapezoidal treatment.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fields import Grid


@dataclass(frozen=True)
class VortexWeight:
    centers: tuple[tuple[float, float], ...]
    exponents: tuple[float, ...]

    def __post_init__(self):
        if len(self.centers) != len(self.exponents):
            raise ValueError("one exponent per center required")
        if not self.centers:
            raise ValueError("at least one center required")
        if any(a <= 0 for a in self.exponents):
            raise ValueError("exponents must be positive")

    @classmethod
    def unit(cls, centers: Sequence[tuple[float, float]]) -> "VortexWeight":
        """Unit-exponent weight prod |x - a_k| (the solution-comparison case)."""
        cs = tuple((float(x), float(y)) for x, y in centers)
        return cls(cs, (1.0,) * len(cs))

    def omega(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        out = np.ones_like(np.asarray(X, dtype=float))
        for (cx, cy), a in zip(self.centers, self.exponents):
            r2 = (X - cx) ** 2 + (Y - cy) ** 2
            out *= r2 ** (0.5 * a)
        return out

    def log_omega(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """log w; -inf at the centers."""
        with np.errstate(divide="ignore"):
            out = np.zeros_like(np.asarray(X, dtype=float))
            for (cx, cy), a in zip(self.centers, self.exponents):
                r2 = (X - cx) ** 2 + (Y - cy) ** 2
                out += 0.5 * a * np.log(r2)
        return out

    def grad_log_omega(self, X, Y) -> tuple[np.ndarray, np.ndarray]:
        """sum_k alpha_k (x - a_k)/|x - a_k|^2, zeroed at the centers."""
        gx = np.zeros_like(np.asarray(X, dtype=float))
        gy = np.zeros_like(gx)
        for (cx, cy), a in zip(self.centers, self.exponents):
            dx = X - cx
            dy = Y - cy
            r2 = dx * dx + dy * dy
            with np.errstate(divide="ignore", invalid="ignore"):
                gx += np.where(r2 > 0, a * dx / r2, 0.0)
                gy += np.where(r2 > 0, a * dy / r2, 0.0)
        return gx, gy

    def grad_omega(self, X, Y) -> tuple[np.ndarray, np.ndarray]:
        w = self.omega(X, Y)
        gx, gy = self.grad_log_omega(X, Y)
        return w * gx, w * gy

    def on_grid(self, grid: Grid) -> np.ndarray:
        X, Y = grid.meshes()
        return self.omega(X, Y)

    def grad_norm2_on_grid(self, grid: Grid) -> np.ndarray:
        """|grad w|^2 at the nodes (0 at center nodes)."""
        X, Y = grid.meshes()
        gx, gy = self.grad_omega(X, Y)
        return gx * gx + gy * gy
