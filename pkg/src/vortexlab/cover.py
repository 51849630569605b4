"""Covering of the vortex sublevel set by balls with disjoint doubles.

The threshold beta in [1/4, 1/2] is picked by scanning marching-squares
perimeters of the level sets {r0 = beta} and keeping the value of minimal
total length.  Components of {r0 <= beta} are covered by balls which are
then merged pairwise with the replacement rule

    B_a, B_b -> B at (z_a + z_b)/2 with radius 3 (rho_a + rho_b)

whenever the doubled balls intersect; the count drops each time, so at most
N - 1 merges happen.  Each final ball carries the unit-exponent weight of
the prescribed zeros it contains, and the measured ratio r0 / w_k over the
doubled ball.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .taubes import VortexSolution
from .weights import VortexWeight

# marching squares: case index -> list of crossed-edge pairs
# corner bits: 1 = (x, y), 2 = (x+h, y), 4 = (x+h, y+h), 8 = (x, y+h)
# edges: B bottom, R right, T top, L left
_SEGMENTS = {
    0: [], 15: [],
    1: [("L", "B")], 14: [("L", "B")],
    2: [("B", "R")], 13: [("B", "R")],
    3: [("L", "R")], 12: [("L", "R")],
    4: [("T", "R")], 11: [("T", "R")],
    6: [("B", "T")], 9: [("B", "T")],
    7: [("L", "T")], 8: [("L", "T")],
    5: [("L", "T"), ("B", "R")],
    10: [("L", "B"), ("T", "R")],
}


def marching_squares_length(values: np.ndarray, level: float, spacing: float) -> float:
    """Total length of the level curve {values = level} via marching squares."""
    inside = values <= level
    v00 = values[:-1, :-1]
    v01 = values[:-1, 1:]
    v10 = values[1:, :-1]
    v11 = values[1:, 1:]
    case = (inside[:-1, :-1] * 1 + inside[:-1, 1:] * 2
            + inside[1:, 1:] * 4 + inside[1:, :-1] * 8)

    def frac(a, b):
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (level - a) / (b - a)
        return np.clip(np.nan_to_num(t, nan=0.5), 0.0, 1.0)

    # crossing points in cell-local coordinates (units of spacing)
    pts = {
        "B": (frac(v00, v01), np.zeros_like(v00)),
        "T": (frac(v10, v11), np.ones_like(v00)),
        "L": (np.zeros_like(v00), frac(v00, v10)),
        "R": (np.ones_like(v00), frac(v01, v11)),
    }
    total = 0.0
    for idx, pairs in _SEGMENTS.items():
        if not pairs:
            continue
        mask = case == idx
        if not np.any(mask):
            continue
        for e1, e2 in pairs:
            x1, y1 = pts[e1]
            x2, y2 = pts[e2]
            seg = np.hypot(x2 - x1, y2 - y1)
            total += float(np.sum(seg[mask]))
    return total * spacing


@dataclass
class Ball:
    cx: float
    cy: float
    rho: float

    def contains(self, x: float, y: float, factor: float = 1.0) -> bool:
        return np.hypot(x - self.cx, y - self.cy) <= factor * self.rho


@dataclass
class BallCover:
    beta: float
    balls: list[Ball]
    ball_weights: list[VortexWeight]
    min_ratio: float
    max_ratio: float
    merges: int

    @property
    def comparability(self) -> float:
        return max(self.max_ratio, 1.0 / self.min_ratio)

    def to_json_dict(self) -> dict:
        return {
            "beta": self.beta,
            "balls": [{"cx": b.cx, "cy": b.cy, "rho": b.rho} for b in self.balls],
            "comparability": {"min_ratio": self.min_ratio, "max_ratio": self.max_ratio},
        }


_FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])


def merge_balls(balls: list[Ball], max_merges: int) -> tuple[list[Ball], int]:
    """Apply the doubled-ball replacement rule until all doubles are disjoint."""
    balls = list(balls)
    merges = 0
    while True:
        hit = None
        for i in range(len(balls)):
            for j in range(i + 1, len(balls)):
                bi, bj = balls[i], balls[j]
                if np.hypot(bi.cx - bj.cx, bi.cy - bj.cy) <= 2.0 * (bi.rho + bj.rho):
                    hit = (i, j)
                    break
            if hit:
                break
        if hit is None:
            return balls, merges
        i, j = hit
        bi, bj = balls[i], balls[j]
        merged = Ball(0.5 * (bi.cx + bj.cx), 0.5 * (bi.cy + bj.cy),
                      3.0 * (bi.rho + bj.rho))
        balls = [b for k, b in enumerate(balls) if k not in (i, j)] + [merged]
        merges += 1
        if merges > max_merges:
            raise RuntimeError("merge loop exceeded the theoretical bound")


def cover_vortex_set(sol: VortexSolution, beta_samples: int = 26) -> BallCover:
    grid = sol.grid
    r0 = sol.r0.values
    n_zeros = sol.zeros.count

    betas = np.linspace(0.25, 0.5, beta_samples)
    lengths = [marching_squares_length(r0, b, grid.spacing) for b in betas]
    beta = float(betas[int(np.argmin(lengths))])

    labels, n_comp = ndimage.label(r0 <= beta, structure=_FOUR_CONNECTED)
    if n_comp > n_zeros:
        raise RuntimeError(
            f"sublevel set has {n_comp} components for {n_zeros} zeros; "
            "the solve is inconsistent with the theory"
        )
    X, Y = grid.meshes()
    balls: list[Ball] = []
    for k in range(1, n_comp + 1):
        mask = labels == k
        cx = float(np.mean(X[mask]))
        cy = float(np.mean(Y[mask]))
        reach = float(np.max(np.hypot(X[mask] - cx, Y[mask] - cy)))
        balls.append(Ball(cx, cy, max(1.0, reach + grid.spacing)))

    balls, merges = merge_balls(balls, max_merges=n_zeros)

    ball_weights = []
    min_ratio, max_ratio = np.inf, 0.0
    for b in balls:
        members = [p for p in sol.zeros.points if b.contains(p[0], p[1])]
        if not members:
            raise RuntimeError("covering ball contains no prescribed zero")
        wk = VortexWeight.unit(members)
        ball_weights.append(wk)
        dist = np.hypot(X - b.cx, Y - b.cy)
        sel = dist <= 2.0 * b.rho
        # drop nodes at the zeros themselves: the ratio is 0/0 there
        for zx, zy in members:
            sel &= np.hypot(X - zx, Y - zy) > 0.5 * grid.spacing
        ratios = r0[sel] / wk.omega(X[sel], Y[sel])
        min_ratio = min(min_ratio, float(np.min(ratios)))
        max_ratio = max(max_ratio, float(np.max(ratios)))

    cover = BallCover(beta=beta, balls=balls, ball_weights=ball_weights,
                      min_ratio=min_ratio, max_ratio=max_ratio, merges=merges)
    _check_cover(sol, cover)
    return cover


def _check_cover(sol: VortexSolution, cover: BallCover) -> None:
    grid = sol.grid
    X, Y = grid.meshes()
    sub = sol.r0.values <= cover.beta
    covered = np.zeros_like(sub)
    for b in cover.balls:
        covered |= np.hypot(X - b.cx, Y - b.cy) <= b.rho
    if np.any(sub & ~covered):
        raise RuntimeError("sublevel set escapes the covering balls")
    for i in range(len(cover.balls)):
        for j in range(i + 1, len(cover.balls)):
            bi, bj = cover.balls[i], cover.balls[j]
            if np.hypot(bi.cx - bj.cx, bi.cy - bj.cy) <= 2.0 * (bi.rho + bj.rho):
                raise RuntimeError("doubled balls intersect after merging")
