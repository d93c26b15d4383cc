"""Quadrature grids and piecewise cubic Hermite antiderivatives.

The unit interval is stored in two halves: nodes t in [0, 1/2] and nodes
d = 1 - t in [0, 1/2].  Both halves are graded geometrically toward their
endpoint, so integrands concentrated in a thin layer at t = 1 keep full
relative precision (1 - t is never formed for tiny d).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonInvertibleError, ParameterError, RangeError
from .phi_map import MonotoneMap

_LEFT_FLOOR = 1e-15
_RIGHT_FLOOR = 1e-13
_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(4)


def graded_half(n: int, floor: float) -> np.ndarray:
    """About n nodes on [0, 1/2]: a uniform part plus a geometric part down to ``floor``."""
    x = np.unique(np.concatenate([
        [0.0, 0.5],
        np.linspace(0.0, 0.5, n // 2 + 1),
        np.geomspace(floor, 0.5, n // 2),
    ]))
    # drop nodes that nearly coincide; keeps the Hermite intervals well conditioned
    keep = np.concatenate([[True], np.diff(x) > 1e-3 * np.minimum(x[1:], 1.0 / n)])
    keep[-1] = True
    return x[keep]


def _preimages(phi: MonotoneMap, ys: np.ndarray) -> np.ndarray:
    # one vectorised inversion; only a flat value forces the per-point fallback
    try:
        return np.atleast_1d(np.asarray(phi.inverse(ys), dtype=float))
    except NonInvertibleError:
        out = np.full(ys.shape, np.nan)
        for i, y in enumerate(ys):
            try:
                out[i] = float(phi.inverse(y))
            except NonInvertibleError:
                pass
        return out


def kink_points(phi: MonotoneMap, depth: int = 6) -> np.ndarray:
    """Breakpoints of phi and their preimages, where iterated tail integrals can kink."""
    found = np.unique(np.asarray(phi.breakpoints(), dtype=float))
    frontier = found
    lo, hi = phi.lower, phi.upper
    for _ in range(depth):
        frontier = frontier[(frontier > lo) & (frontier < hi)]
        if frontier.size == 0:
            break
        p = _preimages(phi, frontier)
        p = p[np.isfinite(p) & (p > 0.0) & (p < 1.0)]
        if found.size:
            gap = np.min(np.abs(p[:, None] - found[None, :]), axis=1)
            p = p[gap > 1e-14]
        if p.size == 0:
            break
        frontier = np.unique(p)
        found = np.union1d(found, frontier)
    return found


@dataclass(frozen=True)
class SplitGrid:
    """Quadrature nodes; ``left`` holds t in [0, 1/2], ``right`` holds d = 1 - t in [0, 1/2]."""

    left: np.ndarray
    right: np.ndarray

    @property
    def size(self) -> int:
        return len(self.left) + len(self.right) - 1

    @property
    def t(self) -> np.ndarray:
        """All nodes in t-coordinates, ascending."""
        return np.concatenate([self.left, 1.0 - self.right[::-1][1:]])

    def integrate(self, f) -> float:
        """4-point Gauss-Legendre on every grid cell; f takes t-coordinates.

        Kinks of the integrand at grid nodes cost nothing."""
        total = 0.0
        for nodes, to_t in ((self.left, lambda s: s), (self.right, lambda s: 1.0 - s)):
            a, b = nodes[:-1], nodes[1:]
            half = 0.5 * (b - a)
            mid = 0.5 * (a + b)
            pts = mid[:, None] + half[:, None] * _GAUSS_X[None, :]
            vals = np.asarray(f(to_t(pts).ravel()), dtype=float).reshape(pts.shape)
            total += float(np.sum(half * (vals @ _GAUSS_W)))
        return total


def split_grid(
    phi: MonotoneMap | None, size: int, floor_scale: float = 1.0, kinks: np.ndarray | None = None
) -> SplitGrid:
    """Graded split grid of roughly ``size`` nodes, refined at the kinks of phi.

    ``floor_scale`` raises the smallest graded spacing; the error-estimation grid uses
    it so that features thinner than the finest layer show up as a difference.
    ``kinks`` may be passed in to reuse them across grids of the same map.
    """
    if size < 16:
        raise ParameterError(f"grid size must be at least 16, got {size}")
    left = graded_half(size // 2, _LEFT_FLOOR * floor_scale)
    right = graded_half(size // 2, _RIGHT_FLOOR * floor_scale)
    if phi is not None:
        if kinks is None:
            kinks = kink_points(phi)
        left = np.union1d(left, kinks[kinks <= 0.5])
        right = np.union1d(right, 1.0 - kinks[kinks > 0.5])
    return SplitGrid(left, right)


class PiecewiseHermite:
    """Cubic Hermite interpolant with separate one-sided slopes at every node.

    Interval i uses slope ``d_right[i]`` at its left end and ``d_left[i + 1]`` at its
    right end, so derivative jumps at nodes are represented exactly.
    """

    def __init__(self, x, y, d_right, d_left=None):
        self.x = np.asarray(x, dtype=float)
        self.y = np.asarray(y, dtype=float)
        self.d_right = np.asarray(d_right, dtype=float)
        self.d_left = self.d_right if d_left is None else np.asarray(d_left, dtype=float)
        self.h = np.diff(self.x)
        y0, y1 = self.y[:-1], self.y[1:]
        m0, m1 = self.d_right[:-1], self.d_left[1:]
        pieces = self.h * (y0 + y1) / 2 + self.h**2 * (m0 - m1) / 12
        self.cumulative = np.concatenate([[0.0], np.cumsum(pieces)])
        # summed from the right so that tails stay accurate when the mass sits on the left
        self.remaining = np.concatenate([np.cumsum(pieces[::-1])[::-1], [0.0]])

    @property
    def total(self) -> float:
        return float(self.cumulative[-1])

    def _locate(self, u):
        i = np.clip(np.searchsorted(self.x, u, side="right") - 1, 0, len(self.h) - 1)
        s = (u - self.x[i]) / self.h[i]
        return i, s

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        i, s = self._locate(u)
        h = self.h[i]
        s2, s3 = s * s, s * s * s
        return (
            (2 * s3 - 3 * s2 + 1) * self.y[i]
            + (s3 - 2 * s2 + s) * h * self.d_right[i]
            + (-2 * s3 + 3 * s2) * self.y[i + 1]
            + (s3 - s2) * h * self.d_left[i + 1]
        )

    def antiderivative(self, u):
        """Integral from x[0] to u."""
        u = np.asarray(u, dtype=float)
        i, s = self._locate(u)
        h = self.h[i]
        s2, s3, s4 = s * s, s**3, s**4
        part = h * (
            (s4 / 2 - s3 + s) * self.y[i]
            + h * (s4 / 4 - 2 * s3 / 3 + s2 / 2) * self.d_right[i]
            + (-s4 / 2 + s3) * self.y[i + 1]
            + h * (s4 / 4 - s3 / 3) * self.d_left[i + 1]
        )
        return self.cumulative[i] + part

    def tail(self, u):
        """Integral from u to x[-1], without subtracting from the total."""
        u = np.asarray(u, dtype=float)
        i, s = self._locate(u)
        h = self.h[i]
        # complements of the integrated basis functions on [s, 1]
        s2, s3, s4 = s * s, s**3, s**4
        part = h * (
            (0.5 - (s4 / 2 - s3 + s)) * self.y[i]
            + h * (1 / 12 - (s4 / 4 - 2 * s3 / 3 + s2 / 2)) * self.d_right[i]
            + (0.5 - (-s4 / 2 + s3)) * self.y[i + 1]
            + h * (-1 / 12 - (s4 / 4 - s3 / 3)) * self.d_left[i + 1]
        )
        return self.remaining[i + 1] + part
