"""Truncated Fredholm determinant coefficients of f -> int_0^{phi(x)} f.

The n-th coefficient is the volume of the nested region
0 <= t_1, phi(t_i) <= t_{i+1}, t_n <= 1, obtained from the recursion

    h_0 = 1,   h_k(t) = int_{phi(t)}^1 w h_{k-1},   A_n = int_0^1 w h_{n-1},

with w = 1 for the plain operator.  Each h_k is carried as a cubic Hermite
interpolant (values plus one-sided slopes) on a split, doubly graded grid.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DataError, ParameterError
from .phi_map import MonotoneMap
from .quadrature import PiecewiseHermite, SplitGrid, kink_points, split_grid

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class FredholmSeries:
    """Coefficients A_0..A_M (A_0 = 1) with per-coefficient error estimates.

    The determinant is 1 + sum (-1)^n A_n lam^n; signs are applied on evaluation.
    """

    coefficients: tuple[float, ...]
    errors: tuple[float, ...]
    grid_size: int
    # coefficients from the half-size grid, kept so root movement under grid
    # refinement can be measured directly
    coarse: tuple[float, ...] | None = None

    def __post_init__(self):
        if len(self.coefficients) != len(self.errors):
            raise ParameterError("coefficients and errors differ in length")
        if self.coarse is not None and len(self.coarse) != len(self.coefficients):
            raise ParameterError("coarse coefficients differ in length")
        if len(self.coefficients) < 2:
            raise ParameterError("series needs at least A_0 and A_1")

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    @property
    def a(self) -> np.ndarray:
        return np.array(self.coefficients)

    @property
    def err(self) -> np.ndarray:
        return np.array(self.errors)

    def signed(self, coarse: bool = False) -> np.ndarray:
        """Power-series coefficients of D in ascending order."""
        n = np.arange(self.order + 1)
        a = np.array(self.coarse) if coarse else self.a
        return np.where(n % 2 == 0, 1.0, -1.0) * a

    def truncated(self, order: int) -> "FredholmSeries":
        if not 1 <= order <= self.order:
            raise ParameterError(f"cannot truncate order {self.order} series to {order}")
        coarse = None if self.coarse is None else self.coarse[: order + 1]
        return FredholmSeries(
            self.coefficients[: order + 1], self.errors[: order + 1], self.grid_size, coarse
        )

    def to_dict(self) -> dict:
        d = {
            "order": self.order,
            "grid": self.grid_size,
            "coefficients": list(self.coefficients),
            "errors": list(self.errors),
        }
        if self.coarse is not None:
            d["coarse_coefficients"] = list(self.coarse)
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "FredholmSeries":
        coarse = d.get("coarse_coefficients")
        series = cls(
            tuple(map(float, d["coefficients"])),
            tuple(map(float, d["errors"])),
            int(d["grid"]),
            None if coarse is None else tuple(map(float, coarse)),
        )
        if series.order != int(d["order"]):
            raise DataError("order does not match the number of coefficients")
        return series


def _check(order: int, grid: int) -> None:
    if int(order) != order or order < 1:
        raise ParameterError(f"order must be a positive integer, got {order!r}")
    if int(grid) != grid or grid < 64:
        raise ParameterError(f"grid must be an integer >= 64, got {grid!r}")


def _fill_slopes(slope: np.ndarray, x: np.ndarray, y: np.ndarray, side: str) -> np.ndarray:
    # infinite map slopes (e.g. x**alpha at 0) are replaced by the one-sided secant
    bad = ~np.isfinite(slope)
    if not np.any(bad):
        return slope
    slope = slope.copy()
    idx = np.nonzero(bad)[0]
    n = len(x)
    for i in idx:
        j = i + 1 if (side == "right" and i + 1 < n) or i == 0 else i - 1
        slope[i] = (y[j] - y[i]) / (x[j] - x[i])
    return slope


class _Half:
    """Nodes of one half of the split grid plus the map data the recursion needs there."""

    def __init__(self, phi: MonotoneMap, nodes: np.ndarray, mirrored: bool, weight):
        self.x = nodes
        self.mirrored = mirrored
        t = 1.0 - nodes if mirrored else nodes
        if mirrored:
            gap = np.asarray(phi.gap_from_top(nodes), dtype=float)
            self.u = 1.0 - gap
            self.c = gap
        else:
            self.u = np.asarray(phi(t), dtype=float)
            self.c = 1.0 - self.u
        # one-sided slopes of phi in t; in d = 1 - t the sides swap
        self.dphi_r = np.asarray(phi.derivative(t, "right"), dtype=float)
        self.dphi_l = np.asarray(phi.derivative(t, "left"), dtype=float)
        if weight is None:
            self.w = None
        else:
            w = np.asarray(weight(t), dtype=float) * np.ones_like(t)
            if not np.all(np.isfinite(w)):
                raise DataError("weight has non-finite samples on the grid")
            self.w = w
            self.dw = np.gradient(w, nodes)

    def integrand(self, h, s_right, s_left):
        """Values and slopes (in this half's own coordinate) of w h."""
        if self.w is None:
            return h, s_right, s_left
        return self.w * h, self.dw * h + self.w * s_right, self.dw * h + self.w * s_left


def _recursion(phi: MonotoneMap, weight, order: int, grid: SplitGrid):
    left = _Half(phi, grid.left, False, weight)
    right = _Half(phi, grid.right, True, weight)
    halves = (left, right)
    state = [(np.ones_like(hf.x), np.zeros_like(hf.x), np.zeros_like(hf.x)) for hf in halves]
    coeffs = [1.0]
    floors = [0.0]
    for _ in range(order):
        splines = []
        peak = 0.0
        for hf, (h, sr, sl) in zip(halves, state):
            g, gr, gl = hf.integrand(h, sr, sl)
            peak = max(peak, float(np.max(np.abs(g))))
            splines.append(PiecewiseHermite(hf.x, g, gr, gl))
        L, R = splines
        mass_l, mass_r = L.total, R.total
        coeffs.append(mass_l + mass_r)
        # summation rounding over the grid grows roughly like the square root of its size
        floors.append(max(16.0, 4.0 * math.sqrt(grid.size)) * _EPS * peak)

        new_state = []
        for hf in halves:
            lower = hf.u < 0.5
            tail = np.empty_like(hf.u)
            g_at = np.empty_like(hf.u)
            tail[lower] = L.tail(hf.u[lower]) + mass_r
            g_at[lower] = L(hf.u[lower])
            upper = ~lower
            tail[upper] = R.antiderivative(hf.c[upper])
            g_at[upper] = R(hf.c[upper])
            # slopes of h_new in t are -g(phi(t)) phi'(t); mirrored halves use d = 1 - t
            sign = 1.0 if hf.mirrored else -1.0
            with np.errstate(invalid="ignore"):
                s_right = sign * g_at * (hf.dphi_l if hf.mirrored else hf.dphi_r)
                s_left = sign * g_at * (hf.dphi_r if hf.mirrored else hf.dphi_l)
            s_right = np.where(g_at == 0.0, 0.0, s_right)
            s_left = np.where(g_at == 0.0, 0.0, s_left)
            s_right = _fill_slopes(s_right, hf.x, tail, "right")
            s_left = _fill_slopes(s_left, hf.x, tail, "left")
            new_state.append((tail, s_right, s_left))
        state = new_state
    return np.array(coeffs), np.array(floors)


def _series(phi, weight, order, grid) -> FredholmSeries:
    _check(order, grid)
    kinks = kink_points(phi)
    fine, floor = _recursion(phi, weight, order, split_grid(phi, grid, kinks=kinks))
    coarse, _ = _recursion(phi, weight, order,
                           split_grid(phi, grid // 2, floor_scale=100.0, kinks=kinks))
    coarser, _ = _recursion(phi, weight, order,
                            split_grid(phi, grid // 4, floor_scale=1e4, kinks=kinks))
    # one halving difference can be small by accident before the asymptotic rate sets in
    # (fixed points, clustered kinks); the previous halving guards against that
    step = np.maximum(np.abs(fine - coarse), np.abs(coarse - coarser))
    err = np.maximum(step, np.maximum(floor, 8 * _EPS * np.abs(fine)))
    # a negative coefficient is pure error: widen its interval to reach zero
    err = np.where(fine < 0, np.maximum(err, -fine), err)
    err[0] = 0.0
    fine[0] = coarse[0] = 1.0
    return FredholmSeries(
        tuple(map(float, fine)), tuple(map(float, err)), int(grid), tuple(map(float, coarse))
    )


def coefficients(phi: MonotoneMap, order: int = 24, grid: int = 8192) -> FredholmSeries:
    """Determinant coefficients A_0..A_order with grid-halving error estimates.

    Parameters
    ----------
    phi : MonotoneMap
    order : int
        Truncation order M >= 1.
    grid : int
        Nominal number of quadrature nodes G >= 64.  The error of A_n is the larger
        of |A_n(G) - A_n(G/2)| and |A_n(G/2) - A_n(G/4)|, floored at the rounding level.

    Examples
    --------
    >>> from vphi.phi_map import Power
    >>> round(coefficients(Power(0.5), order=2, grid=1024).coefficients[2], 8)
    0.33333333
    """
    return _series(phi, None, order, grid)


def weighted_coefficients(
    phi: MonotoneMap, weight: Callable[[np.ndarray], np.ndarray], order: int = 24, grid: int = 8192
) -> FredholmSeries:
    """Coefficients for the kernel weighted by the product q(t) w(t).

    ``weight`` is the product, sampled on the quadrature nodes; its slope comes
    from finite differences of the samples.
    """
    if not callable(weight):
        raise DataError("weight must be a vectorised callable on [0, 1]")
    return _series(phi, weight, order, grid)


def det_eval(series: FredholmSeries, lam):
    """D(lam) = 1 + sum_{n=1}^M (-1)^n A_n lam^n by Horner's rule."""
    c = series.signed()
    lam = np.asarray(lam, dtype=complex)
    acc = np.zeros_like(lam) + c[-1]
    for coef in c[-2::-1]:
        acc = acc * lam + coef
    if acc.ndim == 0:
        acc = complex(acc)
        return acc.real if acc.imag == 0 else acc
    return acc


@dataclass(frozen=True)
class DecayReport:
    """Fit of log(A_n n!) ~ log C + n log(ratio) + curvature n^2 over resolved coefficients."""

    ratio: float | None
    log_constant: float | None
    curvature: float | None
    super_exponential: bool
    non_decay: bool
    cutoff: int | None
    signal_count: int
    insufficient_signal: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def decay_diagnostic(series: FredholmSeries) -> DecayReport:
    """Empirical decay of the coefficients.

    ``cutoff`` is the last index with a resolved coefficient when every later one
    is below its error (a polynomial determinant); otherwise None.
    """
    if series.order < 4:
        raise ParameterError("decay diagnostic needs order >= 4")
    a, err = series.a, series.err
    resolved = np.abs(a) > err
    resolved[0] = True
    n = np.nonzero(resolved[1:])[0] + 1
    last = int(n.max()) if n.size else 0
    cutoff = last if last < series.order else None
    if n.size < 2:
        return DecayReport(None, None, None, False, False, cutoff, int(n.size), True)
    logs = np.log(a[n]) + np.array([math.lgamma(k + 1) for k in n])
    slope, intercept = np.polyfit(n, logs, 1)
    curvature = float(np.polyfit(n, logs, 2)[0]) if n.size >= 3 else 0.0
    span = float(n.max() - n.min())
    super_exp = n.size >= 3 and curvature * span**2 < -1.0
    non_decay = bool(a[n[-1]] >= a[n[-2]])
    return DecayReport(
        ratio=float(math.exp(slope)),
        log_constant=float(intercept),
        curvature=curvature,
        super_exponential=bool(super_exp),
        non_decay=non_decay,
        cutoff=cutoff,
        signal_count=int(n.size),
        insufficient_signal=False,
    )
