"""Monotone maps phi: [0, 1] -> [0, 1] and their regime classification.

Every map is immutable after construction and evaluates vectorised over numpy
arrays.  Scalars in give floats out.
"""

from __future__ import annotations

import abc
import csv
import enum
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq, minimize_scalar

from .errors import (
    DataError,
    DegenerateFixedSetError,
    DomainError,
    MapSyntaxError,
    NonInvertibleError,
    ParameterError,
    RangeError,
)

# slack for comparing a value against the range [phi(0), phi(1)]
_RANGE_SLACK = 1e-14
# a preimage interval wider than this means the map is flat there
_FLAT_WIDTH = 1e-9
_ABOVE_MARGIN = 1e-12


def _as_output(x_in, out: np.ndarray):
    return float(np.reshape(out, -1)[0]) if np.ndim(x_in) == 0 else out


class MonotoneMap(abc.ABC):
    """A nondecreasing map of [0, 1] into itself."""

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        if np.any(~((arr >= 0.0) & (arr <= 1.0))):
            raise DomainError(f"argument outside [0, 1]: {x!r}")
        return _as_output(x, np.clip(self._eval(arr), 0.0, 1.0))

    eval = __call__

    @abc.abstractmethod
    def _eval(self, x: np.ndarray) -> np.ndarray:
        ...

    @abc.abstractmethod
    def describe(self) -> str:
        """Descriptor string; parseable by :func:`parse_map` for the basic kinds."""

    def derivative(self, x, side: str = "right"):
        """One-sided derivative.  Subclasses with closed forms override this."""
        arr = np.asarray(x, dtype=float)
        step = 1e-7
        if side == "right":
            lo = arr
            hi = np.minimum(arr + step, 1.0)
            lo = np.where(hi - lo < step / 2, hi - step, lo)
        else:
            hi = arr
            lo = np.maximum(arr - step, 0.0)
            hi = np.where(hi - lo < step / 2, lo + step, hi)
        return _as_output(x, (self._eval(hi) - self._eval(lo)) / (hi - lo))

    def breakpoints(self) -> np.ndarray:
        """Interior points where the derivative may jump."""
        return np.empty(0)

    def flat_start(self, tol: float = 1e-12) -> float:
        """Smallest x with phi(x) = 1 on all of [x, 1]; 1.0 when there is no flat part.

        The generic version bisects for phi(x) >= 1 - tol and then rejects
        plateaus narrower than 1e-8, which are indistinguishable from a map
        that merely approaches 1 at the right endpoint.
        """
        if self._eval(np.array([1.0]))[0] < 1.0 - tol:
            return 1.0
        lo, hi = 0.0, 1.0
        if self._eval(np.array([0.0]))[0] >= 1.0 - tol:
            return 0.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if self._eval(np.array([mid]))[0] >= 1.0 - tol:
                hi = mid
            else:
                lo = mid
            if hi - lo < 1e-15:
                break
        return hi if 1.0 - hi > 1e-8 else 1.0

    def gap_from_top(self, d):
        """1 - phi(1 - d), for quadrature nodes stored by their distance d to 1.

        Overridden where a closed form avoids the cancellation in 1 - phi."""
        arr = np.asarray(d, dtype=float)
        return 1.0 - np.clip(self._eval(1.0 - arr), 0.0, 1.0)

    def inverse(self, y):
        """Preimage of y on the strictly increasing part of the map."""
        arr = np.asarray(y, dtype=float)
        self._check_range(arr)
        return _as_output(y, self._inverse(np.clip(arr, self.lower, self.upper)))

    @property
    def lower(self) -> float:
        return float(self._eval(np.array([0.0]))[0])

    @property
    def upper(self) -> float:
        return float(self._eval(np.array([1.0]))[0])

    def _check_range(self, y: np.ndarray) -> None:
        if not np.all(np.isfinite(y)):
            raise RangeError("non-finite value passed to inverse")
        if np.any(y < self.lower - _RANGE_SLACK) or np.any(y > self.upper + _RANGE_SLACK):
            raise RangeError(
                f"value outside the range [{self.lower}, {self.upper}] of {self.describe()}"
            )

    def _inverse(self, y: np.ndarray) -> np.ndarray:
        # two vectorised bisections: inf{x: phi(x) >= y} and sup{x: phi(x) <= y}
        y = np.atleast_1d(y)
        lo = np.zeros_like(y)
        hi = np.ones_like(y)
        lo2 = np.zeros_like(y)
        hi2 = np.ones_like(y)
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            up = self._eval(mid) >= y
            hi = np.where(up, mid, hi)
            lo = np.where(up, lo, mid)
            mid2 = 0.5 * (lo2 + hi2)
            down = self._eval(mid2) <= y
            lo2 = np.where(down, mid2, lo2)
            hi2 = np.where(down, hi2, mid2)
        if np.any(lo2 - hi > _FLAT_WIDTH):
            bad = y[np.argmax(lo2 - hi)]
            raise NonInvertibleError(f"{self.describe()} is flat at y={bad!r}")
        return 0.5 * (hi + lo2)

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.describe()}>"


class Power(MonotoneMap):
    """phi(x) = x**alpha.  alpha in (0, 1] is the family studied here; alpha > 1
    gives maps below the diagonal, which are handy as segmentation test pieces."""

    def __init__(self, alpha: float):
        alpha = float(alpha)
        if not (alpha > 0 and math.isfinite(alpha)):
            raise ParameterError(f"power exponent must be positive, got {alpha!r}")
        self.alpha = alpha

    def _eval(self, x):
        return np.power(x, self.alpha)

    def derivative(self, x, side="right"):
        arr = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            d = self.alpha * np.power(arr, self.alpha - 1.0)
        return _as_output(x, d)

    def _inverse(self, y):
        return np.power(y, 1.0 / self.alpha)

    def gap_from_top(self, d):
        return -np.expm1(self.alpha * np.log1p(-np.asarray(d, dtype=float)))

    def flat_start(self, tol=1e-12):
        return 1.0

    def describe(self):
        return f"power:alpha={self.alpha!r}"


def _validate_table(points, *, name: str) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 2:
        raise DataError(f"{name} needs at least two (x, y) pairs")
    xs, ys = arr[:, 0].copy(), arr[:, 1].copy()
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
        raise DataError(f"{name} contains non-finite values")
    if xs[0] != 0.0 or xs[-1] != 1.0:
        raise DataError(f"{name} must span x from 0 to 1")
    if np.any(np.diff(xs) <= 0):
        raise DataError(f"{name} x values must be strictly increasing")
    if np.any(np.diff(ys) < 0):
        raise DataError(f"{name} y values must be nondecreasing")
    if ys[0] < 0.0 or ys[-1] > 1.0:
        raise DataError(f"{name} y values must lie in [0, 1]")
    return xs, ys


class PiecewiseLinear(MonotoneMap):
    """Linear interpolation between knots (x_i, y_i); exact at the knots."""

    def __init__(self, knots: Sequence[tuple[float, float]]):
        self.xs, self.ys = _validate_table(knots, name="piecewise-linear map")
        self._slopes = np.diff(self.ys) / np.diff(self.xs)

    def _eval(self, x):
        return np.interp(x, self.xs, self.ys)

    def derivative(self, x, side="right"):
        arr = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.xs, arr, side="right" if side == "right" else "left") - 1
        idx = np.clip(idx, 0, len(self._slopes) - 1)
        return _as_output(x, self._slopes[idx])

    def gap_from_top(self, d):
        return np.interp(np.asarray(d, dtype=float), 1.0 - self.xs[::-1], 1.0 - self.ys[::-1])

    def breakpoints(self):
        return self.xs[1:-1].copy()

    def flat_start(self, tol=1e-12):
        hits = np.nonzero(self.ys >= 1.0 - tol)[0]
        return float(self.xs[hits[0]]) if hits.size else 1.0

    def _inverse(self, y):
        y = np.atleast_1d(y)
        lo = np.searchsorted(self.ys, y, side="left")
        hi = np.searchsorted(self.ys, y, side="right")
        if np.any(hi - lo >= 2):
            bad = y[np.argmax(hi - lo)]
            raise NonInvertibleError(f"{self.describe()} is flat at y={bad!r}")
        return np.interp(y, self.ys, self.xs)

    def describe(self):
        return "pwl:" + ";".join(f"{float(x)!r},{float(y)!r}" for x, y in zip(self.xs, self.ys))


class SampledTable(MonotoneMap):
    """Monotone piecewise-cubic (PCHIP) interpolation of tabulated samples."""

    def __init__(self, samples: Sequence[tuple[float, float]], source: str | None = None):
        self.xs, self.ys = _validate_table(samples, name="sampled table")
        self.source = source
        # flat stretches give zero secants, which the slope formula divides by harmlessly
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            self._interp = PchipInterpolator(self.xs, self.ys, extrapolate=False)
            # the construction is symmetric under x -> 1 - x, y -> 1 - y; interpolating the
            # reflected samples gives 1 - phi near x = 1 without cancellation
            self._top = PchipInterpolator(1.0 - self.xs[::-1], 1.0 - self.ys[::-1],
                                          extrapolate=False)
        self._deriv = self._interp.derivative()

    @classmethod
    def from_csv(cls, path) -> "SampledTable":
        rows = []
        with open(path, newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh)):
                if not row or all(not cell.strip() for cell in row):
                    continue
                try:
                    rows.append((float(row[0]), float(row[1])))
                except (ValueError, IndexError):
                    if lineno == 0 and not rows:
                        continue  # header
                    raise DataError(f"{path}:{lineno + 1}: expected 'x,y'")
        return cls(rows, source=str(path))

    def _eval(self, x):
        return self._interp(x)

    def derivative(self, x, side="right"):
        return _as_output(x, self._deriv(np.asarray(x, dtype=float)))

    def gap_from_top(self, d):
        return np.clip(self._top(np.asarray(d, dtype=float)), 0.0, 1.0)

    def breakpoints(self):
        return self.xs[1:-1].copy()

    def flat_start(self, tol=1e-12):
        low = np.nonzero(self.ys < 1.0 - tol)[0]
        if low.size == 0:
            return 0.0
        last = low[-1]
        return float(self.xs[last + 1]) if last + 1 < len(self.xs) else 1.0

    def describe(self):
        if self.source:
            return f"table:{self.source}"
        return "table:" + ";".join(f"{float(x)!r},{float(y)!r}" for x, y in zip(self.xs, self.ys))


class Rescaled(MonotoneMap):
    """Restriction of ``base`` to [a, b] carried back to [0, 1] by the affine change
    x -> a + x (b - a).  Meaningful when a and b are fixed points of ``base``."""

    def __init__(self, base: MonotoneMap, a: float, b: float):
        if not (0.0 <= a < b <= 1.0):
            raise ParameterError(f"need 0 <= a < b <= 1, got a={a}, b={b}")
        self.base, self.a, self.b = base, float(a), float(b)
        self.scale = self.b - self.a

    def _eval(self, x):
        y = np.clip(self.a + x * self.scale, 0.0, 1.0)
        return (self.base._eval(y) - self.a) / self.scale

    def derivative(self, x, side="right"):
        arr = np.asarray(x, dtype=float)
        y = np.clip(self.a + arr * self.scale, 0.0, 1.0)
        return _as_output(x, np.asarray(self.base.derivative(y, side), dtype=float))

    def breakpoints(self):
        bp = self.base.breakpoints()
        bp = bp[(bp > self.a) & (bp < self.b)]
        return (bp - self.a) / self.scale

    def flat_start(self, tol=1e-12):
        if self.b < 1.0:
            return super().flat_start(tol)
        fs = self.base.flat_start(tol)
        return float(min(max((fs - self.a) / self.scale, 0.0), 1.0))

    def gap_from_top(self, d):
        if self.b < 1.0:
            return super().gap_from_top(d)
        return self.base.gap_from_top(np.asarray(d, dtype=float) * self.scale) / self.scale

    def describe(self):
        return f"rescaled({self.base.describe()},{self.a!r},{self.b!r})"


class Glued(MonotoneMap):
    """Map assembled from pieces (a, b, sub) with phi(x) = a + (b - a) sub((x - a)/(b - a))
    on [a, b].  Each interval endpoint becomes a fixed point; this is the inverse of
    splitting a map at its fixed points."""

    def __init__(self, pieces: Sequence[tuple[float, float, MonotoneMap]]):
        if not pieces:
            raise ParameterError("need at least one piece")
        self.pieces = [(float(a), float(b), sub) for a, b, sub in pieces]
        edges = [self.pieces[0][0]]
        for a, b, _ in self.pieces:
            if a != edges[-1] or not b > a:
                raise ParameterError("pieces must tile [0, 1] in order")
            edges.append(b)
        if edges[0] != 0.0 or edges[-1] != 1.0:
            raise ParameterError("pieces must tile [0, 1]")
        self.edges = np.array(edges)

    def _locate(self, x, side):
        idx = np.searchsorted(self.edges, x, side="right" if side == "right" else "left") - 1
        return np.clip(idx, 0, len(self.pieces) - 1)

    def _eval(self, x):
        idx = self._locate(x, "right")
        out = np.empty_like(x, dtype=float)
        for i, (a, b, sub) in enumerate(self.pieces):
            m = idx == i
            if np.any(m):
                s = np.clip((x[m] - a) / (b - a), 0.0, 1.0)
                out[m] = a + (b - a) * sub._eval(s)
        return out

    def derivative(self, x, side="right"):
        arr = np.atleast_1d(np.asarray(x, dtype=float))
        idx = self._locate(arr, side)
        out = np.empty_like(arr)
        for i, (a, b, sub) in enumerate(self.pieces):
            m = idx == i
            if np.any(m):
                s = np.clip((arr[m] - a) / (b - a), 0.0, 1.0)
                out[m] = sub.derivative(s, side)
        return _as_output(x, out.reshape(np.shape(x)))

    def breakpoints(self):
        pts = [self.edges[1:-1]]
        for a, b, sub in self.pieces:
            pts.append(a + (b - a) * sub.breakpoints())
        return np.unique(np.concatenate(pts))

    def flat_start(self, tol=1e-12):
        a, b, sub = self.pieces[-1]
        fs = sub.flat_start(tol)
        return 1.0 if fs >= 1.0 else a + (b - a) * fs

    def gap_from_top(self, d):
        arr = np.asarray(d, dtype=float)
        a, b, sub = self.pieces[-1]
        out = np.asarray(super().gap_from_top(arr), dtype=float)
        m = arr <= b - a
        if np.any(m):
            out = np.where(m, (b - a) * sub.gap_from_top(np.where(m, arr, 0.0) / (b - a)), out)
        return out

    def describe(self):
        inner =",".join(f"[{a!r},{b!r}]{sub.describe()}" for a, b, sub in self.pieces)
        return f"glued({inner})"


class FunctionMap(MonotoneMap):
    """Wraps a vectorised callable.  Monotonicity is the caller's responsibility."""

    def __init__(
        self,
        func: Callable[[np.ndarray], np.ndarray],
        derivative: Callable[[np.ndarray], np.ndarray] | None = None,
        label: str = "function",
        breakpoints: Sequence[float] = (),
    ):
        self.func = func
        self._derivative = derivative
        self.label = label
        self._breakpoints = np.asarray(breakpoints, dtype=float)

    def _eval(self, x):
        return np.asarray(self.func(x), dtype=float) * np.ones_like(x)

    def derivative(self, x, side="right"):
        if self._derivative is None:
            return super().derivative(x, side)
        arr = np.asarray(x, dtype=float)
        return _as_output(x, np.asarray(self._derivative(arr), dtype=float) * np.ones_like(arr))

    def breakpoints(self):
        return self._breakpoints.copy()

    def describe(self):
        return self.label


def identity_map() -> PiecewiseLinear:
    return PiecewiseLinear([(0.0, 0.0), (1.0, 1.0)])


def constant_one_map() -> PiecewiseLinear:
    return PiecewiseLinear([(0.0, 1.0), (1.0, 1.0)])


def _parse_number(text: str, where: str) -> float:
    try:
        value = float(text.strip())
    except ValueError:
        raise MapSyntaxError(f"not a decimal literal in {where}: {text!r}") from None
    if not math.isfinite(value):
        raise MapSyntaxError(f"non-finite literal in {where}: {text!r}")
    return value


def parse_map(text: str) -> MonotoneMap:
    """Parse the map mini-language.

    ``power:alpha=0.5``, ``pwl:0,0.5;0.5,1;1,1`` or ``table:path.csv``.
    """
    text = text.strip()
    kind, sep, body = text.partition(":")
    if not sep:
        raise MapSyntaxError(f"expected '<kind>:<body>', got {text!r}")
    kind = kind.strip().lower()
    body = body.strip()
    try:
        if kind == "power":
            key, eq, value = body.partition("=")
            if key.strip() != "alpha" or not eq:
                raise MapSyntaxError(f"expected 'power:alpha=<value>', got {text!r}")
            return Power(_parse_number(value, text))
        if kind == "pwl":
            knots = []
            for chunk in body.split(";"):
                parts = chunk.split(",")
                if len(parts) != 2:
                    raise MapSyntaxError(f"knot {chunk!r} is not 'x,y'")
                knots.append((_parse_number(parts[0], text), _parse_number(parts[1], text)))
            return PiecewiseLinear(knots)
        if kind == "table":
            if not body:
                raise MapSyntaxError("table descriptor needs a path")
            path = Path(body)
            if not path.exists():
                raise MapSyntaxError(f"table file not found: {body}")
            return SampledTable.from_csv(path)
    except (DataError, ParameterError) as exc:
        raise MapSyntaxError(str(exc)) from exc
    raise MapSyntaxError(f"unknown map kind {kind!r}")


def iterate(phi: MonotoneMap, n: int, x):
    """phi applied n times."""
    if n < 1:
        raise ParameterError("iterate count must be a positive integer")
    value = phi(x)
    for _ in range(n - 1):
        value = phi(value)
    return value


def _probe_grid(phi: MonotoneMap, grid: int) -> np.ndarray:
    xs = np.linspace(0.0, 1.0, grid + 1)
    bp = phi.breakpoints()
    return np.unique(np.concatenate([xs, bp[(bp > 0) & (bp < 1)]]))


def fixed_points(phi: MonotoneMap, tol: float = 1e-10, grid: int = 4096) -> list[float]:
    """Interior points where phi(x) = x, ascending.

    Sign changes of phi(x) - x on the grid are bisected to ``tol``.  Grid nodes with
    |phi(x) - x| <= tol are reported directly, and local minima of |phi(x) - x| that do
    not cross are refined and reported when they come within sqrt(tol) of zero
    (a square-root type touch cannot get closer in double precision).
    """
    if not tol > 0:
        raise ParameterError("tol must be positive")
    xs = _probe_grid(phi, grid)
    g = phi(xs) - xs
    zero = np.abs(g) <= tol
    n = len(xs)

    run = 0
    for i in range(1, n - 1):
        run = run + 1 if zero[i] else 0
        if run >= 3:
            raise DegenerateFixedSetError(
                f"{phi.describe()} coincides with the diagonal near x={xs[i]:.6g}"
            )

    def gap(x):
        return float(phi(min(max(x, 0.0), 1.0))) - x

    found: list[float] = []
    i = 1
    while i < n - 1:
        if zero[i]:
            j = i
            while j + 1 < n - 1 and zero[j + 1]:
                j += 1
            found.append(float(np.mean(xs[i : j + 1])))
            i = j + 1
            continue
        i += 1
    for i in range(n - 1):
        if zero[i] or zero[i + 1]:
            continue
        if g[i] * g[i + 1] < 0:
            root = brentq(gap, xs[i], xs[i + 1], xtol=tol, rtol=4 * np.finfo(float).eps)
            if 0.0 < root < 1.0:
                found.append(float(root))
    touch_tol = math.sqrt(tol)
    a = np.abs(g)
    for i in range(1, n - 1):
        if zero[i] or zero[i - 1] or zero[i + 1]:
            continue
        if not (a[i] <= a[i - 1] and a[i] <= a[i + 1]):
            continue
        if g[i - 1] * g[i] < 0 or g[i] * g[i + 1] < 0:
            continue
        res = minimize_scalar(
            lambda x: abs(gap(x)), bounds=(xs[i - 1], xs[i + 1]), method="bounded",
            options={"xatol": 1e-14},
        )
        if res.fun <= touch_tol and 0.0 < res.x < 1.0:
            found.append(float(res.x))

    found.sort()
    merged: list[float] = []
    for x in found:
        if merged and x - merged[-1] <= max(10 * tol, 1e-9):
            continue
        merged.append(x)
    return merged


class Regime(str, enum.Enum):
    FINITE = "finite"
    INFINITE = "infinite"
    QUASINILPOTENT = "quasinilpotent"
    MIXED = "mixed"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class MapClassification:
    phi_at_zero: float
    right_flat_epsilon: float | None
    strictly_above_diagonal: bool
    fixed_points: tuple[float, ...]
    iterate_count_N: int | None
    regime: Regime
    segment_count: int = 1
    indeterminate: bool = False
    note: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        d["regime"] = self.regime.value
        d["fixed_points"] = list(self.fixed_points)
        return d


def classify(
    phi: MonotoneMap, tol: float = 1e-10, grid: int = 4096, max_iterations: int = 64
) -> MapClassification:
    """Decide which spectral regime the operator with this map falls into."""
    if not tol > 0:
        raise ParameterError("tol must be positive")
    xs = _probe_grid(phi, grid)
    vals = phi(xs)
    g = vals - xs
    phi0 = float(vals[0])
    fs = phi.flat_start(tol)
    eps = 1.0 - fs if fs < 1.0 else None
    above = bool(np.all(g[1:-1] > _ABOVE_MARGIN))
    common = dict(phi_at_zero=phi0, right_flat_epsilon=eps, strictly_above_diagonal=above)

    if np.all(g <= tol):
        return MapClassification(
            **common, fixed_points=(), iterate_count_N=None, regime=Regime.QUASINILPOTENT,
            note="phi(x) <= x on the probe grid",
        )

    if above:
        if phi0 > tol and eps is not None:
            v = 0.0
            for n in range(1, max_iterations + 1):
                v = float(phi(v))
                if v >= 1.0 - tol:
                    return MapClassification(
                        **common, fixed_points=(), iterate_count_N=n, regime=Regime.FINITE
                    )
            return MapClassification(
                **common, fixed_points=(), iterate_count_N=None, regime=Regime.INDETERMINATE,
                indeterminate=True,
                note=f"phi^n(0) did not reach 1 within {max_iterations} iterations",
            )
        return MapClassification(
            **common, fixed_points=(), iterate_count_N=None, regime=Regime.INFINITE
        )

    try:
        fps = fixed_points(phi, tol=tol, grid=grid)
    except DegenerateFixedSetError as exc:
        return MapClassification(
            **common, fixed_points=(), iterate_count_N=None, regime=Regime.INDETERMINATE,
            indeterminate=True, note=str(exc),
        )
    if fps:
        return MapClassification(
            **common, fixed_points=tuple(fps), iterate_count_N=None, regime=Regime.MIXED,
            segment_count=len(fps) + 1,
        )
    return MapClassification(
        **common, fixed_points=(), iterate_count_N=None, regime=Regime.INDETERMINATE,
        indeterminate=True, note="map approaches the diagonal without a resolvable fixed point",
    )
