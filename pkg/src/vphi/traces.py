"""Closed-form traces of V^2 and V^3, the Fourier-basis diagonal sum, and
cross-checks against spectral power sums."""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import HypothesisWarning, NonInvertibleError, ParameterError
from .fredholm import FredholmSeries
from .nystrom import NystromOperator
from .phi_map import MonotoneMap
from .quadrature import SplitGrid, split_grid
from .spectrum import Spectrum, partial_trace, power_sum


def _hypothesis_flags(phi: MonotoneMap) -> list[str]:
    flags = []
    if phi.lower != 0.0:
        flags.append("phi(0) != 0")
    if phi.flat_start() < 1.0:
        flags.append("phi is flat near 1")
    return flags


def _warn(flags: list[str], what: str) -> None:
    if flags:
        warnings.warn(f"{what}: identity assumes {', '.join(flags)} does not hold",
                      HypothesisWarning, stacklevel=3)


def _with_nodes(grid: SplitGrid, pts: np.ndarray) -> SplitGrid:
    pts = pts[(pts > 0) & (pts < 1)]
    return SplitGrid(np.union1d(grid.left, pts[pts <= 0.5]), np.union1d(grid.right, 1.0 - pts[pts > 0.5]))


def integral(phi: MonotoneMap, grid: int = 8192) -> float:
    """int_0^1 phi."""
    return split_grid(phi, grid).integrate(phi)


def trace_sq(phi: MonotoneMap, grid: int = 8192) -> float:
    """2 int phi - 1, the sum of squared eigenvalues for increasing maps with phi(0) = 0."""
    _warn(_hypothesis_flags(phi), "trace_sq")
    return 2.0 * integral(phi, grid) - 1.0


def _generalised_inverse(phi: MonotoneMap, y: np.ndarray) -> np.ndarray:
    lo, hi = phi.lower, phi.upper
    out = np.empty_like(y)
    below, above = y <= lo, y >= hi
    mid = ~(below | above)
    out[below] = 0.0
    out[above] = 1.0
    if np.any(mid):
        out[mid] = phi.inverse(y[mid])
    return out


def trace_cube(phi: MonotoneMap, grid: int = 8192) -> float:
    """1 - 3 int phi(t) phi^{-1}(t) dt.

    Raises
    ------
    NonInvertibleError
        The map has a flat part, so phi^{-1} is not defined.
    """
    flags = _hypothesis_flags(phi)
    if phi.flat_start() < 1.0:
        raise NonInvertibleError(f"{phi.describe()} is flat near 1; trace_cube needs phi^-1")
    _warn(flags, "trace_cube")
    g = split_grid(phi, grid)
    bp = phi.breakpoints()
    if bp.size:
        g = _with_nodes(g, np.asarray(phi(bp), dtype=float))
    return 1.0 - 3.0 * g.integrate(lambda t: phi(t) * _generalised_inverse(phi, t))


@dataclass(frozen=True)
class FourierTrace:
    """Partial sums s_M = int phi + sum_{n<=M} int sin(2 pi n (phi - x)) / (pi n), M = 0..modes."""

    partial_sums: np.ndarray
    under_resolved: bool

    @property
    def modes(self) -> int:
        return len(self.partial_sums) - 1

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["modes", "partial_sum"])
        for m, s in enumerate(self.partial_sums):
            w.writerow([m, repr(float(s))])
        return buf.getvalue()


def fourier_trace(phi: MonotoneMap, modes: int = 200, grid: int = 8192) -> FourierTrace:
    """Diagonal sums of the operator in the basis 1, sqrt 2 cos 2 pi n x, sqrt 2 sin 2 pi n x,
    grouped by frequency."""
    if int(modes) != modes or modes < 1:
        raise ParameterError("modes must be a positive integer")
    g = split_grid(phi, grid)
    cells = []
    for nodes, mirrored in ((g.left, False), (g.right, True)):
        a, b = nodes[:-1], nodes[1:]
        gx, gw = np.polynomial.legendre.leggauss(4)
        pts = (0.5 * (a + b))[:, None] + (0.5 * (b - a))[:, None] * gx[None, :]
        wts = (0.5 * (b - a))[:, None] * gw[None, :]
        t = 1.0 - pts if mirrored else pts
        cells.append((t.ravel(), wts.ravel()))
    t = np.concatenate([c[0] for c in cells])
    w = np.concatenate([c[1] for c in cells])
    vals = np.asarray(phi(t), dtype=float)
    gap = vals - t
    sums = np.empty(int(modes) + 1)
    sums[0] = float(w @ vals)
    for n in range(1, int(modes) + 1):
        sums[n] = sums[n - 1] + float(w @ np.sin(2 * np.pi * n * gap)) / (np.pi * n)
    return FourierTrace(sums, under_resolved=modes > grid / 16)


def determinant_power_sums(series: FredholmSeries, pmax: int = 3) -> list[float]:
    """Power sums p_1..p_pmax of the eigenvalues read off the determinant coefficients
    by Newton's identities, without locating any root."""
    e = series.a
    if pmax > series.order:
        raise ParameterError("need order >= pmax")
    p = [0.0] * (pmax + 1)
    for k in range(1, pmax + 1):
        acc = (-1) ** (k - 1) * k * e[k]
        for i in range(1, k):
            acc += (-1) ** (i - 1) * e[i] * p[k - i]
        p[k] = float(acc)
    return p[1:]


def nystrom_traces(op: NystromOperator, pmax: int = 3) -> list[float]:
    """tr K^p for p = 1..pmax of the discretised operator."""
    k = op.entries
    out = [float(np.trace(k))]
    power = k
    for _ in range(2, pmax + 1):
        out.append(float(np.sum(power * k.T)))
        power = power @ k
    return out


def power_tail(spectrum: Spectrum, p: int) -> float:
    """Geometric estimate of sum lam^p over eigenvalues beyond the retained ones."""
    vals = [(e.value.real, e.multiplicity) for e in spectrum.eigenvalues
            if e.value.imag == 0.0 and e.value.real > 0]
    if spectrum.regime == "finite" or len(vals) < 2:
        return 0.0
    (prev, _), (last, mult) = vals[-2], vals[-1]
    r = last / prev
    if not 0.0 < r < 1.0:
        return 0.0
    return float(mult * last**p * r**p / (1.0 - r**p))


def _jsonable(z):
    if z is None:
        return None
    if isinstance(z, complex):
        return {"re": z.real, "im": z.imag}
    return float(z)


@dataclass
class TraceReport:
    trace2_formula: float
    trace3_formula: float | None
    trace2_spectral: complex | float
    trace3_spectral: complex | float
    trace1_spectral: complex | float
    trace2_determinant: float | None = None
    trace3_determinant: float | None = None
    fourier_partial: list[float] = field(default_factory=list)
    fourier_under_resolved: bool = False
    discrepancies: dict[str, float] = field(default_factory=dict)
    budget: dict[str, float] = field(default_factory=dict)
    flags: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not any(f.startswith("exceeds") for f in self.flags)

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("trace2_spectral", "trace3_spectral", "trace1_spectral"):
            d[key] = _jsonable(getattr(self, key))
        d["ok"] = self.ok
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def cross_check(
    spectrum: Spectrum,
    phi: MonotoneMap,
    series: FredholmSeries | None = None,
    grid: int = 8192,
    modes: int = 64,
    tolerance: float = 1e-4,
) -> TraceReport:
    """Compare closed-form traces with spectral power sums.

    The budget for power p is ``tolerance`` plus the geometric estimate of the
    part of sum lam^p carried by eigenvalues beyond the retained ones; a
    discrepancy above it adds an ``exceeds:<name>`` flag.  A finite-regime
    spectrum is additionally checked against the sum rule sum lam = 1.
    """
    notes: list[str] = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", HypothesisWarning)
        t2 = trace_sq(phi, grid)
        try:
            t3 = trace_cube(phi, grid)
        except NonInvertibleError as exc:
            t3 = None
            notes.append(str(exc))
    notes.extend(str(w.message) for w in caught)

    s1 = partial_trace(spectrum, 1e-300) if len(spectrum) else 0.0
    s2 = power_sum(spectrum, 2)
    s3 = power_sum(spectrum, 3)
    report = TraceReport(t2, t3, s2, s3, s1, notes=notes)
    if series is not None and series.order >= 3:
        report.trace2_determinant, report.trace3_determinant = determinant_power_sums(series, 3)[1:]
    ft = fourier_trace(phi, modes, grid)
    report.fourier_partial = [float(v) for v in ft.partial_sums]
    report.fourier_under_resolved = ft.under_resolved

    checks = {"p2": (t2, s2, 2)}
    if t3 is not None:
        checks["p3"] = (t3, s3, 3)
    for name, (formula, spectral, p) in checks.items():
        disc = abs(formula - spectral)
        budget = tolerance + power_tail(spectrum, p)
        report.discrepancies[name] = float(disc)
        report.budget[name] = float(budget)
        if disc > budget:
            report.flags.append(f"exceeds:{name}")
    if spectrum.regime == "finite":
        disc = abs(s1 - 1.0)
        report.discrepancies["sum_rule"] = float(disc)
        report.budget["sum_rule"] = 1e-6
        if disc > 1e-6:
            report.flags.append("exceeds:sum_rule")
    if any(not math.isfinite(v) for v in report.discrepancies.values()):
        report.flags.append("non-finite discrepancy")
    return report
