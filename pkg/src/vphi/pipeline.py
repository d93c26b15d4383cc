"""classify -> coefficients -> spectrum, with order growth and automatic segmentation."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConvergenceError
from .fredholm import FredholmSeries, coefficients
from .phi_map import MapClassification, MonotoneMap, Regime, classify
from .segmentation import segment, spectrum_union
from .spectrum import Spectrum, eigenvalues


@dataclass
class Analysis:
    classification: MapClassification
    spectrum: Spectrum
    series: FredholmSeries | None
    history: list[tuple[int, int]] = field(default_factory=list)  # (order, retained count)
    segment_spectra: list[Spectrum] = field(default_factory=list)


def _spectrum_at(phi, order, grid, regime, opts):
    series = coefficients(phi, order, grid)
    return series, eigenvalues(series, regime=regime, **opts)


def analyze(
    phi: MonotoneMap,
    order: int = 24,
    grid: int = 8192,
    adaptive: bool = False,
    max_order: int = 64,
    step: int = 8,
    tol: float = 1e-10,
    **opts,
) -> Analysis:
    """Spectrum of the operator for ``phi``.

    With ``adaptive`` the truncation order grows by ``step`` until the number of
    retained eigenvalues stops increasing (or ``max_order`` is reached).  The grid
    stays fixed: past the default grid the retained count is limited by the
    conditioning of the monomial determinant, not by quadrature.

    Maps with interior fixed points go through segmentation.
    """
    info = classify(phi, tol=tol)
    if info.regime == Regime.MIXED:
        merged, parts = spectrum_union(segment(phi, tol=tol), order, grid, **opts)
        return Analysis(info, merged, None, [(order, merged.count)], parts)

    if info.regime == Regime.QUASINILPOTENT:
        series = coefficients(phi, order, grid)
        spec = eigenvalues(series, regime=Regime.QUASINILPOTENT, **opts)
        return Analysis(info, spec, series, [(order, spec.count)])

    regime = info.regime if info.regime in (Regime.FINITE, Regime.INFINITE) else None
    history: list[tuple[int, int]] = []
    best: tuple[FredholmSeries, Spectrum] | None = None
    failure: ConvergenceError | None = None
    current = order
    while True:
        try:
            series, spec = _spectrum_at(phi, current, grid, regime, opts)
            history.append((current, spec.count))
            if best is not None and spec.count <= best[1].count:
                break
            best = (series, spec)
        except ConvergenceError as exc:
            history.append((current, 0))
            failure = exc
        if not adaptive or regime == Regime.FINITE or current + step > max_order:
            break
        current += step
    if best is None:
        raise failure if failure is not None else ConvergenceError("no spectrum computed")
    return Analysis(info, best[1], best[0], history)
