"""Splitting a map at its interior fixed points.

Between consecutive fixed points a < b the map sends [a, b] into itself, so the
operator decouples into pieces.  Each piece is carried back to [0, 1] by the
affine change x -> a + x (b - a); its eigenvalues are those of the rescaled map
multiplied by b - a.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import StraddleError
from .fredholm import coefficients
from .phi_map import MonotoneMap, Regime, Rescaled, classify, fixed_points
from .spectrum import EigenvalueEstimate, Spectrum, eigenvalues, partial_trace

_SAMPLES = 1024
_MARGIN = 1e-10


@dataclass(frozen=True)
class Segment:
    interval: tuple[float, float]
    rescaled_map: MonotoneMap
    scale: float
    above_diagonal: bool

    def to_dict(self) -> dict:
        return {
            "interval": list(self.interval),
            "scale": self.scale,
            "above_diagonal": self.above_diagonal,
            "map": self.rescaled_map.describe(),
        }


def _side(phi: MonotoneMap) -> bool:
    s = (np.arange(_SAMPLES) + 0.5) / _SAMPLES
    g = phi(s) - s
    up, down = bool(np.any(g > _MARGIN)), bool(np.any(g < -_MARGIN))
    if up and down:
        raise StraddleError(
            f"{phi.describe()} crosses the diagonal inside a segment; "
            "a fixed point was missed (refine the fixed-point grid)"
        )
    return up


def segment(phi: MonotoneMap, tol: float = 1e-10, grid: int = 4096) -> list[Segment]:
    """Segments between consecutive interior fixed points, in ascending order.

    A map without interior fixed points yields one segment holding the map itself.
    DegenerateFixedSetError from the fixed-point search propagates.
    """
    edges = [0.0, *fixed_points(phi, tol=tol, grid=grid), 1.0]
    out = []
    for a, b in zip(edges[:-1], edges[1:]):
        sub = phi if (a == 0.0 and b == 1.0) else Rescaled(phi, a, b)
        out.append(Segment((a, b), sub, b - a, _side(sub)))
    return out


def _segment_spectrum(seg: Segment, order: int, grid: int, **opts) -> Spectrum:
    regime = classify(seg.rescaled_map).regime
    if regime not in (Regime.FINITE, Regime.INFINITE):
        regime = None
    return eigenvalues(coefficients(seg.rescaled_map, order, grid), regime=regime, **opts)


def spectrum_union(
    segments: list[Segment], order: int = 24, grid: int = 8192, merge: float = 1e-6, **opts
) -> tuple[Spectrum, list[Spectrum]]:
    """Global spectrum assembled from the segments.

    Returns the merged spectrum and the per-segment spectra (already multiplied by
    the segment scales; empty for segments below the diagonal).  Values from
    different segments within relative ``merge`` are combined and their
    multiplicities added.
    """
    parts: list[Spectrum] = []
    pool: list[EigenvalueEstimate] = []
    for seg in segments:
        if not seg.above_diagonal:
            parts.append(Spectrum((), Regime.QUASINILPOTENT.value, order, grid))
            continue
        local = _segment_spectrum(seg, order, grid, **opts)
        scaled = tuple(
            EigenvalueEstimate(
                complex(e.value) * seg.scale, e.multiplicity, e.residual, e.stability,
                e.sensitivity, e.unconfirmed,
            )
            for e in local.eigenvalues
        )
        part = Spectrum(scaled, local.regime, order, grid, local.discarded)
        parts.append(part)
        pool.extend(scaled)

    pool.sort(key=lambda e: -abs(e.value))
    merged: list[EigenvalueEstimate] = []
    for e in pool:
        for i, m in enumerate(merged):
            if abs(m.value - e.value) <= merge * abs(m.value):
                total = m.multiplicity + e.multiplicity
                merged[i] = EigenvalueEstimate(
                    (m.value * m.multiplicity + e.value * e.multiplicity) / total, total,
                    max(m.residual, e.residual), max(m.stability, e.stability),
                    max(m.sensitivity, e.sensitivity), m.unconfirmed or e.unconfirmed,
                )
                break
        else:
            merged.append(e)
    if len(segments) > 1:
        regime = Regime.MIXED.value
    else:
        regime = parts[0].regime if parts else None
    return Spectrum(tuple(merged), regime, order, grid), parts


def measure_above_diagonal(phi: MonotoneMap, grid: int = 4096) -> float:
    """Lebesgue measure of {x : phi(x) >= x}, with sign changes located by root finding."""
    xs = np.union1d(np.linspace(0.0, 1.0, grid + 1), phi.breakpoints())
    g = phi(xs) - xs
    total = 0.0
    for i in range(len(xs) - 1):
        a, b, ga, gb = xs[i], xs[i + 1], g[i], g[i + 1]
        if ga >= 0 and gb >= 0:
            total += b - a
        elif ga >= 0 > gb or gb >= 0 > ga:
            if ga == 0.0 or gb == 0.0:
                continue
            root = brentq(lambda x: float(phi(x)) - x, a, b, xtol=1e-14)
            total += (root - a) if ga > 0 else (b - root)
    return float(total)


def segment_report(
    phi: MonotoneMap, order: int = 24, grid: int = 8192, tol: float = 1e-10, epsilon: float = 1e-4
) -> dict:
    """JSON-ready summary: intervals, scales, per-segment and merged spectra."""
    segs = segment(phi, tol=tol)
    merged, parts = spectrum_union(segs, order, grid)
    return {
        "map": phi.describe(),
        "segments": [
            {**s.to_dict(), "spectrum": p.to_dict()} for s, p in zip(segs, parts)
        ],
        "merged": merged.to_dict(),
        "measure_above_diagonal": measure_above_diagonal(phi),
        "partial_trace": _real(partial_trace(merged, epsilon)) if len(merged) else 0.0,
        "epsilon": epsilon,
    }


def _real(z):
    return float(z.real) if isinstance(z, complex) else float(z)
