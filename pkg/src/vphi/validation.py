"""Cross-validation of the determinant pipeline against independent routes."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import NonInvertibleError
from .fredholm import FredholmSeries
from .nystrom import build, eigs
from .phi_map import MonotoneMap, Regime
from .pipeline import Analysis, analyze
from .segmentation import measure_above_diagonal
from .spectrum import geometric_tail, partial_trace, spectral_radius_bound
from .traces import cross_check, determinant_power_sums, trace_cube, trace_sq


def monte_carlo_volume(phi: MonotoneMap, n: int, samples: int = 200_000, seed: int = 0,
                       batch: int = 100_000) -> tuple[float, float]:
    """Volume of {t in [0,1]^n : phi(t_i) <= t_{i+1}} by uniform sampling.

    Returns (estimate, standard error).
    """
    rng = np.random.default_rng(seed)
    hits = 0
    done = 0
    while done < samples:
        size = min(batch, samples - done)
        t = rng.random((size, n))
        ok = np.ones(size, bool)
        for i in range(n - 1):
            ok &= np.asarray(phi(t[:, i])) <= t[:, i + 1]
        hits += int(ok.sum())
        done += size
    p = hits / samples
    return p, math.sqrt(max(p * (1 - p), 1.0 / samples) / samples)


@dataclass
class Check:
    name: str
    value: float
    reference: float
    discrepancy: float
    budget: float
    ok: bool
    note: str = ""


@dataclass
class ValidationReport:
    map: str
    regime: str
    checks: list[Check] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def add(self, name, value, reference, budget, note=""):
        value, reference = float(np.real(value)), float(np.real(reference))
        disc = abs(value - reference)
        self.checks.append(Check(name, value, reference, disc, float(budget), bool(disc <= budget), note))

    def to_dict(self) -> dict:
        return {"map": self.map, "regime": self.regime, "ok": self.ok,
                "checks": [asdict(c) for c in self.checks]}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def validate(
    phi: MonotoneMap,
    order: int = 24,
    grid: int = 8192,
    nystrom_size: int = 1024,
    epsilon: float = 1e-4,
    seed: int = 0,
    mc_samples: int = 200_000,
    top: int = 5,
    analysis: Analysis | None = None,
) -> ValidationReport:
    """Run every cross-check that applies to ``phi``.

    * retained eigenvalues against the nearest Nystrom eigenvalues
      (budget max(1e-3, 10 residual) plus the Nystrom refinement movement m/2 -> m);
    * trace identities against spectral power sums (budget from ``cross_check``);
    * trace identities against power sums from the determinant coefficients;
    * partial trace plus geometric tail against the measure of {phi >= x};
    * A_2..A_4 against Monte Carlo volumes (3 standard errors);
    * top eigenvalue against the lower bound max(phi(x) - x).
    """
    res = analysis or analyze(phi, order, grid)
    spec = res.spectrum
    report = ValidationReport(phi.describe(), res.classification.regime.value)

    if len(spec):
        op = build(phi, nystrom_size)
        ref = eigs(op, min(nystrom_size, 4 * top + 8))
        coarse = eigs(build(phi, nystrom_size // 2), min(nystrom_size // 2, 4 * top + 8))
        for i, e in enumerate(spec.eigenvalues[:top]):
            j = int(np.argmin(np.abs(ref - e.value)))
            drift = float(np.min(np.abs(coarse - ref[j])))
            budget = max(1e-3, 10 * e.residual) + drift
            report.add(f"nystrom[{i}]", e.value, ref[j], budget)

    if res.series is not None and res.classification.regime != Regime.MIXED:
        tr = cross_check(spec, phi, res.series, grid)
        for name, disc in tr.discrepancies.items():
            if name == "sum_rule":
                report.add("sum_rule", tr.trace1_spectral, 1.0, tr.budget[name])
            else:
                formula = tr.trace2_formula if name == "p2" else tr.trace3_formula
                spectral = tr.trace2_spectral if name == "p2" else tr.trace3_spectral
                report.add(f"trace_{name}_spectral", spectral, formula, tr.budget[name])
        if res.series.order >= 3:
            _, d2, d3 = determinant_power_sums(res.series, 3)
            report.add("trace_p2_determinant", d2, tr.trace2_formula, 1e-6)
            if tr.trace3_formula is not None:
                report.add("trace_p3_determinant", d3, tr.trace3_formula, 1e-6)

        for n in range(2, min(4, res.series.order) + 1):
            est, se = monte_carlo_volume(phi, n, mc_samples, seed + n)
            report.add(f"monte_carlo_A{n}", res.series.coefficients[n], est,
                       3 * se + res.series.errors[n])

    if res.classification.regime in (Regime.FINITE, Regime.INFINITE, Regime.MIXED):
        total = partial_trace(spec, epsilon) + geometric_tail(spec, epsilon)
        report.add("partial_trace", total, measure_above_diagonal(phi), 1e-3)
        if len(spec):
            bound = spectral_radius_bound(phi)
            top_value = float(np.max(np.abs(spec.values)))
            report.checks.append(Check("radius_bound", top_value, bound,
                                       max(0.0, bound - top_value), 1e-6,
                                       top_value >= bound - 1e-6))
    negatives = [e for e in spec.eigenvalues if e.value.imag == 0 and e.value.real < 0]
    report.checks.append(Check("negative_real_axis", float(len(negatives)), 0.0,
                               float(len(negatives)), 0.0, not negatives))
    return report
