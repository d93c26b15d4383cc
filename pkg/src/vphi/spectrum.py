"""Eigenvalues as reciprocals of the roots of a truncated determinant."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConvergenceError, ParameterError
from .fredholm import FredholmSeries
from .phi_map import MonotoneMap, Regime


@dataclass(frozen=True)
class EigenvalueEstimate:
    """One (possibly clustered) eigenvalue.

    residual is |D(1/value)| at the full truncation; stability is the relative
    distance to the nearest root of the truncation two orders lower (0 when the
    trailing coefficients are resolved zeros); sensitivity is the relative root
    movement between the half-size and the full quadrature grid.
    """

    value: complex
    multiplicity: int = 1
    residual: float = 0.0
    stability: float = 0.0
    sensitivity: float = 0.0
    unconfirmed: bool = False

    def to_dict(self) -> dict:
        return {
            "re": float(self.value.real),
            "im": float(self.value.imag),
            "multiplicity": int(self.multiplicity),
            "residual": float(self.residual),
            "stability": float(self.stability),
            "sensitivity": float(self.sensitivity),
            "unconfirmed": bool(self.unconfirmed),
        }


def _sort_key(z: complex):
    # descending modulus; conjugates adjacent with the upper one first
    return (-round(abs(z), 12), round(abs(z.imag), 12), -z.imag)


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: tuple[EigenvalueEstimate, ...]
    regime: str | None = None
    order: int | None = None
    grid: int | None = None
    discarded: int = 0

    def __post_init__(self):
        ordered = tuple(sorted(self.eigenvalues, key=lambda e: _sort_key(complex(e.value))))
        object.__setattr__(self, "eigenvalues", ordered)

    def __len__(self) -> int:
        return len(self.eigenvalues)

    @property
    def values(self) -> np.ndarray:
        """Distinct eigenvalues, descending modulus."""
        return np.array([complex(e.value) for e in self.eigenvalues], dtype=complex)

    @property
    def multiplicities(self) -> np.ndarray:
        return np.array([e.multiplicity for e in self.eigenvalues], dtype=int)

    def expanded(self) -> np.ndarray:
        """Eigenvalues repeated according to multiplicity."""
        return np.repeat(self.values, self.multiplicities) if len(self) else np.empty(0, complex)

    @property
    def count(self) -> int:
        return int(self.multiplicities.sum()) if len(self) else 0

    def to_dict(self) -> dict:
        return {
            "regime": self.regime,
            "order": self.order,
            "grid": self.grid,
            "discarded": self.discarded,
            "eigenvalues": [e.to_dict() for e in self.eigenvalues],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["re", "im", "multiplicity", "residual", "stability"])
        for e in self.eigenvalues:
            d = e.to_dict()
            writer.writerow([repr(d["re"]), repr(d["im"]), d["multiplicity"], repr(d["residual"]), repr(d["stability"])])
        return buf.getvalue()


def _trim(series: FredholmSeries) -> int:
    """Index of the last coefficient that exceeds its error bar."""
    a, err = series.a, series.err
    resolved = np.nonzero(np.abs(a[1:]) > err[1:])[0]
    return int(resolved[-1]) + 1 if resolved.size else 0


def _horner(c_asc: np.ndarray, z: np.ndarray):
    p = np.zeros_like(z) + c_asc[-1]
    dp = np.zeros_like(z)
    for coef in c_asc[-2::-1]:
        dp = dp * z + p
        p = p * z + coef
    return p, dp


def _roots(c_asc: np.ndarray, polish: int = 8) -> np.ndarray:
    """Companion-matrix roots refined by a few guarded Newton steps.

    The variable is rescaled (mu = s z with |c_n| s^n = 1) first: high-order
    coefficients sit near the underflow limit and would overflow the companion matrix.
    """
    nz = np.nonzero(c_asc)[0]
    if nz.size == 0 or nz[-1] < 1:
        return np.empty(0, complex)
    c_asc = c_asc[: nz[-1] + 1]
    n = len(c_asc) - 1
    log_s = -np.log(abs(c_asc[-1])) / n
    k = np.arange(n + 1)
    with np.errstate(divide="ignore"):
        mag = np.log(np.abs(c_asc)) + k * log_s
    scaled = np.where(c_asc != 0, np.sign(c_asc) * np.exp(np.minimum(mag, 700.0)), 0.0)
    z = np.roots(scaled[::-1]).astype(complex)
    for _ in range(polish):
        p, dp = _horner(scaled, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(dp != 0, p / dp, 0.0)
        cand = z - step
        pc, _ = _horner(scaled, cand)
        better = np.isfinite(cand) & (np.abs(pc) < np.abs(p))
        z = np.where(better, cand, z)
    return z * np.exp(log_s)


def eigenvalues(
    series: FredholmSeries,
    stability: float = 1e-6,
    noise: float = 1e-4,
    merge: float = 1e-4,
    regime: Regime | str | None = None,
) -> Spectrum:
    """Nonzero eigenvalues from the roots of the truncated determinant.

    A root mu of the order-M polynomial is kept when

    * a root of the order-(M-2) truncation lies within relative ``stability`` of it
      (skipped when at least two trailing coefficients are resolved zeros, i.e. the
      polynomial is complete), and
    * its noise level is below ``noise``.  The noise level is the relative distance
      to the nearest root of the same polynomial built from the half-grid
      coefficients.  Series without those fall back to the first-order bound
      sum_n err_n |mu|^n / (|mu| |D'(mu)|), which is far more pessimistic.

    Kept roots closer than relative ``merge`` are clustered into one estimate with
    the summed multiplicity.

    Raises
    ------
    ConvergenceError
        No root survives while ``regime`` says the spectrum is nonempty.
    """
    if series.order < 2:
        raise ParameterError("eigenvalue extraction needs order >= 2")
    regime_value = Regime(regime).value if regime is not None else None
    degree = _trim(series)
    c = series.signed()[: degree + 1]
    err = series.err[: degree + 1]
    complete = series.order - degree >= 2

    mu = _roots(c)
    if mu.size == 0:
        spec = Spectrum((), regime_value, series.order, series.grid_size)
        _require(spec, regime_value)
        return spec
    absmu = np.abs(mu)

    if complete:
        moves = np.zeros(mu.size)
    else:
        moves = _nearest(mu, _roots(c[: degree - 1]) if degree >= 3 else np.empty(0, complex))

    with np.errstate(over="ignore", invalid="ignore"):
        p, dp = _horner(c, mu)
    if series.coarse is not None:
        sens = _nearest(mu, _roots(series.signed(coarse=True)[: degree + 1]))
    else:
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            powers = absmu[:, None] ** np.arange(degree + 1)[None, :]
            spread = powers @ err
            # exact coefficients give zero spread even at a multiple root (dp ~ 0)
            sens = np.where(spread == 0, 0.0, spread / (absmu * np.abs(dp)))
    sens = np.where(np.isfinite(sens), sens, np.inf)
    keep = (moves < stability) & (sens < noise)

    lam = 1.0 / mu[keep]
    estimates = _cluster(lam, np.abs(p[keep]), moves[keep], sens[keep], merge)
    spec = Spectrum(tuple(estimates), regime_value, series.order, series.grid_size,
                    discarded=int(mu.size - keep.sum()))
    _require(spec, regime_value)
    return spec


def _nearest(mu: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """Relative distance from each mu to the closest reference root."""
    if ref.size == 0:
        return np.full(mu.size, np.inf)
    return np.min(np.abs(mu[:, None] - ref[None, :]), axis=1) / np.abs(mu)


def _require(spec: Spectrum, regime: str | None) -> None:
    if len(spec) == 0 and regime in (Regime.FINITE.value, Regime.INFINITE.value):
        raise ConvergenceError(
            f"no stable determinant roots although the regime is {regime}; "
            "raise the truncation order or the grid size"
        )


def _cluster(lam, res, move, sens, merge) -> list[EigenvalueEstimate]:
    order = np.argsort(-np.abs(lam))
    lam, res, move, sens = lam[order], res[order], move[order], sens[order]
    used = np.zeros(lam.size, bool)
    out = []
    for i in range(lam.size):
        if used[i]:
            continue
        group = [j for j in range(i, lam.size)
                 if not used[j] and abs(lam[j] - lam[i]) <= merge * abs(lam[i])]
        used[group] = True
        value = complex(np.mean(lam[group]))
        spread = float(np.max(sens[group]))
        if abs(value.imag) <= max(1e-12, 10 * spread) * abs(value):
            value = complex(value.real, 0.0)
        out.append(EigenvalueEstimate(
            value=value,
            multiplicity=len(group),
            residual=float(np.max(res[group])),
            stability=float(np.max(move[group])),
            sensitivity=spread,
            unconfirmed=value.imag != 0.0,
        ))
    return out


def _real_if_close(z: complex):
    return z.real if abs(z.imag) <= 1e-12 * max(1.0, abs(z)) else z


def partial_trace(spectrum: Spectrum, epsilon: float):
    """Sum of eigenvalues with |lam| > epsilon, counted with multiplicity."""
    if not epsilon > 0:
        raise ParameterError("epsilon must be positive")
    v = spectrum.expanded()
    return _real_if_close(complex(np.sum(v[np.abs(v) > epsilon])))


def power_sum(spectrum: Spectrum, p: int):
    """Sum of lam**p over retained eigenvalues, with multiplicity."""
    if int(p) != p or p < 2:
        raise ParameterError("power must be an integer >= 2")
    return _real_if_close(complex(np.sum(spectrum.expanded() ** int(p))))


def geometric_tail(spectrum: Spectrum, epsilon: float = 0.0) -> float:
    """Estimated sum of the eigenvalues left out of ``partial_trace(spectrum, epsilon)``.

    The omitted eigenvalues are modelled as continuing the geometric progression of
    the last two retained (real, positive) ones.  A finite-regime spectrum is complete
    and gets zero.
    """
    if spectrum.regime == Regime.FINITE.value:
        return 0.0
    vals = [(e.value, e.multiplicity) for e in spectrum.eigenvalues
            if abs(e.value) > epsilon and e.value.imag == 0.0 and e.value.real > 0]
    if len(vals) < 2:
        return 0.0
    (prev, _), (last, mult) = vals[-2], vals[-1]
    r = last.real / prev.real
    if not 0.0 < r < 1.0:
        return 0.0
    return float(mult * last.real * r / (1.0 - r))


def spectral_radius_bound(phi: MonotoneMap, grid: int = 4096) -> float:
    """Lower bound max_x (phi(x) - x) on the spectral radius, evaluated on a grid."""
    xs = np.linspace(0.0, 1.0, grid + 1)
    bp = phi.breakpoints()
    xs = np.union1d(xs, bp[(bp >= 0) & (bp <= 1)])
    return float(max(0.0, np.max(phi(xs) - xs)))
