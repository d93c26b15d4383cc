"""Command-line front end.

    vphi <command> --map <descriptor> [options]

Commands: classify, coeffs, spectrum, traces, nystrom, segment, validate.
Exit status: 0 success, 1 numerical failure (diagnostic JSON on stdout) or a failed
validation, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .errors import DataError, MapSyntaxError, ParameterError, VphiError
from .fredholm import coefficients
from .nystrom import build, eigs, export, parse_kernel, singular_values
from .phi_map import classify, parse_map
from .pipeline import analyze
from .segmentation import segment_report
from .spectrum import EigenvalueEstimate, Spectrum
from .traces import cross_check
from .validation import validate

COMMANDS = ("classify", "coeffs", "spectrum", "traces", "nystrom", "segment", "validate")


@dataclass
class RunConfig:
    map: str | None = None
    order: int = 24
    grid: int = 8192
    nystrom_size: int = 1024
    tol: float = 1e-10
    epsilon: float = 1e-4
    format: str = "json"
    out: str | None = None
    seed: int = 0
    modes: int = 64
    count: int = 10
    adaptive: bool = False
    export: str | None = None
    export_format: str = "npy"

    def check(self) -> None:
        if not self.map:
            raise ParameterError("--map is required")
        if self.order < 2:
            raise ParameterError("--order must be >= 2")
        if self.grid < 64:
            raise ParameterError("--grid must be >= 64")
        if self.nystrom_size < 16:
            raise ParameterError("--nystrom-size must be >= 16")
        if not self.tol > 0 or not self.epsilon > 0:
            raise ParameterError("--tol and --epsilon must be positive")
        if self.format not in ("json", "csv"):
            raise ParameterError("--format must be json or csv")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    # defaults are None so that config-file values survive unless a flag is given
    common.add_argument("--map", help="power:alpha=A | pwl:x,y;x,y;... | table:FILE.csv "
                                      "(nystrom also takes raw:EXPR)")
    common.add_argument("--order", type=int, help="truncation order M (default 24)")
    common.add_argument("--grid", type=int, help="quadrature grid size G (default 8192)")
    common.add_argument("--nystrom-size", dest="nystrom_size", type=int,
                        help="Nystrom matrix size m (default 1024)")
    common.add_argument("--tol", type=float, help="fixed-point / classification tolerance")
    common.add_argument("--epsilon", type=float, help="partial-trace cutoff (default 1e-4)")
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--seed", type=int, help="seed for Monte Carlo checks (default 0)")
    common.add_argument("--config", help="JSON file with the same keys as the flags")
    common.add_argument("--modes", type=int, help="Fourier modes for traces (default 64)")
    common.add_argument("--count", type=int, help="eigen/singular values for nystrom (default 10)")
    common.add_argument("--adaptive", action="store_true", default=None,
                        help="grow the order until the retained count stops increasing")
    common.add_argument("--export", help="nystrom: dump the matrix to this path")
    common.add_argument("--export-format", dest="export_format", choices=("npy", "csv", "binary"))

    parser = argparse.ArgumentParser(prog="vphi", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    helps = {
        "classify": "regime, fixed points and iterate count of the map",
        "coeffs": "determinant coefficients with error estimates",
        "spectrum": "eigenvalues from the determinant roots",
        "traces": "trace identities versus spectral power sums",
        "nystrom": "eigen- and singular values of the matrix discretisation",
        "segment": "fixed-point segmentation and merged spectrum",
        "validate": "all cross-checks; exit 1 if any exceeds its budget",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def _config(ns: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if ns.config:
        try:
            values = json.loads(Path(ns.config).read_text())
        except (OSError, ValueError) as exc:
            raise MapSyntaxError(f"cannot read config {ns.config}: {exc}") from None
        if not isinstance(values, dict):
            raise MapSyntaxError("config file must hold a JSON object")
        values = {k.replace("-", "_"): v for k, v in values.items()}
        known = {f.name for f in fields(RunConfig)}
        unknown = set(values) - known
        if unknown:
            raise MapSyntaxError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for f in fields(RunConfig):
        flag = getattr(ns, f.name, None)
        if flag is not None:
            values[f.name] = flag
    cfg = RunConfig(**values)
    cfg.check()
    return cfg


def _load_map(cfg: RunConfig):
    text = cfg.map.strip()
    if not text.split(":", 1)[0] in ("power", "pwl", "table", "raw") and Path(text).exists():
        text = f"table:{text}"
    return parse_map(text)


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(cfg: RunConfig, payload: dict | None, csv_text: str | None) -> None:
    if cfg.format == "csv" and csv_text is not None:
        text = csv_text
    else:
        text = json.dumps(payload, indent=2) + "\n"
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


def _run(command: str, cfg: RunConfig) -> int:
    if command == "nystrom":
        spec_text = cfg.map.strip()
        target = parse_kernel(spec_text) if spec_text.startswith("raw:") else _load_map(cfg)
        op = build(target, cfg.nystrom_size)
        k = min(cfg.count, op.m)
        ev = eigs(op, k)
        sv = singular_values(op, k)
        spec = Spectrum(tuple(EigenvalueEstimate(complex(v)) for v in ev), None, None, op.m)
        exported = None
        if cfg.export:
            exported = str(export(op, cfg.export, cfg.export_format))
        payload = {"map": op.label, "m": op.m, "spectrum": spec.to_dict(),
                   "singular_values": [float(s) for s in sv], "export": exported}
        _emit(cfg, payload, spec.to_csv())
        return 0

    phi = _load_map(cfg)
    if command == "classify":
        info = classify(phi, tol=cfg.tol).to_dict()
        _emit(cfg, info, _rows_csv(["key", "value"], [(k, v if isinstance(v, str) else json.dumps(v)) for k, v in info.items()]))
        return 0
    if command == "coeffs":
        series = coefficients(phi, cfg.order, cfg.grid)
        rows = [(n, repr(a), repr(e)) for n, (a, e) in enumerate(zip(series.coefficients, series.errors))]
        _emit(cfg, series.to_dict(), _rows_csv(["n", "coefficient", "error"], rows))
        return 0
    if command == "spectrum":
        res = analyze(phi, cfg.order, cfg.grid, adaptive=bool(cfg.adaptive), tol=cfg.tol)
        _emit(cfg, res.spectrum.to_dict(), res.spectrum.to_csv())
        return 0
    if command == "traces":
        res = analyze(phi, cfg.order, cfg.grid, adaptive=bool(cfg.adaptive), tol=cfg.tol)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            report = cross_check(res.spectrum, phi, res.series, cfg.grid, cfg.modes)
        rows = [(m, repr(s)) for m, s in enumerate(report.fourier_partial)]
        _emit(cfg, report.to_dict(), _rows_csv(["modes", "partial_sum"], rows))
        return 0
    if command == "segment":
        report = segment_report(phi, cfg.order, cfg.grid, cfg.tol, cfg.epsilon)
        merged = Spectrum(tuple(
            EigenvalueEstimate(complex(e["re"], e["im"]), e["multiplicity"], e["residual"],
                               e["stability"], e["sensitivity"], e["unconfirmed"])
            for e in report["merged"]["eigenvalues"]))
        _emit(cfg, report, merged.to_csv())
        return 0
    if command == "validate":
        res = analyze(phi, cfg.order, cfg.grid, adaptive=bool(cfg.adaptive), tol=cfg.tol)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            report = validate(phi, cfg.order, cfg.grid, cfg.nystrom_size, cfg.epsilon,
                              cfg.seed, analysis=res)
        d = report.to_dict()
        rows = [(c["name"], repr(c["value"]), repr(c["reference"]), repr(c["discrepancy"]),
                 repr(c["budget"]), c["ok"]) for c in d["checks"]]
        _emit(cfg, d, _rows_csv(["name", "value", "reference", "discrepancy", "budget", "ok"], rows))
        return 0 if report.ok else 1
    raise MapSyntaxError(f"unknown command {command!r}")


def main(argv: list[str] | None = None) -> int:
    parser = _parser()
    ns = parser.parse_args(argv)  # exits with status 2 on usage errors
    try:
        cfg = _config(ns)
    except (MapSyntaxError, ParameterError, TypeError) as exc:
        parser.error(str(exc))
    try:
        return _run(ns.command, cfg)
    except (MapSyntaxError, DataError) as exc:
        parser.error(str(exc))
    except (VphiError, np.linalg.LinAlgError, FloatingPointError) as exc:
        diag = {"error": type(exc).__name__, "message": str(exc), "command": ns.command}
        sys.stdout.write(json.dumps(diag, indent=2) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
