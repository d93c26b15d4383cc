"""Dense matrix discretisation of the kernel chi(phi(x) - t), used as an oracle.

Cells are uniform, collocation nodes are cell midpoints and entry (i, j) is the
exact length of [j/m, (j+1)/m] intersected with [0, phi(x_i)], so every row sums
to phi(x_i).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import MapSyntaxError, NumericalError, ParameterError, ResourceError
from .phi_map import MonotoneMap

DEFAULT_MAX_SIZE = 4096


@dataclass(frozen=True)
class NystromOperator:
    m: int
    nodes: np.ndarray
    upper: np.ndarray  # upper integration limit per row, i.e. phi(x_i)
    entries: np.ndarray
    label: str = ""

    def eigs(self, k: int = 10) -> np.ndarray:
        return eigs(self, k)

    def singular_values(self, k: int = 10) -> np.ndarray:
        return singular_values(self, k)


class RawKernel:
    """Upper limit function u(x) of a kernel chi(u(x) - t); need not be monotone.

    Descriptor syntax ``raw:<expression in x>``, e.g. ``raw:1-x``.  Only numpy
    arithmetic on ``x`` is accepted.
    """

    _FUNCS = {"sqrt": np.sqrt, "exp": np.exp, "log": np.log, "sin": np.sin, "cos": np.cos}

    def __init__(self, expression: str):
        expr = expression.strip()
        bare = re.sub(r"\b(sqrt|exp|log|sin|cos)\b", "", expr)
        if not expr or not re.fullmatch(r"[0-9x+\-*/(). eE]*", bare):
            raise MapSyntaxError(f"unsupported raw kernel expression {expression!r}")
        self.expression = expr
        namespace = dict(self._FUNCS)
        try:
            self._code = compile(expr, "<raw kernel>", "eval")
            probe = eval(self._code, {"__builtins__": {}}, {**namespace, "x": np.array([0.5])})
        except Exception as exc:
            raise MapSyntaxError(f"cannot evaluate raw kernel {expression!r}: {exc}") from None
        if not np.all(np.isfinite(np.asarray(probe, dtype=float))):
            raise MapSyntaxError(f"raw kernel {expression!r} is not finite at x=0.5")
        self._namespace = namespace

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = eval(self._code, {"__builtins__": {}}, {**self._namespace, "x": x})
        return np.asarray(out, dtype=float) * np.ones_like(x)

    def describe(self) -> str:
        return f"raw:{self.expression}"


def parse_kernel(text: str) -> RawKernel:
    kind, sep, body = text.partition(":")
    if not sep or kind.strip().lower() != "raw":
        raise MapSyntaxError(f"expected 'raw:<expression>', got {text!r}")
    return RawKernel(body)


def build(
    phi: MonotoneMap | RawKernel | Callable[[np.ndarray], np.ndarray],
    m: int,
    max_size: int = DEFAULT_MAX_SIZE,
    min_size: int = 16,
) -> NystromOperator:
    """Assemble the m x m overlap matrix.

    Parameters
    ----------
    phi : map, raw kernel or callable
        Supplies the upper limit phi(x_i) of each row; values are clipped to [0, 1].
    m : int
        Number of cells, at least ``min_size``.
    max_size : int
        Largest m accepted (dense storage is m**2 doubles).
    min_size : int
        Smallest m accepted; 16 keeps results meaningful, tiny hand-checkable
        matrices need a lower value.
    """
    if int(m) != m or m < max(1, min_size):
        raise ParameterError(f"Nystrom size must be an integer >= {min_size}, got {m!r}")
    if m > max_size:
        raise ResourceError(
            f"m={m} exceeds the dense cap {max_size} ({8 * m * m / 2**20:.0f} MiB per matrix)"
        )
    m = int(m)
    nodes = (np.arange(m) + 0.5) / m
    upper = np.clip(np.asarray(phi(nodes), dtype=float), 0.0, 1.0)
    left = np.arange(m) / m
    entries = np.clip(upper[:, None] - left[None, :], 0.0, 1.0 / m)
    label = phi.describe() if hasattr(phi, "describe") else getattr(phi, "__name__", "callable")
    return NystromOperator(m, nodes, upper, entries, label)


def eigs(op: NystromOperator, k: int = 10) -> np.ndarray:
    """Top-k eigenvalues by modulus (dense LAPACK Hessenberg QR)."""
    if k > op.m:
        raise ParameterError(f"k={k} exceeds m={op.m}")
    try:
        vals = np.linalg.eigvals(op.entries)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"dense eigensolver failed for m={op.m}: {exc}") from exc
    idx = np.lexsort((-vals.imag, -np.round(np.abs(vals), 12)))
    return vals[idx][:k]


def singular_values(op: NystromOperator, k: int = 10) -> np.ndarray:
    """Top-k singular values of the operator, descending.

    In the orthonormal basis sqrt(m) * indicator(cell j) the operator's matrix is the
    overlap matrix itself, so no rescaling is needed.
    """
    if k > op.m:
        raise ParameterError(f"k={k} exceeds m={op.m}")
    try:
        s = np.linalg.svd(op.entries, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD failed for m={op.m}: {exc}") from exc
    return s[:k]


def export(op: NystromOperator, path, fmt: str = "npy") -> Path:
    """Write the matrix as .npy, CSV, or raw little-endian float64 (row major)."""
    path = Path(path)
    if fmt == "npy":
        np.save(path, op.entries)
    elif fmt == "csv":
        np.savetxt(path, op.entries, delimiter=",", fmt="%.17g")
    elif fmt == "binary":
        op.entries.astype("<f8").tofile(path)
    else:
        raise ParameterError(f"unknown export format {fmt!r}")
    return path
