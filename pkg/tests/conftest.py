import time

import numpy as np
import pytest

from vphi.nystrom import build, eigs, singular_values
from vphi.phi_map import Glued, PiecewiseLinear, Power

# filled by test_acceptance, printed at the end of the run
ACCEPTANCE_LINES: dict[int, str] = {}
SUITE_BUDGET = 300.0  # seconds, for the whole run
_started = time.perf_counter()


def pytest_sessionstart(session):
    global _started
    _started = time.perf_counter()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    elapsed = time.perf_counter() - _started
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        line = ACCEPTANCE_LINES[k]
        if k == 10:
            verdict = "ok" if elapsed < SUITE_BUDGET else "FAIL"
            line += f"; suite runtime {elapsed:.0f} s ({verdict}, budget {SUITE_BUDGET:.0f} s)"
        terminalreporter.write_line(line)


def finite_pwl():
    return PiecewiseLinear([(0.0, 0.5), (0.5, 1.0), (1.0, 1.0)])


def two_sqrt():
    return Glued([(0.0, 0.5, Power(0.5)), (0.5, 1.0, Power(0.5))])


def mixed_sqrt_square():
    # above the diagonal on (0, 1/2), below it on (1/2, 1)
    return Glued([(0.0, 0.5, Power(0.5)), (0.5, 1.0, Power(2.0))])


class _NystromCache:
    """Dense eigensolves at m = 2048 take seconds; share them across the session."""

    def __init__(self):
        self._eigs = {}
        self._svals = {}
        self._ops = {}

    def op(self, key, target, m):
        if (key, m) not in self._ops:
            self._ops[key, m] = build(target, m)
        return self._ops[key, m]

    def eigs(self, key, target, m, k=10):
        if (key, m) not in self._eigs:
            self._eigs[key, m] = eigs(self.op(key, target, m), 32)
        return self._eigs[key, m][:k]

    def singular_values(self, key, target, m, k=10):
        if (key, m) not in self._svals:
            self._svals[key, m] = singular_values(self.op(key, target, m), 64)
        return self._svals[key, m][:k]


@pytest.fixture(scope="session")
def nystrom_cache():
    return _NystromCache()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
