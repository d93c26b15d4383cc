import math

import numpy as np
import pytest

from vphi.errors import MapSyntaxError, ParameterError, ResourceError
from vphi.nystrom import build, eigs, export, parse_kernel, singular_values
from vphi.phi_map import Power, SampledTable, constant_one_map, identity_map


class TestBuild:
    def test_power_row(self):
        op = build(Power(0.5), 4, min_size=1)
        r = math.sqrt(0.125)
        assert op.nodes == pytest.approx([0.125, 0.375, 0.625, 0.875])
        assert op.entries[0] == pytest.approx([0.25, r - 0.25, 0.0, 0.0], abs=1e-15)

    def test_identity_rows(self):
        e = build(identity_map(), 4, min_size=1).entries
        for i in range(4):
            expected = [0.25] * i + [0.125] + [0.0] * (3 - i)
            assert e[i] == pytest.approx(expected, abs=1e-15)

    def test_constant_one_is_rank_one(self):
        e = build(constant_one_map(), 64).entries
        assert np.allclose(e.sum(axis=1), 1.0, atol=1e-14)
        assert np.all(e == e[0])

    @pytest.mark.parametrize("phi", [Power(0.3), Power(0.7), identity_map(),
                                     SampledTable([(0, 0.2), (0.5, 0.6), (1, 1)])])
    def test_entry_invariants(self, phi):
        m = 256
        op = build(phi, m)
        e = op.entries
        assert e.min() >= 0.0 and e.max() <= 1 / m + 1e-15
        assert np.max(np.abs(e.sum(axis=1) - phi(op.nodes))) <= 1e-14 * m
        assert np.all(np.diff(e, axis=1) <= 1e-15)

    def test_size_limits(self):
        with pytest.raises(ParameterError):
            build(Power(0.5), 8)
        with pytest.raises(ResourceError):
            build(Power(0.5), 8192)

    def test_raw_kernel(self):
        op = build(parse_kernel("raw:1-x"), 16)
        assert np.allclose(op.entries.sum(axis=1), 1 - op.nodes, atol=1e-15)

    @pytest.mark.parametrize("text", ["raw:", "raw:__import__('os')", "raw:x**", "power:1"])
    def test_kernel_rejects(self, text):
        with pytest.raises(MapSyntaxError):
            parse_kernel(text)


class TestSpectra:
    def test_power_top(self, nystrom_cache):
        ev = nystrom_cache.eigs("power0.5", Power(0.5), 2048)
        assert abs(ev[0] - 0.5) <= 2e-3

    def test_anti_diagonal_kernel(self, nystrom_cache):
        ev = nystrom_cache.eigs("raw:1-x", parse_kernel("raw:1-x"), 2048)
        assert abs(abs(ev[0]) - 2 / math.pi) <= 2e-3

    def test_identity_quasinilpotent(self, nystrom_cache):
        top = [np.max(np.abs(nystrom_cache.eigs("identity", identity_map(), m, 4)))
               for m in (512, 1024)]
        assert top[1] <= 0.02 and top[1] < top[0]
        # the discretisation has 1/(2m) on the diagonal and nothing above it
        assert top[1] == pytest.approx(1 / 2048, rel=1e-9)

    def test_refinement(self, nystrom_cache):
        # top eigenvalues move like C / m for a smooth strictly increasing map
        a = nystrom_cache.eigs("power0.5", Power(0.5), 1024, 3)
        b = nystrom_cache.eigs("power0.5", Power(0.5), 2048, 3)
        assert np.max(np.abs(a - b)) * 1024 <= 2.0

    def test_count_bound(self):
        with pytest.raises(ParameterError):
            eigs(build(Power(0.5), 16), 17)


class TestSingularValues:
    def test_volterra(self, nystrom_cache):
        s = nystrom_cache.singular_values("identity", identity_map(), 2048, 10)
        n = np.arange(1, 11)
        assert np.allclose(s, 2 / ((2 * n - 1) * np.pi), rtol=1e-2)

    def test_power_not_trace_class(self, nystrom_cache):
        s = nystrom_cache.singular_values("power0.5", Power(0.5), 2048, 50)
        assert np.min(s * np.arange(1, 51)) > 0.25

    def test_rank_one(self):
        s = singular_values(build(constant_one_map(), 64), 3)
        assert s[0] == pytest.approx(1.0) and s[1] < 1e-12

    def test_descending(self):
        s = singular_values(build(Power(0.3), 128), 20)
        assert np.all(np.diff(s) <= 0)


@pytest.mark.parametrize("fmt", ["npy", "csv", "binary"])
def test_export_round_trip(tmp_path, fmt):
    op = build(Power(0.5), 32)
    path = export(op, tmp_path / f"k.{fmt}", fmt)
    if fmt == "npy":
        back = np.load(path)
    elif fmt == "csv":
        back = np.loadtxt(path, delimiter=",")
    else:
        back = np.fromfile(path, dtype="<f8").reshape(32, 32)
    assert np.array_equal(back, op.entries)


def test_export_unknown_format(tmp_path):
    with pytest.raises(ParameterError):
        export(build(Power(0.5), 16), tmp_path / "k", "xml")
