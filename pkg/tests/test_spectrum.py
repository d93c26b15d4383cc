import csv
import io
import json
import math

import numpy as np
import pytest

from conftest import finite_pwl
from vphi.errors import ConvergenceError, ParameterError
from vphi.fredholm import FredholmSeries, coefficients, det_eval
from vphi.phi_map import PiecewiseLinear, Power, Regime, constant_one_map, identity_map
from vphi.pipeline import analyze
from vphi.spectrum import (EigenvalueEstimate, Spectrum, eigenvalues, geometric_tail,
                           partial_trace, power_sum, spectral_radius_bound)


@pytest.fixture(scope="module")
def sqrt_spec():
    return eigenvalues(coefficients(Power(0.5), 24, 8192), regime="infinite")


@pytest.fixture(scope="module")
def pwl_spec():
    return eigenvalues(coefficients(finite_pwl(), 12, 8192), regime="finite")


class TestEigenvalues:
    def test_power_half(self, sqrt_spec):
        vals = sqrt_spec.values[:5]
        assert np.allclose(vals, [2.0 ** -(n + 1) for n in range(5)], rtol=1e-6, atol=0)
        assert all(e.multiplicity == 1 for e in sqrt_spec.eigenvalues)

    def test_finite_map(self, pwl_spec):
        expected = [(2 + math.sqrt(2)) / 4, (2 - math.sqrt(2)) / 4]
        assert pwl_spec.count == 2
        assert np.allclose(pwl_spec.values, expected, atol=1e-12)

    def test_quasinilpotent_is_empty(self):
        spec = eigenvalues(coefficients(identity_map(), 12, 2048), regime="quasinilpotent")
        assert len(spec) == 0 and partial_trace(spec, 1e-4) == 0

    def test_constant_one(self):
        spec = eigenvalues(coefficients(constant_one_map(), 6, 1024))
        assert spec.values == pytest.approx([1.0])
        assert power_sum(spec, 2) == pytest.approx(1.0)

    def test_first_ten_accurate(self, sqrt_spec):
        for n, e in enumerate(sqrt_spec.eigenvalues[:10]):
            assert e.value == pytest.approx(2.0 ** -(n + 1), rel=1e-8)
        # |D(mu)| is rounding-dominated once mu is large; only the leading roots are judged
        assert all(e.residual < 1e-6 for e in sqrt_spec.eigenvalues[:8])

    def test_sorted_and_conjugates_adjacent(self):
        # coefficients of (1 - mu/z)(1 - mu/conj z)(1 - mu/2): complex pair plus a real root
        z = 1.5 + 0.5j
        poly = np.polynomial.polynomial.polyfromroots([z, z.conjugate(), 2.0])
        poly = (poly / poly[0]).real
        a = tuple(float(c * (-1) ** i) for i, c in enumerate(poly)) + (0.0, 0.0)
        series = FredholmSeries(a, (0.0,) * len(a), 1024)
        spec = eigenvalues(series)
        vals = spec.values
        assert np.all(np.diff(np.abs(vals)) <= 1e-15)
        assert {complex(np.round(v, 12)) for v in vals[:2]} == \
            {complex(np.round(1 / z, 12)), complex(np.round(1 / z.conjugate(), 12))}
        assert spec.eigenvalues[0].unconfirmed and not spec.eigenvalues[2].unconfirmed

    def test_double_root_merges(self):
        # D(mu) = (1 - mu/2)^2: eigenvalue 1/2 twice
        series = FredholmSeries((1.0, 1.0, 0.25, 0.0, 0.0), (0.0,) * 5, 1024)
        spec = eigenvalues(series)
        assert spec.count == 2 and len(spec) == 1
        assert spec.eigenvalues[0].multiplicity == 2
        assert spec.values[0] == pytest.approx(0.5, rel=1e-6)

    def test_convergence_error(self):
        series = FredholmSeries((1.0, 0.0, 0.0), (0.0, 1e-3, 1e-3), 1024)
        with pytest.raises(ConvergenceError):
            eigenvalues(series, regime="infinite")

    def test_order_too_small(self):
        with pytest.raises(ParameterError):
            eigenvalues(FredholmSeries((1.0, 1.0), (0.0, 0.0), 1024))

    def test_no_negative_real(self, sqrt_spec, pwl_spec):
        for spec in (sqrt_spec, pwl_spec):
            for v in spec.values:
                assert not (abs(v.imag) <= 1e-8 and v.real < 0)

    def test_top_exceeds_radius_bound(self, sqrt_spec, pwl_spec):
        for spec, phi in ((sqrt_spec, Power(0.5)), (pwl_spec, finite_pwl())):
            top = spec.values[0]
            assert top.imag == 0 and top.real > 0
            assert top.real >= spectral_radius_bound(phi) - 1e-9


class TestTraces:
    def test_partial_trace_power(self, sqrt_spec):
        assert partial_trace(sqrt_spec, 1e-4).real == pytest.approx(1 - 2.0 ** -13, abs=1e-9)

    def test_partial_trace_finite(self, pwl_spec):
        for eps in (1e-6, 0.1, 0.14):
            assert partial_trace(pwl_spec, eps).real == pytest.approx(1.0, abs=1e-12)

    def test_empty(self):
        assert partial_trace(Spectrum(()), 1e-4) == 0

    def test_power_sums(self, sqrt_spec):
        assert power_sum(sqrt_spec, 2).real == pytest.approx(1 / 3, abs=1e-9)
        assert power_sum(sqrt_spec, 3).real == pytest.approx(1 / 7, abs=1e-9)

    def test_geometric_tail(self, sqrt_spec, pwl_spec):
        eps = 1e-4
        assert partial_trace(sqrt_spec, eps).real + geometric_tail(sqrt_spec, eps) == \
            pytest.approx(1.0, abs=1e-9)
        assert geometric_tail(pwl_spec, eps) == 0.0

    def test_summability_proxy(self):
        # sum |lambda|^1.1 grows monotonically with M and stays below the full series
        bound = 0.5 ** 1.1 / (1 - 0.5 ** 1.1)
        sums = []
        for m in (6, 12, 24, 48):
            spec = eigenvalues(coefficients(Power(0.5), m, 8192))
            sums.append(float(np.sum(np.abs(spec.expanded()) ** 1.1)))
        assert all(b >= a - 1e-12 for a, b in zip(sums, sums[1:]))
        assert sums[-1] <= bound + 1e-9
        assert sums[-1] - sums[-2] < 1e-3


class TestRadiusBound:
    def test_examples(self):
        assert spectral_radius_bound(Power(0.5)) == pytest.approx(0.25, abs=1e-12)
        assert spectral_radius_bound(identity_map()) == 0.0
        assert spectral_radius_bound(finite_pwl()) == pytest.approx(0.5, abs=1e-15)


class TestSerialisation:
    def test_json(self, sqrt_spec):
        d = json.loads(sqrt_spec.to_json())
        assert d["regime"] == "infinite"
        assert d["eigenvalues"][0]["re"] == pytest.approx(0.5)
        assert set(d["eigenvalues"][0]) >= {"re", "im", "multiplicity", "residual", "stability"}

    def test_csv(self, pwl_spec):
        rows = list(csv.reader(io.StringIO(pwl_spec.to_csv())))
        assert rows[0] == ["re", "im", "multiplicity", "residual", "stability"]
        assert len(rows) == 3
        assert float(rows[1][0]) == pytest.approx((2 + math.sqrt(2)) / 4)


class TestAgainstNystrom:
    def test_top_five(self, sqrt_spec, nystrom_cache):
        ref = nystrom_cache.eigs("power0.5", Power(0.5), 2048, 20)
        for e in sqrt_spec.eigenvalues[:5]:
            assert np.min(np.abs(ref - e.value)) <= max(1e-3, 10 * e.residual)


class TestAnalyze:
    def test_finite_count_bounded_by_n(self):
        phi = PiecewiseLinear([(0.0, 0.3), (0.4, 0.6), (0.7, 1.0), (1.0, 1.0)])
        res = analyze(phi, 12, 4096)
        assert res.classification.iterate_count_N == 4
        assert res.spectrum.count <= 4
        assert partial_trace(res.spectrum, 1e-8).real == pytest.approx(1.0, abs=1e-6)

    def test_adaptive_grows_order(self):
        res = analyze(Power(0.7), adaptive=True)
        orders = [m for m, _ in res.history]
        assert orders[0] == 24 and len(orders) > 1
        assert res.spectrum.count >= res.history[0][1]

    def test_eigenvalues_are_roots(self, sqrt_spec):
        series = coefficients(Power(0.5), 24, 8192)
        for e in sqrt_spec.eigenvalues[:8]:
            assert abs(det_eval(series, 1 / e.value)) <= 2 * e.residual + 1e-12


def test_estimate_to_dict():
    d = EigenvalueEstimate(0.5 + 0j).to_dict()
    assert d["re"] == 0.5 and d["im"] == 0.0 and d["multiplicity"] == 1
