import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from vphi.fredholm import coefficients
from vphi.nystrom import build
from vphi.phi_map import PiecewiseLinear, Power, SampledTable, iterate

unit = st.floats(0.0, 1.0, allow_nan=False)


@st.composite
def knots(draw, min_gap=0.02):
    """Strictly increasing x from 0 to 1 with nondecreasing y in [0, 1] ending at 1."""
    k = draw(st.integers(3, 8))
    w = np.array(draw(st.lists(st.floats(0.1, 1.0), min_size=k - 1, max_size=k - 1)))
    x = np.concatenate([[0.0], np.cumsum(min_gap + (1 - min_gap * (k - 1)) * w / w.sum())])
    x[-1] = 1.0
    y0 = draw(st.sampled_from([0.0, 0.0, 0.1, 0.3]))
    inc = np.array(draw(st.lists(st.floats(0.0, 1.0), min_size=k - 1, max_size=k - 1)))
    inc = inc / inc.sum() if inc.sum() > 0 else np.full(k - 1, 1.0 / (k - 1))
    y = np.concatenate([[y0], y0 + np.cumsum(inc) * (1 - y0)])
    y[-1] = 1.0
    return list(zip(x, np.minimum(y, 1.0)))


maps = st.one_of(
    knots().map(SampledTable),
    knots().map(PiecewiseLinear),
    st.floats(0.05, 0.95).map(Power),
)


@settings(max_examples=60, deadline=None)
@given(maps, st.lists(unit, min_size=2, max_size=50))
def test_monotone(phi, xs):
    xs = np.sort(xs)
    assert np.all(np.diff(phi(xs)) >= -1e-12)


@settings(max_examples=60, deadline=None)
@given(maps, st.lists(unit, min_size=1, max_size=50))
def test_inverse_round_trip(phi, xs):
    xs = np.asarray(xs)
    y = phi(xs)
    ok = (y > phi.lower) & (y < phi.upper) & (phi.derivative(xs) > 1e-6)
    if np.any(ok):
        assert np.max(np.abs(phi.inverse(y[ok]) - xs[ok])) <= 1e-8


@settings(max_examples=60, deadline=None)
@given(maps, st.integers(1, 6), st.integers(1, 6), st.lists(unit, min_size=1, max_size=20))
def test_iterate_composes(phi, n, m, xs):
    xs = np.asarray(xs)
    assert np.allclose(iterate(phi, n + m, xs), iterate(phi, n, iterate(phi, m, xs)),
                       rtol=0, atol=1e-10)


@settings(max_examples=25, deadline=None)
@given(maps, st.sampled_from([16, 33, 64]))
def test_nystrom_rows_integrate_phi(phi, m):
    op = build(phi, m)
    assert np.allclose(op.entries.sum(axis=1), phi(op.nodes), rtol=0, atol=1e-13 * m)
    assert op.entries.min() >= 0.0


@settings(max_examples=10, deadline=None)
@given(knots(min_gap=0.05).map(SampledTable))
def test_grid_refinement_within_error(phi):
    coarse, fine = coefficients(phi, 4, 2048), coefficients(phi, 4, 4096)
    assert np.all(np.abs(coarse.a - fine.a) <= coarse.err)
