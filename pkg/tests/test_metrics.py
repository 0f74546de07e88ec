import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from hilbertdyn.errors import NotInteriorError, PrecisionWarning
from hilbertdyn.geometry import Ellipsoid, Polydisc, Simplex, interval, sample_interior_batch, unit_disc, unit_square
from hilbertdyn.metrics import (
    MetricInstance,
    MetricKind,
    hilbert_cone,
    hilbert_cone_batch,
    hilbert_cross_ratio,
    hilbert_norm_lower_bound,
    kobayashi_lower_bound,
    lift,
    metric_from_dict,
    poincare_disc,
    polydisc_distance,
)

LOG3 = 1.0986122886681098
coord = st.floats(-0.95, 0.95)
pos = st.floats(0.05, 20.0)
disc_pt = st.tuples(st.floats(0, 0.95), st.floats(0, 2 * math.pi)).map(lambda rt: rt[0] * complex(math.cos(rt[1]), math.sin(rt[1])))


def test_cross_ratio_examples():
    assert hilbert_cross_ratio(interval(), [0.0], [0.5]) == LOG3
    assert hilbert_cross_ratio(unit_square(), [0, 0], [0.5, 0]) == pytest.approx(math.log(3), abs=1e-15)
    assert hilbert_cross_ratio(unit_square(), [0.3, 0.1], [0.3, 0.1]) == 0.0
    with pytest.raises(NotInteriorError):
        hilbert_cross_ratio(unit_square(), [0, 0], [1, 0])


def test_cone_examples():
    assert hilbert_cone([1, 1], [1, 1]) == 0.0
    assert hilbert_cone([1, 1], [2, 1]) == pytest.approx(math.log(2))
    assert hilbert_cone([3, 3], [6, 3]) == pytest.approx(math.log(2))
    with pytest.raises(ValueError):
        hilbert_cone([1, 0], [1, 1])


def test_disc_examples():
    assert poincare_disc(0, 0.5) == pytest.approx(math.atanh(0.5))
    assert poincare_disc(0.3j, 0.3j) == 0.0
    assert poincare_disc(0, 0.5) == pytest.approx(poincare_disc(0.2, (0.5 + 0.2) / (1 + 0.1)), abs=1e-14)
    assert polydisc_distance([0, 0], [0.5, 0]) == pytest.approx(math.atanh(0.5))
    assert polydisc_distance([0j, 0j], [0.5 + 0j, 0.7 + 0j]) == pytest.approx(math.atanh(0.7))
    with pytest.raises(NotInteriorError):
        poincare_disc(0, 1.0)


def test_lower_bound_examples():
    assert kobayashi_lower_bound(2.0, [0, 0], [0, 0]) == 0.0
    assert kobayashi_lower_bound(2.0, [0, 0], [1, 0]) == pytest.approx(math.atanh(0.5))
    with pytest.raises(ValueError):
        kobayashi_lower_bound(2.0, [0, 0], [2, 0])
    assert hilbert_norm_lower_bound(2.0, [0.0], [2.0]) == pytest.approx(2 * math.log(2))
    b = hilbert_norm_lower_bound(2.0, [0.0], [0.5])
    assert b == pytest.approx(2 * math.log(1.25)) and b <= LOG3


@given(st.lists(pos, min_size=3, max_size=3), st.lists(pos, min_size=3, max_size=3), st.lists(pos, min_size=3, max_size=3))
def test_cone_diagonal_invariance(x, y, lam):
    x, y, lam = map(np.array, (x, y, lam))
    assert hilbert_cone(lam * x, lam * y) == pytest.approx(hilbert_cone(x, y), abs=1e-12)
    assert hilbert_cone(2.5 * x, y) == pytest.approx(hilbert_cone(x, y), abs=1e-12)


@given(st.floats(0.01, 0.98), st.floats(0.01, 0.98), st.floats(0.01, 0.98), st.floats(0.01, 0.98))
def test_cross_ratio_matches_cone_on_simplex(a, b, c, d):
    assume(a + b < 0.99 and c + d < 0.99)
    x, y = np.array([a, b]), np.array([c, d])
    assert hilbert_cross_ratio(Simplex(2), x, y) == pytest.approx(hilbert_cone(lift(x), lift(y)), abs=1e-9)


@given(coord, coord, coord, coord, coord, coord)
def test_square_metric_axioms(a, b, c, d, e, f):
    sq = unit_square()
    x, y, z = np.array([a, b]), np.array([c, d]), np.array([e, f])
    dxy = hilbert_cross_ratio(sq, x, y)
    assert dxy >= 0
    assert dxy == pytest.approx(hilbert_cross_ratio(sq, y, x), abs=1e-12)
    assert hilbert_cross_ratio(sq, x, z) <= dxy + hilbert_cross_ratio(sq, y, z) + 1e-9


@given(coord, coord, coord, coord, coord, coord, st.floats(0, 1))
def test_condition_c_ellipse(a, b, c, d, e, f, s):
    el = Ellipsoid([0, 0], np.diag([1.0, 4.0]))
    m = MetricInstance(el)
    x, y, z = (np.array(p) * np.array([0.65, 0.3]) for p in ((a, b), (c, d), (e, f)))
    lhs = m.distance(s * x + (1 - s) * y, z)
    assert lhs <= max(m.distance(x, z), m.distance(y, z)) + 1e-9


@given(disc_pt, disc_pt)
def test_kobayashi_bound_disc(z, w):
    assert math.atanh(abs(z - w) / 2) <= poincare_disc(z, w) + 1e-12


@given(disc_pt, disc_pt, disc_pt)
def test_poincare_triangle_and_mobius(z, w, a):
    assert poincare_disc(z, w) <= poincare_disc(z, a) + poincare_disc(a, w) + 1e-9
    a = 0.5 * a

    def phi(u):
        return (u - a) / (1 - np.conj(a) * u)

    assert poincare_disc(phi(z), phi(w)) == pytest.approx(poincare_disc(z, w), rel=1e-7, abs=1e-9)


def test_poincare_stable_near_circle():
    z, w = 1 - 1e-12, 1 - 2e-12
    assert np.isfinite(poincare_disc(z, w))
    assert poincare_disc(z, w) == pytest.approx(0.5 * math.log(2), rel=1e-3)


def test_near_boundary_warns():
    with pytest.warns(PrecisionWarning):
        hilbert_cross_ratio(interval(), [0.0], [1 - 1e-14])


def test_metric_instance_kinds():
    assert MetricInstance(interval()).distance([0.0], [0.5]) == LOG3
    cone = MetricInstance(Simplex(1), MetricKind.HILBERT_CONE)
    assert cone.point_dim == 2
    assert cone.distance([0.5, 0.5], [2 / 3, 1 / 3]) == pytest.approx(math.log(2))
    P = np.array([[0.2, 0.8], [0.6, 0.4]])
    assert np.allclose(cone.from_body(cone.to_body(P)), P)
    d = MetricInstance(unit_disc(), MetricKind.POINCARE_DISC)
    assert d.distance([0, 0], [0.5, 0]) == pytest.approx(math.atanh(0.5))
    p = MetricInstance(Polydisc(2), MetricKind.POLYDISC)
    assert p.distance([0, 0, 0, 0], [0.5, 0, 0, 0.7]) == pytest.approx(math.atanh(0.7))
    m = metric_from_dict({"kind": "hilbert", "kappa": 0.5}, unit_square())
    assert m.kappa == 0.5 and m.describe()["kind"] == "hilbert"


def test_cone_batch_matches_scalar():
    rng = np.random.default_rng(1)
    X = rng.uniform(0.1, 3, (50, 4))
    Y = rng.uniform(0.1, 3, (50, 4))
    assert np.allclose(hilbert_cone_batch(X, Y), [hilbert_cone(x, y) for x, y in zip(X, Y)])


def test_polydisc_condition_c():
    m = MetricInstance(Polydisc(2), MetricKind.POLYDISC)
    rng = np.random.default_rng(3)
    X, Y, Z = (sample_interior_batch(m.body, 2000, rng) for _ in range(3))
    s = rng.uniform(size=(2000, 1))
    lhs = m.distance_batch(s * X + (1 - s) * Y, Z)
    assert np.all(lhs <= np.maximum(m.distance_batch(X, Z), m.distance_batch(Y, Z)) + 1e-9)
