import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hilbertdyn.errors import CoincidentPointsError, DegenerateBodyError, DimensionMismatch, NotInteriorError, NotOnBoundaryError
from hilbertdyn.geometry import (
    Ball,
    Ellipsoid,
    HPolytope,
    Location,
    Polydisc,
    Simplex,
    active_facets,
    body_from_dict,
    boundary_grid,
    ch_facets,
    ch_of_ch_facets,
    ch_of_ch_membership,
    chord_endpoints,
    classify,
    diameter,
    diameter_estimate,
    in_ch,
    interval,
    random_polytope,
    sample_boundary_batch,
    sample_interior,
    sample_interior_batch,
    segment_on_boundary,
    snap_to_face,
    unit_disc,
    unit_square,
)

RIGHT, TOP, LEFT, BOTTOM = 0, 1, 2, 3
coord = st.floats(-0.95, 0.95)
edge = st.floats(-1.0, 1.0)


def square_boundary(side, s):
    return np.array([[1.0, s], [s, 1.0], [-1.0, s], [s, -1.0]][side])


def test_classify_examples():
    sq = unit_square()
    assert classify(sq, [0, 0]) is Location.INTERIOR
    assert classify(sq, [1, 0]) is Location.BOUNDARY
    assert classify(sq, [2, 0]) is Location.EXTERIOR
    with pytest.raises(DimensionMismatch):
        classify(sq, [0, 0, 0])


def test_chord_examples():
    c = chord_endpoints(interval(), [0.0], [0.5])
    assert c.a == pytest.approx([-1.0]) and c.b == pytest.approx([1.0])
    c = chord_endpoints(unit_square(), [0, 0], [0.5, 0])
    assert np.allclose(c.a, [-1, 0]) and np.allclose(c.b, [1, 0])
    c = chord_endpoints(Simplex(2), [0.25, 0.25], [0.5, 0.25])
    assert np.allclose(c.a, [0, 0.25], atol=1e-15) and np.allclose(c.b, [0.75, 0.25])


def test_chord_errors():
    sq = unit_square()
    with pytest.raises(CoincidentPointsError):
        chord_endpoints(sq, [0, 0], [0, 0])
    with pytest.raises(NotInteriorError):
        chord_endpoints(sq, [0, 0], [1, 0])


@given(coord, coord, coord, coord)
def test_chord_order_and_symmetry(x1, x2, y1, y2):
    sq = unit_square()
    x, y = np.array([x1, x2]), np.array([y1, y2])
    if np.linalg.norm(x - y) <= 1e-9:
        return
    c = chord_endpoints(sq, x, y)
    assert c.t_lo < 0 < 1 < c.t_hi
    assert classify(sq, c.a) is Location.BOUNDARY and classify(sq, c.b) is Location.BOUNDARY
    r = chord_endpoints(sq, y, x)
    assert np.allclose(c.a, r.b, atol=1e-9) and np.allclose(c.b, r.a, atol=1e-9)


def test_ellipse_chord_on_boundary():
    e = Ellipsoid([0.5, -0.2], np.diag([1.0, 4.0]))
    rng = np.random.default_rng(0)
    X = sample_interior_batch(e, 50, rng)
    Y = sample_interior_batch(e, 50, rng)
    for x, y in zip(X, Y):
        c = chord_endpoints(e, x, y)
        assert abs(e.residual(c.a[None])[0]) < 1e-9 and abs(e.residual(c.b[None])[0]) < 1e-9


def test_active_facets_examples():
    sq = unit_square()
    assert tuple(active_facets(sq, [1, 0])) == (RIGHT,)
    assert set(active_facets(sq, [1, 1])) == {RIGHT, TOP}
    s2 = Simplex(2)
    f = active_facets(s2, [0.5, 0.5])
    assert len(f) == 1
    i = f.facet_indices[0]
    assert np.allclose(s2.A[i] / s2.A[i][0], [1, 1])
    with pytest.raises(NotOnBoundaryError):
        active_facets(sq, [0, 0])


def test_in_ch_examples():
    sq = unit_square()
    assert in_ch(sq, [1, 0.5], [1, 0])
    assert not in_ch(sq, [-1, 0], [1, 0])
    assert in_ch(sq, [-1, 0.3], [-1, 0.3])
    with pytest.raises(NotOnBoundaryError):
        in_ch(sq, [0, 0], [1, 0])


def test_ch_of_ch_examples():
    sq = unit_square()
    xi = [1, 0]
    assert ch_of_ch_membership(sq, [0, 1], xi)
    assert not ch_of_ch_membership(sq, [-1, 0.5], xi)
    assert ch_of_ch_membership(sq, xi, xi)
    assert tuple(ch_facets(sq, xi)) == (RIGHT,)
    assert tuple(ch_of_ch_facets(sq, xi)) == (RIGHT, TOP, BOTTOM)


@given(st.integers(0, 3), edge, st.integers(0, 3), edge)
def test_in_ch_symmetric(s1, a, s2, b):
    sq = unit_square()
    x, y = square_boundary(s1, a), square_boundary(s2, b)
    assert in_ch(sq, x, y) == in_ch(sq, y, x)
    assert ch_of_ch_membership(sq, x, y) == ch_of_ch_membership(sq, y, x)


@given(st.integers(0, 3), edge, st.integers(0, 3), edge)
def test_in_ch_matches_sampled_segment(s1, a, s2, b):
    # the exact facet test agrees with dense sampling of the segment
    sq = unit_square()
    x, y = square_boundary(s1, a), square_boundary(s2, b)
    s = np.linspace(0, 1, 257)[:, None]
    P = s * x + (1 - s) * y
    sampled = bool(np.all(np.abs(sq.residual(P)) <= 1e-12))
    assert in_ch(sq, x, y) == sampled


def test_segment_on_boundary_examples():
    sq = unit_square()
    assert segment_on_boundary(sq, [1, -1], [1, 1])
    assert not segment_on_boundary(sq, [1, 0], [-1, 0])
    d = unit_disc()
    B = sample_boundary_batch(d, 40, 3)
    for x, y in zip(B[:-1], B[1:]):
        assert not segment_on_boundary(d, x, y)


def test_diameter_examples():
    assert diameter(unit_square()) == pytest.approx(2 * np.sqrt(2))
    assert diameter(Ball([0, 0], 1.0)) == 2.0
    assert diameter(interval()) == 2.0
    assert diameter_estimate(Simplex(2)).exact
    assert diameter(Simplex(2)) == pytest.approx(np.sqrt(2))


def test_sampling_interior_and_deterministic():
    for body in (unit_square(), Simplex(3), unit_disc(), Polydisc(2), random_polytope(6, 2, seed=1)):
        X = sample_interior_batch(body, 500, 11)
        assert X.shape == (500, body.dim)
        assert all(body.classify(x) is Location.INTERIOR for x in X[:50])
        assert np.all(body.residual(X) < 0)
        assert np.array_equal(X, sample_interior_batch(body, 500, 11))
    assert np.array_equal(sample_interior(unit_square(), 5), sample_interior(unit_square(), 5))


def test_boundary_samples_on_boundary():
    for body in (unit_square(), Simplex(2), unit_disc(), Ellipsoid([0, 0], np.diag([1.0, 4.0])), Polydisc(2)):
        B = boundary_grid(body, 64)
        assert np.all(np.abs(body.residual(B)) <= 1e-9)


def test_degenerate_polytopes_rejected():
    with pytest.raises(DegenerateBodyError):
        HPolytope([[1.0, 0.0]], [1.0])  # unbounded
    with pytest.raises(DegenerateBodyError):
        HPolytope([[1.0], [-1.0]], [0.0, 0.0])  # empty interior


def test_random_polytope_has_all_facets():
    p = random_polytope(6, 2, seed=1)
    assert p.vertices is not None and len(p.vertices) == 6


def test_snap_to_face_vertex_exact():
    s2 = Simplex(2)
    z = snap_to_face(s2, [1 - 1e-5, 5e-6], 1e-3)
    assert np.array_equal(z, [1.0, 0.0])
    sq = unit_square()
    z = snap_to_face(sq, [1 - 1e-4, 0.3], 1e-3)
    assert np.allclose(z, [1.0, 0.3])


def test_body_from_dict_roundtrip():
    for body in (unit_square(), Simplex(2), interval(), unit_disc(), Polydisc(2), Ellipsoid([0, 1], np.diag([1.0, 2.0]))):
        spec = json.loads(json.dumps(body.to_dict()))
        again = body_from_dict(spec)
        X = sample_interior_batch(body, 20, 0)
        assert np.allclose(body.residual(X), again.residual(X))
    with pytest.raises(DegenerateBodyError):
        body_from_dict({"type": "torus"})
    with pytest.raises(DegenerateBodyError):
        body_from_dict({"type": "hpolytope", "A": [[1, 0]]})
