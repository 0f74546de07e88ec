import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hilbertdyn.errors import NotInteriorError
from hilbertdyn.geometry import Simplex, interval, sample_interior_batch, unit_disc, unit_square
from hilbertdyn.horoballs import (
    ApproachPolicy,
    HoroballSpec,
    horoball_grid,
    horofunction_estimate,
    horofunction_values,
    intersection_shrink_check,
    star_shape_check,
)
from hilbertdyn.metrics import MetricInstance, MetricKind
from hilbertdyn.verify import WarpedEuclidean

coord = st.floats(-0.9, 0.9)


def test_interval_closed_form_examples():
    m = MetricInstance(interval())
    spec = HoroballSpec([0.0], [1.0], 0.0)
    e = horofunction_estimate(m, spec, [0.2])
    assert e.lo == pytest.approx(math.log(0.8 / 1.2), abs=1e-6)
    assert e.member and e.stable
    e = horofunction_estimate(m, spec, [-0.2])
    assert e.lo == pytest.approx(math.log(1.2 / 0.8), abs=1e-6)
    assert not e.member


def test_interval_near_center_goes_to_minus_infinity():
    m = MetricInstance(interval())
    y = np.array([[0.9], [0.99], [0.999]])
    lo, _ = horofunction_values(m, [0.0], [1.0], y)
    assert np.all(np.diff(lo) < 0) and lo[-1] < -7


def test_invalid_inputs():
    m = MetricInstance(unit_square())
    with pytest.raises(NotInteriorError):
        horofunction_estimate(m, HoroballSpec([1.0, 0.0], [1.0, 0.0], 0.0), [0.0, 0.0])
    with pytest.raises(ValueError):
        ApproachPolicy(lam=1.0)
    with pytest.raises(ValueError):
        ApproachPolicy(steps=4, tail=8)


@given(coord, coord, st.floats(-3, 3), st.floats(0, 3))
def test_big_membership_monotone_in_radius(y1, y2, r, dr):
    m = MetricInstance(unit_square())
    y = [y1, y2]
    small = horofunction_estimate(m, HoroballSpec([0, 0], [1, 0.3], r), y)
    large = horofunction_estimate(m, HoroballSpec([0, 0], [1, 0.3], r + dr), y)
    assert not small.member or large.member


@given(coord, coord, st.floats(-3, 3))
def test_small_inside_big(y1, y2, r):
    m = MetricInstance(unit_square())
    e_small = horofunction_estimate(m, HoroballSpec([0, 0], [1, 1], r, "small"), [y1, y2])
    e_big = horofunction_estimate(m, HoroballSpec([0, 0], [1, 1], r, "big"), [y1, y2])
    assert e_small.lo <= e_small.hi
    assert not e_small.member or e_big.member


@given(coord, coord, coord, coord)
def test_pole_shift_bound(y1, y2, p1, p2):
    m = MetricInstance(unit_square())
    y = np.array([[y1, y2]])
    lo0, hi0 = horofunction_values(m, [0.0, 0.0], [1.0, 0.0], y)
    lo1, hi1 = horofunction_values(m, [p1, p2], [1.0, 0.0], y)
    d = m.distance([0.0, 0.0], [p1, p2])
    assert abs(lo0[0] - lo1[0]) <= d + 1e-9
    assert abs(hi0[0] - hi1[0]) <= d + 1e-9


def test_star_shape_square_and_disc():
    for body, center in ((unit_square(), [1.0, 0.3]), (unit_square(), [1.0, 1.0]), (unit_disc(), [0.6, 0.8])):
        rep = star_shape_check(MetricInstance(body), HoroballSpec([0.1, -0.2], center, 0.5), 60, 8, 5)
        assert rep.n_members > 0
        assert rep.ok, rep.violations[:3]


def test_star_shape_flags_warped_metric():
    rep = star_shape_check(WarpedEuclidean(unit_square()), HoroballSpec([0.0, 0.0], [1.0, 0.0], 0.0), 100, 10, 5)
    assert rep.violations


def test_shrink_interval_matches_closed_form():
    m = MetricInstance(interval())
    radii = [4, 2, 0, -2, -4, -8]
    res = intersection_shrink_check(m, [0.0], [1.0], radii, 400)
    exact = [1 - math.tanh(-r / 2) for r in radii]
    assert np.allclose(res.diameters, exact, atol=2 * res.resolution)
    assert res.nonincreasing()


def test_shrink_square_facet_does_not_shrink():
    # centered on a facet, the trace keeps the whole facet at every level
    res = intersection_shrink_check(MetricInstance(unit_square()), [0.0, 0.0], [1.0, 0.0], [4, 0, -4, -8], 400)
    assert res.diameters[-1] > 1.5


def test_shrink_rejects_unsorted_radii():
    with pytest.raises(ValueError):
        intersection_shrink_check(MetricInstance(interval()), [0.0], [1.0], [0, 2], 50)


def test_horoball_grid_on_cone_metric():
    m = MetricInstance(Simplex(1), MetricKind.HILBERT_CONE)
    spec = HoroballSpec([0.5, 0.5], [1.0, 0.0], 0.0)
    pts, lo, hi, member = horoball_grid(m, spec, 21)
    assert pts.shape == (21, 1)
    # body coordinate x1 in (0, 1); members are the half closer to the center
    assert np.all(member == (pts[:, 0] >= 0.5 - 1e-12))
    assert np.all(lo <= hi + 1e-12)


def test_horoball_grid_square_matches_estimates():
    m = MetricInstance(unit_square())
    spec = HoroballSpec([0.0, 0.0], [1.0, 1.0], -0.5)
    pts, lo, hi, member = horoball_grid(m, spec, 9)
    for p, l_, mem in zip(pts[::7], lo[::7], member[::7]):
        e = horofunction_estimate(m, spec, p)
        assert e.lo == pytest.approx(l_) and e.member == mem


def test_horofunction_values_vectorized():
    m = MetricInstance(unit_square())
    Y = sample_interior_batch(m.body, 30, 2)
    lo, hi = horofunction_values(m, [0, 0], [-1, 0.5], Y)
    for y, l_, h_ in zip(Y, lo, hi):
        l1, h1 = horofunction_values(m, [0, 0], [-1, 0.5], y[None])
        assert l1[0] == l_ and h1[0] == h_
