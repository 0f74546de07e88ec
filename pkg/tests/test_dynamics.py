import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hilbertdyn.dynamics import (
    SHIPPED_MAPS,
    AffineContraction,
    Boundedness,
    Composition,
    MatrixSemigroup,
    ProjectiveLinear,
    RadialStretch,
    _greedy_labels,
    attractor,
    birkhoff_coefficient,
    bounded_seed_set,
    classify_boundedness,
    cluster_points,
    dense_time_grid,
    denjoy_wolff,
    escape_slope,
    fixed_point_search,
    hausdorff,
    identity_map,
    iterate,
    iterate_batch,
    merge_clusters,
    omega_limit,
    semigroup_apply,
    semigroup_orbit,
    step_monotone,
    verify_nonexpansive,
)
from hilbertdyn.errors import BoundedRegimeError, ConfigError, DomainEscapeError, MultipleClustersError
from hilbertdyn.geometry import Location, Simplex, unit_square
from hilbertdyn.linalg import expm, projective_expm
from hilbertdyn.metrics import MetricInstance

PARABOLIC = [[1, 1], [0, 1]]
PERRON = [[2, 1], [1, 2]]


def test_apply_oracles():
    assert np.allclose(ProjectiveLinear(PARABOLIC).apply([0.5, 0.5]), [2 / 3, 1 / 3])
    sg = MatrixSemigroup([[0, 1], [0, 0]])
    assert np.allclose(semigroup_apply(sg, 1.0, [0.5, 0.5]), [2 / 3, 1 / 3])
    P = sg.propagator(3.0)
    assert np.allclose(P / P[0, 0], [[1, 3], [0, 1]])
    assert np.array_equal(semigroup_apply(sg, 0.0, [0.3, 0.7]), [0.3, 0.7])


def test_map_validation():
    with pytest.raises(ValueError):
        ProjectiveLinear([[1, -1], [0, 1]])
    with pytest.raises(ValueError):
        ProjectiveLinear([[1, 0], [0, 0]])
    with pytest.raises(ValueError):
        MatrixSemigroup([[0, -1], [0, 0]])
    with pytest.raises(DomainEscapeError):
        AffineContraction([[2, 0], [0, 2]], [0, 0], unit_square())


def test_composition_order():
    sq = unit_square()
    shrink = AffineContraction(0.5 * np.eye(2), [0, 0], sq)
    shift = AffineContraction(np.eye(2) * 0.5, [0.5, 0], sq)
    x = np.array([0.4, -0.2])
    assert np.allclose(Composition([shrink, shift]).apply(x), shift.apply(shrink.apply(x)))
    assert np.allclose(identity_map(sq).apply(x), x)


@given(st.floats(0.05, 3.0), st.floats(0.05, 3.0), st.floats(0.01, 0.99))
def test_semigroup_law(s, t, x1):
    sg = MatrixSemigroup([[-1, 2, 0], [0.5, -1, 1], [1, 0, -2]])
    x = np.array([x1, (1 - x1) / 2, (1 - x1) / 2])
    assert np.allclose(sg.flow(s + t, x), sg.flow(t, sg.flow(s, x)), atol=1e-12)


@given(arrays(float, (3, 3), elements=st.floats(-3, 3)), st.floats(0.01, 5))
def test_expm_matches_scipy(A, t):
    E = expm(t * A)
    ref = scipy.linalg.expm(t * A)
    assert np.allclose(E, ref, rtol=1e-10, atol=1e-12 * np.abs(ref).max())


def test_projective_expm_large_time():
    E, log_scale = projective_expm(np.array([[0.0, 1.0], [0.0, 0.0]]), 1e6)
    assert np.allclose(E / E[0, 1], [[1e-6, 1], [0, 1e-6]])
    assert np.isfinite(log_scale)


def test_semigroup_orbit_matches_time_map():
    sg = MatrixSemigroup([[0, 1], [0, 0]])
    t0 = 0.37
    tr = semigroup_orbit(sg, [0.3, 0.7], t0 * np.arange(200))
    it = iterate(sg.time_map(t0), [0.3, 0.7], 199)
    assert np.max(np.abs(tr.points - it.points)) < 1e-10


def test_parabolic_orbit_unbounded():
    mp = ProjectiveLinear(PARABOLIC)
    tr = iterate(mp, [0.5, 0.5], 10_000)
    assert len(tr) == 10_001 and not tr.truncated
    assert np.all(np.diff(tr.d_to_start) > 0)
    assert np.allclose(tr.points[-1], [1, 0], atol=1e-3)
    n = 10_000
    # A^n (1, 1) = (n + 1, 1)
    assert np.allclose(tr.points[-1], np.array([n + 1, 1]) / (n + 2), atol=1e-12)
    assert classify_boundedness(mp.default_metric(), tr) is Boundedness.UNBOUNDED
    _, slope = escape_slope(tr)
    assert slope == pytest.approx(1.0, abs=0.1)
    assert step_monotone(tr)


def test_perron_bounded_and_fixed_point():
    mp = ProjectiveLinear(PERRON)
    tr = iterate(mp, [0.9, 0.1], 500)
    assert classify_boundedness(mp.default_metric(), tr) is Boundedness.BOUNDED
    fp = fixed_point_search(None, mp, [[0.9, 0.1]])
    assert np.allclose(fp.point, [0.5, 0.5]) and fp.residual < 1e-10
    with pytest.raises(BoundedRegimeError):
        denjoy_wolff(None, mp, [[0.9, 0.1]], [[0.9, 0.1]], 500)


def test_parabolic_has_no_interior_fixed_point():
    assert fixed_point_search(None, ProjectiveLinear(PARABOLIC), [[0.5, 0.5]], max_steps=2000) is None


def test_short_trace_rejected():
    tr = iterate(ProjectiveLinear(PERRON), [0.9, 0.1], 10)
    with pytest.raises(ValueError):
        classify_boundedness(None, tr)


def test_single_window_is_undecided():
    for A in (PARABOLIC, PERRON):
        tr = iterate(ProjectiveLinear(A), [0.5, 0.5], 100)
        assert classify_boundedness(None, tr) is Boundedness.UNDECIDED


def test_omega_limits():
    om = omega_limit(ProjectiveLinear(PARABOLIC), [0.5, 0.5], 10_000)
    assert len(om) == 1 and np.allclose(om[0].point, [1, 0], atol=1e-3)
    om = omega_limit(ProjectiveLinear(PERRON), [0.2, 0.8], 2000)
    assert len(om) == 1 and np.allclose(om[0].point, [0.5, 0.5], atol=1e-9)
    om = omega_limit(ProjectiveLinear(SHIPPED_MAPS["cyclic-3"]), [0.2, 0.3, 0.5], 300)
    assert len(om) == 3


def test_attractor_parabolic_single_cluster():
    mp = ProjectiveLinear(PARABOLIC)
    S = bounded_seed_set(mp.default_metric(), 100, 1.0, 0)
    est = attractor(mp, S, 10_000)
    assert est.boundedness is Boundedness.UNBOUNDED
    assert len(est.omega_points) == 1 and len(est.omega_points[0].seeds) == 100
    assert np.array_equal(est.dw_point, [1.0, 0.0])
    body = mp.default_metric().body
    assert body.classify(mp.default_metric().to_body(est.dw_point[None])[0]) is Location.BOUNDARY
    d = est.to_dict()
    assert d["boundedness"] == "unbounded" and d["dw_point"] == [1.0, 0.0]


def test_denjoy_wolff_semigroup_and_multiple_clusters():
    sg = MatrixSemigroup([[0, 1], [0, 0]])
    S = bounded_seed_set(sg.default_metric(), 30, 1.0, 1)
    res = denjoy_wolff(None, sg, S, S, t_grid=np.arange(0.0, 1001.0))
    assert np.array_equal(res.xi, [1.0, 0.0]) and res.sup_dist_curve[-1] < 1e-3
    from hilbertdyn.verify import two_attractor_map

    mp = two_attractor_map()
    seeds = np.array([[0.5, 0.0], [-0.9, 0.0]])
    with pytest.raises(MultipleClustersError):
        denjoy_wolff(None, mp, seeds, seeds, 2000)


def test_nonexpansive_shipped_and_birkhoff():
    for A in SHIPPED_MAPS.values():
        rep = verify_nonexpansive(None, ProjectiveLinear(A), 2000, 0)
        assert rep.max_ratio <= 1 + 1e-9 and not rep.violations
    k = birkhoff_coefficient(PERRON)
    delta = math.log(4)
    assert k == pytest.approx(math.tanh(delta / 4))
    assert verify_nonexpansive(None, ProjectiveLinear(PERRON), 5000, 0).max_ratio <= k + 1e-9
    assert birkhoff_coefficient(PARABOLIC) == 1.0


def test_radial_stretch_flagged():
    rep = verify_nonexpansive(None, RadialStretch(unit_square()), 5000, 0)
    assert rep.violations and rep.max_ratio > 1
    x, y, ratio = rep.violations[0]
    assert ratio == rep.max_ratio


def test_iterate_batch_matches_single():
    mp = ProjectiveLinear(SHIPPED_MAPS["positive-3"])
    X = np.array([[0.2, 0.3, 0.5], [0.6, 0.3, 0.1]])
    batch = iterate_batch(mp, X, 50)
    for x, tr in zip(X, batch):
        one = iterate(mp, x, 50)
        assert np.allclose(one.points, tr.points, rtol=0, atol=1e-15)
        assert np.allclose(one.step_d, tr.step_d, rtol=0, atol=1e-13)


def test_dense_time_grid_avoids_period():
    g = dense_time_grid(1.0, 100)
    assert g[0] == 0 and g[-1] >= 100
    frac = np.mod(g[1:], 1.0)
    assert np.min(np.minimum(frac, 1 - frac)) > 1e-3


def test_hausdorff():
    P = np.array([[0.0, 0.0], [1.0, 0.0]])
    assert hausdorff(P, P) == 0.0
    assert hausdorff(P, [[0.0, 0.0]]) == 1.0


def _sequential_greedy(Q, r):
    labels = -np.ones(len(Q), dtype=int)
    k = 0
    for i in range(len(Q)):
        if labels[i] >= 0:
            continue
        for j in range(i, len(Q)):
            if labels[j] < 0 and np.linalg.norm(Q[j] - Q[i]) <= r:
                labels[j] = k
        k += 1
    return labels


@given(arrays(float, st.tuples(st.integers(1, 40), st.just(2)), elements=st.floats(0, 1)), st.floats(0.01, 0.5))
def test_greedy_labels_match_sequential_rule(Q, r):
    assert np.array_equal(_greedy_labels(Q, r), _sequential_greedy(Q, r))


@given(arrays(float, st.tuples(st.integers(1, 30), st.just(2)), elements=st.floats(0, 1)))
def test_clusters_cover_points(P):
    cl = cluster_points(P, 0.1)
    assert sum(c.multiplicity for c in cl) == len(P)
    merged = merge_clusters([(0, cl), (1, cluster_points(P[::-1], 0.1))], 0.1)
    assert sum(c.multiplicity for c in merged) == 2 * len(P)


def test_config_error_is_value_error():
    assert issubclass(ConfigError, ValueError)


def test_simplex_metric_default():
    m = ProjectiveLinear(PARABOLIC).default_metric()
    assert isinstance(m, MetricInstance) and isinstance(m.body, Simplex) and m.point_dim == 2
