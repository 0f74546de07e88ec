"""Named property suites with pass/fail verdicts, margins and negative controls.

Every suite pairs its checks with at least one constructed instance that must
be flagged; a suite passes only if its ordinary checks pass and each negative
control fails.  ``worst_margin`` is the largest observed value of
(left side - right side) of the asserted inequality: negative means slack.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .config import ExperimentConfig, task_rng, thread_cap
from .dynamics import (
    SHIPPED_GENERATORS,
    SHIPPED_MAPS,
    Boundedness,
    BoundednessParams,
    FunctionMap,
    MatrixSemigroup,
    ProjectiveLinear,
    RadialStretch,
    RotationSemigroup,
    bounded_seed_set,
    attractor,
    classify_boundedness,
    denjoy_wolff,
    hausdorff,
    iterate,
    omega_from_trace,
    project_to_boundary,
    sample_states,
    semigroup_attractor,
    step_monotone,
    verify_nonexpansive,
)
from .errors import BoundedRegimeError, InconclusiveError, MultipleClustersError
from .geometry import (
    Ellipsoid,
    HPolytope,
    Polydisc,
    Simplex,
    active_facets,
    ch_facets,
    ch_of_ch_membership,
    diameter,
    in_ch,
    interval,
    random_polytope,
    sample_boundary_batch,
    sample_interior_batch,
    segment_on_boundary,
    unit_disc,
    unit_square,
)
from .horoballs import (
    ApproachPolicy,
    HoroballSpec,
    horofunction_values,
    intersection_shrink_check,
    star_shape_check,
    trace_points,
)
from .metrics import MetricInstance, MetricKind, _poincare, hilbert_cone_batch, hilbert_cross_ratio_batch, lift

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


@dataclass
class CheckReport:
    check_name: str
    status: str
    n_samples: int
    n_violations: int
    worst_margin: float
    seed: int = 0
    task: int = 0
    config_digest: str = ""
    justification: str = ""
    negative_control: bool = False
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        """Whether this report is what the suite expects (negative controls must fail)."""
        return self.status == FAIL if self.negative_control else self.status == PASS

    def to_dict(self) -> dict:
        return asdict(self)


def _report(name, n, margins, tol, justification="", details=None, empty_status=INCONCLUSIVE) -> CheckReport:
    margins = np.asarray(margins, dtype=float)
    if margins.size == 0:
        return CheckReport(name, empty_status, int(n), 0, float("-inf"), justification=justification, details=details or {})
    nv = int(np.sum(margins > tol))
    return CheckReport(
        name, FAIL if nv else PASS, int(n), nv, float(np.max(margins)), justification=justification, details=details or {}
    )


# ---------------------------------------------------------------------------
# Metric-like stand-ins used as negative controls
# ---------------------------------------------------------------------------


class _PlainMetric:
    """Minimal metric interface over a body, for constructed counterexamples."""

    def __init__(self, body):
        self.body = body
        self.point_dim = body.dim

    def to_body(self, X):
        return np.asarray(X, dtype=float)

    def from_body(self, X):
        return np.asarray(X, dtype=float)

    def distance(self, x, y):
        return float(self.distance_batch(np.asarray(x)[None, :], np.asarray(y)[None, :])[0])


class EuclideanMetric(_PlainMetric):
    def distance_batch(self, X, Y):
        return np.linalg.norm(np.atleast_2d(X) - np.atleast_2d(Y), axis=-1)


class WarpedEuclidean(_PlainMetric):
    """|W(x) - W(y)| with W(x) = (x1, x2 - 3 x1^2): metric balls are not convex."""

    def _w(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.column_stack([X[:, 0], X[:, 1] - 3.0 * X[:, 0] ** 2])

    def distance_batch(self, X, Y):
        return np.linalg.norm(self._w(X) - self._w(Y), axis=-1)


class ScaledMetric:
    """factor * base; with factor < 1 the lower bounds tied to the true metric break."""

    def __init__(self, base, factor: float):
        self.base = base
        self.factor = float(factor)
        self.body = base.body
        self.point_dim = base.point_dim

    def distance_batch(self, X, Y):
        return self.factor * self.base.distance_batch(X, Y)

    def to_body(self, X):
        return self.base.to_body(X)

    def from_body(self, X):
        return self.base.from_body(X)


class SquaredMetric(ScaledMetric):
    def __init__(self, base):
        super().__init__(base, 1.0)

    def distance_batch(self, X, Y):
        return self.base.distance_batch(X, Y) ** 2


class LogBoundaryMetric(_PlainMetric):
    """|log delta(x) - log delta(y)| + |x - y|, delta the scaled boundary slack.

    Points approaching distinct facets at the same rate stay at bounded distance.
    """

    def distance_batch(self, X, Y):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        lx = np.log(np.maximum(-self.body.residual(X), 1e-300))
        ly = np.log(np.maximum(-self.body.residual(Y), 1e-300))
        return np.abs(lx - ly) + np.linalg.norm(X - Y, axis=-1)


# ---------------------------------------------------------------------------
# Instances
# ---------------------------------------------------------------------------


def _tols(cfg):
    return {"boundary_tol": cfg["boundary_tol"]}


def hilbert_instances(cfg: ExperimentConfig) -> dict:
    """Standard Hilbert instances, or the single body given in the config."""
    if "body" in cfg.user:
        from .cli import parse_body

        body = parse_body(cfg["body"])
        return {body.to_dict()["type"]: MetricInstance(body)}
    t = _tols(cfg)
    return {
        "square": MetricInstance(unit_square(face_tol=cfg["face_tol"], **t)),
        "polytope6": MetricInstance(_six_facet(cfg)),
        "ellipse": MetricInstance(Ellipsoid([0.0, 0.0], [[1.0, 0.0], [0.0, 4.0]], **t)),
        "simplex2": MetricInstance(Simplex(2, face_tol=cfg["face_tol"], **t)),
    }


def _six_facet(cfg):
    P = random_polytope(6, 2, seed=1)
    return HPolytope(P.A, P.b, boundary_tol=cfg["boundary_tol"], face_tol=cfg["face_tol"])


def _params(cfg) -> BoundednessParams:
    return BoundednessParams(cfg["window"], cfg["r_bound"], cfg["r_esc"], cfg["slope_esc"], cfg["slope_flat"])


def _policy(cfg) -> ApproachPolicy:
    a = cfg["approach"]
    return ApproachPolicy(float(a["lam"]), int(a["steps"]), int(a["tail"]))


def _maps(cfg, names=None) -> dict:
    if cfg.get("map") is not None:
        from .cli import build_map

        return {"config": build_map(cfg["map"])}
    names = names or list(SHIPPED_MAPS)
    return {k: ProjectiveLinear(SHIPPED_MAPS[k]) for k in names}


def _semigroups(cfg, names=None) -> dict:
    if cfg.get("generator") is not None:
        from .cli import build_semigroup

        return {"config": build_semigroup(cfg["generator"])}
    names = names or list(SHIPPED_GENERATORS)
    return {k: MatrixSemigroup(SHIPPED_GENERATORS[k]) for k in names}


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------


def check_condition_C(metric, n: int, rng, tol: float = 1e-9, name="condition-C") -> CheckReport:
    """d(s x + (1-s) y, z) <= max(d(x, z), d(y, z)) on sampled (x, y, z, s)."""
    X, Y, Z = (sample_states(metric, n, rng) for _ in range(3))
    s = rng.uniform(size=(n, 1))
    s[0::97] = 0.0
    s[1::97] = 1.0
    P = s * X + (1.0 - s) * Y
    lhs = metric.distance_batch(P, Z)
    rhs = np.maximum(metric.distance_batch(X, Z), metric.distance_batch(Y, Z))
    return _report(name, n, lhs - rhs, tol, "metric balls of the Hilbert and Kobayashi metrics are convex")


def check_axiom5(metric, n: int, rng, tol: float = 1e-9, name="axiom5") -> CheckReport:
    """d_H(x, y) >= 2 log(1 + |x - y| / diam) on uniform and near-boundary pairs."""
    body = metric.body
    diam = diameter(body)
    X = sample_states(metric, n, rng)
    Y = sample_states(metric, n, rng)
    # a quarter of the pairs: tiny gaps close to the boundary
    k = n // 4
    if k:
        B = sample_boundary_batch(body, k, rng)
        c = body.interior_point
        eps = 10.0 ** rng.uniform(-9, -3, size=(k, 1))
        xb = B + eps * (c - B)
        yb = xb + 10.0 ** rng.uniform(-8, -4, size=(k, 1)) * (c - B)
        X[:k] = metric.from_body(xb)
        Y[:k] = metric.from_body(yb)
    X[-1] = Y[-1]
    gap = np.linalg.norm(metric.to_body(X) - metric.to_body(Y), axis=1)
    bound = 2.0 * np.log1p(gap / diam)
    d = metric.distance_batch(X, Y)
    return _report(name, n, bound - d, tol, "Hilbert metric on a bounded domain; chord length bounded by the diameter",
                   {"diameter": diam})


def check_kobayashi_bound(n: int, rng, slack: float = 1e-12, scale: float = 1.0, name="kobayashi-bound") -> CheckReport:
    """arctanh(|z - w| / diam) <= k_D(z, w) on the disc (diam 2) and the bidisc (diam 2 sqrt 2)."""
    disc = unit_disc()
    Z = sample_interior_batch(disc, n, rng)
    W = sample_interior_batch(disc, n, rng)
    Z[0] = W[0]
    Z[1], W[1] = (0.0, 0.0), (0.9, 0.0)
    zc, wc = Z[:, 0] + 1j * Z[:, 1], W[:, 0] + 1j * W[:, 1]
    m1 = np.arctanh(np.abs(zc - wc) / 2.0) - scale * _poincare(zc, wc)
    bi = Polydisc(2)
    Z2 = sample_interior_batch(bi, n, rng)
    W2 = sample_interior_batch(bi, n, rng)
    k2 = MetricInstance(bi, MetricKind.POLYDISC).distance_batch(Z2, W2)
    m2 = np.arctanh(np.linalg.norm(Z2 - W2, axis=1) / diameter(bi)) - scale * k2
    rep = _report(name, 2 * n, np.concatenate([m1, m2]), slack, "closed-form Kobayashi distances of the disc and bidisc",
                  {"disc_worst": float(m1.max()), "bidisc_worst": float(m2.max())})
    return rep


def check_axiom2star(metric, n_pairs: int, rng, steps: int = 40, growth: float = 5.0, name="axiom2star") -> CheckReport:
    """D_k = d(x_k, y_k) - max(d(x_k, z), d(y_k, z)) grows along x_k -> x, y_k -> y for [x, y] not in the boundary."""
    body = metric.body
    z = body.interior_point
    B = sample_boundary_batch(body, 4 * n_pairs, rng)
    zs = metric.from_body(z[None, :])
    k = np.arange(1, steps + 1, dtype=float)[:, None]
    margins, skipped, used = [], 0, 0
    for i in range(0, len(B) - 1, 2):
        if used == n_pairs:
            break
        x, y = B[i], B[i + 1]
        if segment_on_boundary(body, x, y):
            skipped += 1
            continue
        used += 1
        xk = metric.from_body(x + (z - x) / 2.0**k)
        yk = metric.from_body(y + (z - y) / 2.0**k)
        D = metric.distance_batch(xk, yk) - np.maximum(metric.distance_batch(xk, zs), metric.distance_batch(yk, zs))
        half = D[steps // 2:]
        increasing = np.all(np.diff(half) > -1e-9)
        # margin > 0 means the sequence failed to diverge
        margins.append(max(D[0] + growth - D[-1], 0.0 if increasing else 1.0))
    rep = _report(name, used, margins, 0.0, "Hilbert metric on a bounded convex domain satisfies Axiom 2*",
                  {"skipped_common_facet": skipped, "steps": steps, "growth": growth}, empty_status=INCONCLUSIVE)
    return rep


def _dw_status(metric, target, seeds, test_set, cfg, n_steps=None, t_grid=None):
    params = _params(cfg)
    try:
        res = denjoy_wolff(metric, target, seeds, test_set, n_steps or cfg["n_steps"], t_grid=t_grid,
                           tail_fraction=cfg["tail_fraction"], cluster_radius=cfg["cluster_radius"], params=params)
    except (BoundedRegimeError, InconclusiveError) as exc:
        return None, INCONCLUSIVE, str(exc)
    except MultipleClustersError as exc:
        return None, FAIL, str(exc)
    return res, PASS, ""


def check_wolff_denjoy(metric, target, seeds, test_set, cfg, t_grid=None, name="wolff-denjoy") -> CheckReport:
    """Single omega cluster, sup over the test set of |f^n x - xi| < tol_dw, tail of the curve nonincreasing."""
    metric = metric or target.default_metric()
    res, status, msg = _dw_status(metric, target, seeds, test_set, cfg, t_grid=t_grid)
    just = "fixed-point-free nonexpansive dynamics on a Hilbert instance"
    if res is None:
        return CheckReport(name, status, len(seeds), int(status == FAIL), float("nan"), justification=just,
                           details={"reason": msg})
    curve = res.sup_dist_curve
    tail = curve[int(math.floor((1 - cfg["tail_fraction"]) * len(curve))):]
    rise = float(np.max(np.diff(tail))) if len(tail) > 1 else 0.0
    final_margin = float(curve[-1] - cfg["tol_dw"])
    viol = int(final_margin >= 0) + int(rise > cfg["sup_tail_tol"])
    return CheckReport(name, FAIL if viol else PASS, len(test_set), viol, max(final_margin, rise - cfg["sup_tail_tol"]),
                       justification=just,
                       details={"xi": res.xi, "final_sup": float(curve[-1]), "tail_max_rise": rise,
                                "final_time": float(res.times[-1])})


def check_attractor_inclusions(metric, map, seeds, probe_seeds, cfg, name="attractor-inclusions") -> CheckReport:
    """Omega points in ch(xi) and ch(ch(xi)); horoball trace at a very negative level inside ch(xi)."""
    metric = metric or map.default_metric()
    body = metric.body
    if not isinstance(body, HPolytope):
        raise TypeError("attractor inclusions need a polytope")
    just = "Hilbert instances satisfy Axiom 2*, so both inclusions apply"
    res, status, msg = _dw_status(metric, map, probe_seeds, probe_seeds, cfg)
    if res is None:
        return CheckReport(name, status, len(seeds), int(status == FAIL), float("nan"), justification=just,
                           details={"reason": msg})
    xi_b = metric.to_body(res.xi[None, :])[0]
    est = attractor(map, seeds, cfg["n_steps"], tail_fraction=cfg["tail_fraction"],
                    cluster_radius=cfg["cluster_radius"], metric=metric, params=_params(cfg))
    rows, bad = [], 0
    for c in est.omega_points:
        w = metric.to_body(project_to_boundary(metric, c.point, cfg["cluster_radius"])[None, :])[0]
        a = in_ch(body, w, xi_b)
        b = ch_of_ch_membership(body, w, xi_b)
        bad += int(not (a and b))
        rows.append({"omega": w, "facets": list(active_facets(body, w)), "in_ch": a, "in_ch_of_ch": b})
    # bridge: the boundary trace of a deep horoball lies in ch(xi)
    probes, pos, _ = trace_points(metric, 400)
    pole = metric.from_body(body.interior_point[None, :])[0]
    lo, _ = horofunction_values(metric, pole, res.xi, probes, _policy(cfg))
    deep = pos[lo <= cfg["bridge_radius"]]
    bridge_bad = sum(not in_ch(body, p, xi_b) for p in deep)
    n_viol = bad + bridge_bad
    return CheckReport(name, FAIL if n_viol else PASS, len(est.omega_points) + len(deep), n_viol, float(n_viol),
                       justification=just,
                       details={"xi": xi_b, "xi_facets": list(ch_facets(body, xi_b)), "omega": rows,
                                "bridge_points": len(deep), "bridge_violations": bridge_bad,
                                "boundedness": est.boundedness})


def check_semigroup_attractor(metric, sg, t0, seeds, cfg, name="semigroup-attractor") -> CheckReport:
    """Hausdorff distance between dense-time and t0-skeleton attractor estimates below 2 * cluster_radius."""
    res = semigroup_attractor(sg, t0, seeds, cfg["horizon"], tail_fraction=cfg["tail_fraction"],
                              cluster_radius=cfg["cluster_radius"], metric=metric, params=_params(cfg))
    det = {"t0": t0, "hausdorff": res.hausdorff, "skeleton_clusters": len(res.skeleton.omega_points),
           "dense_clusters": len(res.dense.omega_points), "skeleton": res.skeleton.boundedness,
           "dense": res.dense.boundedness}
    just = "Axiom 5' holds for Hilbert instances"
    if res.skeleton.low_confidence or res.dense.low_confidence:
        return CheckReport(name, INCONCLUSIVE, len(seeds), 0, float("nan"), justification=just, details=det)
    return _report(name, len(seeds), [res.hausdorff - 2 * cfg["cluster_radius"]], 0.0, just, det)


def check_horoball_star(metric, spec, n_eta, n_s, rng, cfg, name="horoball-star") -> CheckReport:
    rep = star_shape_check(metric, spec, n_eta, n_s, rng, policy=_policy(cfg), tol_star=cfg["tol_star"],
                           pull_rel=cfg["pull_rel"])
    det = {"members": rep.n_members, "pole": spec.pole, "center": spec.center, "radius": spec.radius, "note": rep.note,
           "first_violations": [{"eta": v.eta, "s": v.s, "margin": v.margin} for v in rep.violations[:5]],
           "evidence": "radial approach family only; one-sided"}
    if rep.n_members == 0:
        return CheckReport(name, INCONCLUSIVE, 0, 0, float("nan"), details=det)
    return CheckReport(name, FAIL if rep.violations else PASS, rep.n_probes, len(rep.violations),
                       rep.worst_margin + cfg["tol_star"], justification="Hilbert metric satisfies condition (C)",
                       details=det)


def check_horofunction_oracle(cfg, tol: float = 1e-6, name="horofunction-1d-oracle") -> CheckReport:
    """Interval (-1, 1), pole 0, center 1: the horofunction is log((1 - y)/(1 + y))."""
    m = MetricInstance(interval(boundary_tol=cfg["boundary_tol"]))
    y = np.linspace(-0.99, 0.99, 199)[:, None]
    lo, hi = horofunction_values(m, [0.0], [1.0], y, _policy(cfg))
    exact = np.log((1 - y[:, 0]) / (1 + y[:, 0]))
    err = np.maximum(np.abs(lo - exact), np.abs(hi - exact))
    return _report(name, len(y), err - tol, 0.0, "closed-form 1-D horofunction", {"max_error": float(err.max())})


def check_lemma_a3(metric, z0, zeta, cfg, name="lemma-a3") -> CheckReport:
    res = intersection_shrink_check(metric, z0, zeta, cfg["shrink_radii"], cfg["shrink_grid"], policy=_policy(cfg))
    d = res.diameters
    rises = [d[i + 1] - d[i] - 2 * res.resolution for i in range(len(d) - 1)]
    final = d[-1] - cfg["shrink_final"]
    margins = rises + [final]
    det = {"radii": res.radii, "diameters": d, "resolution": res.resolution, "zeta": zeta,
           "evidence": "radial approach family only; one-sided"}
    return _report(name, res.n_points, margins, 0.0, "boundary trace of nested big horoballs", det)


def check_nonexpansive(metric, map, n_pairs, rng, cfg, orbit_seeds=5, orbit_steps=2000, name="nonexpansive") -> CheckReport:
    metric = metric or map.default_metric()
    rep = verify_nonexpansive(metric, map, n_pairs, rng, cfg["nonexpansive_tol"])
    seeds = sample_states(metric, orbit_seeds, rng)
    mono_bad, worst_rise = 0, float("-inf")
    for x in seeds:
        tr = iterate(map, x, orbit_steps, metric)
        if len(tr.step_d) > 1:
            worst_rise = max(worst_rise, float(np.max(np.diff(tr.step_d))))
        mono_bad += int(not step_monotone(tr, cfg["nonexpansive_tol"]))
    n_viol = len(rep.violations) + mono_bad
    return CheckReport(name, FAIL if n_viol else PASS, rep.n_pairs, n_viol, rep.max_ratio - 1.0,
                       justification="nonnegative matrices are Hilbert-nonexpansive",
                       details={"max_ratio": rep.max_ratio, "ratio_violations": len(rep.violations),
                                "step_monotone_failures": mono_bad, "worst_step_rise": worst_rise})


def check_axiom4(metric, map, x0, cfg, shifts=(1, 2, 5), name="axiom4") -> CheckReport:
    """Along one unbounded orbit, subsequences at bounded mutual distance share their norm limits."""
    metric = metric or map.default_metric()
    tr = iterate(map, x0, cfg["n_steps"], metric)
    kind = classify_boundedness(metric, tr, _params(cfg))
    det = {"boundedness": kind, "length": len(tr)}
    if kind is not Boundedness.UNBOUNDED:
        return CheckReport(name, INCONCLUSIVE, 0, 0, float("nan"), details=det)
    P = tr.points
    margins, used = [], []
    for j in shifts:
        # subsequences f^{2k}(x0) and f^{2k+j}(x0)
        a, b = P[0::2], P[j::2]
        m = min(len(a), len(b))
        if m < 8:
            continue
        a, b = a[:m], b[:m]
        c = float(np.max(metric.distance_batch(a, b)))
        if c > cfg["r_bound"]:
            continue
        used.append({"shift": j, "max_distance": c})
        ta = tr.times[0::2][:m]
        ca = omega_from_trace(type(tr)(a, ta, np.zeros(m), np.zeros(m - 1)), cfg["tail_fraction"], cfg["cluster_radius"], metric)
        cb = omega_from_trace(type(tr)(b, ta, np.zeros(m), np.zeros(m - 1)), cfg["tail_fraction"], cfg["cluster_radius"], metric)
        h = hausdorff([c_.point for c_ in ca], [c_.point for c_ in cb], metric)
        margins.append(h - cfg["cluster_radius"])
    det["shifts"] = used
    return _report(name, len(margins), margins, 0.0, "Axiom 4' at estimate resolution", det)


def check_lemma_a3prime(metric, n_pairs, rng, cfg, name="lemma-a3prime") -> CheckReport:
    """If d(x_n, y_n) - d(y_n, w) -> -inf (below the threshold) then [lim x_n, lim y_n] lies in the boundary."""
    body = metric.body
    w = body.interior_point
    ws = metric.from_body(w[None, :])
    steps = cfg["a3prime_steps"]
    thr = cfg["a3prime_threshold"]
    k = np.arange(1, steps + 1, dtype=float)[:, None]
    B = sample_boundary_batch(body, n_pairs, rng)
    C = sample_boundary_batch(body, n_pairs, rng)
    margins, premises = [], 0
    for i in range(n_pairs):
        xi = B[i]
        if i % 2 == 0 and isinstance(body, HPolytope):
            # partner on a facet through xi
            f = active_facets(body, xi).facet_indices[0]
            a, bb = body.A[f], body.b[f]
            eta = None
            for _ in range(50):
                cand = xi + rng.normal(size=body.dim) * 0.5
                cand = cand - (a @ cand - bb) * a
                if np.all(body.A @ cand <= body.b + 1e-12):
                    eta = cand
                    break
            if eta is None:
                eta = C[i]
        else:
            eta = C[i]
        xn = metric.from_body(xi + (w - xi) / 2.0**k)
        yn = metric.from_body(eta + (w - eta) / 2.0**k)
        D = metric.distance_batch(xn, yn) - metric.distance_batch(yn, ws)
        if D[-1] < thr and np.all(np.diff(D[steps // 2:]) < 1e-9):
            premises += 1
            margins.append(0.0 if segment_on_boundary(body, xi, eta) else 1.0)
    return _report(name, premises, margins, 0.5, "Lemma A3' for Hilbert metrics on polytopes",
                   {"pairs": n_pairs, "premise_instances": premises, "threshold": thr})


def check_metric_axioms(metric, n, rng, tol=1e-9, name="metric-axioms") -> CheckReport:
    X, Y, Z = (sample_states(metric, n, rng) for _ in range(3))
    dxy = metric.distance_batch(X, Y)
    dyx = metric.distance_batch(Y, X)
    dxz = metric.distance_batch(X, Z)
    dyz = metric.distance_batch(Y, Z)
    dxx = metric.distance_batch(X, X)
    sym = np.abs(dxy - dyx) - 1e-12 * (1.0 + dxy)
    tri = dxz - dxy - dyz - tol
    margins = np.concatenate([sym, tri, np.abs(dxx), -dxy])
    rep = _report(name, n, margins, 0.0, "", {"max_asymmetry": float(np.max(np.abs(dxy - dyx))),
                                             "worst_triangle": float(np.max(dxz - dxy - dyz))})
    return rep


def check_hilbert_consistency(body: Simplex, n, rng, tol=1e-9, factor=1.0, name="hilbert-consistency") -> CheckReport:
    X = sample_interior_batch(body, n, rng)
    Y = sample_interior_batch(body, n, rng)
    a = hilbert_cross_ratio_batch(body, X, Y)
    b = factor * hilbert_cone_batch(lift(X), lift(Y))
    err = np.abs(a - b)
    return _report(name, n, err - tol, 0.0, "two independent formulas", {"max_abs_diff": float(err.max())})


SQUARE_PROBES = {
    "vertex(1,1)": ((1.0, 1.0), True, True),
    "vertex(-1,1)": ((-1.0, 1.0), False, True),
    "vertex(-1,-1)": ((-1.0, -1.0), False, True),
    "vertex(1,-1)": ((1.0, -1.0), True, True),
    "mid-right": ((1.0, 0.0), True, True),
    "mid-top": ((0.0, 1.0), False, True),
    "mid-left": ((-1.0, 0.0), False, False),
    "mid-bottom": ((0.0, -1.0), False, True),
}


def check_ch_combinatorics(cfg, in_ch_fn=None, name="ch-combinatorics") -> CheckReport:
    """Unit square, xi = (1, 0): ch(xi) is the right facet; ch(ch(xi)) is right/top/bottom."""
    sq = unit_square(face_tol=cfg["face_tol"], boundary_tol=cfg["boundary_tol"])
    xi = np.array([1.0, 0.0])
    in_ch_fn = in_ch_fn or (lambda p: in_ch(sq, p, xi))
    rows, bad = {}, 0
    facet_ok = tuple(ch_facets(sq, xi)) == (0,)
    bad += int(not facet_ok)
    for label, (p, want_ch, want_chch) in SQUARE_PROBES.items():
        got_ch = bool(in_ch_fn(np.array(p)))
        got_chch = ch_of_ch_membership(sq, np.array(p), xi)
        bad += int(got_ch != want_ch) + int(got_chch != want_chch)
        rows[label] = {"in_ch": got_ch, "in_ch_of_ch": got_chch}
    return CheckReport(name, FAIL if bad else PASS, len(SQUARE_PROBES), bad, float(bad),
                       justification="facet enumeration",
                       details={"ch_facets": list(ch_facets(sq, xi)), "ch_of_ch_facets": [0, 1, 3], "probes": rows})


# ---------------------------------------------------------------------------
# Negative-control maps
# ---------------------------------------------------------------------------


def two_attractor_map(body=None):
    """Square map sending x1 > -1/2 toward (1, 0) and the rest toward (-1, 1/2); not nonexpansive."""
    body = body or unit_square()
    pr, pl = np.array([1.0, 0.0]), np.array([-1.0, 0.5])

    def f(X):
        X = np.atleast_2d(X)
        tgt = np.where((X[:, 0] > -0.5)[:, None], pr, pl)
        return tgt + 0.9 * (X - tgt)

    return FunctionMap(f, body)


def alternating_map(body=None):
    """x1 -> 1 - 0.9 (1 - x1), x2 -> 1/2 - x2: the orbit alternates between two limits on one facet."""
    body = body or unit_square()

    def f(X):
        X = np.atleast_2d(X)
        return np.column_stack([1.0 - 0.9 * (1.0 - X[:, 0]), 0.5 - X[:, 1]])

    return FunctionMap(f, body)


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------


def _suite_condition_c(cfg):
    n = cfg.sample_count("condition_c")
    tol = cfg["metric_tol"]
    out = [(f"condition-C[{k}]", False, lambda rng, m=m, k=k: check_condition_C(m, n, rng, tol, f"condition-C[{k}]"))
           for k, m in hilbert_instances(cfg).items()]
    out.append(("condition-C[bidisc]", False, lambda rng: check_condition_C(
        MetricInstance(Polydisc(2), MetricKind.POLYDISC), n, rng, tol, "condition-C[bidisc]")))
    out.append(("condition-C[warped-euclidean]", True, lambda rng: check_condition_C(
        WarpedEuclidean(unit_square()), n, rng, tol, "condition-C[warped-euclidean]")))
    return out


def _suite_axiom5(cfg):
    n = cfg.sample_count("axiom5")
    tol = cfg["metric_tol"]
    inst = hilbert_instances(cfg)
    m = inst.get("square", next(iter(inst.values())))
    return [
        ("axiom5", False, lambda rng: check_axiom5(m, n, rng, tol)),
        ("axiom5[quarter-metric]", True, lambda rng: check_axiom5(ScaledMetric(m, 0.25), n, rng, tol, "axiom5[quarter-metric]")),
    ]


def _suite_kobayashi(cfg):
    n = cfg.sample_count("kobayashi")
    s = cfg["kobayashi_slack"]
    return [
        ("kobayashi-bound", False, lambda rng: check_kobayashi_bound(n, rng, s)),
        ("kobayashi-bound[quarter-metric]", True, lambda rng: check_kobayashi_bound(n, rng, s, 0.25, "kobayashi-bound[quarter-metric]")),
    ]


def _suite_axiom2star(cfg):
    n = cfg.sample_count("axiom2star")
    K, g = cfg["axiom2star_steps"], cfg["axiom2star_growth"]
    out = [(f"axiom2star[{k}]", False, lambda rng, m=m, k=k: check_axiom2star(m, n, rng, K, g, f"axiom2star[{k}]"))
           for k, m in hilbert_instances(cfg).items() if k != "polytope6"]
    out.append(("axiom2star[euclidean]", True, lambda rng: check_axiom2star(EuclideanMetric(unit_square()), n, rng, K, g,
                                                                           "axiom2star[euclidean]")))
    return out


def _dw_inputs(cfg, metric, rng):
    n = cfg.sample_count("seeds")
    radius = cfg["seeds"]["radius"]
    return bounded_seed_set(metric, n, radius, rng)


def _suite_wolff_denjoy(cfg):
    out = []
    names = None if cfg.get("map") is not None else ["parabolic-2", "jordan-3"]
    for k, mp in _maps(cfg, names).items():
        def run(rng, mp=mp, k=k):
            m = mp.default_metric()
            S = _dw_inputs(cfg, m, rng)
            return check_wolff_denjoy(m, mp, S, S, cfg, name=f"wolff-denjoy[{k}]")
        out.append((f"wolff-denjoy[{k}]", False, run))
    gnames = None if cfg.get("generator") is not None else ["nilpotent-2"]
    for k, sg in _semigroups(cfg, gnames).items():
        def run_sg(rng, sg=sg, k=k):
            m = sg.default_metric()
            S = _dw_inputs(cfg, m, rng)
            grid = np.arange(0.0, cfg["horizon"] + 0.5 * cfg["t_step"], cfg["t_step"])
            return check_wolff_denjoy(m, sg, S, S, cfg, t_grid=grid, name=f"wolff-denjoy[semigroup-{k}]")
        out.append((f"wolff-denjoy[semigroup-{k}]", False, run_sg))

    def neg(rng):
        body = unit_square()
        mp = RadialStretch(body)
        m = MetricInstance(body)
        S = bounded_seed_set(m, 20, 1.0, rng)
        return check_wolff_denjoy(m, mp, S, S, cfg, name="wolff-denjoy[radial-stretch]")

    out.append(("wolff-denjoy[radial-stretch]", True, neg))
    return out


def _suite_attractor_inclusions(cfg):
    out = []
    names = None if cfg.get("map") is not None else ["parabolic-2", "jordan-3"]
    for k, mp in _maps(cfg, names).items():
        def run(rng, mp=mp, k=k):
            m = mp.default_metric()
            probe = _dw_inputs(cfg, m, rng)
            seeds = sample_states(m, cfg.sample_count("seeds"), rng)
            return check_attractor_inclusions(m, mp, seeds, probe, cfg, f"attractor-inclusions[{k}]")
        out.append((f"attractor-inclusions[{k}]", False, run))

    def neg(rng):
        mp = two_attractor_map()
        m = mp.default_metric()
        probe = bounded_seed_set(m, 20, 1.0, rng)
        seeds = sample_states(m, 40, rng)
        return check_attractor_inclusions(m, mp, seeds, probe, cfg, "attractor-inclusions[two-attractor]")

    out.append(("attractor-inclusions[two-attractor]", True, neg))
    return out


def _suite_semigroup_attractor(cfg):
    out = []
    if cfg.get("generator") is not None:
        cases = [("config", _semigroups(cfg)["config"], float(cfg["t0"]))]
    else:
        nil = MatrixSemigroup(SHIPPED_GENERATORS["nilpotent-2"])
        cases = [("nilpotent-2,t0=1", nil, 1.0), ("nilpotent-2,t0=0.37", nil, 0.37),
                 ("perron-2,t0=1", MatrixSemigroup(SHIPPED_GENERATORS["perron-2"]), 1.0)]
    for k, sg, t0 in cases:
        def run(rng, sg=sg, t0=t0, k=k):
            m = sg.default_metric()
            return check_semigroup_attractor(m, sg, t0, _dw_inputs(cfg, m, rng), cfg, f"semigroup-attractor[{k}]")
        out.append((f"semigroup-attractor[{k}]", False, run))

    def neg(rng):
        sg = RotationSemigroup(2 * math.pi)
        m = MetricInstance(sg.body)
        S = bounded_seed_set(m, 5, 1.0, rng)
        return check_semigroup_attractor(m, sg, 1.0, S, cfg.with_overrides(horizon=200.0),
                                         "semigroup-attractor[rotation,t0=period]")

    out.append(("semigroup-attractor[rotation,t0=period]", True, neg))
    return out


def _random_spec(metric, rng):
    body = metric.body
    pole = sample_interior_batch(body, 1, rng)[0] * 0.5
    center = sample_boundary_batch(body, 1, rng)[0]
    return HoroballSpec(metric.from_body(pole[None])[0], metric.from_body(center[None])[0], float(rng.uniform(-1.0, 1.0)))


def _suite_horoball_star(cfg):
    ne, ns = cfg.sample_count("star_eta"), cfg.sample_count("star_s")
    h = cfg["horoball"]

    def run(rng):
        m = MetricInstance(unit_square(boundary_tol=cfg["boundary_tol"]))
        if h.get("pole") is not None and h.get("center") is not None:
            spec = HoroballSpec(h["pole"], h["center"], float(h["radius"]), "big")
        else:
            spec = _random_spec(m, rng)
        return check_horoball_star(m, spec, ne, ns, rng, cfg, "horoball-star[square]")

    def neg(rng):
        m = WarpedEuclidean(unit_square())
        return check_horoball_star(m, HoroballSpec([0.0, 0.0], [1.0, 0.0], 0.0), ne, ns, rng, cfg,
                                   "horoball-star[warped-euclidean]")

    return [("horoball-star[square]", False, run),
            ("horofunction-1d-oracle", False, lambda rng: check_horofunction_oracle(cfg)),
            ("horoball-star[warped-euclidean]", True, neg)]


def _suite_lemma_a3(cfg):
    t = _tols(cfg)
    return [
        ("lemma-a3[interval]", False, lambda rng: check_lemma_a3(MetricInstance(interval(**t)), [0.0], [1.0], cfg,
                                                                 "lemma-a3[interval]")),
        ("lemma-a3[square,corner]", False, lambda rng: check_lemma_a3(MetricInstance(unit_square(**t)), [0.0, 0.0],
                                                                      [1.0, 1.0], cfg, "lemma-a3[square,corner]")),
        ("lemma-a3[square,facet]", True, lambda rng: check_lemma_a3(MetricInstance(unit_square(**t)), [0.0, 0.0],
                                                                    [1.0, 0.0], cfg, "lemma-a3[square,facet]")),
    ]


def _suite_nonexpansive(cfg):
    n = cfg.sample_count("nonexpansive")
    out = [(f"nonexpansive[{k}]", False, lambda rng, mp=mp, k=k: check_nonexpansive(None, mp, n, rng, cfg, name=f"nonexpansive[{k}]"))
           for k, mp in _maps(cfg).items()]
    out.append(("nonexpansive[radial-stretch]", True, lambda rng: check_nonexpansive(
        None, RadialStretch(unit_square()), n, rng, cfg, name="nonexpansive[radial-stretch]")))
    return out


def _suite_axiom4(cfg):
    out = []
    names = None if cfg.get("map") is not None else ["parabolic-2", "jordan-3"]
    for k, mp in _maps(cfg, names).items():
        def run(rng, mp=mp, k=k):
            m = mp.default_metric()
            return check_axiom4(m, mp, _dw_inputs(cfg, m, rng)[0], cfg, name=f"axiom4[{k}]")
        out.append((f"axiom4[{k}]", False, run))
    out.append(("axiom4[alternating]", True, lambda rng: check_axiom4(None, alternating_map(), [0.0, 0.1], cfg,
                                                                      name="axiom4[alternating]")))
    return out


def _suite_lemma_a3prime(cfg):
    n = cfg.sample_count("a3prime")
    t = _tols(cfg)
    return [
        ("lemma-a3prime[square]", False, lambda rng: check_lemma_a3prime(MetricInstance(unit_square(**t)), n, rng, cfg,
                                                                         "lemma-a3prime[square]")),
        ("lemma-a3prime[simplex2]", False, lambda rng: check_lemma_a3prime(MetricInstance(Simplex(2, **t)), n, rng, cfg,
                                                                           "lemma-a3prime[simplex2]")),
        ("lemma-a3prime[log-boundary]", True, lambda rng: check_lemma_a3prime(LogBoundaryMetric(unit_square()), n, rng,
                                                                              cfg, "lemma-a3prime[log-boundary]")),
    ]


def _suite_metric_axioms(cfg):
    n = cfg.sample_count("metric_axioms")
    tol = cfg["metric_tol"]
    inst = hilbert_instances(cfg)
    out = [(f"metric-axioms[{k}]", False, lambda rng, m=m, k=k: check_metric_axioms(m, n, rng, tol, f"metric-axioms[{k}]"))
           for k, m in inst.items()]
    sq = inst.get("square", next(iter(inst.values())))
    out.append(("metric-axioms[squared]", True, lambda rng: check_metric_axioms(SquaredMetric(sq), n, rng, tol,
                                                                                "metric-axioms[squared]")))
    return out


def _suite_consistency(cfg):
    n = cfg.sample_count("consistency")
    tol = cfg["metric_tol"]
    t = _tols(cfg)
    return [
        ("hilbert-consistency[simplex2]", False, lambda rng: check_hilbert_consistency(Simplex(2, **t), n, rng, tol,
                                                                                     name="hilbert-consistency[simplex2]")),
        ("hilbert-consistency[simplex3]", False, lambda rng: check_hilbert_consistency(Simplex(3, **t), n, rng, tol,
                                                                                     name="hilbert-consistency[simplex3]")),
        ("hilbert-consistency[half-log]", True, lambda rng: check_hilbert_consistency(Simplex(2, **t), n, rng, tol, 0.5,
                                                                                    "hilbert-consistency[half-log]")),
    ]


def _suite_ch(cfg):
    sq = unit_square()
    xi = np.array([1.0, 0.0])

    def endpoints_only(p):
        # checks the two endpoints only: wrong for segments that cross the interior
        return bool(np.all(np.abs(sq.residual(np.vstack([p, xi]))) <= sq.boundary_tol))

    return [
        ("ch-combinatorics", False, lambda rng: check_ch_combinatorics(cfg)),
        ("ch-combinatorics[endpoint-sampling]", True, lambda rng: check_ch_combinatorics(
            cfg, endpoints_only, "ch-combinatorics[endpoint-sampling]")),
    ]


SUITES = {
    "condition-C": _suite_condition_c,
    "axiom5": _suite_axiom5,
    "kobayashi-bound": _suite_kobayashi,
    "axiom2star": _suite_axiom2star,
    "wolff-denjoy": _suite_wolff_denjoy,
    "attractor-inclusions": _suite_attractor_inclusions,
    "semigroup-attractor": _suite_semigroup_attractor,
    "horoball-star": _suite_horoball_star,
    "lemma-a3": _suite_lemma_a3,
    "nonexpansive": _suite_nonexpansive,
    "axiom4": _suite_axiom4,
    "lemma-a3prime": _suite_lemma_a3prime,
    "metric-axioms": _suite_metric_axioms,
    "hilbert-consistency": _suite_consistency,
    "ch-combinatorics": _suite_ch,
}


def suite_names() -> list[str]:
    return list(SUITES) + ["all"]


def _tasks(name, cfg):
    if name == "all":
        return [t for n in SUITES for t in SUITES[n](cfg)]
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(suite_names())}")
    return SUITES[name](cfg)


@dataclass
class SuiteReport:
    suite: str
    status: str
    seed: int
    config_digest: str
    checks: list

    @property
    def exit_code(self) -> int:
        return {PASS: 0, FAIL: 1, INCONCLUSIVE: 2}[self.status]

    def to_dict(self) -> dict:
        return {"suite": self.suite, "status": self.status, "seed": self.seed, "config_digest": self.config_digest,
                "checks": [c.to_dict() for c in self.checks]}


def run_suite(name: str, cfg: ExperimentConfig | None = None, seed: int | None = None, threads: int | None = None) -> SuiteReport:
    """Run every check of a suite; each check draws from its own stream (master seed, task index)."""
    cfg = cfg or ExperimentConfig()
    seed = int(cfg["master_seed"] if seed is None else seed)
    digest = cfg.digest
    tasks = _tasks(name, cfg)

    def one(i):
        label, negative, fn = tasks[i]
        rep = fn(task_rng(seed, i))
        rep.check_name = label
        rep.negative_control = negative
        rep.seed = seed
        rep.task = i
        rep.config_digest = digest
        return rep

    workers = min(threads or thread_cap(), len(tasks))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(one, range(len(tasks))))
    else:
        reports = [one(i) for i in range(len(tasks))]
    if any(not r.ok and (r.negative_control or r.status == FAIL) for r in reports):
        status = FAIL
    elif any(r.status == INCONCLUSIVE for r in reports):
        status = INCONCLUSIVE
    else:
        status = PASS
    return SuiteReport(name, status, seed, digest, reports)
