"""Nonexpansive maps, one-parameter semigroups and their asymptotics.

State conventions
-----------------
Projective-linear maps and matrix semigroups act on probability vectors
(barycentric coordinates of the closed simplex); their default metric is
the Hilbert cone metric on that simplex.  Other maps act directly on the
points of their body with the cross-ratio Hilbert metric.  Geometry queries
(boundary tests, face snapping) go through ``metric.to_body``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BoundedRegimeError,
    DimensionMismatch,
    DomainEscapeError,
    InconclusiveError,
    MultipleClustersError,
    NotInteriorError,
)
from .geometry import (
    ConvexBody,
    HPolytope,
    Simplex,
    as_point,
    as_points,
    boundary_grid,
    sample_interior_batch,
    snap_to_face,
    unit_disc,
)
from .linalg import projective_expm
from .metrics import MetricInstance, MetricKind, hilbert_cone

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
CLUSTER_RADIUS = 1e-3
WINDOW = 64
R_BOUND = 10.0
R_ESC = 25.0
SLOPE_ESC = 0.5
SLOPE_FLAT = 0.05


class Boundedness(str, enum.Enum):
    BOUNDED = "bounded"
    UNBOUNDED = "unbounded"
    UNDECIDED = "undecided"


# ---------------------------------------------------------------------------
# Maps
# ---------------------------------------------------------------------------


class MapSpec:
    body: ConvexBody
    claimed_nonexpansive: bool = True

    def apply_batch(self, X) -> np.ndarray:
        raise NotImplementedError

    def apply(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.apply_batch(x[None, :])[0]

    def default_metric(self) -> MetricInstance:
        return MetricInstance(self.body)

    def describe(self) -> dict:
        return {"type": type(self).__name__}


def _check_closed(body: ConvexBody, Y):
    if np.any(body.residual(Y) > body.boundary_tol):
        raise DomainEscapeError("image leaves the closed domain; invalid map specification")


class ProjectiveLinear(MapSpec):
    """x -> A x / sum(A x) on probability vectors; A nonnegative without zero rows."""

    def __init__(self, A, claimed_nonexpansive: bool = True):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        n = A.shape[0]
        if A.shape != (n, n) or n < 2:
            raise DimensionMismatch("projective-linear maps need a square matrix of size >= 2")
        if np.any(A < 0) or not np.all(np.isfinite(A)):
            raise ValueError("matrix must be nonnegative and finite")
        if np.any(A.sum(axis=1) == 0):
            raise ValueError("a zero row would send interior points to the boundary")
        if np.any(A.sum(axis=0) == 0):
            raise ValueError("a zero column makes the map degenerate")
        self.A = A
        self.A.setflags(write=False)
        self.body = Simplex(n - 1)
        self.claimed_nonexpansive = claimed_nonexpansive

    @property
    def state_dim(self):
        return self.A.shape[0]

    def apply_batch(self, X):
        X = as_points(X, self.state_dim)
        if np.any(X < -self.body.boundary_tol):
            raise DomainEscapeError("state has negative entries")
        Y = X @ self.A.T
        s = Y.sum(axis=1, keepdims=True)
        if np.any(s <= 0):
            raise DomainEscapeError("image is the zero vector")
        return Y / s

    def default_metric(self):
        return MetricInstance(self.body, MetricKind.HILBERT_CONE)

    def describe(self):
        return {"type": "projective-linear", "A": self.A.tolist()}


class AffineContraction(MapSpec):
    """x -> M x + c, required to map the body into its closure."""

    def __init__(self, M, c, body: ConvexBody, claimed_nonexpansive: bool = True):
        M = np.atleast_2d(np.asarray(M, dtype=float))
        c = as_point(c, body.dim)
        if M.shape != (body.dim, body.dim):
            raise DimensionMismatch("affine matrix does not match the body")
        self.M, self.c, self.body = M, c, body
        self.claimed_nonexpansive = claimed_nonexpansive
        probe = body.vertices if isinstance(body, HPolytope) and body.vertices is not None else boundary_grid(body, 256)
        _check_closed(body, probe @ M.T + c)

    def apply_batch(self, X):
        Y = as_points(X, self.body.dim) @ self.M.T + self.c
        _check_closed(self.body, Y)
        return Y

    def describe(self):
        return {"type": "affine", "M": self.M.tolist(), "c": self.c.tolist()}


def identity_map(body: ConvexBody) -> AffineContraction:
    return AffineContraction(np.eye(body.dim), np.zeros(body.dim), body)


class Composition(MapSpec):
    """maps[0] is applied first."""

    def __init__(self, maps):
        maps = list(maps)
        if not maps:
            raise ValueError("empty composition")
        self.maps = maps
        self.body = maps[0].body
        self.claimed_nonexpansive = all(m.claimed_nonexpansive for m in maps)
        self._metric = maps[0].default_metric()

    def apply_batch(self, X):
        for m in self.maps:
            X = m.apply_batch(X)
        return X

    def default_metric(self):
        return self._metric

    def describe(self):
        return {"type": "composition", "maps": [m.describe() for m in self.maps]}


class RadialStretch(MapSpec):
    """Pushes points toward the boundary along rays from ``center``: gauge rho -> rho**power.

    Expansive near the center for power < 1.  Used as a negative control.
    """

    claimed_nonexpansive = False

    def __init__(self, body: ConvexBody, power: float = 0.97, center=None):
        if not 0 < power < 1:
            raise ValueError("power must lie in (0, 1)")
        self.body = body
        self.power = float(power)
        self.center = body.interior_point if center is None else as_point(center, body.dim)

    def apply_batch(self, X):
        X = as_points(X, self.body.dim)
        D = X - self.center[None, :]
        nd = np.linalg.norm(D, axis=1)
        out = X.copy()
        live = nd > 0
        t = self.body.ray_exit(np.broadcast_to(self.center, D[live].shape), D[live])
        rho = 1.0 / t
        out[live] = self.center + D[live] * (rho ** (self.power - 1.0))[:, None]
        return out

    def describe(self):
        return {"type": "radial-stretch", "power": self.power}


class FunctionMap(MapSpec):
    """Wraps an arbitrary batch function; for hand-built test maps."""

    def __init__(self, fn, body: ConvexBody, metric: MetricInstance | None = None, claimed_nonexpansive=False):
        self.fn = fn
        self.body = body
        self._metric = metric or MetricInstance(body)
        self.claimed_nonexpansive = claimed_nonexpansive

    def apply_batch(self, X):
        return np.asarray(self.fn(np.asarray(X, dtype=float)), dtype=float)

    def default_metric(self):
        return self._metric


# ---------------------------------------------------------------------------
# Semigroups
# ---------------------------------------------------------------------------


class SemigroupSpec:
    body: ConvexBody

    def flow_batch(self, t: float, X) -> np.ndarray:
        raise NotImplementedError

    def flow(self, t: float, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.flow_batch(t, x[None, :])[0]

    def default_metric(self) -> MetricInstance:
        return MetricInstance(self.body)

    def time_map(self, t0: float) -> "TimeMap":
        return TimeMap(self, t0)

    def describe(self) -> dict:
        return {"type": type(self).__name__}


class MatrixSemigroup(SemigroupSpec):
    """f_t(x) = exp(tA) x / sum(exp(tA) x) for a generator with nonnegative off-diagonal."""

    def __init__(self, generator):
        A = np.atleast_2d(np.asarray(generator, dtype=float))
        n = A.shape[0]
        if A.shape != (n, n) or n < 2:
            raise DimensionMismatch("generator must be square of size >= 2")
        off = A - np.diag(np.diag(A))
        if np.any(off < 0):
            raise ValueError("generator needs nonnegative off-diagonal entries")
        self.A = A
        self.A.setflags(write=False)
        self.body = Simplex(n - 1)
        self._cache: dict[float, np.ndarray] = {}

    @property
    def state_dim(self):
        return self.A.shape[0]

    def propagator(self, t: float) -> np.ndarray:
        """exp(tA) up to a positive scalar."""
        t = float(t)
        if t not in self._cache:
            if len(self._cache) > 4096:
                self._cache.clear()
            self._cache[t] = projective_expm(self.A, t)[0]
        return self._cache[t]

    def flow_batch(self, t, X):
        if t < 0:
            raise ValueError("semigroup time must be nonnegative")
        X = as_points(X, self.state_dim)
        if t == 0:
            return X.copy()
        Y = X @ self.propagator(t).T
        return Y / Y.sum(axis=1, keepdims=True)

    def default_metric(self):
        return MetricInstance(self.body, MetricKind.HILBERT_CONE)

    def describe(self):
        return {"type": "matrix-semigroup", "generator": self.A.tolist()}


class RotationSemigroup(SemigroupSpec):
    """Rotation of the unit disc by angle omega*t: Hilbert isometries with bounded orbits."""

    def __init__(self, omega: float = 2 * math.pi):
        self.omega = float(omega)
        self.body = unit_disc()

    def flow_batch(self, t, X):
        X = as_points(X, 2)
        a = self.omega * t
        R = np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]])
        return X @ R.T

    def describe(self):
        return {"type": "rotation", "omega": self.omega}


class TimeMap(MapSpec):
    """The single map f_{t0} of a semigroup."""

    def __init__(self, sg: SemigroupSpec, t0: float):
        self.sg = sg
        self.t0 = float(t0)
        self.body = sg.body
        self.claimed_nonexpansive = True

    def apply_batch(self, X):
        return self.sg.flow_batch(self.t0, X)

    def default_metric(self):
        return self.sg.default_metric()

    def describe(self):
        return {"type": "time-map", "t0": self.t0, "semigroup": self.sg.describe()}


def semigroup_apply(sg: SemigroupSpec, t: float, x) -> np.ndarray:
    return sg.flow(t, x)


# ---------------------------------------------------------------------------
# Orbits
# ---------------------------------------------------------------------------


@dataclass
class OrbitTrace:
    points: np.ndarray
    times: np.ndarray
    d_to_start: np.ndarray
    step_d: np.ndarray
    truncated: bool = False

    def __len__(self):
        return len(self.points)


def _interior_mask(metric: MetricInstance, X) -> np.ndarray:
    body = metric.body
    return body.residual(metric.to_body(X)) < -body.boundary_tol


def _require_interior(metric: MetricInstance, X):
    if not np.all(_interior_mask(metric, X)):
        raise NotInteriorError("orbit start points must be interior")


def _trace_from_points(metric, P, times, truncated) -> OrbitTrace:
    d0 = metric.distance_batch(P, P[:1])
    step = metric.distance_batch(P[:-1], P[1:]) if len(P) > 1 else np.empty(0)
    return OrbitTrace(points=P, times=np.asarray(times, dtype=float), d_to_start=d0, step_d=step, truncated=truncated)


def _run_orbits(metric, step_fn, X0, n_steps):
    """Iterate all seeds together; a seed stops at its first non-interior iterate."""
    X = np.array(X0, dtype=float)
    S = X.shape[0]
    P = np.empty((n_steps + 1, S, X.shape[1]))
    P[0] = X
    length = np.full(S, n_steps + 1)
    alive = np.ones(S, dtype=bool)
    for n in range(1, n_steps + 1):
        if not alive.any():
            break
        Y = X.copy()
        Y[alive] = step_fn(n, X[alive])
        ok = _interior_mask(metric, Y) | ~alive
        newly_dead = alive & ~ok
        length[newly_dead] = n
        alive &= ok
        X = np.where(alive[:, None], Y, X)
        P[n] = X
    return P, length


def iterate_batch(map: MapSpec, X0, n_steps: int, metric: MetricInstance | None = None) -> list[OrbitTrace]:
    metric = metric or map.default_metric()
    X0 = as_points(X0, metric.point_dim)
    _require_interior(metric, X0)
    P, length = _run_orbits(metric, lambda n, X: map.apply_batch(X), X0, n_steps)
    times = np.arange(n_steps + 1, dtype=float)
    return [
        _trace_from_points(metric, P[: length[i], i], times[: length[i]], bool(length[i] <= n_steps))
        for i in range(X0.shape[0])
    ]


def iterate(map: MapSpec, x0, n_steps: int, metric: MetricInstance | None = None) -> OrbitTrace:
    return iterate_batch(map, np.asarray(x0, dtype=float)[None, :], n_steps, metric)[0]


def semigroup_orbit_batch(sg: SemigroupSpec, X0, t_grid, metric: MetricInstance | None = None) -> list[OrbitTrace]:
    metric = metric or sg.default_metric()
    X0 = as_points(X0, metric.point_dim)
    _require_interior(metric, X0)
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t_grid) <= 0) or t_grid[0] < 0:
        raise ValueError("t_grid must be nonnegative and increasing")
    P, length = _flow_points(metric, sg, X0, t_grid)
    return [
        _trace_from_points(metric, P[: length[i], i], t_grid[: length[i]], bool(length[i] < len(t_grid)))
        for i in range(X0.shape[0])
    ]


def _flow_points(metric, sg, X0, t_grid):
    S = X0.shape[0]
    P = np.empty((len(t_grid), S, X0.shape[1]))
    length = np.full(S, len(t_grid))
    alive = np.ones(S, dtype=bool)
    for n, t in enumerate(t_grid):
        Y = sg.flow_batch(t, X0)
        ok = _interior_mask(metric, Y)
        newly_dead = alive & ~ok
        length[newly_dead] = n
        alive &= ok
        P[n] = np.where(alive[:, None], Y, P[n - 1] if n else Y)
    return P, length


def semigroup_orbit(sg: SemigroupSpec, x0, t_grid, metric: MetricInstance | None = None) -> OrbitTrace:
    return semigroup_orbit_batch(sg, np.asarray(x0, dtype=float)[None, :], t_grid, metric)[0]


def step_monotone(trace: OrbitTrace, tol: float = 1e-9) -> bool:
    s = trace.step_d
    return bool(np.all(s[1:] <= s[:-1] + tol))


# ---------------------------------------------------------------------------
# Boundedness, omega-limits, attractors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundednessParams:
    window: int = WINDOW
    r_bound: float = R_BOUND
    r_esc: float = R_ESC
    slope_esc: float = SLOPE_ESC
    slope_flat: float = SLOPE_FLAT


def escape_slope(trace: OrbitTrace, window: int = WINDOW) -> tuple[np.ndarray, float]:
    """Window minima of d_to_start and their growth rate against log(time) over the last half.

    The rate is nan when fewer than two windows fit: one window says nothing about growth.
    """
    d = trace.d_to_start
    nwin = len(d) // window
    mins = np.array([d[j * window:(j + 1) * window].min() for j in range(nwin)])
    ends = np.array([trace.times[(j + 1) * window - 1] for j in range(nwin)])
    h = nwin // 2
    if nwin < 2 or ends[h] <= 0 or ends[-1] <= ends[h]:
        return mins, float("nan")
    return mins, float((mins[-1] - mins[h]) / (math.log(ends[-1]) - math.log(ends[h])))


def classify_boundedness(metric: MetricInstance | None, trace: OrbitTrace, params: BoundednessParams = BoundednessParams()) -> Boundedness:
    """Bounded / Unbounded / Undecided from a finite orbit.

    Unbounded: the window minima of d(f^n y, y) increase strictly over the
    last half of the trace and either exceed ``r_esc``, grow at least like
    ``slope_esc * log(n)``, or the orbit reached the boundary band.
    Bounded: the last window dips below ``r_bound`` and the log-time growth
    rate is at most ``slope_flat``.
    """
    if len(trace) < params.window:
        raise ValueError(f"trace of length {len(trace)} is shorter than the window {params.window}")
    mins, slope = escape_slope(trace, params.window)
    nwin = len(mins)
    h = nwin // 2
    increasing = nwin >= 2 and bool(np.all(np.diff(mins[h:]) > 1e-12)) and mins[-1] > mins[h]
    if increasing and (mins[-1] > params.r_esc or slope >= params.slope_esc or trace.truncated):
        return Boundedness.UNBOUNDED
    if mins[-1] < params.r_bound and slope <= params.slope_flat and not trace.truncated:
        return Boundedness.BOUNDED
    return Boundedness.UNDECIDED


@dataclass
class OmegaCluster:
    point: np.ndarray
    multiplicity: int
    seeds: tuple = ()


def _greedy_labels(Q, radius: float) -> np.ndarray:
    """Greedy ball clustering: the first unassigned row founds a cluster that
    absorbs every unassigned row within ``radius`` of it.

    Identical to scanning the rows in order and joining the first earlier
    center within ``radius``, but vectorised over rows.
    """
    labels = np.full(len(Q), -1)
    k = 0
    while True:
        free = np.flatnonzero(labels < 0)
        if len(free) == 0:
            return labels
        c = Q[free[0]]
        near = free[np.sqrt(np.sum((Q[free] - c) ** 2, axis=1)) <= radius]
        labels[near] = k
        k += 1


def cluster_points(P, radius: float, coords=None) -> list[OmegaCluster]:
    """Greedy norm-ball clustering in the given order; representative = latest member.

    ``coords`` maps rows to the coordinates the norm is taken in (default: as given).
    """
    P = np.asarray(P, dtype=float)
    if len(P) == 0:
        return []
    C = P if coords is None else np.asarray(coords(P), dtype=float)
    labels = _greedy_labels(C, radius)
    out = []
    for k in range(labels.max() + 1):
        idx = np.flatnonzero(labels == k)
        out.append(OmegaCluster(P[idx[-1]].copy(), len(idx)))
    return out


def _tail(trace: OrbitTrace, tail_fraction: float) -> np.ndarray:
    n = len(trace.points)
    start = min(n - 1, int(math.floor((1.0 - tail_fraction) * n)))
    return trace.points[start:]


def _coords(metric):
    return None if metric is None else metric.to_body


def omega_from_trace(trace: OrbitTrace, tail_fraction: float = 0.25, cluster_radius: float = CLUSTER_RADIUS, metric=None):
    """Clusters of the orbit tail; the norm is taken in body coordinates when ``metric`` is given."""
    return cluster_points(_tail(trace, tail_fraction), cluster_radius, _coords(metric))


def omega_limit(map: MapSpec, x0, n_steps: int, tail_fraction: float = 0.25, cluster_radius: float = CLUSTER_RADIUS, metric=None):
    metric = metric or map.default_metric()
    return omega_from_trace(iterate(map, x0, n_steps, metric), tail_fraction, cluster_radius, metric)


def merge_clusters(groups, radius: float, metric=None) -> list[OmegaCluster]:
    """Union of per-seed clusters, re-clustered in lexicographic order.

    ``groups`` is a sequence of (seed index, clusters).  The merged
    representative is the multiplicity-weighted mean of member representatives.
    """
    to_body = _coords(metric) or (lambda X: np.asarray(X, dtype=float))
    items = [(tuple(c.point), c.multiplicity, seed) for seed, cl in groups for c in cl]
    items.sort()
    if not items:
        return []
    pts = np.array([it[0] for it in items])
    w = np.array([it[1] for it in items], dtype=float)
    labels = _greedy_labels(to_body(pts), radius)
    out = []
    for k in range(labels.max() + 1):
        idx = np.flatnonzero(labels == k)
        rep = (w[idx, None] * pts[idx]).sum(axis=0) / w[idx].sum()
        out.append(OmegaCluster(rep, int(w[idx].sum()), tuple(sorted({items[i][2] for i in idx}))))
    out.sort(key=lambda c: tuple(c.point))
    return out


@dataclass
class AttractorEstimate:
    omega_points: list
    dw_point: np.ndarray | None
    boundedness: Boundedness
    per_seed: list = field(default_factory=list)
    low_confidence: bool = False

    def points(self) -> np.ndarray:
        return np.array([c.point for c in self.omega_points])

    def to_dict(self) -> dict:
        return {
            "boundedness": self.boundedness.value,
            "omega_clusters": [
                {"point": c.point.tolist(), "multiplicity": c.multiplicity, "seeds": list(c.seeds)} for c in self.omega_points
            ],
            "dw_point": None if self.dw_point is None else self.dw_point.tolist(),
            "per_seed_boundedness": [b.value for b in self.per_seed],
            "low_confidence": self.low_confidence,
        }


def _overall(per_seed) -> Boundedness:
    kinds = set(per_seed)
    if kinds == {Boundedness.UNBOUNDED}:
        return Boundedness.UNBOUNDED
    if kinds == {Boundedness.BOUNDED}:
        return Boundedness.BOUNDED
    return Boundedness.UNDECIDED


def project_to_boundary(metric: MetricInstance, point, radius: float = CLUSTER_RADIUS) -> np.ndarray:
    """Nearest boundary point of a cluster representative, snapped to a face at ``radius``."""
    xb = metric.to_body(np.asarray(point)[None, :])[0]
    snapped = snap_to_face(metric.body, xb, radius)
    return metric.from_body(snapped[None, :])[0]


def estimate_from_traces(metric, traces, tail_fraction, cluster_radius, params) -> AttractorEstimate:
    per_seed = []
    groups = []
    for i, tr in enumerate(traces):
        try:
            per_seed.append(classify_boundedness(metric, tr, params))
        except ValueError:
            per_seed.append(Boundedness.UNDECIDED)
        groups.append((i, omega_from_trace(tr, tail_fraction, cluster_radius, metric)))
    clusters = merge_clusters(groups, cluster_radius, metric)
    overall = _overall(per_seed)
    dw = None
    if overall is Boundedness.UNBOUNDED and len(clusters) == 1:
        dw = project_to_boundary(metric, clusters[0].point, cluster_radius)
    low = all(b is Boundedness.UNDECIDED for b in per_seed)
    return AttractorEstimate(clusters, dw, overall, per_seed, low)


def attractor(
    map: MapSpec,
    seeds,
    n_steps: int = 10_000,
    *,
    tail_fraction: float = 0.25,
    cluster_radius: float = CLUSTER_RADIUS,
    metric: MetricInstance | None = None,
    params: BoundednessParams = BoundednessParams(),
) -> AttractorEstimate:
    metric = metric or map.default_metric()
    traces = iterate_batch(map, seeds, n_steps, metric)
    return estimate_from_traces(metric, traces, tail_fraction, cluster_radius, params)


def hausdorff(P, Q, metric=None) -> float:
    P = np.atleast_2d(np.asarray(P, dtype=float))
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    if metric is not None:
        P, Q = metric.to_body(P), metric.to_body(Q)
    D = np.sqrt(np.sum((P[:, None, :] - Q[None, :, :]) ** 2, axis=-1))
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))


@dataclass
class SemigroupAttractor:
    skeleton: AttractorEstimate
    dense: AttractorEstimate
    hausdorff: float
    t0: float
    horizon: float


def dense_time_grid(t0: float, horizon: float) -> np.ndarray:
    """Times k * t0 * (sqrt(5)-1)/2, each formed as a product (no running sum)."""
    step = t0 * GOLDEN
    k = np.arange(int(math.ceil(horizon / step)) + 1, dtype=float)
    return k * step


def semigroup_attractor(
    sg: SemigroupSpec,
    t0: float,
    seeds,
    horizon: float = 1000.0,
    *,
    tail_fraction: float = 0.25,
    cluster_radius: float = CLUSTER_RADIUS,
    metric: MetricInstance | None = None,
    params: BoundednessParams = BoundednessParams(),
) -> SemigroupAttractor:
    """Attractor of f_{t0} (skeleton) and of the dense-time flow, with their Hausdorff distance."""
    if t0 <= 0:
        raise ValueError("t0 must be positive")
    metric = metric or sg.default_metric()
    n_steps = int(math.ceil(horizon / t0))
    skel = attractor(sg.time_map(t0), seeds, n_steps, tail_fraction=tail_fraction,
                     cluster_radius=cluster_radius, metric=metric, params=params)
    traces = semigroup_orbit_batch(sg, seeds, dense_time_grid(t0, horizon), metric)
    dense = estimate_from_traces(metric, traces, tail_fraction, cluster_radius, params)
    return SemigroupAttractor(skel, dense, hausdorff(skel.points(), dense.points(), metric), float(t0), float(horizon))


# ---------------------------------------------------------------------------
# Denjoy-Wolff points and fixed points
# ---------------------------------------------------------------------------


@dataclass
class DenjoyWolffResult:
    xi: np.ndarray
    sup_dist_curve: np.ndarray
    times: np.ndarray
    estimate: AttractorEstimate
    probe: Boundedness


def _probe(metric, target, seeds, n_steps, t_grid, params):
    if isinstance(target, SemigroupSpec):
        return semigroup_orbit(target, seeds[0], t_grid, metric)
    return iterate(target, seeds[0], n_steps, metric)


def denjoy_wolff(
    metric: MetricInstance | None,
    target,
    seeds,
    bounded_test_set,
    n_steps: int = 10_000,
    *,
    t_grid=None,
    tail_fraction: float = 0.25,
    cluster_radius: float = CLUSTER_RADIUS,
    params: BoundednessParams = BoundednessParams(),
) -> DenjoyWolffResult:
    """Denjoy-Wolff point of a fixed-point-free map or semigroup, with the sup-distance curve.

    ``sup_dist_curve[n] = max_x ||f^n(x) - xi||`` over the test set (for a
    semigroup: over ``t_grid``).  Norms are taken in body coordinates.
    """
    metric = metric or target.default_metric()
    seeds = as_points(seeds, metric.point_dim)
    is_sg = isinstance(target, SemigroupSpec)
    if is_sg and t_grid is None:
        t_grid = np.arange(0.0, float(n_steps) + 1.0)
    probe = classify_boundedness(metric, _probe(metric, target, seeds, n_steps, t_grid, params), params)
    if probe is Boundedness.BOUNDED:
        raise BoundedRegimeError("probe orbit is bounded; there is no Denjoy-Wolff point")
    if probe is Boundedness.UNDECIDED:
        raise InconclusiveError("probe orbit boundedness is undecided")
    if is_sg:
        traces = semigroup_orbit_batch(target, seeds, t_grid, metric)
        est = estimate_from_traces(metric, traces, tail_fraction, cluster_radius, params)
    else:
        est = attractor(target, seeds, n_steps, tail_fraction=tail_fraction, cluster_radius=cluster_radius,
                        metric=metric, params=params)
    if len(est.omega_points) != 1:
        raise MultipleClustersError(f"{len(est.omega_points)} omega clusters; no single Denjoy-Wolff point")
    xi = project_to_boundary(metric, est.omega_points[0].point, cluster_radius)
    T = as_points(bounded_test_set, metric.point_dim)
    xi_b = metric.to_body(xi[None, :])

    def sup_dist(X):
        return float(np.max(np.linalg.norm(metric.to_body(X) - xi_b, axis=1)))

    if is_sg:
        times = np.asarray(t_grid, dtype=float)
        curve = np.array([sup_dist(target.flow_batch(t, T)) for t in times])
    else:
        times = np.arange(n_steps + 1, dtype=float)
        curve = np.empty(n_steps + 1)
        X = T.copy()
        curve[0] = sup_dist(X)
        for n in range(1, n_steps + 1):
            X = target.apply_batch(X)
            curve[n] = sup_dist(X)
    return DenjoyWolffResult(xi=xi, sup_dist_curve=curve, times=times, estimate=est, probe=probe)


@dataclass
class FixedPoint:
    point: np.ndarray
    residual: float
    seed_index: int


def fixed_point_search(
    metric: MetricInstance | None,
    map: MapSpec,
    seeds,
    tol: float = 1e-10,
    max_steps: int = 10_000,
    params: BoundednessParams = BoundednessParams(),
) -> FixedPoint | None:
    """First interior fixed point reached by iteration from the seeds, or None.

    None means the search found nothing, not that no fixed point exists.
    """
    metric = metric or map.default_metric()
    seeds = as_points(seeds, metric.point_dim)
    for i, x in enumerate(seeds):
        z = x.copy()
        res = float(np.linalg.norm(map.apply(z) - z))
        steps = 0
        while res >= tol and steps < max_steps:
            z = map.apply(z)
            res = float(np.linalg.norm(map.apply(z) - z))
            steps += 1
        if res < tol and _interior_mask(metric, z[None, :])[0]:
            return FixedPoint(z, res, i)
    return None


# ---------------------------------------------------------------------------
# Nonexpansiveness
# ---------------------------------------------------------------------------


@dataclass
class NonexpansiveReport:
    max_ratio: float
    violations: list
    n_pairs: int


def sample_states(metric: MetricInstance, n: int, rng) -> np.ndarray:
    return metric.from_body(sample_interior_batch(metric.body, n, rng))


def verify_nonexpansive(metric: MetricInstance | None, map: MapSpec, n_pairs: int, seed=None, tol: float = 1e-9) -> NonexpansiveReport:
    metric = metric or map.default_metric()
    rng = np.random.default_rng(seed)
    X = sample_states(metric, n_pairs, rng)
    Y = sample_states(metric, n_pairs, rng)
    d = metric.distance_batch(X, Y)
    keep = d > 1e-8
    X, Y, d = X[keep], Y[keep], d[keep]
    FX = map.apply_batch(X)
    FY = map.apply_batch(Y)
    ratio = metric.distance_batch(FX, FY) / d
    bad = np.flatnonzero(ratio > 1.0 + tol)
    viol = [(X[i], Y[i], float(ratio[i])) for i in bad[np.argsort(-ratio[bad])]]
    return NonexpansiveReport(float(ratio.max()) if len(ratio) else 0.0, viol, int(keep.sum()))


def birkhoff_coefficient(A) -> float:
    """tanh(Delta/4), Delta the Hilbert diameter of the image cone spanned by A's columns."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if np.any(A <= 0):
        return 1.0
    n = A.shape[1]
    delta = max(hilbert_cone(A[:, i], A[:, j]) for i in range(n) for j in range(n))
    return math.tanh(delta / 4.0)


SHIPPED_MAPS = {
    "parabolic-2": [[1.0, 1.0], [0.0, 1.0]],
    "perron-2": [[2.0, 1.0], [1.0, 2.0]],
    "jordan-3": [[1.0, 1.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    "identity-2": [[1.0, 0.0], [0.0, 1.0]],
    "cyclic-3": [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]],
    "positive-3": [[3.0, 1.0, 1.0], [1.0, 2.0, 1.0], [2.0, 1.0, 4.0]],
}

SHIPPED_GENERATORS = {
    "nilpotent-2": [[0.0, 1.0], [0.0, 0.0]],
    "perron-2": [[-1.0, 1.0], [1.0, -1.0]],
    "jordan-3": [[0.0, 1.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]],
}


def bounded_seed_set(metric: MetricInstance, n: int, radius: float = 2.0, seed=None, center=None) -> np.ndarray:
    """n interior states within metric distance ``radius`` of ``center`` (default: the body's interior point)."""
    rng = np.random.default_rng(seed)
    c = metric.from_body(metric.body.interior_point[None, :])[0] if center is None else as_point(center, metric.point_dim)
    out = []
    while len(out) < n:
        X = sample_states(metric, max(64, 4 * (n - len(out))), rng)
        out.extend(X[metric.distance_batch(X, c[None, :]) <= radius])
    return np.array(out[:n])
