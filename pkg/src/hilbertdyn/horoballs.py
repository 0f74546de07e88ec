"""Horofunction estimates, horoball membership and the two horoball checks.

A horoball at a boundary point xi with pole z0 is a sublevel set of
``g(y, w) = d(y, w) - d(w, z0)`` in the limit w -> xi (liminf for the big
horoball, limsup for the small one).  The limit is estimated along the
radial family ``w_k = xi + lam**k (z0 - xi)``; the min/max of g over the
last ``tail`` steps bracket the liminf/limsup.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainEscapeError, NotInteriorError
from .geometry import as_point, as_points, boundary_grid, diameter
from .metrics import MetricInstance

STABILITY_TOL = 1e-6
TOL_STAR = 1e-6
PULL_REL = 1e-7
TRACE_PULL = 1e-6


class HoroballKind(str, enum.Enum):
    SMALL = "small"
    BIG = "big"


@dataclass(frozen=True)
class HoroballSpec:
    pole: np.ndarray
    center: np.ndarray
    radius: float
    kind: HoroballKind = HoroballKind.BIG

    def __post_init__(self):
        object.__setattr__(self, "pole", as_point(self.pole))
        object.__setattr__(self, "center", as_point(self.center))
        object.__setattr__(self, "kind", HoroballKind(self.kind))


@dataclass(frozen=True)
class ApproachPolicy:
    lam: float = 0.5
    steps: int = 40
    tail: int = 8

    def __post_init__(self):
        if not 0.0 < self.lam < 1.0:
            raise ValueError("lam must lie in (0, 1)")
        if not 1 <= self.tail <= self.steps:
            raise ValueError("need 1 <= tail <= steps")

    def points(self, pole, center) -> np.ndarray:
        k = np.arange(1, self.steps + 1, dtype=float)
        return center[None, :] + (self.lam**k)[:, None] * (pole - center)[None, :]


@dataclass(frozen=True)
class HorofunctionEstimate:
    lo: float
    hi: float
    member: bool
    stable: bool


def _validate_spec(metric: MetricInstance, spec: HoroballSpec):
    dim = metric.point_dim
    for p in (spec.pole, spec.center):
        if p.shape[0] != dim:
            from .errors import DimensionMismatch

            raise DimensionMismatch(f"expected dimension {dim}")
    body_pole = metric.to_body(spec.pole[None, :])
    if not metric.body.strictly_inside(body_pole)[0]:
        raise NotInteriorError("horoball pole must be interior")


def horofunction_values(metric: MetricInstance, pole, center, Y, policy: ApproachPolicy = ApproachPolicy()):
    """Tail (lo, hi) of g_k(y) = d(y, w_k) - d(w_k, pole) for every row of Y."""
    pole = as_point(pole, metric.point_dim)
    center = as_point(center, metric.point_dim)
    Y = as_points(Y, metric.point_dim)
    if not np.all(metric.body.strictly_inside(metric.to_body(Y))):
        raise NotInteriorError("horofunction arguments must be interior")
    W = policy.points(pole, center)[-policy.tail:]
    if not np.all(metric.body.strictly_inside(metric.to_body(W))):
        raise DomainEscapeError("approach point left the domain (is the body convex?)")
    G = np.empty((Y.shape[0], W.shape[0]))
    for j, w in enumerate(W):
        wrow = w[None, :]
        G[:, j] = metric.distance_batch(Y, wrow) - metric.distance_batch(wrow, pole[None, :])[0]
    return G.min(axis=1), G.max(axis=1)


def horofunction_estimate(metric: MetricInstance, spec: HoroballSpec, y, policy: ApproachPolicy = ApproachPolicy()) -> HorofunctionEstimate:
    _validate_spec(metric, spec)
    lo, hi = horofunction_values(metric, spec.pole, spec.center, as_point(y)[None, :], policy)
    lo, hi = float(lo[0]), float(hi[0])
    level = lo if spec.kind is HoroballKind.BIG else hi
    return HorofunctionEstimate(lo=lo, hi=hi, member=level <= spec.radius, stable=abs(hi - lo) <= STABILITY_TOL)


@dataclass
class StarViolation:
    eta: np.ndarray
    s: float
    margin: float


@dataclass
class ViolationReport:
    n_probes: int
    n_members: int
    violations: list = field(default_factory=list)
    worst_margin: float = float("-inf")
    note: str = ""

    @property
    def ok(self) -> bool:
        return not self.violations


def star_shape_check(
    metric: MetricInstance,
    spec: HoroballSpec,
    n_eta: int,
    n_s: int,
    seed=None,
    *,
    policy: ApproachPolicy = ApproachPolicy(),
    tol_star: float = TOL_STAR,
    pull_rel: float = PULL_REL,
    max_draws: int = 200_000,
) -> ViolationReport:
    """Sample big-horoball members eta and test the segment from eta to the center.

    Probe points ``s*eta + (1-s)*xi`` that do not classify Interior are moved
    ``pull_rel * diam`` toward the pole first; the horofunction is only
    defined inside the domain.
    """
    _validate_spec(metric, spec)
    if spec.kind is not HoroballKind.BIG:
        raise ValueError("star-shape check applies to big horoballs")
    from .geometry import sample_interior_batch

    rng = np.random.default_rng(seed)
    body = metric.body
    members = []
    drawn = 0
    while len(members) < n_eta and drawn < max_draws:
        batch = max(256, 4 * (n_eta - len(members)))
        Yb = metric.from_body(sample_interior_batch(body, batch, rng))
        drawn += batch
        lo, _ = horofunction_values(metric, spec.pole, spec.center, Yb, policy)
        members.extend(Yb[lo <= spec.radius])
    members = np.array(members[:n_eta])
    if len(members) == 0:
        return ViolationReport(0, 0, note=f"no members of the horoball found in {drawn} draws")

    s_grid = np.arange(1, n_s + 1) / (n_s + 1)
    eps = pull_rel * diameter(body)
    xi = spec.center
    probes = (s_grid[None, :, None] * members[:, None, :] + (1 - s_grid)[None, :, None] * xi).reshape(-1, members.shape[1])
    inside = body.strictly_inside(metric.to_body(probes)) & (
        np.asarray([c == "interior" for c in body.classify_batch(metric.to_body(probes))])
    )
    if not np.all(inside):
        toward = spec.pole[None, :] - probes[~inside]
        toward /= np.linalg.norm(toward, axis=1, keepdims=True)
        probes[~inside] = probes[~inside] + eps * toward
    lo, _ = horofunction_values(metric, spec.pole, spec.center, probes, policy)
    margins = lo - spec.radius - tol_star
    report = ViolationReport(n_probes=len(probes), n_members=len(members), worst_margin=float(np.max(margins)))
    eta_idx = np.repeat(np.arange(len(members)), n_s)
    s_idx = np.tile(s_grid, len(members))
    for i in np.flatnonzero(margins > 0):
        report.violations.append(StarViolation(members[eta_idx[i]], float(s_idx[i]), float(margins[i])))
    report.violations.sort(key=lambda v: (-v.margin, v.s))
    return report


@dataclass
class ShrinkResult:
    radii: list
    diameters: list
    resolution: float
    n_points: int

    def nonincreasing(self, slack: float | None = None) -> bool:
        slack = 2 * self.resolution if slack is None else slack
        d = self.diameters
        return all(d[i + 1] <= d[i] + slack for i in range(len(d) - 1))


def _set_diameter(P: np.ndarray) -> float:
    if len(P) < 2:
        return 0.0
    best = 0.0
    for start in range(0, len(P), 512):
        block = P[start:start + 512]
        diff = block[:, None, :] - P[None, :, :]
        best = max(best, float(np.sqrt(np.max(np.sum(diff * diff, axis=-1)))))
    return best


def trace_points(metric: MetricInstance, grid: int, pull: float = TRACE_PULL):
    """Probe points for the horoball trace and the norm positions they stand for.

    In one dimension the whole open interval is probed (its boundary is two
    points).  Otherwise boundary points on a grid of rays are pulled a
    fraction ``pull`` toward the interior point.  Returns
    (probe points in metric convention, body-coordinate positions, resolution).
    """
    body = metric.body
    if body.dim == 1:
        lo, hi = body.bounding_box()
        t = np.arange(1, grid) / grid
        pos = (lo + t[:, None] * (hi - lo))
        res = float((hi - lo)[0] / grid)
        return metric.from_body(pos), pos, res
    B = boundary_grid(body, grid)
    c = body.interior_point
    probes = B + pull * (c[None, :] - B)
    nn = np.sqrt(np.sum((B - np.roll(B, -1, axis=0)) ** 2, axis=1)) if body.dim == 2 else None
    res = float(np.max(nn)) if nn is not None else float(diameter(body) / grid ** (1.0 / (body.dim - 1)))
    return metric.from_body(probes), B, res


def intersection_shrink_check(
    metric: MetricInstance,
    z0,
    zeta,
    r_list,
    grid: int,
    *,
    policy: ApproachPolicy = ApproachPolicy(),
) -> ShrinkResult:
    """Norm diameter of the horoball trace {probe with lo <= r} plus zeta, per r."""
    r_list = [float(r) for r in r_list]
    if any(r_list[i + 1] >= r_list[i] for i in range(len(r_list) - 1)):
        raise ValueError("r_list must be strictly decreasing")
    z0 = as_point(z0, metric.point_dim)
    zeta = as_point(zeta, metric.point_dim)
    probes, positions, res = trace_points(metric, grid)
    lo, _ = horofunction_values(metric, z0, zeta, probes, policy)
    zeta_body = metric.to_body(zeta[None, :])[0]
    diams = []
    for r in r_list:
        P = np.vstack([positions[lo <= r], zeta_body[None, :]])
        diams.append(_set_diameter(P))
    return ShrinkResult(radii=r_list, diameters=diams, resolution=res, n_points=len(positions))


def horoball_grid(metric: MetricInstance, spec: HoroballSpec, n_per_axis: int, policy: ApproachPolicy = ApproachPolicy()):
    """Interior grid over the bounding box with horofunction bounds and membership.

    Returns (points in body coordinates, lo, hi, member).
    """
    _validate_spec(metric, spec)
    body = metric.body
    lo_b, hi_b = body.bounding_box()
    axes = [np.linspace(a, b, n_per_axis + 2)[1:-1] for a, b in zip(lo_b, hi_b)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, body.dim)
    keep = body.strictly_inside(mesh) & (body.residual(mesh) < -body.boundary_tol)
    pts = mesh[keep]
    lo, hi = horofunction_values(metric, spec.pole, spec.center, metric.from_body(pts), policy)
    level = lo if spec.kind is HoroballKind.BIG else hi
    return pts, lo, hi, level <= spec.radius
