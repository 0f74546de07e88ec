"""Hilbert, Poincare-disc and polydisc distances.

The Hilbert metric has two independent implementations:

* :func:`hilbert_cross_ratio` on any :class:`~hilbertdyn.geometry.ConvexBody`,
  through the chord endpoints of the line through x and y;
* :func:`hilbert_cone` on the positive orthant, as log(M(x/y) / m(x/y)).

On the corner simplex the two agree after lifting a point
(x_1..x_n) to (x_1..x_n, 1 - sum x_i), which is what the test-suite uses as
a mutual oracle.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotInteriorError, PrecisionWarning
from .geometry import ConvexBody, Polydisc, Simplex, as_point, as_points

SAME_POINT_TOL = 1e-14
PRECISION_FLOOR = 1e-13


class MetricKind(str, enum.Enum):
    HILBERT_CROSS_RATIO = "hilbert"
    HILBERT_CONE = "hilbert-cone"
    POINCARE_DISC = "poincare"
    POLYDISC = "polydisc"


def _cross_ratio_from_factors(u, v, same):
    # log((1 + |x-y|/|x-a|)(1 + |x-y|/|y-b|)) with u = |x-a|/|x-y|, v = |y-b|/|x-y|
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        iu = 1.0 / u
        iv = 1.0 / v
        d = np.log1p(iu + iv + iu * iv)
        # the product overflows only within ~1e-154 of the boundary
        d = np.where(np.isfinite(d), d, np.log1p(iu) + np.log1p(iv))
    return np.where(same, 0.0, d)


def hilbert_cross_ratio_batch(body: ConvexBody, X, Y, *, warn: bool = True) -> np.ndarray:
    """Row-wise Hilbert distance between strictly interior points."""
    X = as_points(X, body.dim)
    Y = as_points(Y, body.dim)
    X, Y = np.broadcast_arrays(X, Y)
    inside = body.strictly_inside(X) & body.strictly_inside(Y)
    if not np.all(inside):
        bad = X[~inside][0] if not np.all(body.strictly_inside(X)) else Y[~inside][0]
        raise NotInteriorError(f"point {bad} is not interior")
    D = Y - X
    same = np.linalg.norm(D, axis=1) <= SAME_POINT_TOL
    u = body.ray_exit(X, -D)
    v = body.ray_exit(Y, D)
    live = ~same
    if warn and np.any(np.minimum(u, v)[live] < PRECISION_FLOOR):
        warnings.warn("Hilbert distance evaluated within 1e-13 of the boundary", PrecisionWarning, stacklevel=2)
    if np.any(~np.isfinite(u[live])) or np.any(~np.isfinite(v[live])):
        from .errors import InconsistencyError

        raise InconsistencyError("ray never leaves a bounded body")
    return _cross_ratio_from_factors(u, v, same)


def hilbert_cross_ratio(body: ConvexBody, x, y) -> float:
    x = as_point(x, body.dim)
    y = as_point(y, body.dim)
    return float(hilbert_cross_ratio_batch(body, x[None, :], y[None, :])[0])


def _positive(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if not np.all(np.isfinite(X)):
        raise ValueError("non-finite cone vector")
    if np.any(X <= 0.0):
        raise NotInteriorError("cone vectors must have strictly positive entries")
    return X


def hilbert_cone_batch(X, Y) -> np.ndarray:
    X = _positive(np.atleast_2d(X))
    Y = _positive(np.atleast_2d(Y))
    if X.shape[-1] != Y.shape[-1]:
        raise DimensionMismatch("cone vectors of different dimension")
    L = np.log(X) - np.log(Y)
    return np.max(L, axis=-1) - np.min(L, axis=-1)


def hilbert_cone(x, y) -> float:
    """log(M(x/y) / m(x/y)) for strictly positive vectors."""
    return float(hilbert_cone_batch(as_point(x)[None, :], as_point(y)[None, :])[0])


def lift(x) -> np.ndarray:
    """Corner-simplex point (x_1..x_n) -> positive vector (x_1..x_n, 1 - sum)."""
    x = np.asarray(x, dtype=float)
    return np.concatenate([x, 1.0 - np.sum(x, axis=-1, keepdims=True)], axis=-1)


def _as_complex(z):
    z = np.asarray(z)
    if np.iscomplexobj(z):
        return z.astype(complex)
    z = z.astype(float)
    if z.shape[-1] % 2:
        raise DimensionMismatch("real encoding of complex points needs an even length")
    return z[..., 0::2] + 1j * z[..., 1::2]


def _poincare(z, w):
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    az = np.abs(z)
    aw = np.abs(w)
    if np.any(az >= 1.0) or np.any(aw >= 1.0):
        raise NotInteriorError("points must lie in the open unit disc")
    num = np.abs(z - w)
    den = np.abs(1.0 - np.conj(z) * w)
    rho = num / den
    # 1 - rho^2 = (1-|z|^2)(1-|w|^2)/|1 - conj(z) w|^2, without cancellation near the circle
    one_minus_rho2 = (1.0 - az) * (1.0 + az) * (1.0 - aw) * (1.0 + aw) / (den * den)
    one_minus_rho = one_minus_rho2 / (1.0 + rho)
    return 0.5 * np.log1p(2.0 * rho / one_minus_rho)


def poincare_disc(z, w) -> float:
    """arctanh(|z - w| / |1 - conj(z) w|) on the unit disc; z, w complex or (re, im) pairs."""
    z, w = (np.atleast_1d(np.asarray(v)) for v in (z, w))
    z = z.astype(complex) if z.size == 1 else _as_complex(z).reshape(-1)
    w = w.astype(complex) if w.size == 1 else _as_complex(w).reshape(-1)
    if z.size != 1 or w.size != 1:
        raise DimensionMismatch("disc points are single complex numbers")
    return float(_poincare(z[0], w[0]))


def polydisc_distance_batch(Z, W) -> np.ndarray:
    """Max over coordinates of the Poincare distance; rows are points of C^k (complex or real pairs)."""
    Z = _as_complex(np.atleast_2d(Z))
    W = _as_complex(np.atleast_2d(W))
    if Z.shape != W.shape:
        raise DimensionMismatch("polydisc points of different dimension")
    return np.max(_poincare(Z, W), axis=-1)


def polydisc_distance(z, w) -> float:
    z = _as_complex(np.atleast_1d(z))
    w = _as_complex(np.atleast_1d(w))
    if z.shape != w.shape:
        raise DimensionMismatch("polydisc points of different dimension")
    return float(np.max(_poincare(z, w)))


def kobayashi_lower_bound(diam: float, x, y) -> float:
    """arctanh(||x - y|| / diam); complex inputs use the Euclidean norm of C^k."""
    gap = float(np.linalg.norm(np.atleast_1d(np.asarray(x)) - np.atleast_1d(np.asarray(y))))
    if gap >= diam:
        raise ValueError(f"|x - y| = {gap} >= diameter {diam}: inconsistent diameter")
    return math.atanh(gap / diam)


def hilbert_norm_lower_bound(diam: float, x, y) -> float:
    gap = float(np.linalg.norm(np.atleast_1d(np.asarray(x, dtype=float)) - np.atleast_1d(np.asarray(y, dtype=float))))
    return 2.0 * math.log1p(gap / diam)


@dataclass(frozen=True)
class MetricInstance:
    """A body paired with a distance.

    Point conventions by kind:

    * ``hilbert``: points of ``body``.
    * ``hilbert-cone``: positive vectors of length ``body.dim + 1``; ``body``
      must be a :class:`Simplex`, the projective section of the cone.
    * ``poincare``: points of the unit disc as (Re, Im) pairs or complex.
    * ``polydisc``: points of R^{2k} or complex k-vectors.

    ``kappa`` is the quasi-geodesic slack of the space; it is carried as
    metadata and never enters a formula.
    """

    body: ConvexBody
    kind: MetricKind = MetricKind.HILBERT_CROSS_RATIO
    kappa: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", MetricKind(self.kind))
        if self.kappa < 0:
            raise ValueError("kappa must be nonnegative")
        if self.kind is MetricKind.HILBERT_CONE and not isinstance(self.body, Simplex):
            raise TypeError("hilbert-cone instances need a Simplex body")
        if self.kind is MetricKind.POLYDISC and not isinstance(self.body, Polydisc):
            raise TypeError("polydisc instances need a Polydisc body")
        if self.kind is MetricKind.POINCARE_DISC and self.body.dim != 2:
            raise TypeError("poincare instances need the unit disc")

    @property
    def point_dim(self) -> int:
        return self.body.dim + 1 if self.kind is MetricKind.HILBERT_CONE else self.body.dim

    def distance(self, x, y) -> float:
        return float(self.distance_batch(np.asarray(x)[None, ...], np.asarray(y)[None, ...])[0])

    def distance_batch(self, X, Y) -> np.ndarray:
        k = self.kind
        if k is MetricKind.HILBERT_CROSS_RATIO:
            return hilbert_cross_ratio_batch(self.body, X, Y)
        if k is MetricKind.HILBERT_CONE:
            return hilbert_cone_batch(X, Y)
        if k is MetricKind.POINCARE_DISC:
            return _poincare(_as_complex(X)[..., 0], _as_complex(Y)[..., 0])
        return polydisc_distance_batch(X, Y)

    def to_body(self, X) -> np.ndarray:
        """Map points in this instance's convention to coordinates of ``body``."""
        if self.kind is MetricKind.HILBERT_CONE:
            return Simplex.drop(X)
        return np.asarray(X, dtype=float)

    def from_body(self, X) -> np.ndarray:
        if self.kind is MetricKind.HILBERT_CONE:
            return lift(X)
        return np.asarray(X, dtype=float)

    def describe(self) -> dict:
        return {"kind": self.kind.value, "body": self.body.to_dict(), "kappa": self.kappa}


def metric_from_dict(spec: dict, body: ConvexBody) -> MetricInstance:
    kind = spec.get("kind", "hilbert") if isinstance(spec, dict) else spec
    kappa = float(spec.get("kappa", 0.0)) if isinstance(spec, dict) else 0.0
    return MetricInstance(body, MetricKind(kind), kappa)
