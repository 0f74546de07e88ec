"""Bounded convex domains in R^n.

Four body families are supported: H-polytopes (with simplex and box
constructors), ellipsoids, Euclidean balls and polydiscs (products of unit
discs, viewed in R^{2k}).  Every body answers the same small set of
queries, the central one being :meth:`ConvexBody.ray_exit`, which returns
how far a ray travels before leaving the body.  Chords, Hilbert distances
and boundary sampling are all built on it.

Polytopes additionally carry face combinatorics: active facets of a boundary
point, the set ch(xi) of boundary points joined to xi by a boundary segment,
and ch(ch(xi)).
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq, linprog

from .errors import (
    CoincidentPointsError,
    DegenerateBodyError,
    DimensionMismatch,
    InconsistencyError,
    NotInteriorError,
    NotOnBoundaryError,
)

BOUNDARY_TOL = 1e-10
FACE_TOL = 1e-8
SEGMENT_SAMPLES = 64
_MAX_VERTEX_COMBOS = 200_000


class Location(str, enum.Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    EXTERIOR = "exterior"


class Diameter(NamedTuple):
    value: float
    exact: bool


@dataclass(frozen=True)
class Chord:
    """Boundary endpoints of the line through x and y.

    ``a = x + t_lo (y - x)`` and ``b = x + t_hi (y - x)`` with
    ``t_lo < 0 < 1 < t_hi``.  ``u = -t_lo`` and ``v = t_hi - 1`` are kept
    separately because they are computed directly from facet slacks and
    carry more digits than ``t_hi - 1`` would.
    """

    a: np.ndarray
    b: np.ndarray
    t_lo: float
    t_hi: float
    u: float
    v: float


@dataclass(frozen=True)
class FaceSet:
    facet_indices: tuple[int, ...]

    def __contains__(self, i):
        return i in self.facet_indices

    def __iter__(self):
        return iter(self.facet_indices)

    def __len__(self):
        return len(self.facet_indices)

    def intersects(self, other: "FaceSet") -> bool:
        return bool(set(self.facet_indices) & set(other.facet_indices))


def as_point(x, dim: int | None = None) -> np.ndarray:
    """Coerce to a finite 1-D float array, checking the dimension."""
    p = np.asarray(x, dtype=float)
    if p.ndim == 0:
        p = p.reshape(1)
    if p.ndim != 1:
        raise DimensionMismatch(f"expected a vector, got shape {p.shape}")
    if dim is not None and p.shape[0] != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got {p.shape[0]}")
    if not np.all(np.isfinite(p)):
        raise ValueError("point has non-finite entries")
    return p


def as_points(X, dim: int) -> np.ndarray:
    P = np.asarray(X, dtype=float)
    if P.ndim == 1:
        P = P.reshape(1, -1) if dim > 1 or P.shape[0] == 1 else P.reshape(-1, 1)
    if P.ndim != 2 or P.shape[1] != dim:
        raise DimensionMismatch(f"expected points of dimension {dim}, got shape {P.shape}")
    if not np.all(np.isfinite(P)):
        raise ValueError("points have non-finite entries")
    return P


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


class ConvexBody:
    """Common interface.  Subclasses are immutable after construction."""

    kind = "body"
    dim: int
    boundary_tol: float

    # -- primitives every subclass provides ---------------------------------
    def ray_exit(self, P, D) -> np.ndarray:
        """Largest t >= 0 with P + t D in the closed body, row-wise."""
        raise NotImplementedError

    def residual(self, X) -> np.ndarray:
        """Signed constraint residual: negative inside, zero on the boundary."""
        raise NotImplementedError

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    @property
    def interior_point(self) -> np.ndarray:
        raise NotImplementedError

    def diameter_estimate(self) -> Diameter:
        raise NotImplementedError

    def nearest_boundary_point(self, x) -> np.ndarray:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    # -- shared behaviour ----------------------------------------------------
    def classify(self, x) -> Location:
        x = as_point(x, self.dim)
        return Location(self.classify_batch(x[None, :])[0])

    def classify_batch(self, X) -> np.ndarray:
        r = self.residual(as_points(X, self.dim))
        out = np.full(r.shape, Location.INTERIOR.value, dtype=object)
        out[np.abs(r) <= self.boundary_tol] = Location.BOUNDARY.value
        out[r > self.boundary_tol] = Location.EXTERIOR.value
        return out

    def strictly_inside(self, X) -> np.ndarray:
        """True where the residual is strictly negative (no tolerance band)."""
        return self.residual(as_points(X, self.dim)) < 0.0

    def gauge(self, x, center=None) -> float:
        """Minkowski gauge of x relative to ``center`` (1 on the boundary)."""
        c = self.interior_point if center is None else as_point(center, self.dim)
        x = as_point(x, self.dim)
        d = x - c
        nd = np.linalg.norm(d)
        if nd == 0.0:
            return 0.0
        t = float(self.ray_exit(c[None, :], d[None, :])[0])
        return 1.0 / t

    def boundary_along(self, origin, direction) -> np.ndarray:
        o = as_point(origin, self.dim)
        u = as_point(direction, self.dim)
        t = float(self.ray_exit(o[None, :], u[None, :])[0])
        if not np.isfinite(t):
            raise InconsistencyError("ray from an interior point never leaves the body")
        return o + t * u

    def __eq__(self, other):
        return type(self) is type(other) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(repr(self.to_dict()))


# ---------------------------------------------------------------------------
# Polytopes
# ---------------------------------------------------------------------------


class HPolytope(ConvexBody):
    """{x : A x <= b}, rows normalised to unit length at construction."""

    kind = "hpolytope"

    def __init__(self, A, b, boundary_tol: float = BOUNDARY_TOL, face_tol: float = FACE_TOL):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.asarray(b, dtype=float).reshape(-1)
        if A.shape[0] != b.shape[0]:
            raise DimensionMismatch("A and b have different numbers of rows")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise DegenerateBodyError("non-finite constraint data")
        norms = np.linalg.norm(A, axis=1)
        if np.any(norms == 0.0):
            raise DegenerateBodyError("zero row in A")
        self._A_raw = A.copy()
        self._b_raw = b.copy()
        self.A = A / norms[:, None]
        self.b = b / norms
        self.A.setflags(write=False)
        self.b.setflags(write=False)
        self.dim = A.shape[1]
        self.m = A.shape[0]
        self.boundary_tol = boundary_tol
        self.face_tol = face_tol
        self._lo, self._hi = self._validate_bounded()
        self._center, self._radius = self._chebyshev()
        self._adjacency: dict[tuple[int, int], bool] = {}

    def _validate_bounded(self):
        lo = np.empty(self.dim)
        hi = np.empty(self.dim)
        for i in range(self.dim):
            for sign, store in ((1.0, lo), (-1.0, hi)):
                c = np.zeros(self.dim)
                c[i] = sign
                res = linprog(c, A_ub=self.A, b_ub=self.b, bounds=[(None, None)] * self.dim, method="highs")
                if res.status == 3:
                    raise DegenerateBodyError("polytope is unbounded")
                if res.status == 2:
                    raise DegenerateBodyError("polytope is empty")
                if res.status != 0:
                    raise DegenerateBodyError(f"bounding-box LP failed: {res.message}")
                store[i] = res.x[i]
        return lo, hi

    def _chebyshev(self):
        c = np.zeros(self.dim + 1)
        c[-1] = -1.0
        A_ub = np.hstack([self.A, np.ones((self.m, 1))])
        bounds = [(None, None)] * self.dim + [(0.0, None)]
        res = linprog(c, A_ub=A_ub, b_ub=self.b, bounds=bounds, method="highs")
        if res.status != 0:
            raise DegenerateBodyError(f"Chebyshev LP failed: {res.message}")
        r = res.x[-1]
        scale = max(1.0, float(np.max(self._hi - self._lo)))
        if r <= 1e-12 * scale:
            raise DegenerateBodyError("polytope has empty interior")
        return res.x[:-1], r

    @property
    def interior_point(self) -> np.ndarray:
        return self._center.copy()

    @property
    def inradius(self) -> float:
        return float(self._radius)

    def bounding_box(self):
        return self._lo.copy(), self._hi.copy()

    def slacks(self, X) -> np.ndarray:
        X = as_points(X, self.dim)
        return self.b[None, :] - X @ self.A.T

    def _tols(self, tol):
        return tol * (1.0 + np.abs(self.b))

    def residual(self, X):
        # worst violation, rescaled so that the per-facet tolerance becomes boundary_tol
        s = self.slacks(X) / (1.0 + np.abs(self.b))[None, :]
        return -np.min(s, axis=1)

    def ray_exit(self, P, D):
        P = as_points(P, self.dim)
        D = as_points(D, self.dim)
        AD = D @ self.A.T
        S = np.maximum(self.b[None, :] - P @ self.A.T, 0.0)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            T = np.where(AD > 0.0, S / np.where(AD > 0.0, AD, 1.0), np.inf)
        return np.min(T, axis=1)

    def active_set(self, p, tol=None) -> tuple[int, ...]:
        tol = self.face_tol if tol is None else tol
        s = self.slacks(as_point(p, self.dim)[None, :])[0]
        return tuple(int(i) for i in np.flatnonzero(np.abs(s) <= self._tols(tol)))

    @cached_property
    def vertices(self) -> np.ndarray | None:
        """All vertices by facet-subset enumeration, or None when too many subsets."""
        n = self.dim
        if math.comb(self.m, n) > _MAX_VERTEX_COMBOS:
            return None
        verts = []
        for rows in itertools.combinations(range(self.m), n):
            M = self.A[list(rows)]
            if abs(np.linalg.det(M)) < 1e-12:
                continue
            v = np.linalg.solve(M, self.b[list(rows)])
            if np.all(self.A @ v <= self.b + self._tols(self.face_tol)):
                if not any(np.allclose(v, w, atol=1e-12) for w in verts):
                    verts.append(v)
        return np.array(verts)

    def diameter_estimate(self):
        V = self.vertices
        if V is None or len(V) == 0:
            return Diameter(float(np.linalg.norm(self._hi - self._lo)), False)
        diff = V[:, None, :] - V[None, :, :]
        return Diameter(float(np.sqrt(np.max(np.sum(diff * diff, axis=-1)))), True)

    def nearest_boundary_point(self, x):
        x = as_point(x, self.dim)
        s = self.slacks(x[None, :])[0]
        if np.all(s >= 0):
            i = int(np.argmin(s))
            return x + s[i] * self.A[i]
        # outside: the closest point of the closed polytope lies on its boundary
        return _project_polytope(self, x)

    def facets_meet(self, i: int, j: int) -> bool:
        """True when facets i and j share at least one point of the closed body."""
        if i == j:
            return True
        key = (min(i, j), max(i, j))
        if key not in self._adjacency:
            A_eq = self.A[list(key)]
            b_eq = self.b[list(key)]
            res = linprog(
                np.zeros(self.dim), A_ub=self.A, b_ub=self.b + self._tols(self.face_tol),
                A_eq=A_eq, b_eq=b_eq, bounds=[(None, None)] * self.dim, method="highs",
            )
            self._adjacency[key] = res.status == 0
        return self._adjacency[key]

    def to_dict(self):
        return {"type": "hpolytope", "A": self._A_raw.tolist(), "b": self._b_raw.tolist()}

    def __repr__(self):
        return f"HPolytope(m={self.m}, dim={self.dim})"


def _project_polytope(body: HPolytope, x):
    from scipy.optimize import minimize

    res = minimize(
        lambda z: 0.5 * np.sum((z - x) ** 2),
        body.interior_point,
        jac=lambda z: z - x,
        constraints=[{"type": "ineq", "fun": lambda z: body.b - body.A @ z, "jac": lambda z: -body.A}],
        method="SLSQP",
    )
    return res.x


class Simplex(HPolytope):
    """Open corner simplex {x_i > 0, sum x_i < 1} in R^n.

    Facets are ordered x_1 >= 0, ..., x_n >= 0, then sum x_i <= 1.
    """

    kind = "simplex"

    def __init__(self, n: int, boundary_tol: float = BOUNDARY_TOL, face_tol: float = FACE_TOL):
        if n < 1:
            raise DegenerateBodyError("simplex dimension must be >= 1")
        A = np.vstack([-np.eye(n), np.ones((1, n))])
        b = np.concatenate([np.zeros(n), [1.0]])
        super().__init__(A, b, boundary_tol, face_tol)

    @cached_property
    def vertices(self):
        return np.vstack([np.zeros(self.dim), np.eye(self.dim)])

    def lift(self, x) -> np.ndarray:
        """Reduced coordinates -> barycentric (n+1)-vector."""
        x = np.asarray(x, dtype=float)
        return np.concatenate([x, 1.0 - np.sum(x, axis=-1, keepdims=True)], axis=-1)

    @staticmethod
    def drop(p) -> np.ndarray:
        """Positive (n+1)-vector -> reduced coordinates after normalising."""
        p = np.asarray(p, dtype=float)
        p = p / np.sum(p, axis=-1, keepdims=True)
        return p[..., :-1]

    def to_dict(self):
        return {"type": "simplex", "dimension": self.dim}

    def __repr__(self):
        return f"Simplex({self.dim})"


def box(lo, hi, **kw) -> HPolytope:
    """Axis-aligned box.  Facets: +x_1..+x_n (upper faces), then -x_1..-x_n."""
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    n = lo.shape[0]
    A = np.vstack([np.eye(n), -np.eye(n)])
    b = np.concatenate([hi, -lo])
    return HPolytope(A, b, **kw)


def interval(lo=-1.0, hi=1.0, **kw) -> HPolytope:
    return box([lo], [hi], **kw)


def unit_square(**kw) -> HPolytope:
    """[-1, 1]^2 with facets 0=right, 1=top, 2=left, 3=bottom."""
    return box([-1.0, -1.0], [1.0, 1.0], **kw)


def random_polytope(n_facets: int, dim: int = 2, seed=0) -> HPolytope:
    """Bounded polytope whose facet normals are spread around the circle/sphere."""
    rng = _rng(seed)
    if dim == 2:
        ang = np.sort(2 * np.pi * (np.arange(n_facets) + rng.uniform(0.15, 0.85, n_facets)) / n_facets)
        A = np.column_stack([np.cos(ang), np.sin(ang)])
    else:
        A = rng.normal(size=(n_facets, dim))
    b = rng.uniform(0.85, 1.15, n_facets)
    return HPolytope(A, b)


# ---------------------------------------------------------------------------
# Smooth bodies
# ---------------------------------------------------------------------------


class Ellipsoid(ConvexBody):
    """{x : (x - c)^T Q (x - c) < 1} with Q symmetric positive definite."""

    kind = "ellipsoid"

    def __init__(self, center, shape, boundary_tol: float = BOUNDARY_TOL):
        c = as_point(center)
        Q = np.atleast_2d(np.asarray(shape, dtype=float))
        if Q.shape != (c.shape[0], c.shape[0]):
            raise DimensionMismatch("shape matrix does not match center")
        if not np.allclose(Q, Q.T, rtol=0, atol=1e-12 * max(1.0, np.abs(Q).max())):
            raise DegenerateBodyError("shape matrix is not symmetric")
        Q = 0.5 * (Q + Q.T)
        try:
            np.linalg.cholesky(Q)
        except np.linalg.LinAlgError as exc:
            raise DegenerateBodyError("shape matrix is not positive definite") from exc
        self.center = c
        self.Q = Q
        self.center.setflags(write=False)
        self.Q.setflags(write=False)
        self.dim = c.shape[0]
        self.boundary_tol = boundary_tol
        self._evals, self._evecs = np.linalg.eigh(Q)

    @property
    def interior_point(self):
        return self.center.copy()

    def _form(self, X):
        Y = X - self.center[None, :]
        return np.einsum("ij,jk,ik->i", Y, self.Q, Y)

    def residual(self, X):
        return np.sqrt(self._form(as_points(X, self.dim))) - 1.0

    def ray_exit(self, P, D):
        P = as_points(P, self.dim)
        D = as_points(D, self.dim)
        Y = P - self.center[None, :]
        QD = D @ self.Q
        alpha = np.einsum("ij,ij->i", QD, D)
        beta = np.einsum("ij,ij->i", QD, Y)
        gamma = np.minimum(self._form(P) - 1.0, 0.0)
        return _positive_root(alpha, beta, gamma)

    def bounding_box(self):
        half = np.sqrt(np.diag(np.linalg.inv(self.Q)))
        return self.center - half, self.center + half

    def diameter_estimate(self):
        return Diameter(float(2.0 / math.sqrt(self._evals[0])), True)

    def nearest_boundary_point(self, x):
        x = as_point(x, self.dim)
        y = self._evecs.T @ (x - self.center)
        lam = self._evals
        if np.allclose(y, 0.0):
            # center: every point at the smallest semi-axis is nearest
            return self.center + self._evecs[:, -1] / math.sqrt(lam[-1])

        def f(mu):
            return float(np.sum(lam * y * y / (1.0 + mu * lam) ** 2) - 1.0)

        f0 = f(0.0)
        if f0 == 0.0:
            return x.copy()
        if f0 < 0.0:
            a = None
            for k in range(1, 60):
                cand = -(1.0 - 2.0**-k) / lam[-1]
                if f(cand) > 0.0:
                    a = cand
                    break
            if a is None:
                # no sign change (y has no weight on the largest eigenvalue): radial fallback
                return self.center + (x - self.center) / math.sqrt(f0 + 1.0)
            mu = brentq(f, a, 0.0, xtol=1e-16, maxiter=500)
        else:
            hi = 1.0
            while f(hi) > 0.0:
                hi *= 2.0
            mu = brentq(f, 0.0, hi, xtol=1e-15, maxiter=500)
        p = y / (1.0 + mu * lam)
        return self.center + self._evecs @ p

    def to_dict(self):
        return {"type": "ellipsoid", "center": self.center.tolist(), "shape": self.Q.tolist()}

    def __repr__(self):
        return f"Ellipsoid(dim={self.dim})"


def _positive_root(alpha, beta, gamma):
    """Positive root of alpha t^2 + 2 beta t + gamma with gamma <= 0 < alpha, stably."""
    with np.errstate(divide="ignore", invalid="ignore"):
        disc = np.sqrt(np.maximum(beta * beta - alpha * gamma, 0.0))
        big = beta + disc
        t_pos = np.where(beta >= 0.0, -gamma / np.where(big > 0, big, 1.0), (disc - beta) / alpha)
    t_pos = np.where(alpha > 0.0, t_pos, np.inf)
    return np.where((beta >= 0.0) & (big <= 0.0) & (alpha > 0.0), 0.0, t_pos)


class Ball(Ellipsoid):
    kind = "ball"

    def __init__(self, center, radius: float, boundary_tol: float = BOUNDARY_TOL):
        c = as_point(center)
        if not radius > 0:
            raise DegenerateBodyError("radius must be positive")
        super().__init__(c, np.eye(c.shape[0]) / radius**2, boundary_tol)
        self.radius = float(radius)

    def diameter_estimate(self):
        return Diameter(2.0 * self.radius, True)

    def nearest_boundary_point(self, x):
        x = as_point(x, self.dim)
        d = x - self.center
        nd = np.linalg.norm(d)
        if nd == 0.0:
            d = np.zeros(self.dim)
            d[0] = 1.0
            nd = 1.0
        return self.center + self.radius * d / nd

    def to_dict(self):
        return {"type": "ball", "center": self.center.tolist(), "radius": self.radius}

    def __repr__(self):
        return f"Ball(dim={self.dim}, radius={self.radius})"


def unit_disc(**kw) -> Ball:
    return Ball([0.0, 0.0], 1.0, **kw)


class Polydisc(ConvexBody):
    """Unit polydisc in C^k, stored in R^{2k} as (Re z_1, Im z_1, ..., Re z_k, Im z_k)."""

    kind = "polydisc"

    def __init__(self, k: int, boundary_tol: float = BOUNDARY_TOL):
        if k < 1:
            raise DegenerateBodyError("polydisc needs k >= 1")
        self.k = k
        self.dim = 2 * k
        self.boundary_tol = boundary_tol

    @property
    def interior_point(self):
        return np.zeros(self.dim)

    def _pairs(self, X):
        return X.reshape(X.shape[0], self.k, 2)

    def residual(self, X):
        Z = self._pairs(as_points(X, self.dim))
        return np.sqrt(np.max(np.sum(Z * Z, axis=-1), axis=1)) - 1.0

    def ray_exit(self, P, D):
        P = self._pairs(as_points(P, self.dim))
        D = self._pairs(as_points(D, self.dim))
        alpha = np.sum(D * D, axis=-1)
        beta = np.sum(D * P, axis=-1)
        gamma = np.minimum(np.sum(P * P, axis=-1) - 1.0, 0.0)
        return np.min(_positive_root(alpha, beta, gamma), axis=1)

    def bounding_box(self):
        return -np.ones(self.dim), np.ones(self.dim)

    def diameter_estimate(self):
        return Diameter(2.0 * math.sqrt(self.k), True)

    def nearest_boundary_point(self, x):
        x = as_point(x, self.dim)
        Z = x.reshape(self.k, 2).copy()
        mod = np.linalg.norm(Z, axis=1)
        j = int(np.argmax(mod))
        Z[j] = Z[j] / mod[j] if mod[j] > 0 else np.array([1.0, 0.0])
        return Z.reshape(-1)

    def to_dict(self):
        return {"type": "polydisc", "k": self.k}

    def __repr__(self):
        return f"Polydisc({self.k})"


# ---------------------------------------------------------------------------
# Free-function operations
# ---------------------------------------------------------------------------


def classify(body: ConvexBody, x) -> Location:
    return body.classify(x)


def chord_endpoints(body: ConvexBody, x, y) -> Chord:
    x = as_point(x, body.dim)
    y = as_point(y, body.dim)
    if np.linalg.norm(y - x) <= 1e-12:
        raise CoincidentPointsError("chord through coincident points")
    for p in (x, y):
        if body.classify(p) is not Location.INTERIOR:
            raise NotInteriorError(f"point {p} is not interior")
    d = y - x
    u = float(body.ray_exit(x[None, :], -d[None, :])[0])
    v = float(body.ray_exit(y[None, :], d[None, :])[0])
    if not (np.isfinite(u) and np.isfinite(v)):
        raise InconsistencyError("no facet bounds the ray; body validation should have prevented this")
    return Chord(a=x - u * d, b=y + v * d, t_lo=-u, t_hi=1.0 + v, u=u, v=v)


def _require_boundary(body: ConvexBody, p, tol=None) -> np.ndarray:
    p = as_point(p, body.dim)
    if isinstance(body, HPolytope):
        tol = body.face_tol if tol is None else tol
        s = body.slacks(p[None, :])[0]
        tols = body._tols(tol)
        if np.any(s < -tols) or not np.any(np.abs(s) <= tols):
            raise NotOnBoundaryError(f"point {p} is not on the boundary")
    elif body.classify(p) is not Location.BOUNDARY:
        raise NotOnBoundaryError(f"point {p} is not on the boundary")
    return p


def active_facets(body: HPolytope, p, face_tol: float | None = None) -> FaceSet:
    p = _require_boundary(body, p, face_tol)
    return FaceSet(body.active_set(p, face_tol))


def segment_on_boundary(body: ConvexBody, x, y, samples: int = SEGMENT_SAMPLES) -> bool:
    """Whether the closed segment [x, y] lies in the boundary."""
    if isinstance(body, HPolytope):
        return active_facets(body, x).intersects(active_facets(body, y))
    x = _require_boundary(body, x)
    y = _require_boundary(body, y)
    s = np.arange(samples + 1)[:, None] / samples
    pts = s * x[None, :] + (1.0 - s) * y[None, :]
    return bool(np.all(np.abs(body.residual(pts)) <= body.boundary_tol))


def in_ch(body: ConvexBody, x, xi) -> bool:
    """Membership of x in ch(xi) = {x in boundary : [x, xi] in boundary}.

    Exact (shared facet) for polytopes; sampled for other bodies.
    """
    return segment_on_boundary(body, x, xi)


def ch_facets(body: HPolytope, xi) -> FaceSet:
    """ch(xi) for a polytope: the union of the facets containing xi."""
    return active_facets(body, xi)


def ch_of_ch_facets(body: HPolytope, xi) -> FaceSet:
    """Facets whose union is ch(ch(xi)): every facet meeting a facet through xi."""
    own = active_facets(body, xi)
    out = {j for j in range(body.m) if any(body.facets_meet(i, j) for i in own)}
    return FaceSet(tuple(sorted(out)))


def ch_of_ch_membership(body: ConvexBody, x, xi) -> bool:
    if isinstance(body, HPolytope):
        ax = active_facets(body, x)
        axi = active_facets(body, xi)
        return any(body.facets_meet(i, j) for i in ax for j in axi)
    if isinstance(body, Ellipsoid):
        # strictly convex: ch(xi) = {xi}, hence ch(ch(xi)) = {xi}
        return segment_on_boundary(body, x, xi)
    raise TypeError(f"ch(ch(.)) is not available for {type(body).__name__}")


def diameter(body: ConvexBody) -> float:
    return body.diameter_estimate().value


def diameter_estimate(body: ConvexBody) -> Diameter:
    return body.diameter_estimate()


def sample_interior_batch(body: ConvexBody, n: int, seed=None) -> np.ndarray:
    """n interior points by rejection from the bounding box."""
    rng = _rng(seed)
    lo, hi = body.bounding_box()
    out = []
    have = 0
    while have < n:
        need = n - have
        batch = max(64, 2 * need)
        X = rng.uniform(lo, hi, size=(batch, body.dim))
        X = X[body.residual(X) < -body.boundary_tol]
        out.append(X[:need])
        have += len(out[-1])
    return np.vstack(out) if out else np.empty((0, body.dim))


def sample_interior(body: ConvexBody, seed=None) -> np.ndarray:
    return sample_interior_batch(body, 1, seed)[0]


def random_directions(n: int, dim: int, seed=None) -> np.ndarray:
    rng = _rng(seed)
    U = rng.normal(size=(n, dim))
    return U / np.linalg.norm(U, axis=1, keepdims=True)


def boundary_points_from(body: ConvexBody, origin, directions) -> np.ndarray:
    o = as_point(origin, body.dim)
    U = as_points(directions, body.dim)
    t = body.ray_exit(np.broadcast_to(o, U.shape), U)
    if not np.all(np.isfinite(t)):
        raise InconsistencyError("ray from an interior point never leaves the body")
    return o[None, :] + t[:, None] * U


def sample_boundary_batch(body: ConvexBody, n: int, seed=None) -> np.ndarray:
    """Boundary points hit by rays from the interior point in random directions."""
    return boundary_points_from(body, body.interior_point, random_directions(n, body.dim, seed))


def boundary_grid(body: ConvexBody, n: int, seed=0) -> np.ndarray:
    """Deterministic boundary sample: angular grid in 2-D, seeded directions otherwise."""
    if body.dim == 1:
        c = body.interior_point
        return boundary_points_from(body, c, np.array([[1.0], [-1.0]]))
    if body.dim == 2:
        th = 2 * np.pi * np.arange(n) / n
        U = np.column_stack([np.cos(th), np.sin(th)])
    else:
        U = random_directions(n, body.dim, seed)
    return boundary_points_from(body, body.interior_point, U)


def snap_to_face(body: ConvexBody, x, radius: float) -> np.ndarray:
    """Nearest boundary point, then (polytopes) onto the smallest face within ``radius``.

    Orbit clusters are resolved only to ``radius``; snapping maps a cluster
    representative onto the face it is indistinguishable from at that
    resolution.
    """
    p = body.nearest_boundary_point(x)
    if not isinstance(body, HPolytope):
        return p
    x = as_point(x, body.dim)
    s = body.slacks(x[None, :])[0]
    near = np.flatnonzero(s <= radius)
    if len(near) == 0:
        return p
    # project onto the affine span of the near facets, then check feasibility
    M = body.A[near]
    r = body.b[near] - M @ x
    z = x + np.linalg.lstsq(M, r, rcond=None)[0]
    if np.all(body.A @ z <= body.b + body._tols(body.face_tol)) and np.linalg.norm(z - x) <= 2 * radius * math.sqrt(len(near)):
        V = body.vertices
        if np.linalg.matrix_rank(M) == body.dim and V is not None:
            # a vertex: return the stored coordinates rather than a solve with roundoff
            return V[np.argmin(np.linalg.norm(V - z, axis=1))].copy()
        return z
    return p


# ---------------------------------------------------------------------------
# Body description files
# ---------------------------------------------------------------------------


def body_from_dict(spec: dict) -> ConvexBody:
    try:
        kind = spec["type"].lower()
        tol = {k: spec[k] for k in ("boundary_tol",) if k in spec}
        if kind == "hpolytope":
            ftol = {"face_tol": spec["face_tol"]} if "face_tol" in spec else {}
            return HPolytope(spec["A"], spec["b"], **tol, **ftol)
        if kind == "simplex":
            return Simplex(int(spec["dimension"]), **tol)
        if kind == "box":
            return box(spec["lo"], spec["hi"], **tol)
        if kind == "interval":
            return interval(spec.get("lo", -1.0), spec.get("hi", 1.0), **tol)
        if kind == "ellipsoid":
            return Ellipsoid(spec["center"], spec["shape"], **tol)
        if kind == "ball":
            return Ball(spec["center"], float(spec["radius"]), **tol)
        if kind == "disc":
            return unit_disc(**tol)
        if kind == "polydisc":
            return Polydisc(int(spec["k"]), **tol)
    except KeyError as exc:
        raise DegenerateBodyError(f"body description missing field {exc}") from exc
    raise DegenerateBodyError(f"unknown body type {spec.get('type')!r}")
