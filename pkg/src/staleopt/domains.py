"""Compact convex feasible sets with exact Euclidean projection.

Four set families are supported: balls, axis-aligned boxes, scaled
probability simplices, and bounded intersections of halfspaces.  Each
domain knows its exact diameter ``D = sup {|x - y| : x, y in K}``, a
canonical interior point used as the default initial iterate, and a
linear minimization oracle (used to certify optima elsewhere).

Projection is exact (up to floating point) for ball/box/simplex; for
halfspace intersections it is computed by Dykstra's alternating
projections and is approximate at the configured tolerance.

Floating-point contract: ``project`` is bit-exact idempotent.  Membership
tests carry a machine-level relative slack so that a projected point is
always accepted as feasible and re-projection returns it unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument, UnsupportedDomain

_EPS = np.finfo(np.float64).eps


def as_vector(x, dim: int | None = None, name: str = "point") -> np.ndarray:
    """Validate and convert to a finite 1-D float64 array."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise InvalidArgument(f"{name} must be one-dimensional, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise InvalidArgument(f"{name} has dimension {v.shape[0]}, expected {dim}")
    if not np.isfinite(v).all():
        raise InvalidArgument(f"{name} contains non-finite entries")
    return v


def _norm(v: np.ndarray) -> float:
    # dot+sqrt beats np.linalg.norm on the small vectors in the hot path
    return math.sqrt(v @ v)


class Domain:
    """Base class; concrete domains implement the kind-specific geometry."""

    kind: str = "?"
    dim: int

    def project(self, point) -> np.ndarray:
        p = as_vector(point, self.dim)
        if self.contains(p):
            return p
        return self._project_outside(p)

    # --- kind-specific hooks -------------------------------------------------
    def contains(self, p: np.ndarray) -> bool:
        raise NotImplementedError

    def _project_outside(self, p: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def diameter(self) -> float:
        raise NotImplementedError

    def center(self) -> np.ndarray:
        raise NotImplementedError

    def linear_minimizer(self, direction) -> np.ndarray:
        """argmin over K of <direction, x>."""
        raise NotImplementedError

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        """A random feasible point (distribution unspecified; tests only)."""
        raise NotImplementedError

    def extreme_pair(self) -> tuple[np.ndarray, np.ndarray]:
        """Two feasible points realizing the diameter."""
        raise NotImplementedError


@dataclass(frozen=True)
class Ball(Domain):
    """Euclidean ball {x : |x - center| <= radius}."""

    center_point: np.ndarray
    radius: float
    kind: str = field(default="ball", init=False)

    def __post_init__(self):
        c = as_vector(self.center_point, name="ball center")
        object.__setattr__(self, "center_point", c)
        object.__setattr__(self, "radius", float(self.radius))
        if not (self.radius > 0 and np.isfinite(self.radius)):
            raise InvalidArgument(f"ball radius must be positive, got {self.radius}")

    @property
    def dim(self) -> int:
        return self.center_point.shape[0]

    def contains(self, p) -> bool:
        diff = p - self.center_point
        return _norm(diff) <= self.radius * (1 + 32 * _EPS)

    def _project_outside(self, p):
        diff = p - self.center_point
        scale = self.radius / _norm(diff)
        q = self.center_point + diff * scale
        # A 1-ulp overshoot would break exact idempotence; nudge the scale down.
        while _norm(q - self.center_point) > self.radius * (1 + 32 * _EPS):
            scale = np.nextafter(scale, 0.0)
            q = self.center_point + diff * scale
        return q

    def diameter(self) -> float:
        return 2.0 * self.radius

    def center(self) -> np.ndarray:
        return self.center_point.copy()

    def linear_minimizer(self, direction) -> np.ndarray:
        c = as_vector(direction, self.dim, "direction")
        n = float(np.linalg.norm(c))
        if n == 0.0:
            return self.center_point.copy()
        return self.center_point - (self.radius / n) * c

    def sample(self, rng) -> np.ndarray:
        u = rng.normal(size=self.dim)
        u /= np.linalg.norm(u)
        r = self.radius * rng.uniform() ** (1.0 / self.dim)
        return self.project(self.center_point + r * u)

    def extreme_pair(self):
        e = np.zeros(self.dim)
        e[0] = self.radius
        return self.center_point - e, self.center_point + e


@dataclass(frozen=True)
class Box(Domain):
    """Axis-aligned box {x : lower <= x <= upper}."""

    lower: np.ndarray
    upper: np.ndarray
    kind: str = field(default="box", init=False)

    def __post_init__(self):
        lo = as_vector(self.lower, name="box lower")
        hi = as_vector(self.upper, lo.shape[0], "box upper")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        if np.any(lo > hi):
            raise InvalidArgument("box lower bound exceeds upper bound")
        if not np.any(hi > lo):
            raise InvalidArgument("box is a single point; diameter would be zero")

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def contains(self, p) -> bool:
        return bool(np.all(p >= self.lower) and np.all(p <= self.upper))

    def _project_outside(self, p):
        return np.clip(p, self.lower, self.upper)

    def diameter(self) -> float:
        return float(np.linalg.norm(self.upper - self.lower))

    def center(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    def linear_minimizer(self, direction) -> np.ndarray:
        c = as_vector(direction, self.dim, "direction")
        return np.where(c > 0, self.lower, self.upper).astype(np.float64)

    def sample(self, rng) -> np.ndarray:
        return rng.uniform(self.lower, self.upper)

    def extreme_pair(self):
        return self.lower.copy(), self.upper.copy()


@dataclass(frozen=True)
class Simplex(Domain):
    """Scaled probability simplex {x >= 0, sum(x) = scale} in R^dim.

    Projection uses the sort-and-threshold rule (O(d log d)): with the
    coordinates sorted in decreasing order, find the largest k such that
    u_k > (sum of top k - scale) / k and clip at that threshold.
    """

    dimension: int
    scale: float = 1.0
    kind: str = field(default="simplex", init=False)

    def __post_init__(self):
        object.__setattr__(self, "dimension", int(self.dimension))
        object.__setattr__(self, "scale", float(self.scale))
        if self.dimension < 2:
            raise InvalidArgument("simplex needs dimension >= 2 to have positive diameter")
        if not (self.scale > 0 and np.isfinite(self.scale)):
            raise InvalidArgument(f"simplex scale must be positive, got {self.scale}")

    @property
    def dim(self) -> int:
        return self.dimension

    def _sum_slack(self) -> float:
        # Accumulated rounding in a d-term sum; keeps project() idempotent.
        return 32 * self.dimension * _EPS * max(1.0, self.scale)

    def contains(self, p) -> bool:
        return bool(np.all(p >= 0.0) and abs(float(p.sum()) - self.scale) <= self._sum_slack())

    def _project_outside(self, p):
        u = np.sort(p)[::-1]
        thresholds = (np.cumsum(u) - self.scale) / np.arange(1, self.dimension + 1)
        k = int(np.nonzero(u > thresholds)[0][-1])
        return np.maximum(p - thresholds[k], 0.0)

    def diameter(self) -> float:
        return self.scale * np.sqrt(2.0)

    def center(self) -> np.ndarray:
        return np.full(self.dimension, self.scale / self.dimension)

    def linear_minimizer(self, direction) -> np.ndarray:
        c = as_vector(direction, self.dim, "direction")
        out = np.zeros(self.dimension)
        out[int(np.argmin(c))] = self.scale
        return out

    def sample(self, rng) -> np.ndarray:
        return self.scale * rng.dirichlet(np.ones(self.dimension))

    def extreme_pair(self):
        a = np.zeros(self.dimension)
        b = np.zeros(self.dimension)
        a[0] = self.scale
        b[1] = self.scale
        return a, b


@dataclass(frozen=True)
class HalfspacePolytope(Domain):
    """Bounded intersection of halfspaces {x : normals @ x <= offsets}.

    Construction validates that the set is nonempty with nonempty interior
    (Chebyshev-center LP) and bounded (vertex enumeration); the vertices
    feed the exact diameter.  Projection runs Dykstra's algorithm and is
    approximate at ``tolerance``; a feasibility cleanup pass afterwards
    keeps project() idempotent.
    """

    normals: np.ndarray
    offsets: np.ndarray
    tolerance: float = 1e-10
    max_cycles: int = 10_000
    kind: str = field(default="halfspaces", init=False)

    def __post_init__(self):
        a = np.asarray(self.normals, dtype=np.float64)
        b = np.asarray(self.offsets, dtype=np.float64)
        if a.ndim != 2 or b.ndim != 1 or a.shape[0] != b.shape[0]:
            raise InvalidArgument("normals must be (m, d) with matching (m,) offsets")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise InvalidArgument("halfspace data contains non-finite entries")
        if np.any(np.linalg.norm(a, axis=1) == 0.0):
            raise InvalidArgument("halfspace normal must be nonzero")
        object.__setattr__(self, "normals", a)
        object.__setattr__(self, "offsets", b)
        cheb, radius = _chebyshev_center(a, b)
        if radius <= 0:
            raise UnsupportedDomain("halfspace intersection has empty interior")
        vertices = _vertex_enumerate(a, b, cheb)
        object.__setattr__(self, "_cheb_center", cheb)
        object.__setattr__(self, "_vertices", vertices)
        sq = np.sum((vertices[:, None, :] - vertices[None, :, :]) ** 2, axis=-1)
        i, j = np.unravel_index(int(np.argmax(sq)), sq.shape)
        object.__setattr__(self, "_diameter", float(np.sqrt(sq[i, j])))
        object.__setattr__(self, "_extreme", (vertices[i].copy(), vertices[j].copy()))

    @property
    def dim(self) -> int:
        return self.normals.shape[1]

    def _slacks(self, p) -> np.ndarray:
        scale = np.abs(self.offsets) + np.linalg.norm(self.normals, axis=1) * (
            1.0 + float(np.linalg.norm(p))
        )
        return 64 * _EPS * scale

    def contains(self, p) -> bool:
        return bool(np.all(self.normals @ p - self.offsets <= self._slacks(p)))

    def _project_outside(self, p):
        q = _dykstra(self.normals, self.offsets, p[None, :], self.tolerance, self.max_cycles)[0]
        return self._cleanup(q)

    def _cleanup(self, q):
        # Drive residual violations to machine level so contains() accepts q.
        norms_sq = np.sum(self.normals**2, axis=1)
        for _ in range(100):
            if self.contains(q):
                return q
            viol = self.normals @ q - self.offsets
            for i in np.nonzero(viol > 0)[0]:
                v = float(self.normals[i] @ q - self.offsets[i])
                if v > 0:
                    q = q - (v / norms_sq[i]) * self.normals[i]
        return q

    def _contains_rows(self, pts: np.ndarray) -> np.ndarray:
        residual = pts @ self.normals.T - self.offsets
        scale = np.abs(self.offsets) + np.linalg.norm(self.normals, axis=1) * (
            1.0 + np.linalg.norm(pts, axis=1, keepdims=True)
        )
        return np.all(residual <= 64 * _EPS * scale, axis=1)

    def project_batch(self, points, tolerance=None) -> np.ndarray:
        """Project many points at once (Dykstra shared across rows).

        Rows already inside the set pass through unchanged, matching the
        scalar fast path, so batched projection stays bit-exact idempotent.
        """
        pts = np.asarray(points, dtype=np.float64)
        inside = self._contains_rows(pts)
        out = pts.copy()
        todo = ~inside
        if np.any(todo):
            projected = _dykstra(self.normals, self.offsets, pts[todo],
                                 tolerance or self.tolerance, self.max_cycles)
            out[todo] = np.vstack([self._cleanup(q) for q in projected])
        return out

    def diameter(self) -> float:
        return self._diameter

    def center(self) -> np.ndarray:
        return self._cheb_center.copy()

    def linear_minimizer(self, direction) -> np.ndarray:
        c = as_vector(direction, self.dim, "direction")
        # The minimum of a linear functional over a polytope sits at a vertex.
        values = self._vertices @ c
        return self._vertices[int(np.argmin(values))].copy()

    def sample(self, rng) -> np.ndarray:
        w = rng.dirichlet(np.ones(self._vertices.shape[0]))
        return self.project(w @ self._vertices)

    def extreme_pair(self):
        return self._extreme

    @property
    def vertices(self) -> np.ndarray:
        return self._vertices.copy()


def _chebyshev_center(a, b):
    """Center and radius of the largest inscribed ball, via an LP."""
    from scipy.optimize import linprog

    m, d = a.shape
    # Variables (x, r): maximize r s.t. a_i x + |a_i| r <= b_i.
    c = np.zeros(d + 1)
    c[-1] = -1.0
    a_ub = np.hstack([a, np.linalg.norm(a, axis=1, keepdims=True)])
    res = linprog(c, A_ub=a_ub, b_ub=b, bounds=[(None, None)] * d + [(0, None)], method="highs")
    if res.status == 2:
        raise UnsupportedDomain("halfspace intersection is empty")
    if res.status == 3:
        raise UnsupportedDomain("halfspace intersection is unbounded")
    if not res.success:
        raise UnsupportedDomain(f"could not certify halfspace domain: {res.message}")
    return res.x[:-1], float(res.x[-1])


def _vertex_enumerate(a, b, interior):
    """Vertices of {a x <= b}; raises UnsupportedDomain if unbounded."""
    d = a.shape[1]
    if d == 1:
        lo, hi = -np.inf, np.inf
        for ai, bi in zip(a[:, 0], b):
            if ai > 0:
                hi = min(hi, bi / ai)
            else:
                lo = max(lo, bi / ai)
        if not (np.isfinite(lo) and np.isfinite(hi)):
            raise UnsupportedDomain("halfspace intersection is unbounded")
        return np.array([[lo], [hi]])
    from scipy.spatial import HalfspaceIntersection, QhullError

    try:
        hs = HalfspaceIntersection(np.hstack([a, -b[:, None]]), interior)
    except QhullError as exc:
        raise UnsupportedDomain(f"halfspace intersection is unbounded or degenerate: {exc}") from exc
    verts = hs.intersections
    if not np.all(np.isfinite(verts)):
        raise UnsupportedDomain("halfspace intersection is unbounded")
    return verts


def _dykstra(a, b, points, tol, max_cycles):
    """Dykstra's alternating projections onto an intersection of halfspaces.

    ``points`` is (n, d); returns the (n, d) projections, all rows iterated
    together until the largest per-cycle movement drops below ``tol``.
    """
    from .errors import OptimizerFailure

    n, d = points.shape
    m = a.shape[0]
    norms_sq = np.sum(a**2, axis=1)
    x = points.copy()
    corrections = np.zeros((m, n, d))
    max_move = np.inf
    for cycle in range(max_cycles):
        max_move = 0.0
        for i in range(m):
            y = x + corrections[i]
            v = (y @ a[i] - b[i]) / norms_sq[i]
            np.maximum(v, 0.0, out=v)
            x_new = y - v[:, None] * a[i]
            corrections[i] = y - x_new
            max_move = max(max_move, float(np.max(np.abs(x_new - x))))
            x = x_new
        if max_move <= tol:
            return x
    raise OptimizerFailure(
        f"Dykstra projection did not reach tol={tol} in {max_cycles} cycles",
        residual=max_move,
        iterations=max_cycles,
    )


# --- module-level operation surface ------------------------------------------


def project(domain: Domain, point) -> np.ndarray:
    """Euclidean projection of ``point`` onto the domain."""
    return domain.project(point)


def diameter(domain: Domain) -> float:
    """Exact diameter sup |x - y| over the domain."""
    return domain.diameter()


def center(domain: Domain) -> np.ndarray:
    """A canonical feasible point (default initial iterate)."""
    return domain.center()


def make_domain(kind: str, **params) -> Domain:
    """Build a domain from a tagged config record."""
    if kind == "ball":
        dim = params.get("dimension")
        c = params.get("center")
        if c is None:
            if dim is None:
                raise InvalidArgument("ball needs a center or a dimension")
            c = np.zeros(int(dim))
        return Ball(center_point=np.asarray(c, dtype=np.float64), radius=params["radius"])
    if kind == "box":
        return Box(lower=np.asarray(params["lower"], dtype=np.float64),
                   upper=np.asarray(params["upper"], dtype=np.float64))
    if kind == "simplex":
        return Simplex(dimension=int(params["dimension"]), scale=params.get("scale", 1.0))
    if kind == "halfspaces":
        return HalfspacePolytope(
            normals=np.asarray(params["normals"], dtype=np.float64),
            offsets=np.asarray(params["offsets"], dtype=np.float64),
            tolerance=params.get("tolerance", 1e-10),
        )
    raise InvalidArgument(f"unknown domain kind {kind!r}")
