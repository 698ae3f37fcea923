"""Planar convex bodies under the standard Gaussian measure.

Two representations are supported: :class:`ConvexPolygon` (CCW vertex list)
and :class:`SupportSamples` (support function on the uniform angle grid).
The Gaussian surface-area measure weights boundary length by
``e^{-|x|^2/2} / (2 pi)`` and pushes it to the circle of outer normals.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, HalfspaceIntersection, QhullError
from scipy.special import ndtr, ndtri, owens_t

from . import spectral
from .errors import ConvexityViolation, DegenerateBody, OriginNotInterior, ParseError

DEDUP_TOL = 1e-12
CONVEX_TOL = 1e-12
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _dedup_cyclic(v: np.ndarray, tol: float = DEDUP_TOL) -> np.ndarray:
    keep = [v[0]]
    for p in v[1:]:
        if np.max(np.abs(p - keep[-1])) > tol:
            keep.append(p)
    while len(keep) > 1 and np.max(np.abs(keep[0] - keep[-1])) <= tol:
        keep.pop()
    return np.array(keep)


def _turns(v: np.ndarray) -> np.ndarray:
    """Cross product of incoming and outgoing edge at every vertex."""
    e = np.roll(v, -1, axis=0) - v
    ep = np.roll(e, 1, axis=0)
    return ep[:, 0] * e[:, 1] - ep[:, 1] * e[:, 0]


def _drop_collinear(v: np.ndarray, tol: float = CONVEX_TOL) -> np.ndarray:
    while len(v) > 3:
        bad = np.flatnonzero(_turns(v) <= tol)
        if not bad.size:
            break
        v = np.delete(v, bad[0], axis=0)
    return v


@dataclass(frozen=True, eq=False)
class ConvexPolygon:
    vertices: np.ndarray  # (N, 2), counterclockwise

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        object.__setattr__(self, "vertices", v)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise DegenerateBody("a polygon needs at least three planar vertices")
        if np.any(_turns(v) <= CONVEX_TOL):
            raise DegenerateBody("vertices are not in strictly convex counterclockwise order")

    @classmethod
    def from_points(cls, points) -> "ConvexPolygon":
        """Convex hull of ``points``, CCW, near-duplicates merged."""
        pts = np.asarray(points, dtype=float)
        try:
            hull = ConvexHull(pts)
        except QhullError as exc:
            raise DegenerateBody(f"convex hull failed: {exc}") from None
        v = _dedup_cyclic(pts[hull.vertices])
        return cls(_drop_collinear(v))

    @property
    def edges(self) -> np.ndarray:
        return np.roll(self.vertices, -1, axis=0) - self.vertices

    @property
    def area(self) -> float:
        x, y = self.vertices.T
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    def contains_origin(self) -> bool:
        v, e = self.vertices, self.edges
        return bool(np.all(e[:, 0] * (-v[:, 1]) - e[:, 1] * (-v[:, 0]) > 0))

    def to_dict(self) -> dict:
        return {"vertices": self.vertices.tolist()}


@dataclass(frozen=True, eq=False)
class SupportSamples:
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.ndim != 1 or v.size < 4 or v.size % 2:
            raise ParseError("support samples need an even number n >= 4 of values")
        if not np.all(np.isfinite(v)) or np.any(v <= 0):
            raise ParseError("support samples must be finite and positive")

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def angles(self) -> np.ndarray:
        return spectral.grid(self.n)

    def discrete_curvature(self) -> np.ndarray:
        """(h_{j+1} + h_{j-1} - 2 cos(dth) h_j) / dth^2, the grid analogue of h'' + h.

        Nonnegative exactly when the samples are support values of their
        Wulff shape.
        """
        h = self.values
        d = 2.0 * math.pi / self.n
        return (np.roll(h, -1) + np.roll(h, 1) - 2.0 * math.cos(d) * h) / (d * d)

    def is_convex(self, strict: bool = True) -> bool:
        q = self.discrete_curvature()
        return bool(np.all(q > 0) if strict else np.all(q >= -1e-12 * np.max(self.values)))

    def is_even(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.values - np.roll(self.values, -(self.n // 2)))) <= tol)

    def derivatives(self):
        return spectral.diff(self.values, 1), spectral.diff(self.values, 2)

    def to_dict(self) -> dict:
        return {"n": self.n, "values": self.values.tolist()}


@dataclass(frozen=True)
class DiscreteMeasure:
    atoms: tuple  # ((normal angle, weight), ...)

    @property
    def total(self) -> float:
        return math.fsum(w for _, w in self.atoms)

    def to_dict(self) -> dict:
        return {"atoms": [[a, w] for a, w in self.atoms], "total": self.total}


# -- support function and Wulff shape ---------------------------------------

def support_eval(P: ConvexPolygon, theta) -> np.ndarray | float:
    th = np.asarray(theta, dtype=float)
    u = np.stack([np.cos(th), np.sin(th)], axis=-1)
    out = np.max(u @ P.vertices.T, axis=-1)
    return float(out) if out.ndim == 0 else out


def support_samples(P: ConvexPolygon, n: int) -> SupportSamples:
    return SupportSamples(support_eval(P, spectral.grid(n)))


def wulff_shape(f: SupportSamples) -> ConvexPolygon:
    """Intersection of the half-planes x . u_j <= f_j."""
    th = f.angles
    halfspaces = np.column_stack([np.cos(th), np.sin(th), -f.values])
    try:
        hs = HalfspaceIntersection(halfspaces, np.zeros(2))
    except QhullError as exc:
        raise DegenerateBody(f"half-plane intersection failed: {exc}") from None
    poly = ConvexPolygon.from_points(hs.intersections)
    if poly.area <= 0:
        raise DegenerateBody("Wulff shape has empty interior")
    return poly


# -- Gaussian surface-area measure -------------------------------------------

def _gauss_segment(a, b):
    """int_a^b e^{-s^2/2} ds, written to avoid cancellation in the tails."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    right = a > 0
    val = np.where(right, ndtr(-a) - ndtr(-b), ndtr(b) - ndtr(a))
    return _SQRT_2PI * val


def _edge_frames(P: ConvexPolygon):
    v = P.vertices
    e = P.edges
    length = np.hypot(e[:, 0], e[:, 1])
    t = e / length[:, None]
    normal = np.column_stack([t[:, 1], -t[:, 0]])
    d = np.einsum("ij,ij->i", v, normal)
    sa = np.einsum("ij,ij->i", v, t)
    sb = np.einsum("ij,ij->i", v + e, t)
    angle = np.mod(np.arctan2(normal[:, 1], normal[:, 0]), 2 * math.pi)
    return angle, d, sa, sb, length


def boundary_measure_polygon(P: ConvexPolygon) -> DiscreteMeasure:
    """One atom per edge: (1/2pi) e^{-d^2/2} int_{edge} e^{-s^2/2} ds at its outer normal."""
    angle, d, sa, sb, length = _edge_frames(P)
    w = np.exp(-0.5 * d * d) * _gauss_segment(sa, sb) / (2.0 * math.pi)
    keep = length > DEDUP_TOL
    return DiscreteMeasure(tuple((float(a), float(x)) for a, x in zip(angle[keep], w[keep])))


def density_smooth(h: SupportSamples, normalized: bool = False) -> np.ndarray:
    """Density of the Gaussian surface-area measure of a smooth body.

    ``(1/2pi) e^{-(h'^2 + h^2)/2} (h'' + h)`` at each node; with
    ``normalized=True`` the 1/2pi factor is dropped.
    """
    d1, d2 = h.derivatives()
    curv = d2 + h.values
    if np.any(curv <= 0):
        j = int(np.argmin(curv))
        raise ConvexityViolation(f"h'' + h = {curv[j]!r} <= 0 at node {j}")
    dens = np.exp(-0.5 * (d1 * d1 + h.values ** 2)) * curv
    return dens if normalized else dens / (2.0 * math.pi)


def total_measure_smooth(h: SupportSamples) -> float:
    return float(2.0 * math.pi / h.n * np.sum(density_smooth(h)))


def total_measure(body) -> float:
    if isinstance(body, ConvexPolygon):
        return boundary_measure_polygon(body).total
    return total_measure_smooth(body)


# -- Gaussian measure of the body ------------------------------------------

def radial_function(P: ConvexPolygon, theta) -> np.ndarray:
    """Distance from the origin to the boundary in direction theta."""
    if not P.contains_origin():
        raise OriginNotInterior("origin must lie strictly inside the polygon")
    v = P.vertices
    vang = np.arctan2(v[:, 1], v[:, 0])
    order = np.argsort(vang)
    vs = vang[order]
    th = np.mod(np.asarray(theta, dtype=float) + math.pi, 2 * math.pi) - math.pi
    idx = (np.searchsorted(vs, th, side="right") - 1) % len(v)
    i0 = order[idx]
    i1 = (i0 + 1) % len(v)
    a, b = v[i0], v[i1]
    e = b - a
    u = np.stack([np.cos(th), np.sin(th)], axis=-1)
    # rho u lies on the line through a, b: cross(e, rho u - a) = 0
    num = e[..., 0] * a[..., 1] - e[..., 1] * a[..., 0]
    den = e[..., 0] * u[..., 1] - e[..., 1] * u[..., 0]
    return num / den


def gaussian_area(body) -> float:
    """Standard Gaussian measure of a body containing the origin.

    Polygon: each origin/edge triangle contributes, in polar form,
    (1/2pi) int (1 - e^{-rho^2/2}) dtheta; with rho = d / cos(phi) the
    exponential part is Owen's T function, so the result is exact.
    Support samples: the same polar integral by the trapezoid rule, with the
    angle reparametrised by the normal direction.
    """
    if isinstance(body, ConvexPolygon):
        if not body.contains_origin():
            raise OriginNotInterior("origin must lie strictly inside the polygon")
        _, d, sa, sb, length = _edge_frames(body)
        keep = length > DEDUP_TOL
        d, sa, sb = d[keep], sa[keep], sb[keep]
        return float(1.0 - np.sum(owens_t(d, sb / d) - owens_t(d, sa / d)))
    h = body
    if np.any(h.values <= 0):
        raise OriginNotInterior("support values must be positive")
    d1, d2 = h.derivatives()
    curv = d2 + h.values
    rho2 = h.values ** 2 + d1 * d1
    dalpha = h.values * curv / rho2
    return float(np.mean(-np.expm1(-0.5 * rho2) * dalpha))


def perimeter(body) -> float:
    """Total Gaussian surface area |S_{gamma, K}|."""
    return total_measure(body)


@dataclass(frozen=True)
class IsoReport:
    gamma: float
    perimeter: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.perimeter >= self.bound * (1 - 1e-12)

    def to_dict(self) -> dict:
        return {"gamma2": self.gamma, "perimeter": self.perimeter, "bound": self.bound,
                "holds": self.holds}


def gaussian_isoperimetric_profile(gamma: float) -> float:
    """psi(Psi^{-1}(gamma)) with psi the standard normal density."""
    x = ndtri(gamma)
    return math.exp(-0.5 * x * x) / _SQRT_2PI


def isoperimetric_check(body) -> IsoReport:
    g = gaussian_area(body)
    return IsoReport(g, perimeter(body), gaussian_isoperimetric_profile(g))


# -- constructors and IO ---------------------------------------------------

def regular_polygon(n: int, radius: float = 1.0, phase: float = 0.0) -> ConvexPolygon:
    a = phase + 2.0 * math.pi * np.arange(n) / n
    return ConvexPolygon(radius * np.column_stack([np.cos(a), np.sin(a)]))


def ellipse_support(n: int, a: float, b: float) -> SupportSamples:
    th = spectral.grid(n)
    return SupportSamples(np.sqrt((a * np.cos(th)) ** 2 + (b * np.sin(th)) ** 2))


def random_symmetric_polygon(rng: np.random.Generator, n_points: int = 6,
                             r_min: float = 0.2, r_max: float = 3.0) -> ConvexPolygon:
    """Hull of random points and their reflections through the origin."""
    ang = rng.uniform(0, 2 * math.pi, n_points)
    rad = rng.uniform(r_min, r_max, n_points)
    p = np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
    return ConvexPolygon.from_points(np.vstack([p, -p]))


def polygon_from_json(obj) -> ConvexPolygon:
    if isinstance(obj, str):
        obj = json.loads(obj)
    try:
        verts = obj["vertices"]
    except (KeyError, TypeError):
        raise ParseError("polygon JSON needs a 'vertices' field") from None
    try:
        arr = np.asarray(verts, dtype=float)
    except (TypeError, ValueError):
        raise ParseError("field 'vertices' must be a list of [x, y] pairs") from None
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ParseError("field 'vertices' must be a list of [x, y] pairs")
    return ConvexPolygon.from_points(arr)


def support_from_json(obj) -> SupportSamples:
    if isinstance(obj, str):
        obj = json.loads(obj)
    try:
        n, values = obj["n"], obj["values"]
    except (KeyError, TypeError):
        raise ParseError("support JSON needs 'n' and 'values' fields") from None
    if len(values) != n:
        raise ParseError(f"field 'values' has {len(values)} entries, 'n' says {n}")
    return SupportSamples(values)
