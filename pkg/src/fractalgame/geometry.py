"""Euclidean primitives: closed balls, affine hyperplanes, affine-span fitting.

Points are plain 1-D numpy float arrays. All functions are pure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Absolute slack for containment / tangency decisions.
TAU = 1e-12
# Relative singular-value threshold for affine-rank decisions.
RANK_RTOL = 1e-9


def as_point(coords) -> np.ndarray:
    p = np.asarray(coords, dtype=float)
    if p.ndim == 0:
        p = p.reshape(1)
    if p.ndim != 1 or not np.all(np.isfinite(p)):
        raise ValueError("point must be a finite 1-D coordinate array")
    return p


@dataclass
class Ball:
    """Closed Euclidean ball {z : d(center, z) <= radius}."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        self.center = as_point(self.center)
        self.radius = float(self.radius)
        if self.radius <= 0:
            raise ValueError("ball radius must be positive")

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius

    def contains_point(self, p, tol: float = TAU) -> bool:
        return float(np.linalg.norm(as_point(p) - self.center)) <= self.radius + tol

    def intersects_ball(self, other: "Ball", tol: float = TAU) -> bool:
        d = float(np.linalg.norm(self.center - other.center))
        return d <= self.radius + other.radius + tol

    def __repr__(self):
        return f"Ball(center={self.center.tolist()}, radius={self.radius})"


@dataclass
class Hyperplane:
    """Affine hyperplane {z : <normal, z> = offset} with unit normal."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        self.normal = as_point(self.normal)
        self.offset = float(self.offset)
        norm = float(np.linalg.norm(self.normal))
        if abs(norm - 1.0) > 1e-12:
            if norm == 0:
                raise ValueError("hyperplane normal must be nonzero")
            # renormalize silently only within a loose slack; otherwise reject
            if abs(norm - 1.0) > 1e-6:
                raise ValueError("hyperplane normal must be a unit vector")
            self.normal = self.normal / norm
            self.offset = self.offset / norm

    @classmethod
    def through(cls, point, direction) -> "Hyperplane":
        """Plane through `point` with normal parallel to `direction`."""
        n = as_point(direction)
        n = n / np.linalg.norm(n)
        return cls(n, float(n @ as_point(point)))

    def __repr__(self):
        return f"Hyperplane(normal={self.normal.tolist()}, offset={self.offset})"


@dataclass
class AxisBox:
    """Axis-aligned box, used only as a declared open set for an IFS."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        self.lo = as_point(self.lo)
        self.hi = as_point(self.hi)
        if self.lo.shape != self.hi.shape or np.any(self.hi <= self.lo):
            raise ValueError("box needs lo < hi componentwise")


def point_hyperplane_distance(p, plane: Hyperplane) -> float:
    """Distance from a point to an affine hyperplane, |<n,p> - offset|."""
    return abs(float(plane.normal @ as_point(p)) - plane.offset)


def ball_in_ball(inner: Ball, outer: Ball, tol: float = TAU) -> bool:
    """Closed containment inner <= outer, with absolute slack for tangency."""
    d = float(np.linalg.norm(inner.center - outer.center))
    return d + inner.radius <= outer.radius + tol


def fit_affine_span(points, scale: float | None = None) -> tuple[int, Hyperplane | None, float]:
    """Affine rank of a point set, plus a hyperplane containing it when one exists.

    Returns (span_dim, plane, residual). The rank comes from the singular
    values of the centered point matrix, thresholded at RANK_RTOL * scale
    (scale defaults to the largest singular value; pass the geometric scale
    of the problem, e.g. a ball radius, so that float-noise spread between
    coincident points is not mistaken for rank). If span_dim <= N-1 the
    plane contains the affine span (a lower-dimensional flat is completed
    with the first null direction); residual is the largest point-plane
    distance. With full affine rank the plane is None and the residual
    refers to the best-fit hyperplane.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.size == 0:
        raise ValueError("no points")
    n, dim = pts.shape
    centroid = pts.mean(axis=0)
    centered = pts - centroid

    if n == 1:
        normal = np.zeros(dim)
        normal[0] = 1.0
        plane = Hyperplane(normal, float(normal @ centroid))
        return 0, plane, 0.0

    # full SVD so null directions are available even when n < dim
    _, svals, vt = np.linalg.svd(centered, full_matrices=True)
    svals = np.concatenate([svals, np.zeros(max(0, dim - svals.size))])
    smax = svals[0] if scale is None else float(scale)
    if smax == 0.0:
        span_dim = 0
    else:
        span_dim = int(np.sum(svals > RANK_RTOL * smax))

    if span_dim >= dim:
        # no containing hyperplane; report the best-fit residual anyway
        normal = vt[-1]
        normal = _sign_fixed(normal)
        offset = float(normal @ centroid)
        residual = float(np.max(np.abs(pts @ normal - offset)))
        return span_dim, None, residual

    normal = _sign_fixed(vt[span_dim])
    offset = float(normal @ centroid)
    residual = float(np.max(np.abs(pts @ normal - offset)))
    return span_dim, Hyperplane(normal, offset), residual


def _sign_fixed(v: np.ndarray) -> np.ndarray:
    """Deterministic sign convention: first component of largest magnitude > 0."""
    i = int(np.argmax(np.abs(v)))
    return -v if v[i] < 0 else v.copy()
