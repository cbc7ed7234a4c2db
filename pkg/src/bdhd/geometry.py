"""Boundary topologies and geodesic operations on them.

Four spaces are supported: the unit interval, a circle of given circumference,
a square of given side, and a sphere of given radius. Points are plain tuples of
floats (1 coordinate for interval/circle, 2 for the square, 3 for the sphere).
Sphere points are stored as 3D vectors of norm ``radius``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidPointError

# Additive slack shared by every feasibility comparison in the package.
EPS = 1e-9

Point = Tuple[float, ...]

KINDS = ("interval", "circle", "square", "sphere")
_DIM = {"interval": 1, "circle": 1, "square": 2, "sphere": 3}


@dataclass(frozen=True)
class BoundarySpace:
    kind: str
    size: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown boundary kind {self.kind!r}")
        if self.kind == "interval":
            if self.size not in (None, 1, 1.0):
                raise ValueError("interval is fixed to [0, 1]")
            object.__setattr__(self, "size", None)
        else:
            if self.size is None or not (float(self.size) > 0) or not math.isfinite(self.size):
                raise ValueError(f"{self.kind} size must be a positive finite number")
            object.__setattr__(self, "size", float(self.size))

    @classmethod
    def interval(cls) -> "BoundarySpace":
        return cls("interval")

    @classmethod
    def circle(cls, circumference: float = 2 * math.pi) -> "BoundarySpace":
        return cls("circle", circumference)

    @classmethod
    def square(cls, side: float = 1.0) -> "BoundarySpace":
        return cls("square", side)

    @classmethod
    def sphere(cls, radius: float = 1.0) -> "BoundarySpace":
        return cls("sphere", radius)

    @property
    def dim(self) -> int:
        return _DIM[self.kind]

    @property
    def diameter(self) -> float:
        """Largest possible geodesic distance between two points."""
        if self.kind == "interval":
            return 1.0
        if self.kind == "circle":
            return self.size / 2
        if self.kind == "square":
            return self.size * math.sqrt(2)
        return math.pi * self.size

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.size is not None:
            d["size"] = self.size
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "BoundarySpace":
        return cls(d["kind"], d.get("size"))

    def point(self, coords) -> Point:
        """Build a point, normalizing sphere vectors onto the surface."""
        arr = np.atleast_1d(np.asarray(coords, dtype=float))
        if arr.shape != (self.dim,):
            raise InvalidPointError(
                f"{self.kind} points need {self.dim} coordinate(s), got {arr.shape[0]}"
            )
        if self.kind == "sphere":
            norm = np.linalg.norm(arr)
            if norm == 0:
                raise InvalidPointError("sphere point cannot be the zero vector")
            arr = arr * (self.size / norm)
        elif self.kind == "circle":
            arr = np.mod(arr, self.size)
            if arr[0] >= self.size:
                arr[0] = 0.0
        p = tuple(float(x) for x in arr)
        validate_point(self, p)
        return p


def validate_point(space: BoundarySpace, p: Sequence[float], tol: float = EPS) -> None:
    """Raise InvalidPointError unless ``p`` lies on ``space``."""
    if len(p) != space.dim:
        raise InvalidPointError(
            f"{space.kind} points need {space.dim} coordinate(s), got {len(p)}"
        )
    if not all(math.isfinite(x) for x in p):
        raise InvalidPointError("non-finite coordinate")
    kind = space.kind
    if kind == "interval":
        if not 0.0 <= p[0] <= 1.0:
            raise InvalidPointError(f"interval coordinate {p[0]} outside [0, 1]")
    elif kind == "circle":
        if not 0.0 <= p[0] < space.size:
            raise InvalidPointError(f"circle coordinate {p[0]} outside [0, {space.size})")
    elif kind == "square":
        if not all(0.0 <= x <= space.size for x in p):
            raise InvalidPointError(f"square point {tuple(p)} outside [0, {space.size}]^2")
    else:
        norm = math.sqrt(sum(x * x for x in p))
        if abs(norm - space.size) > tol:
            raise InvalidPointError(f"sphere point has norm {norm}, expected {space.size}")


def _as_array(space: BoundarySpace, pts) -> np.ndarray:
    return np.asarray(pts, dtype=float).reshape(-1, space.dim)


def pairwise_distance(space: BoundarySpace, P, Q) -> np.ndarray:
    """Geodesic distance matrix between point sets P (m points) and Q (l points)."""
    P = _as_array(space, P)
    Q = _as_array(space, Q)
    kind = space.kind
    if kind in ("interval", "circle"):
        d = np.abs(P[:, 0][:, None] - Q[:, 0][None, :])
        if kind == "circle":
            d = np.minimum(d, space.size - d)
        return d
    if kind == "square":
        diff = P[:, None, :] - Q[None, :, :]
        return np.sqrt(np.sum(diff * diff, axis=-1))
    # great-circle angle via atan2(|p x q|, p.q): same value as arccos of the
    # clamped normalized dot product, without its loss of precision near 0 and pi
    cross = np.cross(P[:, None, :], Q[None, :, :])
    sin_part = np.sqrt(np.sum(cross * cross, axis=-1))
    cos_part = P @ Q.T
    return space.size * np.arctan2(sin_part, cos_part)


def geodesic_distance(space: BoundarySpace, p: Point, q: Point) -> float:
    if len(p) != space.dim or len(q) != space.dim:
        raise InvalidPointError(
            f"{space.kind} points need {space.dim} coordinate(s), got {len(p)} and {len(q)}"
        )
    kind = space.kind
    if kind == "interval":
        return abs(p[0] - q[0])
    if kind == "circle":
        d = abs(p[0] - q[0])
        return min(d, space.size - d)
    if kind == "square":
        return math.hypot(p[0] - q[0], p[1] - q[1])
    cx = p[1] * q[2] - p[2] * q[1]
    cy = p[2] * q[0] - p[0] * q[2]
    cz = p[0] * q[1] - p[1] * q[0]
    dot = p[0] * q[0] + p[1] * q[1] + p[2] * q[2]
    return space.size * math.atan2(math.sqrt(cx * cx + cy * cy + cz * cz), dot)


def sample_uniform(space: BoundarySpace, rng: np.random.Generator, size: Optional[int] = None):
    """Uniform point(s) on ``space``.

    Returns one Point when ``size`` is None, else an array of shape (size, dim).
    """
    m = 1 if size is None else size
    kind = space.kind
    if kind == "interval":
        arr = rng.uniform(0.0, 1.0, size=(m, 1))
    elif kind == "circle":
        arr = rng.uniform(0.0, space.size, size=(m, 1))
        arr[arr >= space.size] = 0.0
    elif kind == "square":
        arr = rng.uniform(0.0, space.size, size=(m, 2))
    else:
        g = rng.standard_normal(size=(m, 3))
        norms = np.linalg.norm(g, axis=1, keepdims=True)
        arr = g * (space.size / norms)
    if size is None:
        return tuple(float(x) for x in arr[0])
    return arr


def _perpendicular(u: np.ndarray) -> np.ndarray:
    # any unit vector orthogonal to u; deterministic choice of helper axis
    axis = np.zeros(3)
    axis[int(np.argmin(np.abs(u)))] = 1.0
    w = np.cross(u, axis)
    return w / np.linalg.norm(w)


def move_toward(space: BoundarySpace, start: Point, target: Point, max_dist: float) -> Point:
    """Point at arc length min(max_dist, d) from ``start`` along a geodesic to ``target``.

    If the remaining distance is within EPS of ``max_dist`` the target itself is
    returned, so that a plan feasible up to the shared slack is executed exactly.
    """
    if max_dist < 0:
        raise ValueError("max_dist must be non-negative")
    d = geodesic_distance(space, start, target)
    if max_dist >= d - EPS:
        return tuple(target)
    kind = space.kind
    if kind == "interval":
        step = max_dist if target[0] > start[0] else -max_dist
        return (min(1.0, max(0.0, start[0] + step)),)
    if kind == "circle":
        c = space.size
        forward = (target[0] - start[0]) % c
        step = max_dist if forward <= c - forward else -max_dist
        x = (start[0] + step) % c
        if x >= c:
            x = 0.0
        return (x,)
    if kind == "square":
        frac = max_dist / d
        return tuple(min(space.size, max(0.0, s + frac * (t - s))) for s, t in zip(start, target))
    r = space.size
    u = np.asarray(start, dtype=float) / r
    v = np.asarray(target, dtype=float) / r
    tangent = v - np.dot(u, v) * u
    norm = np.linalg.norm(tangent)
    tangent = _perpendicular(u) if norm < 1e-12 else tangent / norm
    angle = max_dist / r
    out = np.cos(angle) * u + np.sin(angle) * tangent
    out *= r / np.linalg.norm(out)
    return tuple(float(x) for x in out)
