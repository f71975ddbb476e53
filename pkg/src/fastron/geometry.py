"""Planar convex geometry.

Polygons and link rectangles for a planar serial arm, with two independent
intersection tests. GJK is the collision oracle and runs on the selected
kernel backend; SAT is a brute-force check used to validate it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import _backend

DUPLICATE_TOL = 1e-9


class Vec2(NamedTuple):
    x: float
    y: float


def convex_hull(points) -> np.ndarray:
    """Counter-clockwise hull of 2-D points; collinear points are dropped."""
    pts = sorted(set(map(tuple, np.asarray(points, dtype=np.float64).reshape(-1, 2).tolist())))
    if len(pts) < 3:
        return np.array(pts, dtype=np.float64).reshape(-1, 2)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1], dtype=np.float64)


def signed_area(vertices) -> float:
    v = np.asarray(vertices, dtype=np.float64)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


@dataclass(frozen=True)
class ConvexPolygon:
    """Strictly convex polygon, stored counter-clockwise.

    Clockwise input is reversed on construction. Raises ``ValueError`` if
    the vertices are not strictly convex or contain repeated points.
    """

    vertices: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=np.float64).reshape(-1, 2)
        if len(v) >= 2 and np.all(np.abs(v[0] - v[-1]) <= DUPLICATE_TOL):
            v = v[:-1]
        if len(v) < 3:
            raise ValueError("a polygon needs at least 3 vertices")
        if not np.all(np.isfinite(v)):
            raise ValueError("polygon vertices must be finite")
        if signed_area(v) < 0:
            v = v[::-1].copy()
        nxt = np.roll(v, -1, axis=0)
        if np.any(np.all(np.abs(nxt - v) <= DUPLICATE_TOL, axis=1)):
            raise ValueError("polygon has duplicate consecutive vertices")
        e1 = nxt - v
        e2 = np.roll(e1, -1, axis=0)
        if np.any(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0] <= 0):
            raise ValueError("polygon is not strictly convex")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @classmethod
    def hull_of(cls, points) -> ConvexPolygon:
        return cls(convex_hull(points))

    def __len__(self):
        return len(self.vertices)

    @property
    def centroid(self) -> Vec2:
        c = self.vertices.mean(axis=0)
        return Vec2(float(c[0]), float(c[1]))

    @property
    def area(self) -> float:
        return signed_area(self.vertices)

    def bounding_box(self):
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])

    def translated(self, dx: float, dy: float) -> ConvexPolygon:
        return ConvexPolygon(self.vertices + np.array([dx, dy]))

    def support(self, direction) -> np.ndarray:
        """Vertex farthest along ``direction`` (lowest index on ties)."""
        return self.vertices[int(np.argmax(self.vertices @ np.asarray(direction, dtype=np.float64)))]


def clip_to_box(polygon: ConvexPolygon, bounds) -> ConvexPolygon | None:
    """Intersect a convex polygon with an axis-aligned box ``(xmin, ymin, xmax, ymax)``.

    Returns ``None`` when the intersection has no area.
    """
    xmin, ymin, xmax, ymax = bounds
    pts = [tuple(p) for p in polygon.vertices.tolist()]
    planes = ((0, xmin, 1.0), (0, xmax, -1.0), (1, ymin, 1.0), (1, ymax, -1.0))
    for axis, value, sign in planes:
        if not pts:
            break
        out = []
        for i, cur in enumerate(pts):
            prev = pts[i - 1]
            cur_in = sign * (cur[axis] - value) >= 0
            prev_in = sign * (prev[axis] - value) >= 0
            if cur_in != prev_in:
                t = (value - prev[axis]) / (cur[axis] - prev[axis])
                out.append((prev[0] + t * (cur[0] - prev[0]), prev[1] + t * (cur[1] - prev[1])))
            if cur_in:
                out.append(cur)
        pts = out
    hull = convex_hull(pts) if pts else np.empty((0, 2))
    if len(hull) < 3:
        return None
    try:
        return ConvexPolygon(hull)
    except ValueError:
        return None


@dataclass(frozen=True)
class ArmModel:
    """Planar serial arm with revolute joints; link ``k`` rotates about joint ``k``.

    ``link_thickness`` defaults to 5% of the total arm length.
    """

    link_lengths: tuple[float, ...]
    link_thickness: float | None = None
    base: Vec2 = Vec2(0.0, 0.0)

    def __post_init__(self):
        lengths = tuple(float(v) for v in self.link_lengths)
        if not lengths:
            raise ValueError("arm needs at least one link")
        if any(not (v > 0 and math.isfinite(v)) for v in lengths):
            raise ValueError("link lengths must be positive and finite")
        thickness = self.link_thickness
        if thickness is None:
            thickness = 0.05 * sum(lengths)
        thickness = float(thickness)
        if not 0 <= thickness < min(lengths):
            raise ValueError("link thickness must be in [0, min link length)")
        object.__setattr__(self, "link_lengths", lengths)
        object.__setattr__(self, "link_thickness", thickness)
        object.__setattr__(self, "base", Vec2(float(self.base[0]), float(self.base[1])))

    @property
    def dof(self) -> int:
        return len(self.link_lengths)

    @property
    def reach(self) -> float:
        return sum(self.link_lengths)

    @classmethod
    def uniform(cls, dof: int, total_length: float = 2.0, **kwargs) -> ArmModel:
        return cls(tuple([total_length / dof] * dof), **kwargs)


@dataclass(frozen=True)
class LinkShape:
    """One link as an oriented rectangle from ``start`` to ``end``."""

    start: Vec2
    end: Vec2
    center: Vec2
    half_extents: tuple[float, float]
    rotation: float
    corners: np.ndarray = field(repr=False, compare=False)

    @property
    def vertices(self) -> np.ndarray:
        return self.corners


def check_configuration(q, dof: int) -> np.ndarray:
    q = np.asarray(q, dtype=np.float64)
    if q.ndim != 1 or q.shape[0] != dof:
        raise ValueError(f"configuration must have {dof} joint angles, got shape {q.shape}")
    if not np.all(np.isfinite(q)):
        raise ValueError("joint angles must be finite")
    return q


def forward_kinematics(arm: ArmModel, q: Sequence[float]) -> list[LinkShape]:
    """Link rectangles of ``arm`` at configuration ``q``.

    Joint angles accumulate along the chain, so link ``k`` points along
    ``q[0] + ... + q[k]``. The end of each link is the start of the next.
    """
    q = check_configuration(q, arm.dof)
    half = 0.5 * arm.link_thickness
    shapes = []
    phi = 0.0
    start = arm.base
    for length, qk in zip(arm.link_lengths, q.tolist()):
        phi += qk
        c = math.cos(phi)
        s = math.sin(phi)
        end = Vec2(start.x + length * c, start.y + length * s)
        hx = -s * half
        hy = c * half
        corners = np.array([
            (start.x - hx, start.y - hy), (end.x - hx, end.y - hy),
            (end.x + hx, end.y + hy), (start.x + hx, start.y + hy),
        ])
        corners.setflags(write=False)
        shapes.append(LinkShape(
            start=start,
            end=end,
            center=Vec2(0.5 * (start.x + end.x), 0.5 * (start.y + end.y)),
            half_extents=(0.5 * length, half),
            rotation=phi,
            corners=corners,
        ))
        start = end
    return shapes


def _as_vertices(shape) -> np.ndarray:
    if isinstance(shape, (ConvexPolygon, LinkShape)):
        return shape.vertices
    v = np.asarray(shape, dtype=np.float64).reshape(-1, 2)
    if len(v) == 0:
        raise ValueError("shape needs at least one vertex")
    return v


def gjk_intersects(a, b, backend: str | None = None) -> bool:
    """True iff convex shapes ``a`` and ``b`` intersect; touching counts.

    Accepts polygons, link shapes, or ``(n, 2)`` vertex arrays.
    """
    core = _backend.core if backend is None else _backend.load(backend)
    return bool(core.gjk_intersect(_as_vertices(a), _as_vertices(b)))


def _edge_normals(v: np.ndarray) -> np.ndarray:
    edges = np.roll(v, -1, axis=0) - v
    edges = edges[np.any(edges != 0.0, axis=1)]
    return np.column_stack([-edges[:, 1], edges[:, 0]])


def sat_intersects(a, b) -> bool:
    """Separating-axis test over every edge normal of both shapes.

    Independent of GJK; touching counts as intersecting.
    """
    va = _as_vertices(a)
    vb = _as_vertices(b)
    axes = np.vstack([_edge_normals(va), _edge_normals(vb)])
    if len(axes) == 0:
        axes = np.eye(2)
    pa = va @ axes.T
    pb = vb @ axes.T
    separated = (pa.max(axis=0) < pb.min(axis=0)) | (pb.max(axis=0) < pa.min(axis=0))
    return not bool(separated.any())


def random_convex_polygon(rng: np.random.Generator, center, radius_range=(0.2, 0.5),
                          vertex_count_range=(3, 8)) -> ConvexPolygon:
    """Random convex polygon around ``center``.

    Draws sorted random angles, gives each a random radius (a star-shaped
    polygon), and returns its convex hull.
    """
    r_min, r_max = radius_range
    n_min, n_max = vertex_count_range
    if not 0 < r_min <= r_max:
        raise ValueError("radius range must satisfy 0 < r_min <= r_max")
    if not 3 <= n_min <= n_max:
        raise ValueError("vertex count range must satisfy 3 <= n_min <= n_max")
    cx, cy = float(center[0]), float(center[1])
    while True:
        n = int(rng.integers(n_min, n_max + 1))
        angles = np.sort(rng.uniform(0.0, 2.0 * np.pi, n))
        radii = rng.uniform(r_min, r_max, n)
        pts = np.column_stack([cx + radii * np.cos(angles), cy + radii * np.sin(angles)])
        hull = convex_hull(pts)
        if len(hull) >= 3:
            try:
                return ConvexPolygon(hull)
            except ValueError:
                continue
