"""Exact 2-D kernel: angles, projections, principal-axis fitting, rigid motions.

Angles at the public surface are degrees in the mathematical convention
(0 deg along +x, counterclockwise positive), normalized to [0, 360).
Interior angles of figures are returned in radians because the shape
proximity formulas are stated that way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DegenerateGeometryError

# Below this separation (meters) two points count as coincident.
COINCIDENT_TOL = 1e-9


def _check_finite(label: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"{label} must be finite, got {v!r}")


def normalize_angle(degrees: float) -> float:
    """Reduce an angle in degrees to its representative in [0, 360)."""
    _check_finite("angle", degrees)
    r = math.fmod(degrees, 360.0)
    if r < 0.0:
        r += 360.0
    if r >= 360.0:  # fmod of a tiny negative can round up to exactly 360
        r -= 360.0
    return r


def relative_orientation(subject: float, reference: float) -> float:
    """Smallest signed rotation in degrees taking `reference` onto `subject`.

    Result lies in (-180, 180]; the antipodal case returns +180.
    """
    d = normalize_angle(subject - reference)
    if d > 180.0:
        d -= 360.0
    return d


def unit_vector(degrees: float) -> tuple[float, float]:
    rad = math.radians(degrees)
    return math.cos(rad), math.sin(rad)


@dataclass(frozen=True)
class Point2:
    """A location in the plane, meters."""

    x: float
    y: float

    def __post_init__(self) -> None:
        _check_finite("coordinate", self.x, self.y)


def distance(p: Point2, q: Point2) -> float:
    return math.hypot(q.x - p.x, q.y - p.y)


def centroid(points: Sequence[Point2]) -> Point2:
    if not points:
        raise ValueError("centroid of an empty point list")
    n = len(points)
    return Point2(sum(p.x for p in points) / n, sum(p.y for p in points) / n)


def direction_degrees(p: Point2, q: Point2) -> float:
    """Angle of the vector p->q in degrees, normalized to [0, 360)."""
    if distance(p, q) < COINCIDENT_TOL:
        raise DegenerateGeometryError(f"direction of coincident points {p} -> {q}")
    return normalize_angle(math.degrees(math.atan2(q.y - p.y, q.x - p.x)))


@dataclass(frozen=True)
class OrientedPoint:
    """A location plus an optional facing direction in degrees.

    Orientation None means the direction is not observed.
    """

    location: Point2
    orientation: float | None = None

    def __post_init__(self) -> None:
        if self.orientation is not None:
            object.__setattr__(self, "orientation", normalize_angle(self.orientation))


@dataclass(frozen=True)
class Line2:
    """An oriented line: anchor point plus a unit direction."""

    anchor: Point2
    dx: float
    dy: float

    def __post_init__(self) -> None:
        _check_finite("direction", self.dx, self.dy)
        norm = math.hypot(self.dx, self.dy)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"line direction must be unit length, |d| = {norm}")

    @property
    def angle_degrees(self) -> float:
        return normalize_angle(math.degrees(math.atan2(self.dy, self.dx)))

    @classmethod
    def through(cls, p: Point2, q: Point2) -> "Line2":
        d = distance(p, q)
        if d < COINCIDENT_TOL:
            raise DegenerateGeometryError("line through coincident points")
        return cls(p, (q.x - p.x) / d, (q.y - p.y) / d)


def interior_angle(prev: Point2, vertex: Point2, nxt: Point2) -> float:
    """Unsigned angle at `vertex` between its two neighbours, radians in [0, pi]."""
    if distance(vertex, prev) < COINCIDENT_TOL or distance(vertex, nxt) < COINCIDENT_TOL:
        raise DegenerateGeometryError("interior angle with coincident vertex")
    ux, uy = prev.x - vertex.x, prev.y - vertex.y
    vx, vy = nxt.x - vertex.x, nxt.y - vertex.y
    cross = ux * vy - uy * vx
    dot = ux * vx + uy * vy
    return math.atan2(abs(cross), dot)


def foot_and_offset(p: Point2, line: Line2) -> tuple[Point2, float, float]:
    """Orthogonal projection of `p` onto `line`.

    Returns (foot, unsigned perpendicular offset, signed coordinate of the
    foot along the line direction measured from the anchor).
    """
    rx, ry = p.x - line.anchor.x, p.y - line.anchor.y
    along = rx * line.dx + ry * line.dy
    foot = Point2(line.anchor.x + along * line.dx, line.anchor.y + along * line.dy)
    return foot, distance(p, foot), along


def principal_axis_fit(points: Sequence[Point2]) -> Line2:
    """Orthogonal least-squares line through two or more points.

    The line passes through the centroid along the principal axis of the
    point scatter (total least squares, so the fit commutes with rotations).
    Direction sign: toward the last point minus the first; an exact tie is
    broken toward +x, then +y.
    """
    if len(points) < 2:
        raise ValueError("principal axis fit needs at least two points")
    c = centroid(points)
    if all(distance(p, c) < COINCIDENT_TOL for p in points):
        raise DegenerateGeometryError("principal axis of coincident points")
    sxx = syy = sxy = 0.0
    for p in points:
        dx, dy = p.x - c.x, p.y - c.y
        sxx += dx * dx
        syy += dy * dy
        sxy += dx * dy
    theta = 0.5 * math.atan2(2.0 * sxy, sxx - syy)
    dx, dy = math.cos(theta), math.sin(theta)
    span_dot = (points[-1].x - points[0].x) * dx + (points[-1].y - points[0].y) * dy
    if span_dot < 0.0:
        dx, dy = -dx, -dy
    elif span_dot == 0.0:
        if dx < 0.0 or (dx == 0.0 and dy < 0.0):
            dx, dy = -dx, -dy
    return Line2(c, dx, dy)


def rotate_point(p: Point2, degrees: float) -> Point2:
    rad = math.radians(degrees)
    cos_r, sin_r = math.cos(rad), math.sin(rad)
    return Point2(p.x * cos_r - p.y * sin_r, p.x * sin_r + p.y * cos_r)


def isometry_apply(
    rotation: float, translation: tuple[float, float], p: OrientedPoint
) -> OrientedPoint:
    """Rotate about the origin by `rotation` degrees, then translate."""
    _check_finite("translation", *translation)
    loc = rotate_point(p.location, rotation)
    loc = Point2(loc.x + translation[0], loc.y + translation[1])
    orient = None if p.orientation is None else normalize_angle(p.orientation + rotation)
    return OrientedPoint(loc, orient)


def circular_mean(angles: Iterable[float]) -> float | None:
    """Mean direction of a set of angles in degrees, or None when undefined.

    Undefined means the input is empty or the directions cancel out.
    """
    sx = sy = 0.0
    count = 0
    for a in angles:
        rad = math.radians(a)
        sx += math.cos(rad)
        sy += math.sin(rad)
        count += 1
    if count == 0 or math.hypot(sx, sy) < 1e-12:
        return None
    return normalize_angle(math.degrees(math.atan2(sy, sx)))
