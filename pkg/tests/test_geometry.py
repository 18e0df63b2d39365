"""Tests for the 2-D geometric kernel."""

import math
import random

import pytest

from fgrmatch.errors import DegenerateGeometryError
from fgrmatch.geometry import (
    Line2,
    OrientedPoint,
    Point2,
    circular_mean,
    distance,
    foot_and_offset,
    interior_angle,
    isometry_apply,
    normalize_angle,
    principal_axis_fit,
    relative_orientation,
)


# -- normalize_angle ---------------------------------------------------------

def test_normalize_wraps_over():
    assert normalize_angle(370.0) == pytest.approx(10.0)


def test_normalize_wraps_negative():
    assert normalize_angle(-90.0) == pytest.approx(270.0)


def test_normalize_boundary():
    assert normalize_angle(360.0) == 0.0


def test_normalize_idempotent():
    rng = random.Random(1)
    for _ in range(200):
        a = rng.uniform(-1e4, 1e4)
        once = normalize_angle(a)
        assert 0.0 <= once < 360.0
        assert normalize_angle(once) == once


def test_normalize_rejects_non_finite():
    with pytest.raises(ValueError):
        normalize_angle(float("nan"))
    with pytest.raises(ValueError):
        normalize_angle(float("inf"))


# -- relative_orientation ----------------------------------------------------

def test_relative_orientation_direct():
    assert relative_orientation(135.0, 90.0) == pytest.approx(45.0)


def test_relative_orientation_wraparound():
    assert relative_orientation(10.0, 350.0) == pytest.approx(20.0)


def test_relative_orientation_antipodal_is_plus_180():
    assert relative_orientation(270.0, 90.0) == pytest.approx(180.0)


def test_relative_orientation_range():
    rng = random.Random(2)
    for _ in range(300):
        d = relative_orientation(rng.uniform(0, 360), rng.uniform(0, 360))
        assert -180.0 < d <= 180.0


# -- interior_angle ----------------------------------------------------------

def test_interior_angle_perpendicular():
    assert interior_angle(Point2(1, 0), Point2(0, 0), Point2(0, 1)) == pytest.approx(math.pi / 2)


def test_interior_angle_45():
    assert interior_angle(Point2(1, 0), Point2(0, 0), Point2(1, 1)) == pytest.approx(math.pi / 4)


def test_interior_angle_collinear_opposite():
    assert interior_angle(Point2(1, 0), Point2(0, 0), Point2(-1, 0)) == pytest.approx(math.pi)


def test_interior_angle_symmetric_and_bounded():
    rng = random.Random(3)
    for _ in range(200):
        pts = [Point2(rng.uniform(-5, 5), rng.uniform(-5, 5)) for _ in range(3)]
        if distance(pts[1], pts[0]) < 1e-6 or distance(pts[1], pts[2]) < 1e-6:
            continue
        a = interior_angle(pts[0], pts[1], pts[2])
        b = interior_angle(pts[2], pts[1], pts[0])
        assert a == pytest.approx(b, abs=1e-12)
        assert 0.0 <= a <= math.pi


def test_interior_angle_coincident_raises():
    with pytest.raises(DegenerateGeometryError):
        interior_angle(Point2(0, 0), Point2(0, 0), Point2(1, 1))


# -- foot_and_offset ---------------------------------------------------------

def test_foot_on_x_axis():
    x_axis = Line2(Point2(0, 0), 1.0, 0.0)
    foot, offset, along = foot_and_offset(Point2(0, 4), x_axis)
    assert (foot.x, foot.y) == pytest.approx((0.0, 0.0))
    assert offset == pytest.approx(4.0)
    assert along == pytest.approx(0.0)


def test_foot_of_point_on_line_is_itself():
    line = Line2.through(Point2(1, 1), Point2(4, 5))
    _, offset, _ = foot_and_offset(Point2(2.5, 3.0), line)
    assert offset == pytest.approx(0.0, abs=1e-12)


def test_foot_general():
    x_axis = Line2(Point2(0, 0), 1.0, 0.0)
    foot, offset, along = foot_and_offset(Point2(2, 3), x_axis)
    assert (foot.x, foot.y) == pytest.approx((2.0, 0.0))
    assert offset == pytest.approx(3.0)
    assert along == pytest.approx(2.0)


def test_foot_pythagorean_identity():
    rng = random.Random(4)
    for _ in range(100):
        anchor = Point2(rng.uniform(-5, 5), rng.uniform(-5, 5))
        other = Point2(rng.uniform(-5, 5), rng.uniform(-5, 5))
        if distance(anchor, other) < 1e-6:
            continue
        line = Line2.through(anchor, other)
        p = Point2(rng.uniform(-5, 5), rng.uniform(-5, 5))
        _, offset, along = foot_and_offset(p, line)
        assert offset**2 + along**2 == pytest.approx(distance(p, anchor) ** 2, abs=1e-9)


def test_offset_is_isometry_invariant():
    rng = random.Random(5)
    line_pts = [Point2(0, 0), Point2(3, 1)]
    p = Point2(2, 4)
    _, base_offset, _ = foot_and_offset(p, Line2.through(*line_pts))
    for _ in range(20):
        rot = rng.uniform(0, 360)
        trans = (rng.uniform(-10, 10), rng.uniform(-10, 10))
        moved = [isometry_apply(rot, trans, OrientedPoint(q)).location for q in line_pts]
        mp = isometry_apply(rot, trans, OrientedPoint(p)).location
        _, offset, _ = foot_and_offset(mp, Line2.through(*moved))
        assert offset == pytest.approx(base_offset, abs=1e-9)


# -- principal_axis_fit ------------------------------------------------------

def test_fit_exactly_collinear():
    line = principal_axis_fit([Point2(0, 0), Point2(1, 2), Point2(2, 4)])
    assert (line.anchor.x, line.anchor.y) == pytest.approx((1.0, 2.0))
    assert (line.dx, line.dy) == pytest.approx((1 / math.sqrt(5), 2 / math.sqrt(5)))
    for p in (Point2(0, 0), Point2(1, 2), Point2(2, 4)):
        _, offset, _ = foot_and_offset(p, line)
        assert offset == pytest.approx(0.0, abs=1e-12)


def test_fit_triangle_horizontal_axis():
    # Hand eigen-decomposition: scatter x-variance 2/3, y-variance 2/9,
    # zero covariance, so the axis is horizontal through (1, 1/3) and the
    # perpendicular residuals are 1/3, 2/3, 1/3.
    pts = [Point2(0, 0), Point2(1, 1), Point2(2, 0)]
    line = principal_axis_fit(pts)
    assert (line.anchor.x, line.anchor.y) == pytest.approx((1.0, 1 / 3))
    assert (line.dx, line.dy) == pytest.approx((1.0, 0.0), abs=1e-12)
    residuals = [foot_and_offset(p, line)[1] for p in pts]
    assert residuals == pytest.approx([1 / 3, 2 / 3, 1 / 3])


def test_fit_two_points():
    line = principal_axis_fit([Point2(1, 1), Point2(4, 5)])
    for p in (Point2(1, 1), Point2(4, 5)):
        assert foot_and_offset(p, line)[1] == pytest.approx(0.0, abs=1e-12)


def test_fit_direction_sign_convention():
    line = principal_axis_fit([Point2(2, 4), Point2(1, 2), Point2(0, 0)])
    # last - first points toward negative x: the direction must follow it
    assert line.dx < 0


def test_fit_coincident_raises():
    with pytest.raises(DegenerateGeometryError):
        principal_axis_fit([Point2(1, 1), Point2(1, 1), Point2(1, 1)])


def test_fit_isometry_equivariance():
    rng = random.Random(6)
    for _ in range(50):
        pts = [Point2(rng.uniform(-5, 5), rng.uniform(-5, 5)) for _ in range(4)]
        try:
            base = principal_axis_fit(pts)
        except DegenerateGeometryError:
            continue
        base_res = sorted(foot_and_offset(p, base)[1] for p in pts)
        rot = rng.uniform(0, 360)
        trans = (rng.uniform(-20, 20), rng.uniform(-20, 20))
        moved = [isometry_apply(rot, trans, OrientedPoint(p)).location for p in pts]
        fit = principal_axis_fit(moved)
        res = sorted(foot_and_offset(p, fit)[1] for p in moved)
        assert res == pytest.approx(base_res, abs=1e-9)


# -- isometry_apply ----------------------------------------------------------

def test_rotate_quarter_turn():
    moved = isometry_apply(90.0, (0.0, 0.0), OrientedPoint(Point2(1, 0)))
    assert (moved.location.x, moved.location.y) == pytest.approx((0.0, 1.0), abs=1e-12)


def test_identity_isometry():
    p = OrientedPoint(Point2(3, -2), 135.0)
    moved = isometry_apply(0.0, (0.0, 0.0), p)
    assert moved == p


def test_inverse_composition():
    p = OrientedPoint(Point2(2, 5), 30.0)
    there = isometry_apply(90.0, (3.0, -1.0), p)
    back = isometry_apply(-90.0, (0.0, 0.0), OrientedPoint(
        Point2(there.location.x - 3.0, there.location.y + 1.0), there.orientation))
    assert back.location.x == pytest.approx(p.location.x, abs=1e-12)
    assert back.location.y == pytest.approx(p.location.y, abs=1e-12)
    assert back.orientation == pytest.approx(p.orientation, abs=1e-12)


def test_orientation_shifts_with_rotation():
    p = OrientedPoint(Point2(0, 0), 350.0)
    assert isometry_apply(20.0, (0.0, 0.0), p).orientation == pytest.approx(10.0)


def test_undefined_orientation_stays_undefined():
    p = OrientedPoint(Point2(1, 1))
    assert isometry_apply(45.0, (1.0, 1.0), p).orientation is None


# -- circular_mean -----------------------------------------------------------

def test_circular_mean_wraps():
    assert circular_mean([350.0, 10.0]) == pytest.approx(0.0, abs=1e-9)


def test_circular_mean_cancellation_is_undefined():
    assert circular_mean([0.0, 180.0]) is None
    assert circular_mean([]) is None


def test_line_requires_unit_direction():
    with pytest.raises(ValueError):
        Line2(Point2(0, 0), 1.0, 1.0)
