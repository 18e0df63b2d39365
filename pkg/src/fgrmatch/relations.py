"""Fuzzy geometric relations: graded arrangements of oriented points.

Seven relation kinds are supported.  Four are figures (isosceles triangle,
equilateral triangle, rectangle triangle, rectangle) whose proximity
combines an angle-based shape measure with graded dimensions and member
orientations.  The remaining three (ring sector, trapezoidal section,
alignment) grade distances, directions and orientations directly.  An
evaluated relation exposes a reference point so relations can be nested:
a member of one relation may be the reference point of another.

Evaluation here is deliberately two-layered:

* :func:`evaluate_members` is the raw engine.  Members may carry unknown
  orientations; any measure whose value depends on an unknown is reported
  with ``value None`` plus the set of unknown labels it waits on.  Callers
  aggregating with ``min`` treat ``None`` as 1.0, which makes the result a
  sound upper bound.
* :func:`evaluate` is the convenience entry point for plain oriented
  points.  It resolves unknown orientations itself (maximizing the minimum
  of the memberships that read them) and returns fully determined numbers.

Conventions a template author must know: the reference orientation of a
figure is the first-to-second member direction rotated +90 degrees (the
left normal of the base); a ring or trapezoidal section uses the first
member's own orientation; an alignment uses the left normal of the fitted
line.  Orientation hypothesis search assumes membership features wider
than one degree (the grid resolution).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Mapping, Sequence

from .errors import DegenerateGeometryError, SpecValidationError
from .fuzzy import ANY, AnySet, FuzzySet, TrapezoidalSet, is_any
from .geometry import (
    COINCIDENT_TOL,
    Line2,
    OrientedPoint,
    Point2,
    centroid,
    circular_mean,
    direction_degrees,
    distance,
    foot_and_offset,
    interior_angle,
    normalize_angle,
    principal_axis_fit,
    relative_orientation,
    unit_vector,
)


class RelationKind(str, Enum):
    ISOSCELES_TRIANGLE = "isosceles_triangle"
    EQUILATERAL_TRIANGLE = "equilateral_triangle"
    RECTANGLE_TRIANGLE = "rectangle_triangle"
    RECTANGLE = "rectangle"
    RING_SECTOR = "ring_sector"
    TRAPEZOIDAL_SECTION = "trapezoidal_section"
    ALIGNMENT = "alignment"


FIGURE_KINDS = frozenset(
    {
        RelationKind.ISOSCELES_TRIANGLE,
        RelationKind.EQUILATERAL_TRIANGLE,
        RelationKind.RECTANGLE_TRIANGLE,
        RelationKind.RECTANGLE,
    }
)

SECTOR_KINDS = frozenset({RelationKind.RING_SECTOR, RelationKind.TRAPEZOIDAL_SECTION})

# Reference-coordinate selection modes for nesting.
REF_MODES = (
    "com_all_objects",
    "com_args",
    "base_pair_com",
    "uppermost",
    "lowermost",
    "leftmost",
    "rightmost",
)

_MEMBER_SUFFIX = ("a", "b", "c", "d")


def fixed_arity(kind: RelationKind) -> int | None:
    """Member count for fixed-arity kinds; None for alignment (n >= 2)."""
    if kind == RelationKind.RECTANGLE:
        return 4
    if kind in FIGURE_KINDS:
        return 3
    if kind in SECTOR_KINDS:
        return 2
    return None


def expected_set_names(kind: RelationKind, arity: int) -> tuple[str, ...]:
    """The exact fuzzy-set names a spec of this kind and arity must carry."""
    if kind in FIGURE_KINDS:
        orien = tuple(f"orien_{_MEMBER_SUFFIX[i]}" for i in range(arity))
        if kind == RelationKind.EQUILATERAL_TRIANGLE:
            return ("side",) + orien
        return ("base", "height") + orien
    if kind in SECTOR_KINDS:
        return ("distance", "orien_ab", "orien_b")
    adjacent = tuple(f"adjacent_{i}" for i in range(1, arity))
    orien = tuple(f"orien_{i}" for i in range(1, arity + 1))
    return adjacent + ("orien_align",) + orien


def set_is_circular(name: str) -> bool:
    """Orientation sets live on the circle; dimension sets on the line."""
    return name.startswith("orien")


@dataclass(frozen=True)
class RelationSpec:
    """A relation kind plus its named fuzzy sets.

    Construction is permissive so that template validation can report
    problems instead of crashing; evaluators require a spec for which
    :meth:`violations` is empty.
    """

    kind: RelationKind
    arity: int
    sets: Mapping[str, FuzzySet]

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", RelationKind(self.kind))
        object.__setattr__(self, "sets", dict(self.sets))

    def violations(self) -> list[str]:
        problems = []
        fixed = fixed_arity(self.kind)
        if fixed is not None and self.arity != fixed:
            problems.append(
                f"{self.kind.value} takes {fixed} members, spec declares {self.arity}"
            )
        elif fixed is None and self.arity < 2:
            problems.append(f"alignment needs at least 2 members, got {self.arity}")
        else:
            expected = expected_set_names(self.kind, self.arity)
            missing = [n for n in expected if n not in self.sets]
            extra = [n for n in self.sets if n not in expected]
            if missing:
                problems.append(f"missing fuzzy sets: {', '.join(missing)}")
            if extra:
                problems.append(f"unexpected fuzzy sets: {', '.join(extra)}")
            for name in expected:
                s = self.sets.get(name)
                if isinstance(s, TrapezoidalSet) and s.circular != set_is_circular(name):
                    want = "circular" if set_is_circular(name) else "linear"
                    problems.append(f"fuzzy set {name} must be {want}")
            if self.kind == RelationKind.TRAPEZOIDAL_SECTION and is_any(
                self.sets.get("orien_ab", ANY)
            ):
                problems.append(
                    "trapezoidal section needs a constrained orien_ab set "
                    "(the projection direction must have a unique maximizer)"
                )
        return problems

    def require_valid(self) -> None:
        problems = self.violations()
        if problems:
            raise SpecValidationError("; ".join(problems))


@dataclass(frozen=True)
class Member:
    """A resolved relation member: a point, maybe with an unknown orientation.

    ``orient_deps`` / ``loc_deps`` name the unknowns (opaque labels) the
    orientation / location are waiting on; they are non-empty exactly when
    the corresponding value is None.  ``orientation_observed`` separates
    orientations taken from observed data from hypothesized ones: only
    observed orientations enter the alignment's mean-direction measure.
    """

    location: Point2 | None
    orientation: float | None = None
    orientation_observed: bool = True
    loc_deps: frozenset[str] = frozenset()
    orient_deps: frozenset[str] = frozenset()

    @classmethod
    def of(cls, p: OrientedPoint) -> "Member":
        return cls(p.location, p.orientation, orientation_observed=p.orientation is not None)


@dataclass(frozen=True)
class Component:
    """One measure feeding a relation's min-aggregation.

    ``value`` is None when the measure depends on an unknown orientation
    (or a location derived from one); ``deps`` then names the unknowns.
    """

    name: str
    value: float | None
    deps: frozenset[str] = frozenset()

    def optimistic(self) -> float:
        return 1.0 if self.value is None else self.value


@dataclass(frozen=True)
class RelationInstance:
    """Result of evaluating one relation over resolved members."""

    kind: RelationKind
    proximity: float
    components: tuple[Component, ...]
    member_points: tuple[Point2 | None, ...]
    reference_orientation: float | None
    reference_deps: frozenset[str] = frozenset()
    geometry_deps: frozenset[str] = frozenset()
    degenerate: bool = False
    # False when the reference orientation traces back to a hypothesized
    # member orientation rather than observed data.
    reference_observed: bool = True

    @property
    def determined(self) -> bool:
        return all(c.value is not None for c in self.components)


def shape_proximity(kind: RelationKind, points: Sequence[Point2]) -> float:
    """Angle-based closeness of an ordered point tuple to a figure, in [0, 1].

    Degenerate tuples (coincident vertices) score 0 so a search over raw
    candidates never has to special-case them.
    """
    kind = RelationKind(kind)
    if kind not in FIGURE_KINDS:
        raise ValueError(f"shape proximity is defined for figures, not {kind.value}")
    arity = fixed_arity(kind)
    if len(points) != arity:
        raise ValueError(f"{kind.value} takes {arity} points, got {len(points)}")
    try:
        angles = _interior_angles(kind, points)
    except DegenerateGeometryError:
        return 0.0
    return _shape_formula(kind, angles)


def _interior_angles(kind: RelationKind, pts: Sequence[Point2]) -> tuple[float, ...]:
    if kind == RelationKind.RECTANGLE:
        a, b, c, d = pts
        return (
            interior_angle(d, a, b),
            interior_angle(a, b, c),
            interior_angle(b, c, d),
            interior_angle(c, d, a),
        )
    a, b, c = pts
    return (
        interior_angle(b, a, c),
        interior_angle(a, b, c),
        interior_angle(a, c, b),
    )


def _shape_formula(kind: RelationKind, angles: tuple[float, ...]) -> float:
    if kind == RelationKind.ISOSCELES_TRIANGLE:
        value = 1.0 - abs(angles[0] - angles[1]) / math.pi
    elif kind == RelationKind.EQUILATERAL_TRIANGLE:
        value = 1.0 - sum(abs(a - math.pi / 3.0) for a in angles) / (4.0 * math.pi / 3.0)
    elif kind == RelationKind.RECTANGLE_TRIANGLE:
        # Can go negative when the middle angle nears 0 or pi; clamp.
        value = 1.0 - abs(angles[1] - math.pi / 2.0) / (math.pi / 2.0)
    else:
        value = 1.0 - sum(abs(a - math.pi / 2.0) for a in angles) / (2.0 * math.pi)
    return min(1.0, max(0.0, value))


def _membership_component(
    name: str, s: FuzzySet, value: float | None, deps: frozenset[str]
) -> Component:
    """Grade `value` in `s`; Any sets never constrain, unknowns stay open."""
    if is_any(s):
        return Component(name, 1.0)
    if value is None:
        return Component(name, None, deps)
    return Component(name, s.membership(value))


def _degenerate_instance(spec: RelationSpec, members: Sequence[Member]) -> RelationInstance:
    return RelationInstance(
        kind=spec.kind,
        proximity=0.0,
        components=(Component("degenerate", 0.0),),
        member_points=tuple(m.location for m in members),
        reference_orientation=None,
        degenerate=True,
    )


def evaluate_members(spec: RelationSpec, members: Sequence[Member]) -> RelationInstance:
    """Evaluate a relation over resolved members (raw engine).

    The returned proximity is the min over components with unknowns
    counted as 1.0: exact when everything is determined, otherwise a
    sound upper bound.
    """
    arity = fixed_arity(spec.kind)
    expected = arity if arity is not None else spec.arity
    if len(members) != expected:
        raise ValueError(
            f"{spec.kind.value} takes {expected} members, got {len(members)}"
        )

    geometry_deps = frozenset().union(*(m.loc_deps for m in members)) if members else frozenset()
    if any(m.location is None for m in members):
        # Upstream reference location still unknown; nothing measurable yet.
        ref_orient, ref_deps = _reference_orientation_pending(spec.kind, members)
        ref_observed = (
            members[0].orientation_observed if spec.kind in SECTOR_KINDS else True
        )
        return RelationInstance(
            kind=spec.kind,
            proximity=1.0,
            components=(Component("geometry", None, geometry_deps),),
            member_points=tuple(m.location for m in members),
            reference_orientation=ref_orient,
            reference_deps=ref_deps,
            geometry_deps=geometry_deps,
            reference_observed=ref_observed,
        )

    if spec.kind in FIGURE_KINDS:
        return _evaluate_figure(spec, members)
    if spec.kind in SECTOR_KINDS:
        return _evaluate_sector(spec, members)
    return _evaluate_alignment(spec, members)


def _reference_orientation_pending(
    kind: RelationKind, members: Sequence[Member]
) -> tuple[float | None, frozenset[str]]:
    if kind in SECTOR_KINDS:
        return members[0].orientation, members[0].orient_deps
    deps = frozenset().union(*(m.loc_deps for m in members))
    return None, deps


def _evaluate_figure(spec: RelationSpec, members: Sequence[Member]) -> RelationInstance:
    pts = [m.location for m in members]
    try:
        angles = _interior_angles(spec.kind, pts)
    except DegenerateGeometryError:
        return _degenerate_instance(spec, members)
    omega = _shape_formula(spec.kind, angles)
    ref = normalize_angle(direction_degrees(pts[0], pts[1]) + 90.0)

    components = [Component("shape", omega)]
    if spec.kind == RelationKind.EQUILATERAL_TRIANGLE:
        side = (distance(pts[0], pts[1]) + distance(pts[1], pts[2]) + distance(pts[2], pts[0])) / 3.0
        components.append(_membership_component("side", spec.sets["side"], side, frozenset()))
    elif spec.kind == RelationKind.RECTANGLE:
        base = (distance(pts[0], pts[1]) + distance(pts[2], pts[3])) / 2.0
        height = (distance(pts[1], pts[2]) + distance(pts[3], pts[0])) / 2.0
        components.append(_membership_component("base", spec.sets["base"], base, frozenset()))
        components.append(_membership_component("height", spec.sets["height"], height, frozenset()))
    elif spec.kind == RelationKind.RECTANGLE_TRIANGLE:
        components.append(
            _membership_component("base", spec.sets["base"], distance(pts[0], pts[1]), frozenset())
        )
        components.append(
            _membership_component("height", spec.sets["height"], distance(pts[1], pts[2]), frozenset())
        )
    else:  # isosceles: base between the first two, apex offset as height
        components.append(
            _membership_component("base", spec.sets["base"], distance(pts[0], pts[1]), frozenset())
        )
        _, offset, _ = foot_and_offset(pts[2], Line2.through(pts[0], pts[1]))
        components.append(_membership_component("height", spec.sets["height"], offset, frozenset()))

    for i, m in enumerate(members):
        name = f"orien_{_MEMBER_SUFFIX[i]}"
        rel = None if m.orientation is None else relative_orientation(m.orientation, ref)
        components.append(_membership_component(name, spec.sets[name], rel, m.orient_deps))

    return _finish(spec, members, components, ref, frozenset())


def _evaluate_sector(spec: RelationSpec, members: Sequence[Member]) -> RelationInstance:
    a, b = members
    if distance(a.location, b.location) < COINCIDENT_TOL:
        return _degenerate_instance(spec, members)
    ref = a.orientation
    ref_deps = a.orient_deps

    components = []
    dist_set = spec.sets["distance"]
    if spec.kind == RelationKind.RING_SECTOR:
        components.append(
            _membership_component("distance", dist_set, distance(a.location, b.location), frozenset())
        )
    else:
        vec_set = spec.sets["orien_ab"]
        if is_any(vec_set):
            raise SpecValidationError(
                "trapezoidal section needs a constrained orien_ab set"
            )
        if ref is None:
            components.append(_membership_component("distance", dist_set, None, ref_deps))
        else:
            ux, uy = unit_vector(ref + vec_set.core_midpoint())
            proj = (b.location.x - a.location.x) * ux + (b.location.y - a.location.y) * uy
            components.append(_membership_component("distance", dist_set, proj, frozenset()))

    ab = None if ref is None else relative_orientation(direction_degrees(a.location, b.location), ref)
    components.append(_membership_component("orien_ab", spec.sets["orien_ab"], ab, ref_deps))

    if ref is None or b.orientation is None:
        rel_b, deps_b = None, ref_deps | b.orient_deps
    else:
        rel_b, deps_b = relative_orientation(b.orientation, ref), frozenset()
    components.append(_membership_component("orien_b", spec.sets["orien_b"], rel_b, deps_b))

    return _finish(
        spec, members, components, ref, ref_deps, ref_observed=a.orientation_observed
    )


def _evaluate_alignment(spec: RelationSpec, members: Sequence[Member]) -> RelationInstance:
    pts = [m.location for m in members]
    try:
        line = principal_axis_fit(pts)
    except DegenerateGeometryError:
        return _degenerate_instance(spec, members)
    line_theta = line.angle_degrees
    ref = normalize_angle(line_theta + 90.0)

    alongs = [foot_and_offset(p, line)[2] for p in pts]
    components = []
    for i in range(1, len(members)):
        name = f"adjacent_{i}"
        components.append(
            _membership_component(name, spec.sets[name], alongs[i] - alongs[i - 1], frozenset())
        )

    observed = [
        m.orientation
        for m in members
        if m.orientation is not None and m.orientation_observed
    ]
    mean = circular_mean(observed)
    align_set = spec.sets["orien_align"]
    if is_any(align_set) or mean is None:
        # No observed facing to compare the line against: unconstrained.
        components.append(Component("orien_align", 1.0))
    else:
        components.append(
            Component("orien_align", align_set.membership(relative_orientation(line_theta, mean)))
        )

    for i, m in enumerate(members, start=1):
        name = f"orien_{i}"
        rel = None if m.orientation is None else relative_orientation(m.orientation, ref)
        components.append(_membership_component(name, spec.sets[name], rel, m.orient_deps))

    return _finish(spec, members, components, ref, frozenset())


def _finish(
    spec: RelationSpec,
    members: Sequence[Member],
    components: list[Component],
    ref: float | None,
    ref_deps: frozenset[str],
    ref_observed: bool = True,
) -> RelationInstance:
    return RelationInstance(
        kind=spec.kind,
        proximity=min(c.optimistic() for c in components),
        components=tuple(components),
        member_points=tuple(m.location for m in members),
        reference_orientation=ref,
        reference_deps=ref_deps,
        reference_observed=ref_observed,
    )


def reference_point(
    kind: RelationKind,
    mode: str,
    member_points: Sequence[Point2 | None],
    object_locations: Sequence[Point2],
    reference_orientation: float | None,
) -> OrientedPoint | None:
    """The oriented point an instantiated relation exposes to its parents.

    ``object_locations`` are the locations of every object the relation
    uses directly or transitively (deduplicated by the caller).  Returns
    None when the coordinates are not yet computable (an extremal mode
    with the reference orientation still unknown).
    """
    if mode not in REF_MODES:
        raise SpecValidationError(f"unknown reference mode {mode!r}")
    if mode == "com_args":
        if any(p is None for p in member_points):
            return None
        loc = centroid(list(member_points))
    elif mode == "com_all_objects":
        loc = centroid(list(object_locations))
    elif mode == "base_pair_com":
        pair = list(member_points[:2])
        if len(pair) < 2 or any(p is None for p in pair):
            return None
        loc = centroid(pair)
    else:
        if reference_orientation is None:
            return None
        if not object_locations:
            raise ValueError("extremal reference mode over no object locations")
        if mode in ("uppermost", "lowermost"):
            ux, uy = unit_vector(reference_orientation)
        else:
            ux, uy = unit_vector(reference_orientation + 90.0)
        take_max = mode in ("uppermost", "leftmost")
        if take_max:
            loc = max(object_locations, key=lambda p: (p.x * ux + p.y * uy, -p.x, -p.y))
        else:
            loc = min(object_locations, key=lambda p: (p.x * ux + p.y * uy, p.x, p.y))
    return OrientedPoint(loc, reference_orientation)


def maximize_orientation(
    objective: Callable[[float], float], *, refine_to: float = 1e-9
) -> tuple[float, float]:
    """Best angle in [0, 360) for a membership-style objective.

    One-degree grid scan (ties to the smallest angle) followed by local
    bisection refinement; exact for the piecewise-linear plateaus that
    min-of-trapezoid objectives produce, provided features span more than
    the grid step.
    """
    best_theta = 0.0
    best_value = objective(0.0)
    for k in range(1, 360):
        v = objective(float(k))
        if v > best_value:
            best_theta, best_value = float(k), v
    lo, hi = best_theta - 1.0, best_theta + 1.0
    while hi - lo > refine_to:
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        if objective(m1) < objective(m2):
            lo = m1
        else:
            hi = m2
    theta = (lo + hi) / 2.0
    value = objective(theta)
    if value > best_value:
        return normalize_angle(theta), value
    return normalize_angle(best_theta), best_value


@dataclass(frozen=True)
class RelationResult:
    """Fully determined evaluation of one relation over oriented points."""

    kind: RelationKind
    proximity: float
    components: Mapping[str, float]
    reference: OrientedPoint | None
    member_points: tuple[Point2, ...]
    assigned_orientations: Mapping[int, float] = field(default_factory=dict)


def evaluate(
    spec: RelationSpec,
    points: Sequence[OrientedPoint],
    *,
    ref_mode: str = "com_args",
) -> RelationResult:
    """Evaluate a relation over oriented points, hypothesizing as needed.

    Members with undefined orientation that face a constrained orientation
    set get an orientation assigned by maximizing the minimum of the
    memberships that read it; assignments are reported by member index.
    The reference point is computed per `ref_mode` over the member points
    themselves (when nesting inside a template, the recognition layer
    supplies the transitive object locations instead).
    """
    spec.require_valid()
    labels = {i: f"member:{i}" for i in range(len(points))}
    members = [
        Member(
            p.location,
            p.orientation,
            orientation_observed=p.orientation is not None,
            orient_deps=frozenset() if p.orientation is not None else frozenset({labels[i]}),
        )
        for i, p in enumerate(points)
    ]
    first = evaluate_members(spec, members)

    needed: list[int] = []
    needed_labels: set[str] = set()
    for c in first.components:
        needed_labels |= c.deps
    needed_labels |= first.reference_deps
    for i in range(len(points)):
        if labels[i] in needed_labels:
            needed.append(i)

    assigned: dict[int, float] = {}
    current = list(members)

    def rebuilt(i: int, theta: float) -> list[Member]:
        trial = list(current)
        trial[i] = Member(points[i].location, theta, orientation_observed=False)
        return trial

    resolved: set[str] = set()
    for i in needed:
        allowed = resolved | {labels[i]}

        def objective(theta: float, idx: int = i) -> float:
            inst = evaluate_members(spec, rebuilt(idx, theta))
            values = [
                c.value
                for base, c in zip(first.components, inst.components)
                if labels[idx] in base.deps and base.deps <= allowed and c.value is not None
            ]
            return min(values) if values else 1.0

        theta, _ = maximize_orientation(objective)
        assigned[i] = theta
        current[i] = Member(points[i].location, theta, orientation_observed=False)
        resolved.add(labels[i])

    final = evaluate_members(spec, current)
    if not final.determined and not final.degenerate:
        raise AssertionError("relation evaluation left unresolved components")
    reference = reference_point(
        spec.kind,
        ref_mode,
        final.member_points,
        [p.location for p in points],
        final.reference_orientation,
    )
    return RelationResult(
        kind=spec.kind,
        proximity=final.proximity,
        components={c.name: c.value if c.value is not None else 1.0 for c in final.components},
        reference=reference,
        member_points=tuple(p.location for p in points),
        assigned_orientations=assigned,
    )
