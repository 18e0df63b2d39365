"""Seeded synthetic situations: clutter plus optionally one planted instance.

Planting walks the constraint DAG roots-first.  Each constraint, when it
acts, samples its fuzzy sets and places its free objects; members that
are child relations receive a pose demand (a pin) and are constructed
once every pinning parent has acted, so shared sub-relations end up where
all their parents expect them.  Members already placed by an earlier
constraint are left alone and checked by the final verification pass.

Distortion d in [0, 1] controls sampling: each set value is drawn
uniformly from an interval that interpolates from the core midpoint
(d = 0, exact nominal) out to the 0.1-cut of the support (d = 1), so a
zero-distortion plant scores membership one everywhere and a distorted
plant stays strictly inside the support.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import InfeasiblePlantError
from .fuzzy import AnySet, FuzzySet, TrapezoidalSet, is_any
from .geometry import OrientedPoint, Point2, normalize_angle, rotate_point, unit_vector
from .recognition import Situation, SituationObject, TemplateInstance, _Engine
from .relations import RelationKind, reference_point
from .template import (
    ConstraintNode,
    ObjectArg,
    RelationArg,
    Template,
    topological_order,
)


@dataclass
class GenerationSpec:
    """What to generate: object count, region, clutter mix, optional plant."""

    n: int
    region: tuple[float, float, float, float] = (0.0, 0.0, 200.0, 150.0)
    clutter_types: Sequence[str] = ()
    type_attribute: str = "type"
    template: Template | None = None
    distortion: float = 0.0


def _sample_set(s: FuzzySet, d: float, rng: random.Random, scale: float) -> float:
    if is_any(s):
        return rng.uniform(0.1 * scale, 0.4 * scale)
    mid = s.core_midpoint()
    lo, hi = s.cut_interval(0.1)
    if s.circular:
        # Work on the unwrapped arc so the interval around mid is contiguous.
        offset = (mid - lo) % 360.0
        mid_u = lo + offset
        value = rng.uniform(mid_u + d * (lo - mid_u), mid_u + d * (hi - mid_u))
        return normalize_angle(value)
    return rng.uniform(mid + d * (lo - mid), mid + d * (hi - mid))


def _sample_angle_set(s: FuzzySet, d: float, rng: random.Random) -> float:
    if is_any(s):
        return rng.uniform(0.0, 360.0)
    return _sample_set(s, d, rng, 360.0)


@dataclass
class _Pin:
    mode: str
    location: Point2
    orientation: float


@dataclass
class _Built:
    """A constructed relation: member poses plus its reference orientation."""

    node: ConstraintNode
    member_points: list[Point2]
    ref_orientation: float

    def point_for(self, mode: str, object_locations: list[Point2]) -> OrientedPoint:
        rp = reference_point(
            self.node.spec.kind, mode, self.member_points, object_locations, self.ref_orientation
        )
        if rp is None:
            raise InfeasiblePlantError(
                f"reference mode {mode!r} of {self.node.id!r} is not computable"
            )
        return rp


class _Planter:
    def __init__(self, template: Template, distortion: float, rng: random.Random,
                 region: tuple[float, float, float, float]) -> None:
        self.template = template
        self.d = distortion
        self.rng = rng
        self.region = region
        self.scale = max(region[2] - region[0], region[3] - region[1]) or 100.0
        self.placed: dict[str, OrientedPoint] = {}
        self.built: dict[str, _Built] = {}
        self.pins: dict[str, list[_Pin]] = {}
        self.nodes = template.constraints_by_id
        self.order = topological_order(template)
        self.decl_index = {c.id: i for i, c in enumerate(template.constraints)}
        # Parents that dictate a child's pose (figure members, sector B slot).
        self.pinning_parents: dict[str, set[str]] = {c.id: set() for c in template.constraints}
        for node in template.constraints:
            for i, arg in enumerate(node.args):
                if isinstance(arg, RelationArg) and self._pins_member(node, i):
                    self.pinning_parents[arg.constraint_id].add(node.id)

    @staticmethod
    def _pins_member(node: ConstraintNode, index: int) -> bool:
        kind = node.spec.kind
        if kind == RelationKind.ALIGNMENT:
            return False
        if kind in (RelationKind.RING_SECTOR, RelationKind.TRAPEZOIDAL_SECTION):
            return index == 1
        return True

    # -- plumbing -----------------------------------------------------------

    def _object_locations(self, cid: str) -> list[Point2]:
        return [self.placed[oid].location for oid in self.template.transitive_object_ids(cid)]

    def _member_pose(self, arg) -> OrientedPoint | None:
        """Pose of an already-determined member, else None."""
        if isinstance(arg, ObjectArg):
            return self.placed.get(arg.object_id)
        built = self.built.get(arg.constraint_id)
        if built is None:
            return None
        mode = arg.ref_mode or self.nodes[arg.constraint_id].ref_mode
        return built.point_for(mode, self._object_locations(arg.constraint_id))

    def _anchor(self) -> OrientedPoint:
        xmin, ymin, xmax, ymax = self.region
        return OrientedPoint(
            Point2(self.rng.uniform(xmin, xmax), self.rng.uniform(ymin, ymax)),
            self.rng.uniform(0.0, 360.0),
        )

    def _settle(self, arg, pose: OrientedPoint, parent: str) -> None:
        """Place an object member or pin a child relation at `pose`."""
        if isinstance(arg, ObjectArg):
            if arg.object_id in self.placed:
                return  # already placed elsewhere; final verification judges it
            self.placed[arg.object_id] = pose
        else:
            if arg.constraint_id in self.built:
                return
            mode = arg.ref_mode or self.nodes[arg.constraint_id].ref_mode
            if pose.orientation is None:
                raise InfeasiblePlantError(
                    f"{parent!r} cannot pin {arg.constraint_id!r} without an orientation"
                )
            self.pins.setdefault(arg.constraint_id, []).append(
                _Pin(mode, pose.location, pose.orientation)
            )

    # -- local geometry -----------------------------------------------------

    def _figure_local(self, node: ConstraintNode) -> list[Point2]:
        """Exact local figure with the base along +x (reference faces +90)."""
        kind = node.spec.kind
        sets = node.spec.sets
        if kind == RelationKind.EQUILATERAL_TRIANGLE:
            s = self._positive(_sample_set(sets["side"], self.d, self.rng, self.scale))
            return [Point2(-s / 2, 0.0), Point2(s / 2, 0.0), Point2(0.0, s * math.sqrt(3) / 2)]
        b = self._positive(_sample_set(sets["base"], self.d, self.rng, self.scale))
        h = self._positive(_sample_set(sets["height"], self.d, self.rng, self.scale))
        if kind == RelationKind.ISOSCELES_TRIANGLE:
            return [Point2(-b / 2, 0.0), Point2(b / 2, 0.0), Point2(0.0, h)]
        if kind == RelationKind.RECTANGLE_TRIANGLE:
            return [Point2(0.0, 0.0), Point2(b, 0.0), Point2(b, h)]
        return [Point2(0.0, 0.0), Point2(b, 0.0), Point2(b, h), Point2(0.0, h)]

    def _positive(self, value: float) -> float:
        if value <= 1e-6:
            raise InfeasiblePlantError(
                "sampled a non-positive dimension; the fuzzy sets admit degenerate geometry"
            )
        return value

    # -- acting -------------------------------------------------------------

    def run(self) -> dict[str, OrientedPoint]:
        pending = list(self.order)
        while pending:
            progressed = []
            for cid in pending:
                if self._try_act(self.nodes[cid]):
                    progressed.append(cid)
            if not progressed:
                raise InfeasiblePlantError(
                    f"planting deadlocked on constraints: {', '.join(pending)}"
                )
            pending = [cid for cid in pending if cid not in progressed]
        return dict(self.placed)

    def _defers_to_earlier(self, node: ConstraintNode) -> bool:
        """Earlier-declared constraints get to place shared free objects first."""
        for arg in node.args:
            if isinstance(arg, ObjectArg) and arg.object_id not in self.placed:
                for other in self.template.constraints:
                    if (
                        other.id != node.id
                        and other.id not in self.built
                        and self.decl_index[other.id] < self.decl_index[node.id]
                        and any(
                            isinstance(a, ObjectArg) and a.object_id == arg.object_id
                            for a in other.args
                        )
                    ):
                        return True
        return False

    def _try_act(self, node: ConstraintNode) -> bool:
        if not self.pinning_parents[node.id] <= set(self.built):
            return False  # parents may still pin this node; wait for them
        if self._defers_to_earlier(node):
            return False
        pins = self.pins.get(node.id, [])
        if len(pins) > 1:
            raise InfeasiblePlantError(
                f"{node.id!r} is pinned by more than one parent; this planter "
                "only solves single-demand constructions"
            )
        kind = node.spec.kind
        if kind in (RelationKind.RING_SECTOR, RelationKind.TRAPEZOIDAL_SECTION):
            return self._act_sector(node, pins)
        if kind == RelationKind.ALIGNMENT:
            return self._act_alignment(node, pins)
        return self._act_figure(node, pins)

    def _place_rigid(
        self,
        node: ConstraintNode,
        local_points: list[Point2],
        pin: _Pin | None,
    ) -> None:
        """Rotate/translate the local layout into the world and settle members.

        The local layout faces +90; member orientations are sampled
        relative to the placed reference orientation.
        """
        if pin is None:
            anchor = self._anchor()
            ref_theta = anchor.orientation
            rotation = ref_theta - 90.0
            world = [rotate_point(p, rotation) for p in local_points]
            dx, dy = anchor.location.x, anchor.location.y
            world = [Point2(p.x + dx, p.y + dy) for p in world]
        else:
            ref_theta = pin.orientation
            rotation = ref_theta - 90.0
            world = [rotate_point(p, rotation) for p in local_points]
            mode_point = self._local_mode_point(node, world, pin.mode, ref_theta)
            dx, dy = pin.location.x - mode_point.x, pin.location.y - mode_point.y
            world = [Point2(p.x + dx, p.y + dy) for p in world]
        self.built[node.id] = _Built(node, world, normalize_angle(ref_theta))
        names = self._member_orientation_sets(node)
        for arg, point, set_name in zip(node.args, world, names):
            rel = _sample_angle_set(node.spec.sets[set_name], self.d, self.rng)
            self._settle(arg, OrientedPoint(point, ref_theta + rel), node.id)

    def _local_mode_point(
        self, node: ConstraintNode, points: list[Point2], mode: str, ref_theta: float
    ) -> Point2:
        # Object locations equal member points for a not-yet-settled layout:
        # extremal and com_all modes act over the member poses being built.
        rp = reference_point(node.spec.kind, mode, points, points, ref_theta)
        if rp is None:
            raise InfeasiblePlantError(f"cannot aim {node.id!r} at reference mode {mode!r}")
        return rp.location

    @staticmethod
    def _member_orientation_sets(node: ConstraintNode) -> list[str]:
        kind = node.spec.kind
        if kind == RelationKind.ALIGNMENT:
            return [f"orien_{i}" for i in range(1, len(node.args) + 1)]
        return [f"orien_{s}" for s in ("a", "b", "c", "d")][: len(node.args)]

    def _act_figure(self, node: ConstraintNode, pins: list[_Pin]) -> bool:
        fixed = [self._member_pose(a) for a in node.args]
        n_fixed = sum(1 for f in fixed if f is not None)
        unconstructed_children = [
            a for a in node.args
            if isinstance(a, RelationArg) and a.constraint_id not in self.built
        ]
        if n_fixed == len(node.args) and not unconstructed_children:
            # Fully determined by earlier constraints; record and verify later.
            ref = self._figure_reference(fixed)
            self.built[node.id] = _Built(node, [f.location for f in fixed], ref)
            return True
        if pins and n_fixed:
            raise InfeasiblePlantError(
                f"{node.id!r} is both pinned and partially placed; overconstrained"
            )
        if n_fixed == 0:
            self._place_rigid(node, self._figure_local(node), pins[0] if pins else None)
            return True
        if n_fixed == 1:
            idx = next(i for i, f in enumerate(fixed) if f is not None)
            anchor_pose = fixed[idx]
            local = self._figure_local(node)
            set_name = self._member_orientation_sets(node)[idx]
            if anchor_pose.orientation is not None:
                rel = _sample_angle_set(node.spec.sets[set_name], self.d, self.rng)
                ref_theta = normalize_angle(anchor_pose.orientation - rel)
            else:
                ref_theta = self.rng.uniform(0.0, 360.0)
            rotation = ref_theta - 90.0
            world = [rotate_point(p, rotation) for p in local]
            dx = anchor_pose.location.x - world[idx].x
            dy = anchor_pose.location.y - world[idx].y
            world = [Point2(p.x + dx, p.y + dy) for p in world]
            self.built[node.id] = _Built(node, world, ref_theta)
            names = self._member_orientation_sets(node)
            for i, (arg, point, name) in enumerate(zip(node.args, world, names)):
                if i == idx:
                    continue
                rel = _sample_angle_set(node.spec.sets[name], self.d, self.rng)
                self._settle(arg, OrientedPoint(point, ref_theta + rel), node.id)
            return True
        raise InfeasiblePlantError(
            f"{node.id!r}: {n_fixed} members already placed; this planter only "
            "solves figures with at most one placed member"
        )

    def _figure_reference(self, fixed: list[OrientedPoint]) -> float:
        from .errors import DegenerateGeometryError
        from .geometry import direction_degrees

        try:
            return normalize_angle(
                direction_degrees(fixed[0].location, fixed[1].location) + 90.0
            )
        except DegenerateGeometryError as exc:
            raise InfeasiblePlantError(f"degenerate figure base: {exc}") from exc

    def _act_sector(self, node: ConstraintNode, pins: list[_Pin]) -> bool:
        a_arg, b_arg = node.args
        if pins:
            # Build the pair locally around the demanded reference point.
            pin = pins[0]
            a_theta = pin.orientation
            b_local, b_theta = self._sector_b(node, OrientedPoint(Point2(0.0, 0.0), a_theta))
            points = [Point2(0.0, 0.0), b_local]
            mode_point = self._local_mode_point(node, points, pin.mode, a_theta)
            dx, dy = pin.location.x - mode_point.x, pin.location.y - mode_point.y
            a_pose = OrientedPoint(Point2(dx, dy), a_theta)
            b_pose = OrientedPoint(Point2(b_local.x + dx, b_local.y + dy), b_theta)
        else:
            a_pose = self._member_pose(a_arg)
            if a_pose is None:
                if isinstance(a_arg, ObjectArg):
                    a_pose = self._anchor()
                    self.placed[a_arg.object_id] = a_pose
                else:
                    return False  # wait for the child relation to exist
            if a_pose.orientation is None:
                raise InfeasiblePlantError(
                    f"{node.id!r}: member A has no orientation to measure from"
                )
            existing_b = self._member_pose(b_arg)
            if existing_b is not None:
                # Shared member already placed elsewhere; verification judges it.
                b_pose = existing_b
            else:
                b_point, b_theta = self._sector_b(node, a_pose)
                b_pose = OrientedPoint(b_point, b_theta)
        self._settle(a_arg, a_pose, node.id)
        self._settle(b_arg, b_pose, node.id)
        self.built[node.id] = _Built(
            node, [a_pose.location, b_pose.location], a_pose.orientation
        )
        return True

    def _sector_b(self, node: ConstraintNode, a_pose: OrientedPoint) -> tuple[Point2, float]:
        sets = node.spec.sets
        v = _sample_set(sets["distance"], self.d, self.rng, self.scale)
        phi = _sample_angle_set(sets["orien_ab"], self.d, self.rng)
        beta = _sample_angle_set(sets["orien_b"], self.d, self.rng)
        if node.spec.kind == RelationKind.TRAPEZOIDAL_SECTION:
            vec = sets["orien_ab"]
            assert isinstance(vec, TrapezoidalSet)
            spread = math.cos(math.radians((phi - vec.core_midpoint() + 180.0) % 360.0 - 180.0))
            if spread <= 0.05:
                raise InfeasiblePlantError(
                    f"{node.id!r}: sampled direction nearly perpendicular to the "
                    "projection axis; cannot realize the projected distance"
                )
            r = v / spread
        else:
            r = v
        if r <= 1e-6:
            raise InfeasiblePlantError(f"{node.id!r}: sampled a non-positive separation")
        ux, uy = unit_vector(a_pose.orientation + phi)
        return (
            Point2(a_pose.location.x + r * ux, a_pose.location.y + r * uy),
            normalize_angle(a_pose.orientation + beta),
        )

    def _act_alignment(self, node: ConstraintNode, pins: list[_Pin]) -> bool:
        fixed = []
        for arg in node.args:
            if isinstance(arg, RelationArg) and arg.constraint_id not in self.built:
                return False  # alignments read their relation members
            fixed.append(self._member_pose(arg))
        sets = node.spec.sets
        n = len(node.args)
        if pins:
            if any(f is not None for f in fixed):
                raise InfeasiblePlantError(
                    f"{node.id!r} is pinned but has placed members; overconstrained"
                )
            pin = pins[0]
            rho = pin.orientation - 90.0
        else:
            anchor_index = next((i for i, f in enumerate(fixed) if f is not None), None)
            if anchor_index is None:
                start = self._anchor()
                rho = start.orientation - 90.0
                base_point, base_index = start.location, 0
            else:
                base_index = anchor_index
                base_point = fixed[anchor_index].location
                base_orient = fixed[anchor_index].orientation
                if base_orient is not None:
                    rel = _sample_angle_set(sets[f"orien_{anchor_index + 1}"], self.d, self.rng)
                    rho = base_orient - 90.0 - rel
                else:
                    rho = self.rng.uniform(0.0, 360.0)
        ux, uy = unit_vector(rho)
        steps = [
            _sample_set(sets[f"adjacent_{i}"], self.d, self.rng, self.scale)
            for i in range(1, n)
        ]
        if pins:
            base_point, base_index = Point2(0.0, 0.0), 0
        points: list[Point2 | None] = [None] * n
        points[base_index] = base_point
        for i in range(base_index + 1, n):
            prev = points[i - 1]
            points[i] = Point2(prev.x + steps[i - 1] * ux, prev.y + steps[i - 1] * uy)
        for i in range(base_index - 1, -1, -1):
            nxt = points[i + 1]
            points[i] = Point2(nxt.x - steps[i] * ux, nxt.y - steps[i] * uy)
        if pins:
            pin = pins[0]
            mode_point = self._local_mode_point(node, points, pin.mode, pin.orientation)
            dx, dy = pin.location.x - mode_point.x, pin.location.y - mode_point.y
            points = [Point2(p.x + dx, p.y + dy) for p in points]
        left_normal = rho + 90.0
        for i, (arg, point) in enumerate(zip(node.args, points), start=1):
            if fixed[i - 1] is not None:
                continue
            rel = _sample_angle_set(sets[f"orien_{i}"], self.d, self.rng)
            self._settle(arg, OrientedPoint(point, left_normal + rel), node.id)
        world = [
            f.location if f is not None else p for f, p in zip(fixed, points)
        ]
        self.built[node.id] = _Built(node, world, normalize_angle(left_normal))
        return True


def plant_instance(
    template: Template,
    distortion: float,
    rng: random.Random,
    region: tuple[float, float, float, float],
) -> dict[str, OrientedPoint]:
    """Construct one instance of the template; poses keyed by template object id."""
    return _Planter(template, distortion, rng, region).run()


def generate_situation(spec: GenerationSpec, seed: int) -> Situation:
    situation, _ = generate_situation_with_truth(spec, seed)
    return situation


def generate_situation_with_truth(
    spec: GenerationSpec, seed: int
) -> tuple[Situation, dict[str, str] | None]:
    """Generate a situation; also return the planted binding when there is one.

    Same spec and seed always produce the identical situation.  A planted
    instance is verified against its own template: distortion zero must
    score an overall proximity of one, any distortion must stay positive.
    """
    rng = random.Random(f"fgrmatch:{seed}")
    if not 0.0 <= spec.distortion <= 1.0:
        raise ValueError(f"distortion must be in [0, 1], got {spec.distortion}")

    entries: list[tuple[str | None, SituationObject]] = []
    if spec.template is not None:
        poses = plant_instance(spec.template, spec.distortion, rng, spec.region)
        for obj in spec.template.objects:
            pose = poses[obj.id]
            entries.append(
                (
                    obj.id,
                    SituationObject(
                        id=f"planted-{obj.id}",
                        location=pose.location,
                        orientation=pose.orientation,
                        attributes=dict(obj.attributes),
                    ),
                )
            )
        _verify_plant(spec.template, entries, spec.distortion)

    if spec.n < len(entries):
        raise ValueError(
            f"n = {spec.n} is smaller than the planted instance ({len(entries)} objects)"
        )
    xmin, ymin, xmax, ymax = spec.region
    for i in range(spec.n - len(entries)):
        attributes = {}
        if spec.clutter_types:
            attributes[spec.type_attribute] = rng.choice(list(spec.clutter_types))
        entries.append(
            (
                None,
                SituationObject(
                    id=f"clutter-{i}",
                    location=Point2(rng.uniform(xmin, xmax), rng.uniform(ymin, ymax)),
                    orientation=rng.uniform(0.0, 360.0),
                    attributes=attributes,
                ),
            )
        )

    rng.shuffle(entries)
    width = max(2, len(str(len(entries))))
    truth: dict[str, str] = {}
    objects = []
    for i, (tid, obj) in enumerate(entries, start=1):
        sid = f"o{i:0{width}d}"
        objects.append(
            SituationObject(sid, obj.location, obj.orientation, obj.attributes)
        )
        if tid is not None:
            truth[tid] = sid
    situation = Situation(objects, id=f"synthetic-{seed}")
    return situation, (truth or None)


def _verify_plant(
    template: Template,
    entries: list[tuple[str | None, SituationObject]],
    distortion: float,
) -> None:
    objects = [obj for _, obj in entries]
    mapping = {tid: obj.id for tid, obj in entries if tid is not None}
    engine = _Engine(template, Situation(objects, id="plant-verify"))
    result = engine.evaluate_mapping(mapping)
    if not isinstance(result, TemplateInstance):
        raise InfeasiblePlantError(
            f"planted instance scores zero at constraint {result.constraint_id!r}; "
            "the template's fuzzy sets are mutually inconsistent"
        )
    if distortion == 0.0 and result.overall < 1.0 - 1e-9:
        raise InfeasiblePlantError(
            f"zero-distortion plant scored {result.overall}; the template's "
            "core midpoints are mutually inconsistent"
        )
