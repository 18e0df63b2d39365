"""Template data model: attribute schema, typed objects, constraint DAG.

A template is a set of attributes with value ranges, a set of objects
whose non-spatial attributes may be pinned to required values, and a set
of constraints.  Each constraint applies one fuzzy geometric relation to
an ordered list of arguments; an argument is either an object or another
constraint (whose evaluated reference point stands in for it).  The
argument graph must be acyclic, so constraints form a DAG evaluated
bottom-up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

from .errors import TemplateValidationError
from .fuzzy import TrapezoidalSet, is_any
from .relations import (
    FIGURE_KINDS,
    REF_MODES,
    RelationKind,
    RelationSpec,
    SECTOR_KINDS,
)


@dataclass(frozen=True)
class AttributeSchema:
    """Named non-spatial attributes, each a finite enumeration of values.

    Location and orientation are built in and never listed here.
    """

    attributes: Mapping[str, tuple[str, ...]]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "attributes", {k: tuple(v) for k, v in self.attributes.items()}
        )

    def violations(self) -> list[str]:
        return [
            f"attribute {name!r} has an empty value range"
            for name, values in self.attributes.items()
            if not values
        ]


@dataclass(frozen=True)
class TemplateObject:
    """A template object with required attribute values; absent = wildcard."""

    id: str
    attributes: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "attributes", dict(self.attributes))


@dataclass(frozen=True)
class ObjectArg:
    object_id: str


@dataclass(frozen=True)
class RelationArg:
    constraint_id: str
    ref_mode: str | None = None  # None: use the child constraint's default


Arg = Union[ObjectArg, RelationArg]


@dataclass(frozen=True)
class ConstraintNode:
    id: str
    spec: RelationSpec
    args: tuple[Arg, ...]
    ref_mode: str = "com_args"

    def __post_init__(self) -> None:
        object.__setattr__(self, "args", tuple(self.args))

    def child_ids(self) -> list[str]:
        return [a.constraint_id for a in self.args if isinstance(a, RelationArg)]

    def object_ids(self) -> list[str]:
        return [a.object_id for a in self.args if isinstance(a, ObjectArg)]


class Template:
    """Immutable once validated; derived lookups are built on first use."""

    def __init__(
        self,
        schema: AttributeSchema,
        objects: Sequence[TemplateObject],
        constraints: Sequence[ConstraintNode],
        id: str = "template",
    ) -> None:
        self.id = id
        self.schema = schema
        self.objects = tuple(objects)
        self.constraints = tuple(constraints)
        self._derived: dict | None = None

    @property
    def objects_by_id(self) -> dict[str, TemplateObject]:
        return self._tables()["objects_by_id"]

    @property
    def constraints_by_id(self) -> dict[str, ConstraintNode]:
        return self._tables()["constraints_by_id"]

    def transitive_object_ids(self, constraint_id: str) -> tuple[str, ...]:
        """Objects used directly or through child constraints, deduplicated."""
        return self._tables()["transitive"][constraint_id]

    def root_ids(self) -> tuple[str, ...]:
        return self._tables()["roots"]

    def _tables(self) -> dict:
        if self._derived is None:
            objects_by_id = {o.id: o for o in self.objects}
            constraints_by_id = {c.id: c for c in self.constraints}
            order = topological_order(self)
            transitive: dict[str, tuple[str, ...]] = {}
            for cid in order:
                node = constraints_by_id[cid]
                seen: dict[str, None] = {}
                for arg in node.args:
                    if isinstance(arg, ObjectArg):
                        seen.setdefault(arg.object_id)
                    else:
                        for oid in transitive[arg.constraint_id]:
                            seen.setdefault(oid)
                transitive[cid] = tuple(seen)
            referenced = {cid for c in self.constraints for cid in c.child_ids()}
            roots = tuple(c.id for c in self.constraints if c.id not in referenced)
            self._derived = {
                "objects_by_id": objects_by_id,
                "constraints_by_id": constraints_by_id,
                "transitive": transitive,
                "roots": roots,
            }
        return self._derived


def validate_template(t: Template) -> list[str]:
    """All structural violations, empty when the template is usable.

    A template that passes here can be fed to recognition without
    contract violations.
    """
    problems = list(t.schema.violations())

    seen_objects: set[str] = set()
    for obj in t.objects:
        if obj.id in seen_objects:
            problems.append(f"duplicate object id {obj.id!r}")
        seen_objects.add(obj.id)
        for name, value in obj.attributes.items():
            if name not in t.schema.attributes:
                problems.append(f"object {obj.id!r}: unknown attribute {name!r}")
            elif value not in t.schema.attributes[name]:
                problems.append(
                    f"object {obj.id!r}: value {value!r} outside the range of {name!r}"
                )

    if not t.constraints:
        problems.append("template has no constraints")

    constraint_ids: set[str] = set()
    for node in t.constraints:
        if node.id in constraint_ids:
            problems.append(f"duplicate constraint id {node.id!r}")
        constraint_ids.add(node.id)

    referenced_objects: set[str] = set()
    for node in t.constraints:
        prefix = f"constraint {node.id!r}"
        for v in node.spec.violations():
            problems.append(f"{prefix}: {v}")
        if len(node.args) != node.spec.arity:
            problems.append(
                f"{prefix}: {len(node.args)} arguments for declared arity {node.spec.arity}"
            )
        if node.ref_mode not in REF_MODES:
            problems.append(f"{prefix}: unknown reference mode {node.ref_mode!r}")
        for arg in node.args:
            if isinstance(arg, ObjectArg):
                referenced_objects.add(arg.object_id)
                if arg.object_id not in {o.id for o in t.objects}:
                    problems.append(f"{prefix}: unknown object {arg.object_id!r}")
            else:
                if arg.constraint_id not in {c.id for c in t.constraints}:
                    problems.append(f"{prefix}: unknown constraint {arg.constraint_id!r}")
                if arg.ref_mode is not None and arg.ref_mode not in REF_MODES:
                    problems.append(f"{prefix}: unknown reference mode {arg.ref_mode!r}")

    for obj in t.objects:
        if obj.id not in referenced_objects:
            problems.append(
                f"object {obj.id!r} is not referenced by any constraint "
                "(it would be an unconstrained free variable)"
            )

    cycle = _find_cycle(t)
    if cycle:
        problems.append("constraint cycle: " + " -> ".join(cycle))

    return problems


def require_valid(t: Template) -> None:
    problems = validate_template(t)
    if problems:
        raise TemplateValidationError(
            f"template {t.id!r} is invalid:\n  " + "\n  ".join(problems)
        )


def _find_cycle(t: Template) -> list[str] | None:
    by_id = {c.id: c for c in t.constraints}
    color: dict[str, int] = {}  # 0 in progress, 1 done
    stack: list[str] = []

    def visit(cid: str) -> list[str] | None:
        color[cid] = 0
        stack.append(cid)
        for child in by_id[cid].child_ids():
            if child not in by_id:
                continue
            state = color.get(child)
            if state == 0:
                return stack[stack.index(child):] + [child]
            if state is None:
                found = visit(child)
                if found:
                    return found
        stack.pop()
        color[cid] = 1
        return None

    for c in t.constraints:
        if c.id not in color:
            found = visit(c.id)
            if found:
                return found
    return None


def topological_order(t: Template) -> list[str]:
    """Constraint ids, every node after everything it references.

    Deterministic: among ready nodes, declaration order wins.
    """
    nodes = list(t.constraints)
    ids = {c.id for c in nodes}
    remaining_children = {
        c.id: {child for child in c.child_ids() if child in ids} for c in nodes
    }
    done: set[str] = set()
    order: list[str] = []
    while len(order) < len(nodes):
        progressed = False
        for c in nodes:
            if c.id in done:
                continue
            if remaining_children[c.id] <= done:
                order.append(c.id)
                done.add(c.id)
                progressed = True
        if not progressed:
            raise ValueError("constraint graph has a cycle; validate the template first")
    return order


def max_span_bound(node: ConstraintNode) -> float:
    """Sound upper bound on pairwise member distances of matching tuples.

    Derived from fuzzy-set supports; math.inf when the sets give no bound.
    Any member tuple scoring positive proximity has all pairwise member
    distances within this bound, which is what makes span-based candidate
    filtering transparent to the results.
    """
    kind = node.spec.kind
    sets = node.spec.sets

    if kind == RelationKind.RING_SECTOR:
        dist = sets.get("distance")
        if not isinstance(dist, TrapezoidalSet):
            return math.inf
        return max(dist.d, 0.0)

    if kind == RelationKind.TRAPEZOIDAL_SECTION:
        dist, vec = sets.get("distance"), sets.get("orien_ab")
        if not isinstance(dist, TrapezoidalSet) or not isinstance(vec, TrapezoidalSet):
            return math.inf
        mid = vec.core_midpoint()
        deviation = max(
            abs((vec.a - mid + 180.0) % 360.0 - 180.0),
            abs((vec.d - mid + 180.0) % 360.0 - 180.0),
        )
        if deviation >= 90.0:
            return math.inf
        return max(abs(dist.a), abs(dist.d)) / math.cos(math.radians(deviation))

    if kind == RelationKind.ALIGNMENT:
        total = 0.0
        n = node.spec.arity
        for i in range(1, n):
            s = sets.get(f"adjacent_{i}")
            if not isinstance(s, TrapezoidalSet):
                return math.inf
            total += max(abs(s.a), abs(s.d))
        if n == 2:
            # Two points lie exactly on their fitted line.
            return total
        # Perpendicular scatter: the principal axis only guarantees that
        # perpendicular variance does not exceed the along-line variance.
        return total * math.sqrt(1.0 + n / 2.0)

    if kind in FIGURE_KINDS:
        if kind == RelationKind.ISOSCELES_TRIANGLE:
            # Height grades only the apex's perpendicular offset; the apex
            # can slide arbitrarily far along the base line with positive
            # shape proximity, so the supports bound nothing.
            return math.inf
        if kind == RelationKind.EQUILATERAL_TRIANGLE:
            side = sets.get("side")
            if not isinstance(side, TrapezoidalSet):
                return math.inf
            return 2.0 * (max(side.d, 0.0) + max(side.d, 0.0))
        base, height = sets.get("base"), sets.get("height")
        if not isinstance(base, TrapezoidalSet) or not isinstance(height, TrapezoidalSet):
            return math.inf
        return 2.0 * (max(base.d, 0.0) + max(height.d, 0.0))

    raise ValueError(f"unknown relation kind {kind!r}")
