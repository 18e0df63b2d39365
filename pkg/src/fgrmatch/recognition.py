"""Template recognition: bottom-up matching of the constraint DAG.

The search binds template objects to situation objects constraint by
constraint, evaluating each relation as soon as its members are known and
cutting any branch whose running minimum proximity falls below the
threshold (or hits zero).  Completed bindings are re-scored canonically by
:func:`evaluate_assignment`, which also resolves undefined orientations.

Undefined situation orientations never weaken the cuts: while searching,
any measure that depends on an orientation not yet known counts as 1.0
(an upper bound, since min-aggregation is monotone), and the canonical
scoring then hypothesizes each unknown orientation by maximizing the
minimum of the memberships that read it.  The brute-force oracle shares
the canonical scorer, so search results equal exhaustive enumeration
exactly.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

from .errors import TemplateValidationError
from .geometry import OrientedPoint, Point2
from .relations import (
    Member,
    RelationInstance,
    evaluate_members,
    maximize_orientation,
    reference_point,
)
from .spatial_index import KnnTable, build_knn_table, span_filter
from .template import (
    ConstraintNode,
    ObjectArg,
    RelationArg,
    Template,
    TemplateObject,
    max_span_bound,
    require_valid,
    topological_order,
)


@dataclass(frozen=True)
class SituationObject:
    """An observed object: mandatory location, optional orientation and attributes."""

    id: str
    location: Point2
    orientation: float | None = None
    attributes: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "attributes", dict(self.attributes))
        if self.orientation is not None:
            object.__setattr__(
                self, "orientation", OrientedPoint(self.location, self.orientation).orientation
            )


class Situation:
    def __init__(self, objects: Sequence[SituationObject], id: str = "situation") -> None:
        self.id = id
        self.objects = tuple(objects)
        self.by_id = {o.id: o for o in self.objects}
        if len(self.by_id) != len(self.objects):
            raise ValueError("situation object ids must be unique")


@dataclass(frozen=True)
class TemplateInstance:
    """A recognized pairing of template objects to situation objects."""

    mapping: Mapping[str, str]
    per_constraint: Mapping[str, float]
    overall: float
    assignments: Mapping[str, Mapping[str, object]]
    components: Mapping[str, Mapping[str, float]]
    skeleton: Mapping[str, tuple[tuple[float, float], ...]]

    def mapping_key(self) -> tuple[str, ...]:
        return tuple(self.mapping[tid] for tid in sorted(self.mapping))

    def min_constraint(self) -> str:
        return min(self.per_constraint, key=lambda cid: (self.per_constraint[cid],))


@dataclass(frozen=True)
class ZeroProximityReport:
    """A full binding that scored zero somewhere; names the first failure."""

    constraint_id: str
    mapping: Mapping[str, str]
    per_constraint: Mapping[str, float]


@dataclass
class SearchStats:
    tuples_evaluated: int = 0
    cuts: int = 0
    span_rejected: int = 0
    completions: int = 0
    instances: int = 0
    wall_seconds: float = 0.0


def type_compatible(tobj: TemplateObject, sobj: SituationObject) -> bool:
    """Every situation-defined attribute must equal the template requirement."""
    for name, required in tobj.attributes.items():
        observed = sobj.attributes.get(name)
        if observed is not None and observed != required:
            return False
    return True


def attribute_assignments(tobj: TemplateObject, sobj: SituationObject) -> dict[str, str]:
    """Required values the situation object leaves undefined."""
    return {
        name: required
        for name, required in tobj.attributes.items()
        if name not in sobj.attributes
    }


def candidate_stream(
    template: Template,
    situation: Situation,
    constraint: ConstraintNode,
    partial_mapping: Mapping[str, str],
    *,
    knn_table: KnnTable | None = None,
    span_bound: float = math.inf,
    stats: SearchStats | None = None,
) -> Iterator[tuple[str, ...]]:
    """Candidate tuples for the constraint's unbound object slots.

    Deterministic order: the lexicographic product of the per-slot
    candidate lists, each sorted ascending by situation object id.  Tuples
    are distinct, type-compatible, and avoid objects already used by the
    partial mapping.  With a KNN table and a finite bound, tuples whose
    internal span exceeds the bound are skipped.
    """
    used = set(partial_mapping.values())
    slots: list[str] = []
    for arg in constraint.args:
        if isinstance(arg, ObjectArg) and arg.object_id not in partial_mapping:
            if arg.object_id not in slots:
                slots.append(arg.object_id)
    if not slots:
        yield ()
        return
    per_slot = []
    for tid in slots:
        tobj = template.objects_by_id[tid]
        per_slot.append(
            [
                s.id
                for s in sorted(situation.objects, key=lambda o: o.id)
                if s.id not in used and type_compatible(tobj, s)
            ]
        )
    for tup in itertools.product(*per_slot):
        if len(set(tup)) != len(tup):
            continue
        if knn_table is not None and not span_filter(knn_table, tup, span_bound):
            if stats is not None:
                stats.span_rejected += 1
            continue
        yield tup


class _Engine:
    """Shared evaluation machinery for search, canonical scoring and the oracle."""

    def __init__(self, template: Template, situation: Situation) -> None:
        require_valid(template)
        self.template = template
        self.situation = situation
        self.topo = topological_order(template)
        self.topo_index = {cid: i for i, cid in enumerate(self.topo)}
        self.nodes = template.constraints_by_id
        self._check_situation_schema()
        self.observed = {o.id: o.orientation for o in situation.objects}

    def _check_situation_schema(self) -> None:
        schema = self.template.schema.attributes
        for obj in self.situation.objects:
            for name, value in obj.attributes.items():
                if name in schema and value not in schema[name]:
                    raise ValueError(
                        f"situation object {obj.id!r}: value {value!r} outside the "
                        f"template range of attribute {name!r}"
                    )

    # -- member resolution -------------------------------------------------

    def _resolve_members(
        self,
        node: ConstraintNode,
        mapping: Mapping[str, str],
        orientations: Mapping[str, float | None],
        insts: Mapping[str, RelationInstance],
    ) -> list[Member]:
        members = []
        for arg in node.args:
            if isinstance(arg, ObjectArg):
                sid = mapping[arg.object_id]
                sobj = self.situation.by_id[sid]
                theta = orientations.get(sid)
                members.append(
                    Member(
                        sobj.location,
                        theta,
                        orientation_observed=sobj.orientation is not None,
                        orient_deps=frozenset() if theta is not None else frozenset({sid}),
                    )
                )
            else:
                child = insts[arg.constraint_id]
                child_node = self.nodes[arg.constraint_id]
                mode = arg.ref_mode or child_node.ref_mode
                object_locations = [
                    self.situation.by_id[mapping[oid]].location
                    for oid in self.template.transitive_object_ids(arg.constraint_id)
                ]
                rp = reference_point(
                    child.kind, mode, child.member_points, object_locations,
                    child.reference_orientation,
                )
                if rp is None:
                    loc = None
                    loc_deps = child.reference_deps | child.geometry_deps
                else:
                    loc, loc_deps = rp.location, frozenset()
                members.append(
                    Member(
                        loc,
                        child.reference_orientation,
                        orientation_observed=child.reference_observed,
                        loc_deps=loc_deps,
                        orient_deps=child.reference_deps,
                    )
                )
        return members

    def evaluate_constraint(
        self,
        node: ConstraintNode,
        mapping: Mapping[str, str],
        orientations: Mapping[str, float | None],
        insts: Mapping[str, RelationInstance],
    ) -> RelationInstance:
        return evaluate_members(node.spec, self._resolve_members(node, mapping, orientations, insts))

    def evaluate_all(
        self,
        mapping: Mapping[str, str],
        orientations: Mapping[str, float | None],
    ) -> dict[str, RelationInstance]:
        insts: dict[str, RelationInstance] = {}
        for cid in self.topo:
            insts[cid] = self.evaluate_constraint(self.nodes[cid], mapping, orientations, insts)
        return insts

    # -- canonical scoring of a full binding --------------------------------

    def check_mapping(self, mapping: Mapping[str, str]) -> None:
        missing = [o.id for o in self.template.objects if o.id not in mapping]
        if missing:
            raise ValueError(f"mapping leaves template objects unbound: {missing}")
        values = list(mapping.values())
        if len(set(values)) != len(values):
            raise ValueError("mapping is not injective")
        for tid, sid in mapping.items():
            if sid not in self.situation.by_id:
                raise ValueError(f"mapping targets unknown situation object {sid!r}")
            if not type_compatible(self.template.objects_by_id[tid], self.situation.by_id[sid]):
                raise ValueError(
                    f"situation object {sid!r} is not type-compatible with template object {tid!r}"
                )

    def evaluate_mapping(self, mapping: Mapping[str, str]) -> TemplateInstance | ZeroProximityReport:
        self.check_mapping(mapping)
        base = {sid: self.observed[sid] for sid in mapping.values()}
        first = self.evaluate_all(mapping, base)

        # Fast path: a determined zero before any undetermined measure is
        # definitive regardless of how unknown orientations get resolved.
        first_zero = None
        blocked = False
        for cid in self.topo:
            inst = first[cid]
            if inst.proximity <= 0.0:
                first_zero = cid
                break
            if not inst.determined or inst.reference_deps or inst.geometry_deps:
                blocked = True
                break
        if first_zero is not None and not blocked:
            per = {cid: first[cid].proximity for cid in self.topo}
            return ZeroProximityReport(first_zero, dict(mapping), per)

        resolved = self._hypothesize(mapping, base, first)
        if resolved:
            final_orients = dict(base)
            final_orients.update(resolved)
            final = self.evaluate_all(mapping, final_orients)
        else:
            final = first

        per: dict[str, float] = {}
        for cid in self.topo:
            inst = final[cid]
            if not inst.determined:
                raise AssertionError(f"constraint {cid} left undetermined after resolution")
            per[cid] = inst.proximity
        for cid in self.topo:
            if per[cid] <= 0.0:
                return ZeroProximityReport(cid, dict(mapping), per)

        assignments: dict[str, dict[str, object]] = {}
        for tid, sid in mapping.items():
            assigned = attribute_assignments(self.template.objects_by_id[tid], self.situation.by_id[sid])
            if assigned:
                assignments.setdefault(sid, {}).update(assigned)
        for sid, theta in resolved.items():
            assignments.setdefault(sid, {})["orientation"] = theta

        return TemplateInstance(
            mapping=dict(mapping),
            per_constraint=per,
            overall=min(per.values()),
            assignments=assignments,
            components={
                cid: {c.name: c.value for c in final[cid].components} for cid in self.topo
            },
            skeleton={
                cid: tuple((p.x, p.y) for p in final[cid].member_points)
                for cid in self.topo
            },
        )

    def _hypothesize(
        self,
        mapping: Mapping[str, str],
        base: Mapping[str, float | None],
        first: Mapping[str, RelationInstance],
    ) -> dict[str, float]:
        """Assign orientations to the unknowns the evaluation depends on.

        Each unknown is resolved in first-appearance order by maximizing
        the minimum of the measures that read it, restricted to measures
        whose other unknowns are already resolved; couplings therefore
        resolve reference-providers first.  An unconstrained unknown that
        only feeds reference orientations defaults to the grid origin.
        """
        unknown_order: list[str] = []
        relevant: dict[str, set[str]] = {}  # unknown -> constraint ids to re-evaluate
        dep_index: dict[str, list[tuple[str, str, frozenset[str]]]] = {}

        def note(sid: str) -> None:
            if sid not in relevant:
                relevant[sid] = set()
                dep_index[sid] = []
                unknown_order.append(sid)

        for cid in self.topo:
            inst = first[cid]
            for c in inst.components:
                for sid in sorted(c.deps):
                    note(sid)
                    relevant[sid].add(cid)
                    dep_index[sid].append((cid, c.name, c.deps))
            for sid in sorted(inst.reference_deps | inst.geometry_deps):
                note(sid)
                relevant[sid].add(cid)

        if not unknown_order:
            return {}

        resolved: dict[str, float] = {}
        current = dict(first)

        for sid in unknown_order:
            allowed = set(resolved) | {sid}
            probe_cids = [cid for cid in self.topo if cid in relevant[sid]]
            targets = [
                (cid, name)
                for cid, name, deps in dep_index[sid]
                if deps <= allowed
            ]

            def objective(theta: float, _sid: str = sid) -> float:
                trial = dict(base)
                trial.update(resolved)
                trial[_sid] = theta
                probe = dict(current)
                for cid in probe_cids:
                    probe[cid] = self.evaluate_constraint(self.nodes[cid], mapping, trial, probe)
                values = []
                for cid, name in targets:
                    inst = probe[cid]
                    if inst.degenerate:
                        values.append(0.0)
                        continue
                    for c in inst.components:
                        if c.name == name and c.value is not None:
                            values.append(c.value)
                            break
                    else:
                        # Geometry opened up under this probe: the whole
                        # constraint hangs on this unknown.
                        values.extend(c.value for c in inst.components if c.value is not None)
                return min(values) if values else 1.0

            theta, _ = maximize_orientation(objective)
            resolved[sid] = theta
            trial = dict(base)
            trial.update(resolved)
            current = self.evaluate_all(mapping, trial)

        return resolved


def evaluate_assignment(
    template: Template, situation: Situation, mapping: Mapping[str, str]
) -> TemplateInstance | ZeroProximityReport:
    """Score one complete binding; the canonical scorer shared with the oracle."""
    return _Engine(template, situation).evaluate_mapping(mapping)


def recognize(
    template: Template,
    situation: Situation,
    threshold: float,
    *,
    use_span_filter: bool = False,
    knn_k: int = 8,
    max_instances: int | None = None,
) -> list[TemplateInstance]:
    instances, _ = recognize_with_stats(
        template,
        situation,
        threshold,
        use_span_filter=use_span_filter,
        knn_k=knn_k,
        max_instances=max_instances,
    )
    return instances


def recognize_with_stats(
    template: Template,
    situation: Situation,
    threshold: float,
    *,
    use_span_filter: bool = False,
    knn_k: int = 8,
    max_instances: int | None = None,
) -> tuple[list[TemplateInstance], SearchStats]:
    """Find every template instance with overall proximity >= threshold (> 0).

    Results are ordered by descending overall proximity, ties broken
    lexicographically by the binding.  Output is deterministic and, with
    the span filter on, identical to the unfiltered run.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must be in [0, 1], got {threshold}")
    engine = _Engine(template, situation)
    stats = SearchStats()
    started = time.perf_counter()

    table = build_knn_table(situation, knn_k) if use_span_filter else None
    bounds = (
        {c.id: max_span_bound(c) for c in template.constraints} if use_span_filter else {}
    )

    found: list[TemplateInstance] = []
    mapping: dict[str, str] = {}
    insts: dict[str, RelationInstance] = {}
    done: set[str] = set()

    def recurse() -> None:
        if len(done) == len(engine.topo):
            stats.completions += 1
            result = engine.evaluate_mapping(mapping)
            if (
                isinstance(result, TemplateInstance)
                and result.overall >= threshold
                and result.overall > 0.0
            ):
                found.append(result)
            return
        ready = [
            cid
            for cid in engine.topo
            if cid not in done and all(ch in done for ch in engine.nodes[cid].child_ids())
        ]
        cid = min(
            ready,
            key=lambda c: (
                sum(
                    1
                    for arg in engine.nodes[c].args
                    if isinstance(arg, ObjectArg) and arg.object_id not in mapping
                ),
                engine.topo_index[c],
            ),
        )
        node = engine.nodes[cid]
        slots = []
        for arg in node.args:
            if isinstance(arg, ObjectArg) and arg.object_id not in mapping and arg.object_id not in slots:
                slots.append(arg.object_id)
        for tup in candidate_stream(
            template,
            situation,
            node,
            mapping,
            knn_table=table,
            span_bound=bounds.get(cid, math.inf),
            stats=stats,
        ):
            for tid, sid in zip(slots, tup):
                mapping[tid] = sid
            inst = engine.evaluate_constraint(node, mapping, engine.observed, insts)
            stats.tuples_evaluated += 1
            if inst.proximity >= threshold and inst.proximity > 0.0:
                insts[cid] = inst
                done.add(cid)
                recurse()
                done.discard(cid)
                del insts[cid]
            else:
                stats.cuts += 1
            for tid in slots:
                del mapping[tid]

    recurse()

    found.sort(key=lambda inst: (-inst.overall, inst.mapping_key()))
    if max_instances is not None and len(found) > max_instances:
        cutoff = found[max_instances - 1].overall
        found = [inst for inst in found if inst.overall >= cutoff]
    stats.instances = len(found)
    stats.wall_seconds = time.perf_counter() - started
    return found, stats
