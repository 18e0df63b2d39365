"""JSON interchange for templates, situations and match reports.

All files carry a `conventions` header (angles in degrees, mathematical
convention, distances in meters).  Fuzzy sets serialize as the four
trapezoid corners plus a domain tag, or the literal string "any".  Floats
are written at 12 significant digits with stable field ordering so that
identical inputs always produce identical files (timing statistics aside).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

from .errors import FormatError, TemplateValidationError
from .fuzzy import ANY, AnySet, FuzzySet, TrapezoidalSet
from .geometry import Point2
from .recognition import SearchStats, Situation, SituationObject, TemplateInstance
from .relations import RelationSpec
from .template import (
    AttributeSchema,
    ConstraintNode,
    ObjectArg,
    RelationArg,
    Template,
    TemplateObject,
    validate_template,
)

CONVENTIONS = {
    "angle_unit": "degrees",
    "angle_zero": "+x axis",
    "angle_positive": "counterclockwise",
    "distance_unit": "meters",
}

TEMPLATE_FORMAT = "fgrmatch/template"
SITUATION_FORMAT = "fgrmatch/situation"
REPORT_FORMAT = "fgrmatch/report"


def round_sig(x: float, digits: int = 12) -> float:
    return float(f"{float(x):.{digits}g}")


def _round_tree(value: Any) -> Any:
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, float):
        return round_sig(value)
    if isinstance(value, dict):
        return {k: _round_tree(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round_tree(v) for v in value]
    return value


def _write_json(payload: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(_round_tree(payload), indent=2) + "\n")


def _read_json(path: str | Path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise FormatError(f"{path}: expected a JSON object at the top level")
    return data


def _expect(data: Mapping, key: str, context: str):
    if key not in data:
        raise FormatError(f"{context}: missing field {key!r}")
    return data[key]


# -- fuzzy sets --------------------------------------------------------------

def fuzzy_set_to_json(s: FuzzySet):
    if isinstance(s, AnySet):
        return "any"
    return {
        "trapezoid": [s.a, s.b, s.c, s.d],
        "domain": "circular" if s.circular else "linear",
    }


def fuzzy_set_from_json(data, context: str) -> FuzzySet:
    if data == "any":
        return ANY
    if not isinstance(data, Mapping):
        raise FormatError(f"{context}: expected a trapezoid object or \"any\"")
    corners = _expect(data, "trapezoid", context)
    domain = _expect(data, "domain", context)
    if domain not in ("linear", "circular"):
        raise FormatError(f"{context}: domain must be \"linear\" or \"circular\"")
    if not (isinstance(corners, Sequence) and len(corners) == 4):
        raise FormatError(f"{context}: trapezoid needs exactly four corners")
    try:
        return TrapezoidalSet(*[float(v) for v in corners], circular=domain == "circular")
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{context}: {exc}") from exc


# -- templates ---------------------------------------------------------------

def template_to_json(t: Template) -> dict:
    constraints = []
    for node in t.constraints:
        args = []
        for arg in node.args:
            if isinstance(arg, ObjectArg):
                args.append({"object": arg.object_id})
            elif arg.ref_mode is None:
                args.append({"relation": arg.constraint_id})
            else:
                args.append({"relation": arg.constraint_id, "ref": arg.ref_mode})
        constraints.append(
            {
                "id": node.id,
                "kind": node.spec.kind.value,
                "args": args,
                "ref": node.ref_mode,
                "sets": {name: fuzzy_set_to_json(s) for name, s in node.spec.sets.items()},
            }
        )
    return {
        "format": TEMPLATE_FORMAT,
        "version": 1,
        "id": t.id,
        "conventions": CONVENTIONS,
        "schema": {name: list(values) for name, values in t.schema.attributes.items()},
        "objects": [
            {"id": o.id, "attributes": dict(o.attributes)} for o in t.objects
        ],
        "constraints": constraints,
    }


def template_from_json(data: Mapping, source: str = "template") -> Template:
    if data.get("format") not in (None, TEMPLATE_FORMAT):
        raise FormatError(f"{source}: not a template file (format={data.get('format')!r})")
    schema = AttributeSchema(
        {
            name: tuple(str(v) for v in values)
            for name, values in _expect(data, "schema", source).items()
        }
    )
    objects = []
    for i, entry in enumerate(_expect(data, "objects", source)):
        ctx = f"{source}: objects[{i}]"
        objects.append(
            TemplateObject(
                str(_expect(entry, "id", ctx)),
                {str(k): str(v) for k, v in entry.get("attributes", {}).items()},
            )
        )
    constraints = []
    for i, entry in enumerate(_expect(data, "constraints", source)):
        ctx = f"{source}: constraints[{i}]"
        cid = str(_expect(entry, "id", ctx))
        kind = str(_expect(entry, "kind", ctx))
        raw_args = _expect(entry, "args", ctx)
        args: list = []
        for j, a in enumerate(raw_args):
            actx = f"{ctx}.args[{j}]"
            if not isinstance(a, Mapping):
                raise FormatError(f"{actx}: expected an object or relation reference")
            if "object" in a:
                args.append(ObjectArg(str(a["object"])))
            elif "relation" in a:
                mode = a.get("ref")
                args.append(RelationArg(str(a["relation"]), None if mode is None else str(mode)))
            else:
                raise FormatError(f"{actx}: needs an \"object\" or \"relation\" key")
        sets = {
            str(name): fuzzy_set_from_json(s, f"{ctx}.sets.{name}")
            for name, s in _expect(entry, "sets", ctx).items()
        }
        try:
            spec = RelationSpec(kind=kind, arity=len(args), sets=sets)
        except ValueError as exc:
            raise FormatError(f"{ctx}: {exc}") from exc
        constraints.append(
            ConstraintNode(
                id=cid, spec=spec, args=tuple(args), ref_mode=str(entry.get("ref", "com_args"))
            )
        )
    return Template(
        schema=schema,
        objects=objects,
        constraints=constraints,
        id=str(data.get("id", Path(source).stem)),
    )


def load_template(path: str | Path) -> Template:
    t = template_from_json(_read_json(path), str(path))
    problems = validate_template(t)
    if problems:
        raise TemplateValidationError(
            f"{path}: template is invalid:\n  " + "\n  ".join(problems)
        )
    return t


def save_template(t: Template, path: str | Path) -> None:
    _write_json(template_to_json(t), path)


# -- situations ---------------------------------------------------------------

def situation_to_json(s: Situation) -> dict:
    objects = []
    for o in s.objects:
        entry: dict[str, Any] = {"id": o.id, "location": [o.location.x, o.location.y]}
        if o.orientation is not None:
            entry["orientation"] = o.orientation
        if o.attributes:
            entry["attributes"] = dict(o.attributes)
        objects.append(entry)
    return {
        "format": SITUATION_FORMAT,
        "version": 1,
        "id": s.id,
        "conventions": CONVENTIONS,
        "objects": objects,
    }


def situation_from_json(data: Mapping, source: str = "situation") -> Situation:
    if data.get("format") not in (None, SITUATION_FORMAT):
        raise FormatError(f"{source}: not a situation file (format={data.get('format')!r})")
    objects = []
    for i, entry in enumerate(_expect(data, "objects", source)):
        ctx = f"{source}: objects[{i}]"
        loc = _expect(entry, "location", ctx)
        if not (isinstance(loc, Sequence) and len(loc) == 2):
            raise FormatError(f"{ctx}: location must be [x, y]")
        orientation = entry.get("orientation")
        try:
            objects.append(
                SituationObject(
                    id=str(_expect(entry, "id", ctx)),
                    location=Point2(float(loc[0]), float(loc[1])),
                    orientation=None if orientation is None else float(orientation),
                    attributes={str(k): str(v) for k, v in entry.get("attributes", {}).items()},
                )
            )
        except (TypeError, ValueError) as exc:
            raise FormatError(f"{ctx}: {exc}") from exc
    try:
        return Situation(objects, id=str(data.get("id", Path(source).stem)))
    except ValueError as exc:
        raise FormatError(f"{source}: {exc}") from exc


def load_situation(path: str | Path) -> Situation:
    return situation_from_json(_read_json(path), str(path))


def save_situation(s: Situation, path: str | Path) -> None:
    _write_json(situation_to_json(s), path)


# -- match reports -------------------------------------------------------------

@dataclass(frozen=True)
class ReportInstance:
    mapping: Mapping[str, str]
    overall: float
    min_constraint: str
    per_constraint: Mapping[str, float]
    components: Mapping[str, Mapping[str, float]]
    assignments: Mapping[str, Mapping[str, Any]]
    skeleton: Mapping[str, tuple[tuple[float, float], ...]]


@dataclass(frozen=True)
class MatchReport:
    template_id: str
    situation_id: str
    threshold: float
    options: Mapping[str, Any]
    statistics: Mapping[str, Any]
    instances: tuple[ReportInstance, ...]
    conventions: Mapping[str, str] = field(default_factory=lambda: dict(CONVENTIONS))


def build_report(
    template: Template,
    situation: Situation,
    threshold: float,
    instances: Sequence[TemplateInstance],
    stats: SearchStats | None = None,
    *,
    options: Mapping[str, Any] | None = None,
) -> MatchReport:
    """Freeze recognition output into its serialized form (12 significant digits)."""
    report_instances = []
    for inst in instances:
        report_instances.append(
            ReportInstance(
                mapping=dict(inst.mapping),
                overall=round_sig(inst.overall),
                min_constraint=inst.min_constraint(),
                per_constraint={k: round_sig(v) for k, v in inst.per_constraint.items()},
                components={
                    cid: {name: round_sig(v) for name, v in comps.items()}
                    for cid, comps in inst.components.items()
                },
                assignments={
                    sid: {
                        k: round_sig(v) if isinstance(v, float) else v
                        for k, v in vals.items()
                    }
                    for sid, vals in inst.assignments.items()
                },
                skeleton={
                    cid: tuple((round_sig(x), round_sig(y)) for x, y in points)
                    for cid, points in inst.skeleton.items()
                },
            )
        )
    statistics: dict[str, Any] = {}
    if stats is not None:
        statistics = {
            "tuples_evaluated": stats.tuples_evaluated,
            "cuts": stats.cuts,
            "span_rejected": stats.span_rejected,
            "instances": stats.instances,
            "wall_seconds": round_sig(stats.wall_seconds),
        }
    return MatchReport(
        template_id=template.id,
        situation_id=situation.id,
        threshold=round_sig(threshold),
        options=dict(options or {}),
        statistics=statistics,
        instances=tuple(report_instances),
    )


def report_to_json(report: MatchReport) -> dict:
    return {
        "format": REPORT_FORMAT,
        "version": 1,
        "conventions": dict(report.conventions),
        "template": report.template_id,
        "situation": report.situation_id,
        "threshold": report.threshold,
        "options": dict(report.options),
        "statistics": dict(report.statistics),
        "instances": [
            {
                "mapping": dict(inst.mapping),
                "overall": inst.overall,
                "min_constraint": inst.min_constraint,
                "per_constraint": dict(inst.per_constraint),
                "components": {k: dict(v) for k, v in inst.components.items()},
                "assignments": {k: dict(v) for k, v in inst.assignments.items()},
                "skeleton": {k: [list(p) for p in v] for k, v in inst.skeleton.items()},
            }
            for inst in report.instances
        ],
    }


def report_from_json(data: Mapping, source: str = "report") -> MatchReport:
    if data.get("format") not in (None, REPORT_FORMAT):
        raise FormatError(f"{source}: not a report file (format={data.get('format')!r})")
    instances = []
    for i, entry in enumerate(data.get("instances", [])):
        ctx = f"{source}: instances[{i}]"
        instances.append(
            ReportInstance(
                mapping={str(k): str(v) for k, v in _expect(entry, "mapping", ctx).items()},
                overall=float(_expect(entry, "overall", ctx)),
                min_constraint=str(_expect(entry, "min_constraint", ctx)),
                per_constraint={
                    str(k): float(v) for k, v in _expect(entry, "per_constraint", ctx).items()
                },
                components={
                    str(cid): {str(n): float(v) for n, v in comps.items()}
                    for cid, comps in entry.get("components", {}).items()
                },
                assignments={
                    str(sid): dict(vals) for sid, vals in entry.get("assignments", {}).items()
                },
                skeleton={
                    str(cid): tuple((float(x), float(y)) for x, y in points)
                    for cid, points in entry.get("skeleton", {}).items()
                },
            )
        )
    return MatchReport(
        template_id=str(data.get("template", "")),
        situation_id=str(data.get("situation", "")),
        threshold=float(data.get("threshold", 0.0)),
        options=dict(data.get("options", {})),
        statistics=dict(data.get("statistics", {})),
        instances=tuple(instances),
        conventions=dict(data.get("conventions", CONVENTIONS)),
    )


def load_report(path: str | Path) -> MatchReport:
    return report_from_json(_read_json(path), str(path))


def save_report(report: MatchReport, path: str | Path) -> None:
    _write_json(report_to_json(report), path)
