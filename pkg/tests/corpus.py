"""Seeded random (template, situation) cases for cross-checking the matcher.

Each case builds a nominal layout first, authors every fuzzy set around
the measured nominal value (symmetric core, wider support), then plants a
distorted instance plus clutter through the package generator.  Sets are
authored with cores and ramps several degrees/meters wide so the
orientation-hypothesis grid search never faces sub-degree features.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from fgrmatch import (
    AttributeSchema,
    ConstraintNode,
    ObjectArg,
    OrientedPoint,
    Point2,
    RelationArg,
    Situation,
    SituationObject,
    Template,
    TemplateObject,
    validate_template,
)
from fgrmatch.errors import InfeasiblePlantError
from fgrmatch.fuzzy import ANY, TrapezoidalSet
from fgrmatch.generate import GenerationSpec, generate_situation_with_truth
from fgrmatch.geometry import circular_mean, normalize_angle, relative_orientation
from fgrmatch.relations import RelationKind, RelationSpec

TYPE_POOL = ("alpha", "bravo", "charlie")


@dataclass
class CorpusCase:
    index: int
    template: Template
    situation: Situation
    threshold: float
    truth: dict[str, str] | None


def linear_around(value: float, core: float, support: float) -> TrapezoidalSet:
    return TrapezoidalSet(value - support, value - core, value + core, value + support)


def circular_around(value: float, core: float, support: float) -> TrapezoidalSet:
    return TrapezoidalSet(
        value - support, value - core, value + core, value + support, circular=True
    )


def _orien_set(rng: random.Random, value: float, any_prob: float = 0.2):
    if rng.random() < any_prob:
        return ANY
    core = rng.uniform(8.0, 16.0)
    return circular_around(value, core, core + rng.uniform(10.0, 20.0))


def _dist_set(rng: random.Random, value: float) -> TrapezoidalSet:
    core = max(2.0, value * rng.uniform(0.08, 0.15))
    return linear_around(value, core, core + max(3.0, value * rng.uniform(0.1, 0.2)))


def _figure_sets(rng: random.Random, kind: RelationKind, dims: dict[str, float]) -> dict:
    sets = {name: _dist_set(rng, value) for name, value in dims.items()}
    count = 4 if kind == RelationKind.RECTANGLE else 3
    for i, suffix in enumerate("abcd"[:count]):
        sets[f"orien_{suffix}"] = _orien_set(rng, rng.uniform(-20.0, 20.0))
    return sets


def _sector_sets(rng: random.Random, kind: RelationKind) -> tuple[dict, float]:
    r = rng.uniform(20.0, 60.0)
    phi = rng.uniform(0.0, 360.0)
    sets = {
        "distance": _dist_set(rng, r),
        "orien_ab": circular_around(phi, rng.uniform(8.0, 14.0), rng.uniform(22.0, 34.0)),
        "orien_b": _orien_set(rng, rng.uniform(0.0, 360.0)),
    }
    return sets, r


def _objects(rng: random.Random, count: int) -> list[TemplateObject]:
    objs = []
    for i in range(1, count + 1):
        if rng.random() < 0.8:
            objs.append(TemplateObject(f"t{i}", {"type": rng.choice(TYPE_POOL)}))
        else:
            objs.append(TemplateObject(f"t{i}"))
    return objs


def _make_template(rng: random.Random, index: int) -> Template:
    schema = AttributeSchema({"type": TYPE_POOL})
    archetype = rng.choice(
        ("ring_pair", "trapz_pair", "figure3", "rect4", "align3", "nested_ring", "chain")
    )

    if archetype in ("ring_pair", "trapz_pair"):
        kind = (
            RelationKind.RING_SECTOR
            if archetype == "ring_pair"
            else RelationKind.TRAPEZOIDAL_SECTION
        )
        sets, _ = _sector_sets(rng, kind)
        if kind == RelationKind.TRAPEZOIDAL_SECTION and not isinstance(
            sets["orien_ab"], TrapezoidalSet
        ):
            sets["orien_ab"] = circular_around(rng.uniform(0, 360), 10.0, 25.0)
        objs = _objects(rng, 2)
        nodes = [
            ConstraintNode(
                "C1",
                RelationSpec(kind, 2, sets),
                (ObjectArg(objs[0].id), ObjectArg(objs[1].id)),
            )
        ]
        return Template(schema, objs, nodes, id=f"corpus-{index}")

    if archetype in ("figure3", "rect4"):
        if archetype == "rect4":
            kind = RelationKind.RECTANGLE
            dims = {"base": rng.uniform(30.0, 70.0), "height": rng.uniform(25.0, 60.0)}
            count = 4
        else:
            kind = rng.choice(
                (
                    RelationKind.ISOSCELES_TRIANGLE,
                    RelationKind.EQUILATERAL_TRIANGLE,
                    RelationKind.RECTANGLE_TRIANGLE,
                )
            )
            count = 3
            if kind == RelationKind.EQUILATERAL_TRIANGLE:
                dims = {"side": rng.uniform(30.0, 60.0)}
            else:
                dims = {"base": rng.uniform(30.0, 60.0), "height": rng.uniform(20.0, 50.0)}
        objs = _objects(rng, count)
        nodes = [
            ConstraintNode(
                "C1",
                RelationSpec(kind, count, _figure_sets(rng, kind, dims)),
                tuple(ObjectArg(o.id) for o in objs),
                ref_mode="com_all_objects",
            )
        ]
        return Template(schema, objs, nodes, id=f"corpus-{index}")

    if archetype == "align3":
        objs = _objects(rng, 3)
        rels = [rng.uniform(70.0, 110.0) for _ in range(3)]
        mean = circular_mean([90.0 + s for s in rels])
        align_value = relative_orientation(0.0, mean if mean is not None else 90.0)
        sets = {
            "adjacent_1": _dist_set(rng, rng.uniform(25.0, 45.0)),
            "adjacent_2": _dist_set(rng, rng.uniform(25.0, 45.0)),
            "orien_align": circular_around(align_value, 14.0, 34.0),
            "orien_1": circular_around(rels[0], 10.0, 26.0),
            "orien_2": circular_around(rels[1], 10.0, 26.0),
            "orien_3": circular_around(rels[2], 10.0, 26.0),
        }
        nodes = [
            ConstraintNode(
                "C1",
                RelationSpec(RelationKind.ALIGNMENT, 3, sets),
                tuple(ObjectArg(o.id) for o in objs),
            )
        ]
        return Template(schema, objs, nodes, id=f"corpus-{index}")

    if archetype == "nested_ring":
        objs = _objects(rng, 4)
        dims = {"base": rng.uniform(30.0, 60.0), "height": rng.uniform(20.0, 50.0)}
        figure = ConstraintNode(
            "TRI",
            RelationSpec(
                RelationKind.ISOSCELES_TRIANGLE,
                3,
                _figure_sets(rng, RelationKind.ISOSCELES_TRIANGLE, dims),
            ),
            tuple(ObjectArg(o.id) for o in objs[:3]),
            ref_mode="com_all_objects",
        )
        sets, _ = _sector_sets(rng, RelationKind.RING_SECTOR)
        mode = rng.choice(("com_all_objects", "base_pair_com", "uppermost"))
        ring = ConstraintNode(
            "RING",
            RelationSpec(RelationKind.RING_SECTOR, 2, sets),
            (RelationArg("TRI", mode), ObjectArg(objs[3].id)),
        )
        return Template(schema, objs, [figure, ring], id=f"corpus-{index}")

    # chain: two ring sectors sharing the middle object
    objs = _objects(rng, 3)
    sets1, _ = _sector_sets(rng, RelationKind.RING_SECTOR)
    sets2, _ = _sector_sets(rng, RelationKind.RING_SECTOR)
    nodes = [
        ConstraintNode(
            "C1",
            RelationSpec(RelationKind.RING_SECTOR, 2, sets1),
            (ObjectArg(objs[0].id), ObjectArg(objs[1].id)),
        ),
        ConstraintNode(
            "C2",
            RelationSpec(RelationKind.RING_SECTOR, 2, sets2),
            (ObjectArg(objs[1].id), ObjectArg(objs[2].id)),
        ),
    ]
    return Template(schema, objs, nodes, id=f"corpus-{index}")


def make_case(index: int, *, allow_orientation_drop: bool = True) -> CorpusCase:
    """Deterministic corpus case; retries planting with fresh geometry on
    the rare draw whose sampled sets cannot be realized."""
    for attempt in range(30):
        rng = random.Random(f"corpus:{index}:{attempt}")
        template = _make_template(rng, index)
        assert not validate_template(template), validate_template(template)
        clutter = rng.randint(0, 8 - len(template.objects))
        spec = GenerationSpec(
            n=len(template.objects) + clutter,
            region=(0.0, 0.0, 300.0, 300.0),
            clutter_types=TYPE_POOL,
            template=template,
            distortion=rng.choice((0.0, 0.3, 0.6)),
        )
        try:
            situation, truth = generate_situation_with_truth(spec, index * 31 + attempt)
        except InfeasiblePlantError:
            continue
        if allow_orientation_drop and rng.random() < 0.35:
            situation = _drop_orientation(rng, situation)
        return CorpusCase(index, template, situation, 0.3, truth)
    raise RuntimeError(f"corpus case {index} failed to plant after 30 attempts")


def _drop_orientation(rng: random.Random, situation: Situation) -> Situation:
    victims = sorted(o.id for o in situation.objects)
    victim = rng.choice(victims)
    objects = [
        SituationObject(o.id, o.location, None if o.id == victim else o.orientation, o.attributes)
        for o in situation.objects
    ]
    return Situation(objects, id=situation.id)


def transform_situation(
    situation: Situation, rotation: float, translation: tuple[float, float]
) -> Situation:
    """Apply one rigid motion to every object."""
    from fgrmatch.geometry import isometry_apply

    objects = []
    for o in situation.objects:
        moved = isometry_apply(rotation, translation, OrientedPoint(o.location, o.orientation))
        objects.append(
            SituationObject(o.id, moved.location, moved.orientation, o.attributes)
        )
    return Situation(objects, id=situation.id)
