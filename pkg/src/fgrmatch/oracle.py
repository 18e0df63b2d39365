"""Brute-force reference recognizer.

Enumerates every injective, type-compatible total binding and scores each
one with the same canonical scorer the search uses; the point is to test
the search (pruning, ordering, bookkeeping), not the arithmetic.  Kept
single-threaded and plain so its semantics stay auditable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .recognition import Situation, TemplateInstance, _Engine, type_compatible
from .template import Template


@dataclass
class OracleStats:
    mappings_evaluated: int = 0
    instances: int = 0


def enumeration_size(n: int, m: int) -> int:
    """Arrangements of m template objects over n situation objects."""
    count = 1
    for i in range(m):
        count *= max(n - i, 0)
    return count


def brute_force_recognize(
    template: Template,
    situation: Situation,
    threshold: float,
    *,
    max_enumeration: int = 10_000_000,
) -> list[TemplateInstance]:
    return brute_force_with_stats(
        template, situation, threshold, max_enumeration=max_enumeration
    )[0]


def brute_force_with_stats(
    template: Template,
    situation: Situation,
    threshold: float,
    *,
    max_enumeration: int = 10_000_000,
) -> tuple[list[TemplateInstance], OracleStats]:
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must be in [0, 1], got {threshold}")
    size = enumeration_size(len(situation.objects), len(template.objects))
    if size > max_enumeration:
        raise ValueError(
            f"enumeration of {size} mappings exceeds the guard of {max_enumeration}"
        )
    engine = _Engine(template, situation)
    stats = OracleStats()
    found: list[TemplateInstance] = []

    slots = [o.id for o in template.objects]
    candidates: dict[str, list[str]] = {
        tid: [
            s.id
            for s in sorted(situation.objects, key=lambda o: o.id)
            if type_compatible(template.objects_by_id[tid], s)
        ]
        for tid in slots
    }
    mapping: dict[str, str] = {}
    used: set[str] = set()

    def enumerate_from(depth: int) -> None:
        if depth == len(slots):
            stats.mappings_evaluated += 1
            result = engine.evaluate_mapping(mapping)
            if (
                isinstance(result, TemplateInstance)
                and result.overall >= threshold
                and result.overall > 0.0
            ):
                found.append(result)
            return
        tid = slots[depth]
        for sid in candidates[tid]:
            if sid in used:
                continue
            mapping[tid] = sid
            used.add(sid)
            enumerate_from(depth + 1)
            used.discard(sid)
            del mapping[tid]

    enumerate_from(0)
    found.sort(key=lambda inst: (-inst.overall, inst.mapping_key()))
    stats.instances = len(found)
    return found, stats


def instances_equal(
    a: Mapping[str, float] | TemplateInstance,
    b: Mapping[str, float] | TemplateInstance,
    tol: float = 1e-12,
) -> bool:
    """Same binding, same per-constraint proximities within `tol`."""
    if a.mapping != b.mapping:
        return False
    if set(a.per_constraint) != set(b.per_constraint):
        return False
    return all(
        abs(a.per_constraint[cid] - b.per_constraint[cid]) <= tol
        for cid in a.per_constraint
    ) and abs(a.overall - b.overall) <= tol
