"""K-nearest-neighbour table and span-based candidate filtering.

The table memoizes pairwise distances for the filter's fast path; a pair
outside the K-lists falls back to an exact computation, so K tunes speed
only and never changes which tuples are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .geometry import Point2, distance


@dataclass(frozen=True)
class KnnTable:
    k: int
    neighbors: Mapping[str, tuple[tuple[str, float], ...]]
    locations: Mapping[str, Point2]
    _pair_cache: Mapping[tuple[str, str], float]

    def neighbor_list(self, object_id: str) -> tuple[tuple[str, float], ...]:
        return self.neighbors[object_id]

    def distance(self, a: str, b: str) -> float:
        if a == b:
            return 0.0
        key = (a, b) if a < b else (b, a)
        cached = self._pair_cache.get(key)
        if cached is not None:
            return cached
        return distance(self.locations[a], self.locations[b])


def build_knn_table(situation, k: int = 8) -> KnnTable:
    """Exact K nearest neighbours per object; ties broken by ascending id."""
    if k < 1:
        raise ValueError(f"K must be at least 1, got {k}")
    objects = list(situation.objects)
    neighbors: dict[str, tuple[tuple[str, float], ...]] = {}
    pair_cache: dict[tuple[str, str], float] = {}
    for obj in objects:
        ranked = sorted(
            ((distance(obj.location, other.location), other.id) for other in objects if other.id != obj.id),
        )[:k]
        entries = tuple((oid, d) for d, oid in ranked)
        neighbors[obj.id] = entries
        for oid, d in entries:
            key = (obj.id, oid) if obj.id < oid else (oid, obj.id)
            pair_cache[key] = d
    return KnnTable(
        k=k,
        neighbors=neighbors,
        locations={o.id: o.location for o in objects},
        _pair_cache=pair_cache,
    )


def span_filter(table: KnnTable, ids: Sequence[str], bound: float) -> bool:
    """True to keep the tuple; False iff some pairwise distance exceeds `bound`.

    The comparison is inclusive: a tuple exactly at the bound is kept.
    """
    if bound == float("inf"):
        return True
    for i in range(len(ids)):
        for j in range(i + 1, len(ids)):
            if table.distance(ids[i], ids[j]) > bound:
                return False
    return True
