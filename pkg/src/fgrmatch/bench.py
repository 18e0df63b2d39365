"""Benchmark harness: recognition cost as the situation grows.

For each n the harness generates seeded random situations whose objects
are all type-compatible with the template, runs the exhaustive oracle
(counting every enumerated binding) and the pruned search, and emits one
CSV row per repetition.  With every object compatible, the oracle's
enumeration count is exactly n!/(n-m)!, so the log-log slope of that
column against n measures the polynomial order directly.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .generate import GenerationSpec, generate_situation
from .oracle import brute_force_with_stats
from .recognition import recognize_with_stats
from .template import Template

CSV_FIELDS = (
    "n",
    "rep",
    "seed",
    "mappings_enumerated",
    "oracle_instances",
    "oracle_seconds",
    "search_tuples",
    "search_cuts",
    "search_instances",
    "search_seconds",
)


@dataclass(frozen=True)
class BenchRow:
    n: int
    rep: int
    seed: int
    mappings_enumerated: int
    oracle_instances: int
    oracle_seconds: float
    search_tuples: int
    search_cuts: int
    search_instances: int
    search_seconds: float


def _template_types(template: Template) -> list[str]:
    types = []
    for obj in template.objects:
        for value in obj.attributes.values():
            if value not in types:
                types.append(value)
    return types


def bench_run(
    template: Template,
    n_values: Sequence[int],
    repetitions: int,
    seed: int,
    *,
    threshold: float = 0.3,
    region: tuple[float, float, float, float] = (0.0, 0.0, 1000.0, 1000.0),
) -> list[BenchRow]:
    """Run the oracle and the search over seeded random situations.

    Clutter draws from the template's own required types so every object
    is compatible with every slot (the worst case the complexity argument
    counts).
    """
    rows = []
    clutter_types = _template_types(template)
    for n in n_values:
        for rep in range(repetitions):
            case_seed = seed * 1_000_003 + n * 101 + rep
            spec = GenerationSpec(
                n=n,
                region=region,
                clutter_types=clutter_types,
                template=None,
            )
            situation = generate_situation(spec, case_seed)
            started = time.perf_counter()
            _, oracle_stats = brute_force_with_stats(template, situation, threshold)
            oracle_seconds = time.perf_counter() - started
            _, search_stats = recognize_with_stats(template, situation, threshold)
            rows.append(
                BenchRow(
                    n=n,
                    rep=rep,
                    seed=case_seed,
                    mappings_enumerated=oracle_stats.mappings_evaluated,
                    oracle_instances=oracle_stats.instances,
                    oracle_seconds=oracle_seconds,
                    search_tuples=search_stats.tuples_evaluated,
                    search_cuts=search_stats.cuts,
                    search_instances=search_stats.instances,
                    search_seconds=search_stats.wall_seconds,
                )
            )
    return rows


def write_csv(rows: Sequence[BenchRow], path: str | Path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_FIELDS)
        for row in rows:
            writer.writerow(
                [
                    row.n,
                    row.rep,
                    row.seed,
                    row.mappings_enumerated,
                    row.oracle_instances,
                    f"{row.oracle_seconds:.6f}",
                    row.search_tuples,
                    row.search_cuts,
                    row.search_instances,
                    f"{row.search_seconds:.6f}",
                ]
            )


def read_csv(path: str | Path) -> list[BenchRow]:
    rows = []
    with open(path, newline="") as handle:
        for entry in csv.DictReader(handle):
            rows.append(
                BenchRow(
                    n=int(entry["n"]),
                    rep=int(entry["rep"]),
                    seed=int(entry["seed"]),
                    mappings_enumerated=int(entry["mappings_enumerated"]),
                    oracle_instances=int(entry["oracle_instances"]),
                    oracle_seconds=float(entry["oracle_seconds"]),
                    search_tuples=int(entry["search_tuples"]),
                    search_cuts=int(entry["search_cuts"]),
                    search_instances=int(entry["search_instances"]),
                    search_seconds=float(entry["search_seconds"]),
                )
            )
    return rows


def loglog_slope(points: Sequence[tuple[float, float]]) -> float:
    """Least-squares slope of log(y) against log(x)."""
    if len(points) < 2:
        raise ValueError("slope needs at least two points")
    logs = [(math.log(x), math.log(y)) for x, y in points if x > 0 and y > 0]
    n = len(logs)
    mean_x = sum(x for x, _ in logs) / n
    mean_y = sum(y for _, y in logs) / n
    num = sum((x - mean_x) * (y - mean_y) for x, y in logs)
    den = sum((x - mean_x) ** 2 for x, _ in logs)
    return num / den


def enumeration_slope(rows: Sequence[BenchRow]) -> float:
    """Slope of mean enumerated-mapping count against n, log-log."""
    by_n: dict[int, list[int]] = {}
    for row in rows:
        by_n.setdefault(row.n, []).append(row.mappings_enumerated)
    points = [(float(n), sum(counts) / len(counts)) for n, counts in sorted(by_n.items())]
    return loglog_slope(points)


def plot_scaling(rows: Sequence[BenchRow], path: str | Path) -> None:
    """Log-log plot of enumeration and search effort against n."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    by_n: dict[int, list[BenchRow]] = {}
    for row in rows:
        by_n.setdefault(row.n, []).append(row)
    ns = sorted(by_n)
    oracle = [sum(r.mappings_enumerated for r in by_n[n]) / len(by_n[n]) for n in ns]
    search = [sum(r.search_tuples for r in by_n[n]) / len(by_n[n]) for n in ns]

    with plt.rc_context({"svg.hashsalt": "fgrmatch", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(7.0, 5.0))
        ax.loglog(ns, oracle, "o-", label="exhaustive bindings")
        ax.loglog(ns, search, "s-", label="search tuples evaluated")
        ax.set_xlabel("situation objects n")
        ax.set_ylabel("count")
        slope = enumeration_slope(rows)
        ax.set_title(f"candidate growth, log-log slope {slope:.2f}")
        ax.grid(True, which="both", linewidth=0.3, alpha=0.5)
        ax.legend()
        fig.savefig(path, format="svg" if str(path).endswith(".svg") else None,
                    metadata={"Date": None} if str(path).endswith(".svg") else None)
        plt.close(fig)
