"""Render situations and recognized instances to SVG via matplotlib.

Output is byte-deterministic for identical inputs: the SVG hash salt is
pinned and the date metadata stripped, so repeated renders diff clean.
Objects draw as oriented glyphs (dot plus heading tick) labeled by type;
each instance highlights its paired objects and draws the constraint
skeleton from the report's embedded member coordinates.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from matplotlib.lines import Line2D

from .fileio import MatchReport, ReportInstance
from .geometry import unit_vector
from .recognition import Situation

_HASH_SALT = "fgrmatch"
_INSTANCE_COLORS = ("tab:red", "tab:blue", "tab:green", "tab:purple", "tab:orange")


def _bounds(situation: Situation) -> tuple[float, float, float, float]:
    if not situation.objects:
        return 0.0, 0.0, 100.0, 100.0
    xs = [o.location.x for o in situation.objects]
    ys = [o.location.y for o in situation.objects]
    pad = 0.08 * max(max(xs) - min(xs), max(ys) - min(ys), 10.0)
    return min(xs) - pad, min(ys) - pad, max(xs) + pad, max(ys) + pad


def render_svg(
    situation: Situation,
    instances: Sequence[ReportInstance] = (),
    path: str | Path = "situation.svg",
    *,
    title: str | None = None,
) -> None:
    """Draw the situation with any recognized instances and save as SVG."""
    with plt.rc_context({"svg.hashsalt": _HASH_SALT, "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(9.0, 7.0))
        xmin, ymin, xmax, ymax = _bounds(situation)
        tick = 0.035 * max(xmax - xmin, ymax - ymin)

        for o in sorted(situation.objects, key=lambda obj: obj.id):
            dot = ax.plot(
                o.location.x, o.location.y, "o", color="0.25", markersize=5, zorder=3
            )[0]
            dot.set_gid(f"obj-{o.id}")
            if o.orientation is not None:
                ux, uy = unit_vector(o.orientation)
                heading = ax.plot(
                    [o.location.x, o.location.x + tick * ux],
                    [o.location.y, o.location.y + tick * uy],
                    color="0.25",
                    linewidth=1.2,
                    zorder=3,
                )[0]
                heading.set_gid(f"heading-{o.id}")
            kind = o.attributes.get("type", "?")
            label = ax.annotate(
                f"{o.id}:{kind}",
                (o.location.x, o.location.y),
                textcoords="offset points",
                xytext=(4, 4),
                fontsize=7,
                color="0.35",
            )
            label.set_gid(f"label-{o.id}")

        for index, inst in enumerate(instances):
            color = _INSTANCE_COLORS[index % len(_INSTANCE_COLORS)]
            for sid in sorted(set(inst.mapping.values())):
                obj = situation.by_id[sid]
                ring = ax.plot(
                    obj.location.x,
                    obj.location.y,
                    "o",
                    markersize=11,
                    markerfacecolor="none",
                    markeredgecolor=color,
                    markeredgewidth=1.6,
                    zorder=4,
                )[0]
                ring.set_gid(f"match-{index}-{sid}")
            for cid in sorted(inst.skeleton):
                points = list(inst.skeleton[cid])
                if len(points) >= 3:
                    points = points + [points[0]]
                line = ax.plot(
                    [p[0] for p in points],
                    [p[1] for p in points],
                    color=color,
                    linewidth=1.0,
                    alpha=0.65,
                    zorder=2,
                )[0]
                line.set_gid(f"skeleton-{index}-{cid}")

        handles = [
            Line2D([], [], marker="o", linestyle="none", color="0.25", label="object"),
            Line2D([], [], color="0.25", linewidth=1.2, label="heading"),
            Line2D(
                [],
                [],
                marker="o",
                linestyle="none",
                markerfacecolor="none",
                markeredgecolor=_INSTANCE_COLORS[0],
                label="matched object",
            ),
            Line2D([], [], color=_INSTANCE_COLORS[0], linewidth=1.0, label="constraint skeleton"),
        ]
        ax.legend(handles=handles, loc="upper right", fontsize=7)
        ax.set_xlim(xmin, xmax)
        ax.set_ylim(ymin, ymax)
        ax.set_aspect("equal", adjustable="box")
        ax.set_xlabel("x [m]")
        ax.set_ylabel("y [m]")
        ax.set_title(title or situation.id)
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


def render_report(
    situation: Situation, report: MatchReport | None, path: str | Path
) -> None:
    instances = report.instances if report is not None else ()
    title = None
    if report is not None:
        title = f"{report.template_id} in {report.situation_id} (threshold {report.threshold})"
    render_svg(situation, instances, path, title=title)
