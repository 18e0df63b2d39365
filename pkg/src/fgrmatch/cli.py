"""Command line front end.

Subcommands: validate, match, render, gen, bench.  Exit code 0 on
success (including a match run that finds nothing); nonzero only on
errors such as unreadable files or invalid templates.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import bench_run, enumeration_slope, plot_scaling, write_csv
from .errors import FormatError, InfeasiblePlantError, TemplateValidationError
from .fileio import (
    build_report,
    load_report,
    load_situation,
    load_template,
    save_report,
    save_situation,
)
from .generate import GenerationSpec, generate_situation
from .oracle import brute_force_with_stats
from .recognition import SearchStats, recognize_with_stats
from .template import validate_template


def _cmd_validate(args) -> int:
    try:
        template = load_template(args.template)
    except TemplateValidationError as exc:
        print(exc, file=sys.stderr)
        return 1
    problems = validate_template(template)
    if problems:
        for p in problems:
            print(f"violation: {p}", file=sys.stderr)
        return 1
    print(
        f"ok: {template.id!r} with {len(template.objects)} objects, "
        f"{len(template.constraints)} constraints"
    )
    return 0


def _cmd_match(args) -> int:
    template = load_template(args.template)
    situation = load_situation(args.situation)
    options = {
        "oracle": args.oracle,
        "span_filter": args.span_filter == "on",
        "knn": args.knn,
        "max_instances": args.max_instances,
    }
    if args.oracle:
        import time

        started = time.perf_counter()
        instances, oracle_stats = brute_force_with_stats(template, situation, args.threshold)
        stats = SearchStats(
            tuples_evaluated=oracle_stats.mappings_evaluated,
            instances=oracle_stats.instances,
            wall_seconds=time.perf_counter() - started,
        )
    else:
        instances, stats = recognize_with_stats(
            template,
            situation,
            args.threshold,
            use_span_filter=args.span_filter == "on",
            knn_k=args.knn,
            max_instances=args.max_instances,
        )
    report = build_report(
        template, situation, args.threshold, instances, stats, options=options
    )
    if args.out:
        save_report(report, args.out)
    print(
        f"{len(instances)} instance(s) at threshold {args.threshold} "
        f"({stats.tuples_evaluated} tuples evaluated, {stats.cuts} cuts, "
        f"{stats.wall_seconds:.3f}s)"
    )
    for i, inst in enumerate(report.instances):
        print(
            f"  #{i + 1} overall {inst.overall:.6g}; weakest constraint "
            f"{inst.min_constraint} ({inst.per_constraint[inst.min_constraint]:.6g})"
        )
    return 0


def _cmd_render(args) -> int:
    from .render import render_report

    situation = load_situation(args.situation)
    report = load_report(args.report) if args.report else None
    render_report(situation, report, args.out)
    print(f"wrote {args.out}")
    return 0


def _cmd_gen(args) -> int:
    raw = json.loads(Path(args.spec).read_text())
    template = None
    if raw.get("template"):
        template_path = Path(args.spec).parent / raw["template"]
        template = load_template(template_path)
    region = raw.get("region", [0.0, 0.0, 200.0, 150.0])
    if len(region) == 2:  # accept [[xmin, ymin], [xmax, ymax]] too
        region = [region[0][0], region[0][1], region[1][0], region[1][1]]
    spec = GenerationSpec(
        n=int(raw["n"]),
        region=tuple(float(v) for v in region),
        clutter_types=raw.get("clutter_types", []),
        type_attribute=raw.get("type_attribute", "type"),
        template=template,
        distortion=float(raw.get("distortion", 0.0)),
    )
    seed = args.seed if args.seed is not None else int(raw.get("seed", 0))
    situation = generate_situation(spec, seed)
    save_situation(situation, args.out)
    print(f"wrote {args.out} with {len(situation.objects)} objects (seed {seed})")
    return 0


def _cmd_bench(args) -> int:
    template = load_template(args.template)
    n_values = [int(v) for v in args.n_list.split(",") if v.strip()]
    rows = bench_run(
        template, n_values, args.reps, args.seed, threshold=args.threshold
    )
    write_csv(rows, args.out)
    slope = enumeration_slope(rows)
    print(f"wrote {args.out}; log-log slope of enumerated bindings vs n: {slope:.3f}")
    if args.plot:
        plot_scaling(rows, args.plot)
        print(f"wrote {args.plot}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fgrmatch",
        description="Hierarchical spatial template recognition with fuzzy geometric relations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a template file")
    p.add_argument("template")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("match", help="recognize template instances in a situation")
    p.add_argument("--template", required=True)
    p.add_argument("--situation", required=True)
    p.add_argument("--threshold", type=float, default=0.3)
    p.add_argument("--oracle", action="store_true", help="use the brute-force reference recognizer")
    p.add_argument("--span-filter", choices=("on", "off"), default="off")
    p.add_argument("--knn", type=int, default=8)
    p.add_argument("--max-instances", type=int, default=None)
    p.add_argument("--out", help="write a JSON match report here")
    p.set_defaults(func=_cmd_match)

    p = sub.add_parser("render", help="draw a situation (and matches) to SVG")
    p.add_argument("--situation", required=True)
    p.add_argument("--report", help="a match report produced by `match --out`")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("gen", help="generate a synthetic situation")
    p.add_argument("--spec", required=True, help="generation spec JSON")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("bench", help="measure recognition cost against situation size")
    p.add_argument("--template", required=True)
    p.add_argument("--n-list", default="10,20,40,80")
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=float, default=0.3)
    p.add_argument("--out", required=True)
    p.add_argument("--plot", help="also write a log-log scaling figure")
    p.set_defaults(func=_cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FormatError, TemplateValidationError, InfeasiblePlantError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
