"""Command-line driver: ``taxmerge <command> ...``.

Exit codes: 0 success, 1 invalid input, 2 merge consistency error or a
failed property check, 3 instance migration error. ``TAXMERGE_LOG`` sets
the log level (``DEBUG`` shows per-cycle removal decisions).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import bench, io
from .filters import FilterSyntaxError
from .graphs import IntegratedConceptGraph, LabelMode, build_icg, build_matching_graph
from .mappings import MigrationResult, OutputMappings, generate_mappings, migrate_instances
from .merge_base import MergedTaxonomy, MergeError, merge_icg_base
from .merge_ext import merge_icg_extended
from .model import InputMapping, Taxonomy, TaxonomyError, validate_mapping, validate_taxonomy
from .scenarios import ScenarioParams, gen_scenario
from .verify import PropertyReport, verify_all

log = logging.getLogger("taxmerge")

EXIT_OK, EXIT_INPUT, EXIT_MERGE, EXIT_MIGRATION = 0, 1, 2, 3


@dataclass(frozen=True)
class PipelineResult:
    icg: IntegratedConceptGraph
    merged: MergedTaxonomy
    mappings: OutputMappings
    migration: MigrationResult
    report: PropertyReport


def run_pipeline(
    source: Taxonomy,
    target: Taxonomy,
    mapping: InputMapping,
    mode: str = "base",
    label_mode: LabelMode = LabelMode.CONCAT,
    cycle_overrides: Sequence[tuple[str, str]] = (),
    prune_empty_others: bool = False,
) -> PipelineResult:
    """Merge, generate mappings, migrate instances and check every property."""
    icg = build_icg(source, target, mapping, label_mode)
    if mode == "extended":
        merged = merge_icg_extended(icg, cycle_overrides, prune_empty_others, source)
    elif mode == "base":
        merged = merge_icg_base(icg, cycle_overrides)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    mappings = generate_mappings(icg, merged)
    migration = migrate_instances(source, target, mappings, merged)
    checked_mapping = mapping if mode == "extended" else mapping.without_extensions()
    report = verify_all(source, target, checked_mapping, merged, mappings, migration)
    return PipelineResult(icg, merged, mappings, migration, report)


def _override(text: str) -> tuple[str, str]:
    child, sep, parent = text.partition(":")
    if not sep or not child or not parent:
        raise argparse.ArgumentTypeError(f"expected child:parent, got {text!r}")
    return child, parent


def _load_inputs(args) -> tuple[Taxonomy, Taxonomy, InputMapping]:
    source = io.load_taxonomy(args.source)
    target = io.load_taxonomy(args.target)
    mapping = io.load_mapping(args.mapping)
    validate_mapping(source, target, mapping).raise_for_errors("mapping")
    return source, target, mapping


def _pipeline(args) -> PipelineResult:
    source, target, mapping = _load_inputs(args)
    return run_pipeline(
        source,
        target,
        mapping,
        args.mode,
        LabelMode(args.label_mode),
        args.cycle_override,
        args.prune_empty_others,
    )


def _write_dot(dir_: Path, source, target, mapping, res: PipelineResult) -> None:
    dir_.mkdir(parents=True, exist_ok=True)
    (dir_ / "matching.dot").write_text(io.matching_graph_dot(build_matching_graph(source, target, mapping)))
    (dir_ / "icg.dot").write_text(io.icg_dot(res.icg, dict(res.merged.relevance)))
    (dir_ / "merged.dot").write_text(io.taxonomy_dot(res.merged, "merged"))


def cmd_validate(args) -> int:
    status = EXIT_OK
    taxes = []
    for path in args.files:
        tax = io.load_taxonomy(path, validate=False)
        taxes.append(tax)
        report = validate_taxonomy(tax)
        for e in report.errors:
            print(f"{path}: {e.code}: {e.message}")
        if not report.ok:
            status = EXIT_INPUT
        else:
            print(f"{path}: ok ({len(tax)} concepts, {len(tax.isa_edges)} is-a edges)")
    if args.mapping:
        if len(taxes) != 2:
            print("--mapping needs exactly two taxonomy files (source, target)", file=sys.stderr)
            return EXIT_INPUT
        report = validate_mapping(taxes[0], taxes[1], io.load_mapping(args.mapping))
        for e in report.errors:
            print(f"{args.mapping}: {e.code}: {e.message}")
        if not report.ok:
            status = EXIT_INPUT
        else:
            print(f"{args.mapping}: ok")
    return status


def cmd_merge(args) -> int:
    source, target, mapping = _load_inputs(args)
    res = run_pipeline(source, target, mapping, args.mode, LabelMode(args.label_mode),
                       args.cycle_override, args.prune_empty_others)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.save_taxonomy(res.merged, out / "merged.json")
    (out / "report.json").write_text(json.dumps(io.merge_report(res.merged), indent=2) + "\n")
    if args.emit_mappings:
        (out / "mappings.json").write_text(
            json.dumps(io.output_mappings_to_dict(res.mappings), indent=2, ensure_ascii=False) + "\n"
        )
    if args.emit_dot:
        _write_dot(Path(args.emit_dot), source, target, mapping, res)
    for d in res.merged.dropped:
        log.info("dropped %s (%s)", d.label, d.node)
    print(f"merged {len(res.merged)} concepts, root {res.merged.root!r}; wrote {out}")
    if not res.migration.ok:
        for e in res.migration.errors:
            print(f"migration: {e.code} {e.side}:{e.instance} -> {list(e.nodes)}", file=sys.stderr)
        return EXIT_MIGRATION
    return EXIT_OK


def cmd_mappings(args) -> int:
    res = _pipeline(args)
    doc = io.output_mappings_to_dict(res.mappings)
    doc["placements"] = [
        {"side": side, "instance": inst, "node": node} for (side, inst), node in res.migration.placements.items()
    ]
    doc["errors"] = [e.__dict__ | {"nodes": list(e.nodes)} for e in res.migration.errors]
    text = json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK if res.migration.ok else EXIT_MIGRATION


def cmd_verify(args) -> int:
    res = _pipeline(args)
    for s in res.report.statuses:
        state = {True: "pass", False: "FAIL", None: "n/a"}[s.passed]
        print(f"{s.name:8s} {state}")
        for w in s.witnesses[:10]:
            print(f"    {w}")
    if args.json:
        Path(args.json).write_text(json.dumps(res.report.as_dict(), indent=2) + "\n")
    return EXIT_OK if res.report.ok else EXIT_MERGE


def cmd_gen(args) -> int:
    params = ScenarioParams(
        concepts=args.concepts,
        source_concepts=args.source_concepts,
        depth=args.depth,
        fanout=args.fanout,
        multi_parent_prob=args.multi_parent_prob,
        overlap_ratio=args.overlap_ratio,
        instance_count=args.instances,
        identical_shape=args.identical,
        isa_rate=args.isa_rate,
        invisa_rate=args.invisa_rate,
    )
    try:
        sc = gen_scenario(args.seed, params)
    except ValueError as exc:
        print(f"gen: {exc}", file=sys.stderr)
        return EXIT_INPUT
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.save_taxonomy(sc.source, out / "source.json")
    io.save_taxonomy(sc.target, out / "target.json")
    io.save_mapping(sc.mapping, out / "mapping.json")
    print(f"wrote scenario seed={args.seed} to {out}")
    return EXIT_OK


def cmd_bench(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    records = bench.run_bench(bench.tree_family(sizes, args.seed), args.mode, args.repeats)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    bench.write_csv(records, out / "bench.csv")
    bench.write_json(records, out / "bench.json")
    for r in records:
        print(f"{r.scenario:>12s}  icg {r.t_icg:7.3f}s  merge {r.t_merge:7.3f}s  "
              f"mappings {r.t_mappings:7.3f}s  total {r.t_total:7.3f}s")
    if len(records) >= 2:
        xs = [r.source_concepts + r.target_concepts for r in records]
        _, _, r2 = bench.linear_fit(xs, [r.t_total for r in records])
        print(f"linear fit of total time against input size: R^2 = {r2:.3f}")
    return EXIT_OK


def cmd_dot(args) -> int:
    source, target, mapping = _load_inputs(args)
    res = run_pipeline(source, target, mapping, args.mode, LabelMode(args.label_mode),
                       args.cycle_override, args.prune_empty_others)
    _write_dot(Path(args.out), source, target, mapping, res)
    print(f"wrote matching.dot, icg.dot, merged.dot to {args.out}")
    return EXIT_OK


def _merge_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("source")
    p.add_argument("target")
    p.add_argument("mapping")
    p.add_argument("--mode", choices=["base", "extended"], default="base")
    p.add_argument("--label-mode", choices=[m.value for m in LabelMode], default=LabelMode.CONCAT.value)
    p.add_argument("--cycle-override", type=_override, action="append", default=[],
                   metavar="CHILD:PARENT", help="source is-a edge to drop first when it closes a cycle")
    p.add_argument("--prune-empty-others", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="taxmerge", description="Target-driven taxonomy merging.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check taxonomy (and mapping) documents")
    p.add_argument("files", nargs="+")
    p.add_argument("--mapping")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("merge", help="merge source into target")
    _merge_options(p)
    p.add_argument("--out", default="merge-out")
    p.add_argument("--emit-mappings", action="store_true")
    p.add_argument("--emit-dot", metavar="DIR")
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("mappings", help="print output mappings and instance placements")
    _merge_options(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_mappings)

    p = sub.add_parser("verify", help="merge and check every property")
    _merge_options(p)
    p.add_argument("--json", metavar="FILE")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen", help="write a synthetic scenario")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="scenario")
    p.add_argument("--concepts", type=int, default=30)
    p.add_argument("--source-concepts", type=int)
    p.add_argument("--depth", type=int, default=5)
    p.add_argument("--fanout", type=int, default=4)
    p.add_argument("--multi-parent-prob", type=float, default=0.0)
    p.add_argument("--overlap-ratio", type=float, default=0.5)
    p.add_argument("--instances", type=int, default=0)
    p.add_argument("--identical", action="store_true", help="source is a copy of the target")
    p.add_argument("--isa-rate", type=float, default=0.0)
    p.add_argument("--invisa-rate", type=float, default=0.0)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="time the pipeline on generated tree pairs")
    p.add_argument("--sizes", default="1000,5000,10000,20000")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=["base", "extended"], default="base")
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--out", default="bench-out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("dot", help="write DOT renderings of the matching graph, ICG and result")
    _merge_options(p)
    p.add_argument("--out", default="dot-out")
    p.set_defaults(func=cmd_dot)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    level = os.environ.get("TAXMERGE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (TaxonomyError, FilterSyntaxError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except MergeError as exc:
        print(f"merge error: {exc}", file=sys.stderr)
        return EXIT_MERGE


if __name__ == "__main__":
    sys.exit(main())
