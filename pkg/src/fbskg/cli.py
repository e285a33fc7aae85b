"""``fbskg`` command line.

Results go to stdout, diagnostics to stderr. Every option that names a file
falls back to an environment variable:

    --graph   FBSKG_GRAPH   (default: fbs_graph.json)
    --rules   FBSKG_RULES   (default: shipped rule set)
    --noise   FBSKG_NOISE   (extra noise patterns, added to the defaults)
    --format  FBSKG_FORMAT  (text | json)
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .classify import ClassificationReport, RuleConfig, classify_sheet, default_rule_config, load_rule_config
from .evalkit import EvalError, compute_metrics, confusion_matrix, format_report, load_gold, round_half_up
from .ingest import ConfigError, IngestError, default_noise_patterns, load_datasheet, load_noise_patterns
from .kgstore import FbsGraph, GraphConflictError, GraphFormatError, graph_stats, load_graph, save_graph, upsert_model
from .query import QueryError, emit_graph_query_text, execute_query, parse_query, query_diagnostics

DEFAULT_GRAPH = "fbs_graph.json"
EXPECTED_ERRORS = (IngestError, ConfigError, GraphConflictError, GraphFormatError, QueryError, EvalError, OSError)


@dataclass
class CliConfig:
    graph_path: Path
    rules_path: Path | None
    noise_patterns_path: Path | None
    output_format: str

    def rules(self) -> RuleConfig:
        return load_rule_config(self.rules_path) if self.rules_path else default_rule_config()

    def noise(self) -> list[str]:
        patterns = default_noise_patterns()
        if self.noise_patterns_path:
            patterns += load_noise_patterns(self.noise_patterns_path)
        return patterns

    def open_graph(self) -> FbsGraph:
        return load_graph(self.graph_path) if self.graph_path.exists() else FbsGraph()


def _config(args: argparse.Namespace) -> CliConfig:
    env = os.environ
    graph = args.graph or env.get("FBSKG_GRAPH") or DEFAULT_GRAPH
    rules = args.rules or env.get("FBSKG_RULES")
    noise = args.noise or env.get("FBSKG_NOISE")
    fmt = args.format or env.get("FBSKG_FORMAT") or "text"
    if fmt not in ("text", "json"):
        raise ConfigError(f"unknown output format {fmt!r} (use text or json)")
    return CliConfig(Path(graph), Path(rules) if rules else None, Path(noise) if noise else None, fmt)


def _emit(cfg: CliConfig, text: str, payload: object) -> None:
    if cfg.output_format == "json":
        print(json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True))
    elif text:
        print(text, end="" if text.endswith("\n") else "\n")


def cmd_ingest(args: argparse.Namespace, cfg: CliConfig) -> int:
    rules, noise = cfg.rules(), cfg.noise()
    graph = cfg.open_graph()
    results = []
    for path in args.datasheets:
        try:
            sheet = load_datasheet(path, noise)
            report = classify_sheet(sheet, rules)
            # a failed upsert leaves the in-memory graph untouched
            summary = upsert_model(graph, sheet.identity, report)
        except EXPECTED_ERRORS as exc:
            print(f"error: {path}: {exc}", file=sys.stderr)
            return 1
        save_graph(graph, cfg.graph_path)
        results.append({"file": str(path), **summary.to_dict()})
        if cfg.output_format == "text":
            print(
                f"{path}: nodes_created={summary.nodes_created} edges_created={summary.edges_created} "
                f"values_reused={summary.values_reused} skipped_unknown={summary.skipped_unknown}"
            )
    if cfg.output_format == "json":
        _emit(cfg, "", results)
    return 0


def _classification_text(report: ClassificationReport) -> str:
    return report.trace() + "\n\n" + report.summary_table() + "\n"


def cmd_classify(args: argparse.Namespace, cfg: CliConfig) -> int:
    sheet = load_datasheet(args.datasheet, cfg.noise())
    report = classify_sheet(sheet, cfg.rules())
    _emit(cfg, _classification_text(report), report.to_list())
    return 0


def cmd_query(args: argparse.Namespace, cfg: CliConfig) -> int:
    spec = parse_query(args.query)
    if args.emit_cypher:
        text = emit_graph_query_text(spec)
        _emit(cfg, text, {"cypher": text})
        return 0
    graph = cfg.open_graph()
    for message in query_diagnostics(graph, spec):
        print(f"note: {message}", file=sys.stderr)
    parts = execute_query(graph, spec)
    _emit(cfg, "\n".join(parts), parts)
    return 0


def cmd_eval(args: argparse.Namespace, cfg: CliConfig) -> int:
    sheet = load_datasheet(args.datasheet, cfg.noise())
    report = classify_sheet(sheet, cfg.rules())
    gold = load_gold(args.gold)
    metrics = compute_metrics(confusion_matrix(gold, report))
    payload = {
        "per_class": {
            cls.value: {"precision": s.precision, "recall": s.recall, "f1": s.f1, "support": s.support}
            for cls, s in metrics.per_class.items()
        },
        "accuracy": metrics.accuracy,
        "macro_avg": dict(zip(("precision", "recall", "f1"), metrics.macro_avg)),
        "weighted_avg": dict(zip(("precision", "recall", "f1"), metrics.weighted_avg)),
        "total_support": metrics.total_support,
        "accuracy_rounded": round_half_up(metrics.accuracy),
    }
    _emit(cfg, format_report(metrics), payload)
    return 0


def cmd_stats(args: argparse.Namespace, cfg: CliConfig) -> int:
    stats = graph_stats(cfg.open_graph())
    lines = [
        f"components: {stats['components']}",
        f"models: {stats['models']}",
        *(f"property names ({cls}): {n}" for cls, n in stats["property_names"].items()),
        f"value nodes: {stats['value_nodes']}",
        f"edges: {stats['edges']}",
    ]
    if stats["multi_class_property_names"]:
        lines.append("names under several classes: " + ", ".join(stats["multi_class_property_names"]))
    _emit(cfg, "\n".join(lines), stats)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--graph", help="graph file (env FBSKG_GRAPH)")
    common.add_argument("--rules", help="rule config JSON (env FBSKG_RULES)")
    common.add_argument("--noise", help="extra noise pattern file (env FBSKG_NOISE)")
    common.add_argument("--format", choices=("text", "json"), help="output format (env FBSKG_FORMAT)")

    parser = argparse.ArgumentParser(prog="fbskg", description="FBS knowledge graphs from datasheet tables.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="classify datasheets and add them to the graph")
    p.add_argument("datasheets", nargs="+")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("classify", parents=[common], help="print the classification trace and summary")
    p.add_argument("datasheet")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("query", parents=[common], help="find part numbers matching a query")
    p.add_argument("query")
    p.add_argument("--emit-cypher", action="store_true", help="print the Cypher query instead of running it")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("eval", parents=[common], help="score the classifier against gold labels")
    p.add_argument("datasheet")
    p.add_argument("gold")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("stats", parents=[common], help="summarize the graph")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
        return args.func(args, cfg)
    except EXPECTED_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
