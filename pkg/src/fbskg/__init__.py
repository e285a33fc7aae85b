"""Build Function-Behaviour-Structure knowledge graphs from datasheet tables
and answer part-selection queries against them."""

from .classify import (
    ClassificationReport,
    ClassifiedProperty,
    FbsClass,
    RuleConfig,
    classify_property,
    classify_sheet,
    default_rule_config,
    load_rule_config,
)
from .evalkit import compute_metrics, confusion_matrix, format_report
from .ingest import ModelIdentity, PropertyRecord, PropertySheet, load_datasheet, parse_datasheet
from .kgstore import FbsGraph, graph_stats, load_graph, save_graph, upsert_model
from .query import QuerySpec, emit_graph_query_text, execute_query, parse_query

__version__ = "0.1.0"

__all__ = [
    "ClassificationReport",
    "ClassifiedProperty",
    "FbsClass",
    "FbsGraph",
    "ModelIdentity",
    "PropertyRecord",
    "PropertySheet",
    "QuerySpec",
    "RuleConfig",
    "classify_property",
    "classify_sheet",
    "compute_metrics",
    "confusion_matrix",
    "default_rule_config",
    "emit_graph_query_text",
    "execute_query",
    "format_report",
    "graph_stats",
    "load_datasheet",
    "load_graph",
    "load_rule_config",
    "parse_datasheet",
    "parse_query",
    "save_graph",
    "upsert_model",
]
