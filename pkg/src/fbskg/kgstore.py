"""Embedded FBS property graph.

Four node levels per component tree::

    (Component {name}) -HAS-> (Function|Behaviour|Structure)
        -YIELDS-> (PropertyName {name}) -HAS {model_name, part_number}-> (PropertyValue)

Value nodes are shared: two models with the same value for one property
point at the same leaf through separately attributed ``HAS`` edges.

The graph is not thread-safe for writers. Any number of readers may share a
graph that is not being mutated.
"""

from __future__ import annotations

import json
import os
import tempfile
from collections import defaultdict
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path
from typing import Any, Iterator

from .classify import ClassificationReport, FbsClass
from .ingest import ModelIdentity
from .shapes import DualLimit, Fixed, SingleLimit, Text, ValueShape, format_number, parse_number

__all__ = [
    "Edge",
    "FbsGraph",
    "GraphConflictError",
    "GraphFormatError",
    "MutationSummary",
    "Node",
    "check_schema",
    "decode_value",
    "encode_value",
    "ensure_component",
    "find_value_node",
    "graph_stats",
    "load_graph",
    "save_graph",
    "upsert_model",
]

FORMAT_NAME = "fbskg-graph"
FORMAT_VERSION = 1

COMPONENT = "Component"
PROPERTY_NAME = "PropertyName"
PROPERTY_VALUE = "PropertyValue"
CLASS_LABELS = (FbsClass.FUNCTION.value, FbsClass.BEHAVIOUR.value, FbsClass.STRUCTURE.value)
LABELS = (COMPONENT, *CLASS_LABELS, PROPERTY_NAME, PROPERTY_VALUE)
HAS = "HAS"
YIELDS = "YIELDS"
NUMERIC_ATTRS = ("value", "lower_limit_value", "upper_limit_value")
VALUE_ATTRS = (*NUMERIC_ATTRS, "unit", "text")


class GraphConflictError(ValueError):
    """A part number is already bound to a different model name."""


class GraphFormatError(ValueError):
    """A graph file could not be read."""


@dataclass
class Node:
    id: int
    label: str
    attrs: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    label: str
    model_name: str | None = None
    part_number: str | None = None

    @property
    def attrs(self) -> dict[str, str]:
        if self.model_name is None:
            return {}
        return {"model_name": self.model_name, "part_number": self.part_number}


@dataclass
class MutationSummary:
    nodes_created: int = 0
    edges_created: int = 0
    values_reused: int = 0
    skipped_unknown: int = 0

    @property
    def is_noop(self) -> bool:
        return self.nodes_created == self.edges_created == self.values_reused == 0

    def to_dict(self) -> dict[str, int]:
        return {
            "nodes_created": self.nodes_created,
            "edges_created": self.edges_created,
            "values_reused": self.values_reused,
            "skipped_unknown": self.skipped_unknown,
        }


# -- value encoding ------------------------------------------------------------


def encode_value(shape: ValueShape) -> dict[str, Any]:
    """PropertyValue attributes for a shape (numbers stay Decimal)."""
    if isinstance(shape, Text):
        return {"text": shape.raw}
    if isinstance(shape, Fixed):
        attrs: dict[str, Any] = {"value": shape.value}
    elif isinstance(shape, SingleLimit):
        key = "upper_limit_value" if shape.bound == "upper" else "lower_limit_value"
        attrs = {key: shape.limit}
    elif isinstance(shape, DualLimit):
        attrs = {"lower_limit_value": shape.lower, "upper_limit_value": shape.upper}
    else:
        raise TypeError(f"not a value shape: {shape!r}")
    if shape.unit is not None:
        attrs["unit"] = shape.unit
    return attrs


def decode_value(attrs: dict[str, Any]) -> ValueShape:
    if "text" in attrs:
        return Text(attrs["text"])
    unit = attrs.get("unit")
    if "value" in attrs:
        return Fixed(attrs["value"], unit)
    lo, hi = attrs.get("lower_limit_value"), attrs.get("upper_limit_value")
    if lo is not None and hi is not None:
        return DualLimit(lo, hi, unit)
    if hi is not None:
        return SingleLimit("upper", hi, unit)
    if lo is not None:
        return SingleLimit("lower", lo, unit)
    raise ValueError(f"PropertyValue attributes encode no value: {attrs!r}")


def _value_key(attrs: dict[str, Any]) -> tuple:
    # Decimal("35") and Decimal("35.0") must collide
    return tuple(
        (k, attrs[k].normalize() if isinstance(attrs[k], Decimal) else attrs[k]) for k in VALUE_ATTRS if k in attrs
    )


# -- graph -----------------------------------------------------------------------


class FbsGraph:
    def __init__(self) -> None:
        self.nodes: dict[int, Node] = {}
        self.edges: list[Edge] = []
        self.next_id = 0
        self._edge_set: set[Edge] = set()
        self._out: dict[int, list[Edge]] = defaultdict(list)
        self._in: dict[int, list[Edge]] = defaultdict(list)
        self._components: dict[str, int] = {}
        self._names: dict[tuple[int, str], int] = {}
        self._values: dict[tuple[int, tuple], int] = {}
        self._part_owner: dict[str, str] = {}

    def __len__(self) -> int:
        return len(self.nodes)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FbsGraph):
            return NotImplemented
        return (
            self.next_id == other.next_id
            and {i: (n.label, _value_key(n.attrs) if n.label == PROPERTY_VALUE else n.attrs) for i, n in self.nodes.items()}
            == {i: (n.label, _value_key(n.attrs) if n.label == PROPERTY_VALUE else n.attrs) for i, n in other.nodes.items()}
            and sorted(self.edges, key=_edge_sort_key) == sorted(other.edges, key=_edge_sort_key)
        )

    # low-level mutation; callers keep the schema valid
    def _add_node(self, label: str, attrs: dict[str, Any], node_id: int | None = None) -> Node:
        if node_id is None:
            node_id = self.next_id
        if node_id in self.nodes:
            raise ValueError(f"duplicate node id {node_id}")
        node = Node(node_id, label, dict(attrs))
        self.nodes[node_id] = node
        self.next_id = max(self.next_id, node_id + 1)
        self._index_node(node)
        return node

    def _index_node(self, node: Node) -> None:
        if node.label == COMPONENT:
            self._components[node.attrs["name"]] = node.id

    def _add_edge(self, edge: Edge) -> bool:
        if edge in self._edge_set:
            return False
        self.edges.append(edge)
        self._edge_set.add(edge)
        self._out[edge.src].append(edge)
        self._in[edge.dst].append(edge)
        src = self.nodes[edge.src]
        dst = self.nodes[edge.dst]
        if dst.label == PROPERTY_NAME:
            self._names[(edge.src, dst.attrs["name"])] = dst.id
        elif dst.label == PROPERTY_VALUE and src.label == PROPERTY_NAME:
            self._values.setdefault((edge.src, _value_key(dst.attrs)), dst.id)
        if edge.part_number is not None:
            self._part_owner.setdefault(edge.part_number, edge.model_name)
        return True

    def out_edges(self, node_id: int, label: str | None = None) -> list[Edge]:
        return [e for e in self._out.get(node_id, ()) if label is None or e.label == label]

    def in_edges(self, node_id: int, label: str | None = None) -> list[Edge]:
        return [e for e in self._in.get(node_id, ()) if label is None or e.label == label]

    def children(self, node_id: int) -> list[int]:
        out: list[int] = []
        for e in self._out.get(node_id, ()):
            if e.dst not in out:
                out.append(e.dst)
        return out

    def nodes_with_label(self, label: str) -> Iterator[Node]:
        return (n for n in self.nodes.values() if n.label == label)

    def component_id(self, name: str) -> int | None:
        return self._components.get(name)

    def has_edge(self, edge: Edge) -> bool:
        return edge in self._edge_set

    def value_edges(self) -> Iterator[tuple[Node, Edge, Node]]:
        """(PropertyName, HAS edge, PropertyValue) triples."""
        for e in self.edges:
            if e.label == HAS and e.model_name is not None:
                yield self.nodes[e.src], e, self.nodes[e.dst]

    def copy(self) -> "FbsGraph":
        return graph_from_dict(graph_to_dict(self))


def _edge_sort_key(e: Edge) -> tuple:
    return (e.src, e.dst, e.label, e.model_name or "", e.part_number or "")


def ensure_component(graph: FbsGraph, component_name: str) -> tuple[int, dict[FbsClass, int]]:
    """Create the component root and its three class nodes if missing."""
    component_name = component_name.strip()
    if not component_name:
        raise ValueError("component name must be non-empty")
    root = graph.component_id(component_name)
    if root is None:
        root = graph._add_node(COMPONENT, {"name": component_name}).id
    classes: dict[FbsClass, int] = {}
    existing = {graph.nodes[c].label: c for c in graph.children(root)}
    for label in CLASS_LABELS:
        node_id = existing.get(label)
        if node_id is None:
            node_id = graph._add_node(label, {}).id
            graph._add_edge(Edge(root, node_id, HAS))
        classes[FbsClass(label)] = node_id
    return root, classes


def find_value_node(graph: FbsGraph, property_name_node: int, shape: ValueShape) -> int | None:
    node = graph.nodes.get(property_name_node)
    if node is None or node.label != PROPERTY_NAME:
        raise ValueError(f"node {property_name_node} is not a PropertyName node")
    return graph._values.get((property_name_node, _value_key(encode_value(shape))))


def upsert_model(graph: FbsGraph, identity: ModelIdentity, report: ClassificationReport) -> MutationSummary:
    """Add one model's classified properties, reusing existing nodes.

    Raises :class:`GraphConflictError` before touching the graph when the
    part number already belongs to another model name.
    """
    owner = graph._part_owner.get(identity.part_number)
    if owner is not None and owner != identity.model_name:
        raise GraphConflictError(
            f"part number {identity.part_number!r} already belongs to model {owner!r}, "
            f"not {identity.model_name!r}"
        )

    summary = MutationSummary()
    before_nodes, before_edges = len(graph.nodes), len(graph.edges)
    _, classes = ensure_component(graph, identity.component_name)
    for prop in report.properties:
        if prop.fbs_class is FbsClass.UNKNOWN:
            summary.skipped_unknown += 1
            continue
        class_node = classes[prop.fbs_class]
        name_id = graph._names.get((class_node, prop.name))
        if name_id is None:
            name_id = graph._add_node(PROPERTY_NAME, {"name": prop.name}).id
            graph._add_edge(Edge(class_node, name_id, YIELDS))
        for shape in prop.shapes:
            value_id = find_value_node(graph, name_id, shape)
            reused = value_id is not None
            if value_id is None:
                value_id = graph._add_node(PROPERTY_VALUE, encode_value(shape)).id
            if graph._add_edge(Edge(name_id, value_id, HAS, identity.model_name, identity.part_number)) and reused:
                summary.values_reused += 1
    summary.nodes_created = len(graph.nodes) - before_nodes
    summary.edges_created = len(graph.edges) - before_edges
    return summary


# -- statistics and schema checks ------------------------------------------------------


def graph_stats(graph: FbsGraph) -> dict[str, Any]:
    per_class = {label: 0 for label in CLASS_LABELS}
    classes_by_name: dict[tuple[int, str], set[str]] = defaultdict(set)
    for node in graph.nodes_with_label(PROPERTY_NAME):
        for e in graph.in_edges(node.id, YIELDS):
            class_node = graph.nodes[e.src]
            per_class[class_node.label] += 1
            for root_edge in graph.in_edges(class_node.id, HAS):
                classes_by_name[(root_edge.src, node.attrs["name"])].add(class_node.label)
    models = {(e.model_name, e.part_number) for _, e, _ in graph.value_edges()}
    multi = sorted(
        f"{graph.nodes[root].attrs['name']}/{name}" for (root, name), labels in classes_by_name.items() if len(labels) > 1
    )
    return {
        "components": sum(1 for _ in graph.nodes_with_label(COMPONENT)),
        "models": len(models),
        "property_names": per_class,
        "value_nodes": sum(1 for _ in graph.nodes_with_label(PROPERTY_VALUE)),
        "edges": len(graph.edges),
        "multi_class_property_names": multi,
    }


_EDGE_TYPES = {
    (COMPONENT, HAS): CLASS_LABELS,
    (FbsClass.FUNCTION.value, YIELDS): (PROPERTY_NAME,),
    (FbsClass.BEHAVIOUR.value, YIELDS): (PROPERTY_NAME,),
    (FbsClass.STRUCTURE.value, YIELDS): (PROPERTY_NAME,),
    (PROPERTY_NAME, HAS): (PROPERTY_VALUE,),
}


def check_schema(graph: FbsGraph) -> list[str]:
    """List every broken graph invariant; an empty list means the graph is valid."""
    problems: list[str] = []
    for e in graph.edges:
        if e.src not in graph.nodes or e.dst not in graph.nodes:
            problems.append(f"dangling edge {e}")
            continue
        src, dst = graph.nodes[e.src], graph.nodes[e.dst]
        if dst.label not in _EDGE_TYPES.get((src.label, e.label), ()):
            problems.append(f"edge {src.label}-{e.label}->{dst.label} is not a schema edge")
        wants_attrs = src.label == PROPERTY_NAME
        if wants_attrs != (e.model_name is not None and e.part_number is not None):
            problems.append(f"edge {e} has wrong attributes")

    for node in graph.nodes.values():
        incoming = graph.in_edges(node.id)
        if node.label == COMPONENT:
            if incoming:
                problems.append(f"component {node.id} has incoming edges")
            kids = sorted(graph.nodes[c].label for c in graph.children(node.id))
            if kids != sorted(CLASS_LABELS):
                problems.append(f"component {node.id} has class children {kids}")
        elif node.label in CLASS_LABELS or node.label == PROPERTY_NAME:
            parents = {e.src for e in incoming}
            if len(parents) != 1:
                problems.append(f"{node.label} node {node.id} has {len(parents)} parents")
        elif node.label == PROPERTY_VALUE:
            if not incoming:
                problems.append(f"value node {node.id} has no incoming HAS edge")
            try:
                decode_value(node.attrs)
            except ValueError as exc:
                problems.append(str(exc))
        else:
            problems.append(f"node {node.id} has unknown label {node.label!r}")

    names = defaultdict(list)
    for node in graph.nodes_with_label(PROPERTY_NAME):
        keys = [_value_key(graph.nodes[c].attrs) for c in graph.children(node.id)]
        if len(keys) != len(set(keys)):
            problems.append(f"property name {node.attrs['name']!r} has duplicate value nodes")
        for e in graph.in_edges(node.id, YIELDS):
            names[(e.src, node.attrs["name"])].append(node.id)
    for (class_id, name), ids in names.items():
        if len(ids) > 1:
            problems.append(f"property name {name!r} repeated under class node {class_id}")
    components = [n.attrs["name"] for n in graph.nodes_with_label(COMPONENT)]
    if len(components) != len(set(components)):
        problems.append("duplicate component names")
    return problems


# -- persistence -------------------------------------------------------------------


def _attrs_to_json(attrs: dict[str, Any]) -> dict[str, Any]:
    return {k: format_number(v) if isinstance(v, Decimal) else v for k, v in sorted(attrs.items())}


def graph_to_dict(graph: FbsGraph) -> dict[str, Any]:
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "next_id": graph.next_id,
        "nodes": [
            {"id": n.id, "label": n.label, "attrs": _attrs_to_json(n.attrs)} for n in sorted(graph.nodes.values(), key=lambda n: n.id)
        ],
        "edges": [{"from": e.src, "to": e.dst, "label": e.label, "attrs": e.attrs} for e in graph.edges],
    }


def graph_from_dict(doc: Any) -> FbsGraph:
    if not isinstance(doc, dict):
        raise GraphFormatError("graph document must be a JSON object")
    if doc.get("format") != FORMAT_NAME:
        raise GraphFormatError(f"not a graph file (format={doc.get('format')!r})")
    if doc.get("version") != FORMAT_VERSION:
        raise GraphFormatError(f"unsupported graph version {doc.get('version')!r} (expected {FORMAT_VERSION})")
    graph = FbsGraph()
    try:
        for i, raw in enumerate(doc["nodes"]):
            label = raw["label"]
            if label not in LABELS:
                raise GraphFormatError(f"nodes[{i}]: unknown label {label!r}")
            attrs = dict(raw.get("attrs", {}))
            for key in NUMERIC_ATTRS:
                if key in attrs:
                    attrs[key] = parse_number(str(attrs[key]))
            graph._add_node(label, attrs, int(raw["id"]))
        for i, raw in enumerate(doc["edges"]):
            attrs = raw.get("attrs") or {}
            edge = Edge(int(raw["from"]), int(raw["to"]), raw["label"], attrs.get("model_name"), attrs.get("part_number"))
            if edge.src not in graph.nodes or edge.dst not in graph.nodes:
                raise GraphFormatError(f"edges[{i}]: endpoint missing")
            graph._add_edge(edge)
        graph.next_id = max(graph.next_id, int(doc["next_id"]))
    except GraphFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphFormatError(f"malformed graph document: {exc!r}") from None
    return graph


def save_graph(graph: FbsGraph, destination: str | Path) -> None:
    """Write the graph as JSON, atomically (temp file + rename)."""
    destination = Path(destination)
    destination.parent.mkdir(parents=True, exist_ok=True)
    payload = json.dumps(graph_to_dict(graph), ensure_ascii=False, indent=1)
    fd, tmp = tempfile.mkstemp(prefix=destination.name + ".", suffix=".tmp", dir=destination.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(payload + "\n")
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, destination)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_graph(source: str | Path) -> FbsGraph:
    text = Path(source).read_text("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"{source}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return graph_from_dict(doc)
