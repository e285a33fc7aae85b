from __future__ import annotations

import json
import random
from decimal import Decimal

import pytest

from conftest import FEMALE_DST, MALE_DST, build_graph
from fbskg.classify import FbsClass, classify_sheet
from fbskg.ingest import ModelIdentity, load_datasheet, parse_datasheet
from fbskg.kgstore import (
    HAS,
    PROPERTY_NAME,
    PROPERTY_VALUE,
    Edge,
    FbsGraph,
    GraphConflictError,
    GraphFormatError,
    check_schema,
    decode_value,
    encode_value,
    ensure_component,
    find_value_node,
    graph_stats,
    graph_to_dict,
    load_graph,
    save_graph,
    upsert_model,
)
from fbskg.shapes import DualLimit, Fixed, SingleLimit, Text
from synth import random_sheet


def expected_counts(reports):
    """Node and edge totals derived from set semantics alone."""
    comps, names, values, has = set(), set(), set(), set()
    for ident, report in reports:
        comps.add(ident.component_name)
        for p in report.properties:
            if p.fbs_class is FbsClass.UNKNOWN:
                continue
            key = (ident.component_name, p.fbs_class, p.name)
            names.add(key)
            for s in p.shapes:
                values.add((*key, s))
                has.add((*key, s, ident.model_name, ident.part_number))
    nodes = 4 * len(comps) + len(names) + len(values)
    edges = 3 * len(comps) + len(names) + len(has)
    return nodes, edges


def test_shared_value_single_node(two_model_graph):
    g = two_model_graph
    copper = [n for n in g.nodes_with_label(PROPERTY_VALUE) if n.attrs.get("text") == "Copper alloy"]
    assert len(copper) == 1
    edges = g.in_edges(copper[0].id, HAS)
    assert sorted(e.part_number for e in edges) == ["09 11 000 6104", "09 15 000 6224"]
    assert check_schema(g) == []


def test_counts_match_set_oracle(rules):
    reports = []
    g = FbsGraph()
    for path in (MALE_DST, FEMALE_DST):
        sheet = load_datasheet(path)
        report = classify_sheet(sheet, rules)
        upsert_model(g, sheet.identity, report)
        reports.append((sheet.identity, report))
    assert (len(g.nodes), len(g.edges)) == expected_counts(reports)


@pytest.mark.parametrize("seed", range(20))
def test_random_corpus_counts_and_schema(rules, seed):
    rng = random.Random(seed)
    g, reports = FbsGraph(), []
    for i in range(15):
        sheet = parse_datasheet(random_sheet(rng, i)[0])
        report = classify_sheet(sheet, rules)
        upsert_model(g, sheet.identity, report)
        reports.append((sheet.identity, report))
    assert check_schema(g) == []
    assert (len(g.nodes), len(g.edges)) == expected_counts(reports)
    for ident, report in reports:
        assert upsert_model(g, ident, report).is_noop


def test_first_upsert_summary(male_sheet, rules):
    g = FbsGraph()
    s = upsert_model(g, male_sheet.identity, classify_sheet(male_sheet, rules))
    assert s.to_dict() == {"nodes_created": 36, "edges_created": 35, "values_reused": 0, "skipped_unknown": 1}


def test_conflict_leaves_graph_untouched(male_sheet, rules):
    g = build_graph(MALE_DST)
    before = graph_to_dict(g)
    other = ModelIdentity("Hood", "Another model", male_sheet.identity.part_number)
    with pytest.raises(GraphConflictError):
        upsert_model(g, other, classify_sheet(male_sheet, rules))
    assert graph_to_dict(g) == before


def test_ensure_component_idempotent():
    g = FbsGraph()
    first = ensure_component(g, "Hood")
    assert ensure_component(g, " Hood ") == first
    assert len(g.nodes) == 4
    with pytest.raises(ValueError):
        ensure_component(g, "  ")


def test_find_value_node(two_model_graph):
    g = two_model_graph
    pn = next(n.id for n in g.nodes_with_label(PROPERTY_NAME) if n.attrs["name"] == "Mating cycles")
    assert find_value_node(g, pn, SingleLimit("lower", Decimal("500.0"))) is not None
    assert find_value_node(g, pn, SingleLimit("lower", Decimal("501"))) is None
    with pytest.raises(ValueError):
        find_value_node(g, 0, Text("x"))


@pytest.mark.parametrize(
    "shape", [Fixed(Decimal("35"), "mm²"), SingleLimit("upper", Decimal("0.3"), "mΩ"), DualLimit(Decimal(-40), Decimal(125), "°C"), Text("Male")]
)
def test_value_encoding_round_trip(shape):
    assert decode_value(encode_value(shape)) == shape


def test_duplicate_edge_rejected():
    g = FbsGraph()
    root, _ = ensure_component(g, "C")
    n = len(g.edges)
    assert not g._add_edge(g.out_edges(root)[0])
    assert len(g.edges) == n


def test_stats(two_model_graph):
    s = graph_stats(two_model_graph)
    assert s["components"] == 1 and s["models"] == 2
    assert s["property_names"] == {"Function": 4, "Behaviour": 12, "Structure": 2}
    assert s["value_nodes"] == 25 and s["edges"] == 55


def test_schema_detects_problems(two_model_graph):
    g = two_model_graph.copy()
    pv = next(n.id for n in g.nodes_with_label(PROPERTY_VALUE))
    g._add_edge(Edge(0, pv, HAS))
    assert check_schema(g)


class TestPersistence:
    def test_round_trip(self, tmp_path, two_model_graph):
        path = tmp_path / "g.json"
        save_graph(two_model_graph, path)
        loaded = load_graph(path)
        assert loaded == two_model_graph
        assert graph_to_dict(loaded) == graph_to_dict(two_model_graph)
        assert not list(tmp_path.glob("*.tmp"))

    def test_decimal_strings(self, tmp_path, two_model_graph):
        path = tmp_path / "g.json"
        save_graph(two_model_graph, path)
        doc = json.loads(path.read_text("utf-8"))
        milli = [n["attrs"] for n in doc["nodes"] if n["attrs"].get("unit") == "mΩ"]
        assert {"unit": "mΩ", "upper_limit_value": "0.3"} in milli

    def test_continue_after_load(self, tmp_path, female_sheet, rules):
        path = tmp_path / "g.json"
        save_graph(build_graph(MALE_DST), path)
        g = load_graph(path)
        upsert_model(g, female_sheet.identity, classify_sheet(female_sheet, rules))
        assert g == build_graph(MALE_DST, FEMALE_DST)

    @pytest.mark.parametrize(
        "doc, match",
        [
            ({"format": "fbskg-graph", "version": 99, "nodes": [], "edges": [], "next_id": 0}, "version"),
            ({"format": "other", "version": 1}, "format"),
            ({"format": "fbskg-graph", "version": 1, "nodes": [{"id": 0}], "edges": [], "next_id": 1}, "malformed"),
            ({"format": "fbskg-graph", "version": 1, "nodes": [], "edges": [{"from": 0, "to": 1, "label": "HAS"}], "next_id": 0}, "endpoint"),
        ],
    )
    def test_bad_documents(self, tmp_path, doc, match):
        path = tmp_path / "g.json"
        path.write_text(json.dumps(doc), "utf-8")
        with pytest.raises(GraphFormatError, match=match):
            load_graph(path)

    def test_bad_json_location(self, tmp_path):
        path = tmp_path / "g.json"
        path.write_text('{\n  "nodes": [,]\n}', "utf-8")
        with pytest.raises(GraphFormatError, match="line 2"):
            load_graph(path)
