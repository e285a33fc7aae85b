"""Part-selection queries.

Grammar (case-insensitive keywords)::

    Give me a <model type> that conforms to these specifications :- <clause>, <clause>, ...

    clause := <name> <op> <value>
            | <name> between <number> and <number> [unit]
    op     := "equal to" | "=" | "lesser than or equal to" | "<=" | "≤"
            | "greater than or equal to" | ">=" | "≥" | "lesser than" | "<"
            | "greater than" | ">"            ("less" is accepted for "lesser")

Matching treats the stored value and the constraint as sets of numbers and
succeeds when they overlap; ``between`` is inclusive.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal
from typing import Literal

from .kgstore import FbsGraph, decode_value
from .shapes import DualLimit, Fixed, SingleLimit, Text, ValueShape, detect_value_shape, format_number, parse_number

__all__ = [
    "Constraint",
    "QueryError",
    "QuerySpec",
    "constraint_satisfied",
    "emit_graph_query_text",
    "execute_query",
    "parse_query",
    "query_diagnostics",
    "render_query",
]

Kind = Literal["single-valued", "single-limit", "dual-limit"]
Op = Literal["eq", "le", "lt", "ge", "gt", "between"]


class QueryError(ValueError):
    pass


def _norm_name(name: str) -> str:
    return " ".join(name.split()).casefold()


def _norm_unit(unit: str | None) -> str | None:
    return None if unit is None else "".join(unit.split()).casefold()


@dataclass(frozen=True)
class Constraint:
    property_name: str
    kind: Kind
    op: Op
    values: tuple[Decimal | str, ...]
    unit: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(self.values))
        if self.kind == "dual-limit":
            if self.op != "between" or len(self.values) != 2:
                raise QueryError("a dual-limit constraint needs op 'between' and two numbers")
            lo, hi = self.values
            if not isinstance(lo, Decimal) or not isinstance(hi, Decimal):
                raise QueryError("'between' needs numeric bounds")
            if lo > hi:
                object.__setattr__(self, "values", (hi, lo))
        elif self.kind == "single-limit":
            if self.op not in ("le", "lt", "ge", "gt") or len(self.values) != 1 or not isinstance(self.values[0], Decimal):
                raise QueryError("a single-limit constraint needs one of le/lt/ge/gt and one number")
        elif self.kind == "single-valued":
            if self.op != "eq" or len(self.values) != 1:
                raise QueryError("a single-valued constraint needs op 'eq' and one value")
        else:
            raise QueryError(f"unknown constraint kind {self.kind!r}")

    @property
    def is_numeric(self) -> bool:
        return isinstance(self.values[0], Decimal)


@dataclass(frozen=True)
class QuerySpec:
    model_type: str
    constraints: tuple[Constraint, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if not self.model_type.strip():
            raise QueryError("model type is empty")
        if not self.constraints:
            raise QueryError("query has no constraints")
        seen: set[str] = set()
        for c in self.constraints:
            key = _norm_name(c.property_name)
            if key in seen:
                raise QueryError(f"property {c.property_name!r} is constrained twice")
            seen.add(key)


# -- parsing -------------------------------------------------------------------------

_HEAD_RE = re.compile(
    r"^\s*give\s+me\s+an?\s+(?P<type>.+?)\s+that\s+conforms?\s+to\s+(?:these|the\s+following)\s+specifications?\s*:-?\s*(?P<body>.*?)\s*\.?\s*$",
    re.IGNORECASE | re.DOTALL,
)
_NUM = r"[+\-−]?(?:\d+(?:\.\d*)?|\.\d+)"
_BETWEEN_RE = re.compile(rf"^(?P<name>.+?)\s+between\s+(?P<a>{_NUM})\s*(?:and|&)\s*(?P<b>{_NUM})\s*(?P<unit>[^\d\s][^\d]*)?$", re.IGNORECASE)

_WORD_OPS = [
    ("lesser than or equal to", "le"),
    ("less than or equal to", "le"),
    ("greater than or equal to", "ge"),
    ("lesser than", "lt"),
    ("less than", "lt"),
    ("greater than", "gt"),
    ("equal to", "eq"),
    ("equals", "eq"),
]
_SYMBOL_OPS = [("<=", "le"), (">=", "ge"), ("≤", "le"), ("≥", "ge"), ("=", "eq"), ("<", "lt"), (">", "gt")]
_OP_LOOKUP = {phrase: op for phrase, op in _WORD_OPS + _SYMBOL_OPS}
_CLAUSE_RE = re.compile(
    r"^(?P<name>.+?)(?:\s+(?P<wop>"
    + "|".join(re.escape(p) for p, _ in _WORD_OPS)
    + r")\s+|\s*(?P<sop>"
    + "|".join(re.escape(p) for p, _ in _SYMBOL_OPS)
    + r")\s*)(?P<value>.+)$",
    re.IGNORECASE,
)


def _parse_clause(clause: str) -> Constraint:
    m = _BETWEEN_RE.match(clause)
    if m:
        unit = (m["unit"] or "").strip() or None
        return Constraint(m["name"].strip(), "dual-limit", "between", (parse_number(m["a"]), parse_number(m["b"])), unit)
    m = _CLAUSE_RE.match(clause)
    if not m:
        raise QueryError(f"cannot parse clause {clause!r}: expected '<name> <operator> <value>'")
    name = m["name"].strip()
    op = _OP_LOOKUP[(m["wop"] or m["sop"]).lower()]
    raw_value = m["value"].strip()
    shape = detect_value_shape(raw_value)
    if op == "eq":
        if isinstance(shape, Fixed):
            return Constraint(name, "single-valued", "eq", (shape.value,), shape.unit)
        if isinstance(shape, Text):
            return Constraint(name, "single-valued", "eq", (" ".join(raw_value.split()),))
        raise QueryError(f"clause {clause!r}: '=' needs a single number or a text value")
    if not isinstance(shape, Fixed):
        raise QueryError(f"clause {clause!r}: operator needs a single number")
    return Constraint(name, "single-limit", op, (shape.value,), shape.unit)


def parse_query(text: str) -> QuerySpec:
    m = _HEAD_RE.match(text)
    if not m:
        raise QueryError("query must look like 'Give me a <type> that conforms to these specifications :- <clauses>'")
    body = m["body"].strip()
    if not body:
        raise QueryError("query has no constraint clauses")
    clauses = [c.strip() for c in body.split(",")]
    if any(not c for c in clauses):
        raise QueryError("empty clause (stray comma?)")
    return QuerySpec(" ".join(m["type"].split()), tuple(_parse_clause(c) for c in clauses))


_RENDER_OPS = {"eq": "=", "le": "<=", "lt": "<", "ge": ">=", "gt": ">"}


def _render_value(value: Decimal | str) -> str:
    return format_number(value) if isinstance(value, Decimal) else value


def render_query(spec: QuerySpec) -> str:
    """Canonical sentence for a spec; ``parse_query`` reads it back unchanged."""
    clauses = []
    for c in spec.constraints:
        unit = f" {c.unit}" if c.unit else ""
        if c.op == "between":
            lo, hi = c.values
            clauses.append(f"{c.property_name} between {_render_value(lo)} and {_render_value(hi)}{unit}")
        else:
            clauses.append(f"{c.property_name} {_RENDER_OPS[c.op]} {_render_value(c.values[0])}{unit}")
    return f"Give me a {spec.model_type} that conforms to these specifications :- " + ", ".join(clauses)


# -- matching ------------------------------------------------------------------------

# interval: (lo, lo_closed, hi, hi_closed); None bound = unbounded
Interval = tuple[Decimal | None, bool, Decimal | None, bool]


def _shape_interval(shape: ValueShape) -> Interval:
    if isinstance(shape, Fixed):
        return (shape.value, True, shape.value, True)
    if isinstance(shape, SingleLimit):
        if shape.bound == "upper":
            return (None, False, shape.limit, True)
        return (shape.limit, True, None, False)
    if isinstance(shape, DualLimit):
        return (shape.lower, True, shape.upper, True)
    raise TypeError("text has no interval")


def _constraint_interval(c: Constraint) -> Interval:
    v = c.values[0]
    return {
        "eq": (v, True, v, True),
        "le": (None, False, v, True),
        "lt": (None, False, v, False),
        "ge": (v, True, None, False),
        "gt": (v, False, None, False),
        "between": (c.values[0], True, c.values[-1], True),
    }[c.op]


def _overlap(a: Interval, b: Interval) -> bool:
    a_lo, a_lo_c, a_hi, a_hi_c = a
    b_lo, b_lo_c, b_hi, b_hi_c = b
    # tighter lower bound
    if a_lo is None or (b_lo is not None and (b_lo > a_lo or (b_lo == a_lo and not b_lo_c))):
        lo, lo_c = b_lo, b_lo_c
    else:
        lo, lo_c = a_lo, a_lo_c
    if a_hi is None or (b_hi is not None and (b_hi < a_hi or (b_hi == a_hi and not b_hi_c))):
        hi, hi_c = b_hi, b_hi_c
    else:
        hi, hi_c = a_hi, a_hi_c
    if lo is None or hi is None:
        return True
    return lo < hi or (lo == hi and lo_c and hi_c)


def constraint_satisfied(shape: ValueShape, c: Constraint) -> bool:
    if isinstance(shape, Text) or not c.is_numeric:
        if isinstance(shape, Text) and not c.is_numeric:
            return _norm_name(shape.raw) == _norm_name(c.values[0])
        return False
    unit_a, unit_b = _norm_unit(shape.unit), _norm_unit(c.unit)
    if unit_a is not None and unit_b is not None and unit_a != unit_b:
        return False
    return _overlap(_shape_interval(shape), _constraint_interval(c))


# -- execution -----------------------------------------------------------------------


def _matching_models(graph: FbsGraph, c: Constraint) -> set[tuple[str, str]]:
    key = _norm_name(c.property_name)
    hits: set[tuple[str, str]] = set()
    verdicts: dict[int, bool] = {}
    for name_node, edge, value_node in graph.value_edges():
        if _norm_name(name_node.attrs["name"]) != key:
            continue
        ok = verdicts.get(value_node.id)
        if ok is None:
            ok = verdicts[value_node.id] = constraint_satisfied(decode_value(value_node.attrs), c)
        if ok:
            hits.add((edge.model_name, edge.part_number))
    return hits


def execute_query(graph: FbsGraph, spec: QuerySpec) -> list[str]:
    """Sorted, de-duplicated part numbers of every model meeting all constraints."""
    candidates: set[tuple[str, str]] | None = None
    for c in spec.constraints:
        hits = _matching_models(graph, c)
        candidates = hits if candidates is None else candidates & hits
        if not candidates:
            return []
    needle = spec.model_type.casefold()
    return sorted({part for model, part in candidates or () if needle in model.casefold()})


def query_diagnostics(graph: FbsGraph, spec: QuerySpec) -> list[str]:
    """One message per constraint whose property name is absent from the graph."""
    present = {_norm_name(n.attrs["name"]) for n in graph.nodes_with_label("PropertyName")}
    return [
        f"no property named {c.property_name!r} in the graph"
        for c in spec.constraints
        if _norm_name(c.property_name) not in present
    ]


# -- Cypher-dialect emission ---------------------------------------------------------------


def _lit(value: Decimal | str) -> str:
    if isinstance(value, Decimal):
        return format_number(value)
    return "'" + value.replace("\\", "\\\\").replace("'", "\\'") + "'"


def _cmp(lhs: str, op: str, bound: Decimal) -> str:
    return f"{lhs} {op} {format_number(bound)}"


def _value_condition(v: str, c: Constraint) -> list[str]:
    if not c.is_numeric:
        return [f"toLower({v}.text) = toLower({_lit(c.values[0])})"]
    lo, lo_c, hi, hi_c = _constraint_interval(c)
    fixed, lower, upper = f"toFloat({v}.value)", f"toFloat({v}.lower_limit_value)", f"toFloat({v}.upper_limit_value)"
    # stored number/limit must reach into the constraint interval
    fixed_terms = [f"{v}.value IS NOT NULL"]
    if lo is not None:
        fixed_terms.append(_cmp(fixed, ">=" if lo_c else ">", lo))
    if hi is not None:
        fixed_terms.append(_cmp(fixed, "<=" if hi_c else "<", hi))
    range_terms = [f"{v}.value IS NULL", f"({v}.lower_limit_value IS NOT NULL OR {v}.upper_limit_value IS NOT NULL)"]
    if hi is not None:
        range_terms.append(f"({v}.lower_limit_value IS NULL OR {_cmp(lower, '<=' if hi_c else '<', hi)})")
    if lo is not None:
        range_terms.append(f"({v}.upper_limit_value IS NULL OR {_cmp(upper, '>=' if lo_c else '>', lo)})")
    conds = [f"(({' AND '.join(fixed_terms)}) OR ({' AND '.join(range_terms)}))"]
    if c.unit is not None:
        conds.append(f"({v}.unit IS NULL OR toLower({v}.unit) = toLower({_lit(c.unit)}))")
    return conds


def emit_graph_query_text(spec: QuerySpec) -> str:
    """Render a QuerySpec as a Cypher query returning matching part numbers.

    The output is for use against an external graph database; it is not
    executed here.
    """
    n = len(spec.constraints)
    lines = ["// part-selection query: " + render_query(spec)]
    patterns = [f"(n{i}:PropertyName)-[r{i}:HAS]->(v{i}:PropertyValue)" for i in range(n)]
    lines.append("MATCH " + ",\n      ".join(patterns))

    conditions: list[str] = []
    for i, c in enumerate(spec.constraints):
        conditions.append(f"// {i + 1}. {c.property_name}")
        group = [f"toLower(n{i}.name) = toLower({_lit(c.property_name)})", *_value_condition(f"v{i}", c)]
        conditions.append(" AND ".join(group))
    conditions.append("// same model across every matched HAS relationship")
    same = [f"r{i}.model_name = r0.model_name AND r{i}.part_number = r0.part_number" for i in range(1, n)]
    conditions.append(" AND ".join(same) if same else "true")
    conditions.append("// model type must be a substring of the model name")
    conditions.append(f"toLower(r0.model_name) CONTAINS toLower({_lit(spec.model_type)})")

    lines.append("WHERE" + _join_conditions(conditions))
    lines.append("RETURN DISTINCT r0.part_number AS part_number")
    lines.append("ORDER BY part_number;")
    return "\n".join(lines) + "\n"


def _join_conditions(parts: list[str]) -> str:
    out: list[str] = []
    first = True
    for part in parts:
        if part.startswith("//"):
            out.append(f"  {part}")
        elif first:
            out.append(f"  ({part})")
            first = False
        else:
            out.append(f"  AND ({part})")
    return "\n" + "\n".join(out)
