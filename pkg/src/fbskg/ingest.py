"""Datasheet ingestion.

Turns a two-column datasheet table (canonical ``.dst`` text or the equivalent
JSON document) into a :class:`PropertySheet`. Noise lines are dropped first.
Orphan value rows are then folded into the property above them, after which
repeated property names get ``-2``, ``-3`` suffixes.

``.dst`` layout::

    @component Contact
    @model Han TC100 male contact 35 mm² (Han K6/6)
    @part 09 11 000 6104

    # Technical characteristics
    Operating current | ≤100 A
    Specifications | DIN EN 61984
    | UL 1977
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, NamedTuple, Sequence

__all__ = [
    "ConfigError",
    "IngestError",
    "ModelIdentity",
    "PropertyRecord",
    "PropertySheet",
    "RawRow",
    "associate_orphans",
    "default_noise_patterns",
    "disambiguate_duplicates",
    "load_datasheet",
    "load_noise_patterns",
    "parse_datasheet",
    "parse_datasheet_object",
    "render_datasheet",
    "sheet_to_object",
    "strip_noise",
]

DIRECTIVES = ("component", "model", "part")


class ConfigError(ValueError):
    """Bad user-supplied configuration (patterns, rule files)."""


class IngestError(ValueError):
    """A datasheet could not be parsed. ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class ModelIdentity:
    component_name: str
    model_name: str
    part_number: str

    def __post_init__(self) -> None:
        for name in ("component_name", "model_name", "part_number"):
            if not getattr(self, name).strip():
                raise IngestError(f"empty {name} in model identity")


@dataclass(frozen=True)
class PropertyRecord:
    section: str
    name: str
    values: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(self.values))


@dataclass(frozen=True)
class PropertySheet:
    identity: ModelIdentity
    records: tuple[PropertyRecord, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "records", tuple(self.records))

    def get(self, name: str) -> PropertyRecord | None:
        for record in self.records:
            if record.name == name:
                return record
        return None


class RawRow(NamedTuple):
    """One table row before orphan repair. Empty ``name`` marks an orphan."""

    name: str
    value: str
    section: str = ""
    line: int | None = None


# -- noise -----------------------------------------------------------------


def default_noise_patterns() -> list[str]:
    text = resources.files("fbskg.config").joinpath("noise_patterns.txt").read_text("utf-8")
    return _pattern_lines(text)


def load_noise_patterns(path: str | Path) -> list[str]:
    """Read a pattern file: one regex per line, ``#`` starts a comment line."""
    return _pattern_lines(Path(path).read_text("utf-8"))


def _pattern_lines(text: str) -> list[str]:
    return [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]


def _compile_patterns(patterns: Iterable[str]) -> list[re.Pattern[str]]:
    compiled = []
    for pattern in patterns:
        try:
            compiled.append(re.compile(pattern))
        except re.error as exc:
            raise ConfigError(f"invalid noise pattern {pattern!r}: {exc}") from None
    return compiled


def strip_noise(lines: Sequence[str], noise_patterns: Sequence[str] | None = None) -> list[str]:
    """Drop every line that fully matches one of ``noise_patterns``.

    Matching is done on the whitespace-trimmed line. ``None`` selects the
    shipped defaults (pagination footers and page headers).
    """
    if noise_patterns is None:
        noise_patterns = default_noise_patterns()
    compiled = _compile_patterns(noise_patterns)
    return [ln for ln in lines if not _is_noise(ln, compiled)]


def _is_noise(line: str, compiled: list[re.Pattern[str]]) -> bool:
    stripped = line.strip()
    return any(p.fullmatch(stripped) for p in compiled)


# -- orphan repair and suffixing ----------------------------------------------


def associate_orphans(rows: Iterable[RawRow | tuple]) -> list[PropertyRecord]:
    """Fold orphan rows into the nearest named row above them.

    Rows may be :class:`RawRow` instances or plain ``(name, value)`` /
    ``(name, value, section)`` tuples. An orphan never crosses a section
    boundary.
    """
    building: list[tuple[str, str, list[str], int | None]] = []
    for index, row in enumerate(rows):
        row = RawRow(*row)
        line = row.line if row.line is not None else index + 1
        name, value = row.name.strip(), row.value.strip()
        if name:
            building.append((row.section, name, [value] if value else [], line))
            continue
        if not value:
            raise IngestError("row has neither a name nor a value", line)
        if not building or building[-1][0] != row.section:
            raise IngestError(f"orphan value {value!r} has no property row above it in its section", line)
        building[-1][2].append(value)

    records = []
    for section, name, values, line in building:
        if not values:
            raise IngestError(f"property {name!r} has no values", line)
        records.append(PropertyRecord(section, name, tuple(values)))
    return records


def disambiguate_duplicates(records: Iterable[PropertyRecord]) -> list[PropertyRecord]:
    """Rename repeated names: the second ``X`` becomes ``X-2``, the third ``X-3``.

    A generated name that collides with a name already in the sheet is bumped
    further, so the result always has pairwise distinct names.
    """
    records = list(records)
    taken = {r.name.strip() for r in records}
    seen: dict[str, int] = {}
    assigned: set[str] = set()
    out = []
    for record in records:
        name = record.name.strip()
        if name not in assigned:
            seen[name] = 1
            assigned.add(name)
            out.append(PropertyRecord(record.section, name, record.values))
            continue
        k = seen[name]
        while True:
            k += 1
            candidate = f"{name}-{k}"
            if candidate not in assigned and candidate not in taken:
                break
        seen[name] = k
        assigned.add(candidate)
        out.append(PropertyRecord(record.section, candidate, record.values))
    return out


# -- file formats -------------------------------------------------------------


def parse_datasheet(text: str, noise_patterns: Sequence[str] | None = None) -> PropertySheet:
    """Parse canonical ``.dst`` text into a :class:`PropertySheet`."""
    if noise_patterns is None:
        noise_patterns = default_noise_patterns()
    compiled = _compile_patterns(noise_patterns)

    identity: dict[str, str] = {}
    section = ""
    rows: list[RawRow] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or _is_noise(line, compiled):
            continue
        if line.startswith("@"):
            key, _, value = line[1:].partition(" ")
            if key not in DIRECTIVES:
                raise IngestError(f"unknown directive @{key}", lineno)
            if key in identity:
                raise IngestError(f"duplicate directive @{key}", lineno)
            if not value.strip():
                raise IngestError(f"directive @{key} has no value", lineno)
            identity[key] = value.strip()
        elif line.startswith("# ") or line == "#":
            section = line[1:].strip()
        elif "|" in line:
            name, _, value = line.partition("|")
            name, value = name.strip(), value.strip()
            # a footer captured in the value column of an orphan row
            if not name and _is_noise(value, compiled):
                continue
            rows.append(RawRow(name, value, section, lineno))
        else:
            raise IngestError(f"malformed row (no '|' separator): {line!r}", lineno)

    return _build_sheet(identity, rows)


def parse_datasheet_object(doc: dict[str, Any], noise_patterns: Sequence[str] | None = None) -> PropertySheet:
    """Parse the JSON-style datasheet document.

    Rows are numbered in document order (1-based) for error messages.
    """
    if not isinstance(doc, dict):
        raise IngestError("datasheet document must be an object")
    if noise_patterns is None:
        noise_patterns = default_noise_patterns()
    compiled = _compile_patterns(noise_patterns)

    identity = {k: str(doc[k]).strip() for k in DIRECTIVES if doc.get(k) is not None}
    rows: list[RawRow] = []
    lineno = 0
    for section in doc.get("sections", []):
        heading = str(section.get("heading", "")).strip()
        for row in section.get("rows", []):
            lineno += 1
            name = str(row.get("name") or "").strip()
            value = str(row.get("value") or "").strip()
            if _is_noise(f"{name} | {value}", compiled) or (not name and _is_noise(value, compiled)):
                continue
            rows.append(RawRow(name, value, heading, lineno))
    return _build_sheet(identity, rows)


def _build_sheet(identity: dict[str, str], rows: list[RawRow]) -> PropertySheet:
    missing = [f"@{k}" for k in DIRECTIVES if not identity.get(k)]
    if missing:
        raise IngestError(f"missing identity directive(s): {', '.join(missing)}")
    ident = ModelIdentity(identity["component"], identity["model"], identity["part"])
    records = disambiguate_duplicates(associate_orphans(rows))
    return PropertySheet(ident, tuple(records))


def load_datasheet(path: str | Path, noise_patterns: Sequence[str] | None = None) -> PropertySheet:
    """Load a ``.dst`` or ``.json`` datasheet file."""
    path = Path(path)
    text = path.read_text("utf-8")
    if path.suffix.lower() == ".json":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise IngestError(f"{path}: invalid JSON: {exc.msg}", exc.lineno) from None
        return parse_datasheet_object(doc, noise_patterns)
    return parse_datasheet(text, noise_patterns)


def _grouped(sheet: PropertySheet) -> list[tuple[str, list[PropertyRecord]]]:
    groups: list[tuple[str, list[PropertyRecord]]] = []
    for record in sheet.records:
        if not groups or groups[-1][0] != record.section:
            groups.append((record.section, []))
        groups[-1][1].append(record)
    return groups


def render_datasheet(sheet: PropertySheet) -> str:
    """Write a sheet back out as ``.dst`` text (orphan rows for extra values)."""
    ident = sheet.identity
    out = [f"@component {ident.component_name}", f"@model {ident.model_name}", f"@part {ident.part_number}"]
    for heading, records in _grouped(sheet):
        out.append("")
        if heading:
            out.append(f"# {heading}")
        for record in records:
            out.append(f"{record.name} | {record.values[0]}")
            out.extend(f"| {v}" for v in record.values[1:])
    return "\n".join(out) + "\n"


def sheet_to_object(sheet: PropertySheet) -> dict[str, Any]:
    ident = sheet.identity
    sections = []
    for heading, records in _grouped(sheet):
        rows = []
        for record in records:
            rows.append({"name": record.name, "value": record.values[0]})
            rows.extend({"name": "", "value": v} for v in record.values[1:])
        sections.append({"heading": heading, "rows": rows})
    return {
        "component": ident.component_name,
        "model": ident.model_name,
        "part": ident.part_number,
        "sections": sections,
    }
