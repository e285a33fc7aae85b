"""Rule-based FBS classification of datasheet properties.

Each property is tested against the rules in a fixed order and the first hit
decides its class:

1. measure         the name tags as a measurable quantity and some value
                   carries a number                          -> Behaviour
2. classification  the name is similar to a type/category keyword -> Behaviour
3. material        the name tags as a material/surface term      -> Structure
4. application     similar to an application keyword             -> Function
5. regulation      similar to a regulation/standard keyword      -> Function
6. unknown         nothing matched                               -> Unknown

Name tagging uses fixed lexicons and regexes; similarity is the larger of an
exact token (or synonym) hit and a character-trigram cosine score.
"""

from __future__ import annotations

import enum
import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field, fields
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Sequence

from .ingest import ConfigError, PropertyRecord, PropertySheet
from .shapes import DualLimit, Fixed, SingleLimit, Text, ValueShape, detect_value_shape, has_number

__all__ = [
    "ClassificationReport",
    "ClassifiedProperty",
    "EntityTag",
    "FbsClass",
    "Rationale",
    "RuleConfig",
    "Tag",
    "classify_property",
    "classify_sheet",
    "default_rule_config",
    "keyword_similarity",
    "load_rule_config",
    "tag_entity",
    "tokenize",
    "trigram_cosine",
    # re-exported value shapes
    "DualLimit",
    "Fixed",
    "SingleLimit",
    "Text",
    "ValueShape",
    "detect_value_shape",
]


class FbsClass(str, enum.Enum):
    FUNCTION = "Function"
    BEHAVIOUR = "Behaviour"
    STRUCTURE = "Structure"
    UNKNOWN = "Unknown"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, text: str) -> "FbsClass":
        key = text.strip().lower()
        for member in cls:
            if member.value.lower() == key or member.value[0].lower() == key:
                return member
        if key == "behavior":
            return cls.BEHAVIOUR
        raise ValueError(f"unknown FBS class {text!r}")


#: fixed display/matrix order
FBS_ORDER = (FbsClass.FUNCTION, FbsClass.BEHAVIOUR, FbsClass.STRUCTURE, FbsClass.UNKNOWN)


class Tag(str, enum.Enum):
    MEASURABLE_QUANTITY = "MEASURABLE QUANTITY"
    IMMEASURABLE_PROPERTY = "IMMEASURABLE PROPERTY"
    MODEL_NUMBER = "MODEL NUMBER"
    MATERIAL = "MATERIAL"
    NONE = "NONE"


@dataclass(frozen=True)
class EntityTag:
    tag: Tag
    matched_token: str | None = None

    def __post_init__(self) -> None:
        if (self.tag is Tag.NONE) != (self.matched_token is None):
            raise ValueError("matched_token must be set exactly when tag is not NONE")


@dataclass(frozen=True)
class RuleConfig:
    classification_keywords: tuple[str, ...]
    application_keywords: tuple[str, ...]
    regulation_keywords: tuple[str, ...]
    measurable_lexicon: tuple[str, ...]
    immeasurable_lexicon: tuple[str, ...]
    material_lexicon: tuple[str, ...]
    model_number_patterns: tuple[str, ...] = ()
    synonym_table: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    similarity_threshold: float = 0.7

    def __post_init__(self) -> None:
        if not 0 < self.similarity_threshold <= 1:
            raise ConfigError(f"similarity_threshold must be in (0, 1], got {self.similarity_threshold}")
        for f in fields(self):
            if f.name in ("synonym_table", "similarity_threshold"):
                continue
            object.__setattr__(self, f.name, tuple(str(x).strip() for x in getattr(self, f.name)))
        synonyms = {str(k).lower(): tuple(str(s).lower() for s in v) for k, v in dict(self.synonym_table).items()}
        object.__setattr__(self, "synonym_table", synonyms)
        for pattern in self.model_number_patterns:
            try:
                re.compile(pattern)
            except re.error as exc:
                raise ConfigError(f"invalid model_number pattern {pattern!r}: {exc}") from None

    # hashable so compiled lexicons can be cached per config
    def __hash__(self) -> int:
        return hash(
            (
                self.classification_keywords,
                self.application_keywords,
                self.regulation_keywords,
                self.measurable_lexicon,
                self.immeasurable_lexicon,
                self.material_lexicon,
                self.model_number_patterns,
                tuple(sorted(self.synonym_table.items())),
                self.similarity_threshold,
            )
        )

    def with_threshold(self, threshold: float) -> "RuleConfig":
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data["similarity_threshold"] = threshold
        return RuleConfig(**data)

    def to_dict(self) -> dict[str, Any]:
        data = {f.name: list(getattr(self, f.name)) for f in fields(self) if f.name not in ("synonym_table", "similarity_threshold")}
        data["synonym_table"] = {k: list(v) for k, v in self.synonym_table.items()}
        data["similarity_threshold"] = self.similarity_threshold
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], base: "RuleConfig | None" = None) -> "RuleConfig":
        """Build a config; keys missing from ``data`` are taken from ``base``."""
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown rule config field(s): {', '.join(sorted(unknown))}")
        merged = base.to_dict() if base is not None else {}
        merged.update(data)
        missing = known - set(merged) - {"model_number_patterns", "synonym_table", "similarity_threshold"}
        if missing:
            raise ConfigError(f"rule config missing field(s): {', '.join(sorted(missing))}")
        try:
            return cls(**merged)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


def default_rule_config() -> RuleConfig:
    text = resources.files("fbskg.config").joinpath("default_rules.json").read_text("utf-8")
    return RuleConfig.from_dict(json.loads(text))


def load_rule_config(path: str | Path, *, merge_defaults: bool = True) -> RuleConfig:
    """Load a JSON rule file, filling absent fields from the shipped defaults."""
    try:
        data = json.loads(Path(path).read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: rule config must be a JSON object")
    return RuleConfig.from_dict(data, default_rule_config() if merge_defaults else None)


# -- tagging ---------------------------------------------------------------------

_WORD_RE = re.compile(r"[^\W_]+")
_COMPOUND_RE = re.compile(r"[^\W_]+(?:-[^\W_]+)+")


def tokenize(name: str) -> list[str]:
    """Lowercased tokens of ``name``.

    Besides single words, every contiguous hyphenated sub-compound is
    emitted, longest first; "cross-section-2" gives "cross-section-2",
    "cross-section", "section-2" before its words.
    """
    lowered = name.lower()
    tokens: list[str] = []
    for m in _COMPOUND_RE.finditer(lowered):
        parts = m.group().split("-")
        for size in range(len(parts), 1, -1):
            for start in range(len(parts) - size + 1):
                tokens.append("-".join(parts[start : start + size]))
    tokens.extend(_WORD_RE.findall(lowered))
    seen: set[str] = set()
    return [t for t in tokens if not (t in seen or seen.add(t))]


@lru_cache(maxsize=64)
def _lexicons(config: RuleConfig) -> tuple[frozenset, frozenset, frozenset, tuple[re.Pattern[str], ...]]:
    def lower(items: Sequence[str]) -> frozenset:
        return frozenset(i.lower() for i in items)

    return (
        lower(config.material_lexicon),
        lower(config.immeasurable_lexicon),
        lower(config.measurable_lexicon),
        tuple(re.compile(p) for p in config.model_number_patterns),
    )


def tag_entity(name: str, config: RuleConfig) -> EntityTag:
    """Tag a property name; material beats immeasurable beats model number beats measurable."""
    material, immeasurable, measurable, model_patterns = _lexicons(config)
    tokens = tokenize(name)
    for lexicon, tag in ((material, Tag.MATERIAL), (immeasurable, Tag.IMMEASURABLE_PROPERTY)):
        hit = next((t for t in tokens if t in lexicon), None)
        if hit is not None:
            return EntityTag(tag, hit)
    for pattern in model_patterns:
        m = pattern.search(name.strip())
        if m:
            return EntityTag(Tag.MODEL_NUMBER, m.group() or name.strip())
    hit = next((t for t in tokens if t in measurable), None)
    if hit is not None:
        return EntityTag(Tag.MEASURABLE_QUANTITY, hit)
    return EntityTag(Tag.NONE)


# -- similarity --------------------------------------------------------------------


def _normalize(text: str) -> str:
    return " ".join(text.lower().split())


@lru_cache(maxsize=8192)
def _trigrams(text: str) -> Counter:
    if len(text) < 3:
        return Counter([text]) if text else Counter()
    return Counter(text[i : i + 3] for i in range(len(text) - 2))


def trigram_cosine(a: str, b: str) -> float:
    """Cosine similarity of character-trigram count vectors."""
    va, vb = _trigrams(_normalize(a)), _trigrams(_normalize(b))
    if not va or not vb:
        return 0.0
    dot = sum(count * vb[g] for g, count in va.items() if g in vb)
    norm = math.sqrt(sum(c * c for c in va.values())) * math.sqrt(sum(c * c for c in vb.values()))
    return min(1.0, dot / norm)


def keyword_similarity(name: str, keyword: str, config: RuleConfig) -> float:
    """Similarity of a property name to one keyword, in [0, 1]."""
    key = _normalize(keyword)
    candidates = {key, *config.synonym_table.get(key, ())}
    words = set(tokenize(name))
    words.add(_normalize(name))
    if candidates & words:
        return 1.0
    return trigram_cosine(name, keyword)


def _best_keyword(name: str, keywords: Sequence[str], config: RuleConfig) -> tuple[str | None, float]:
    best_kw, best = None, 0.0
    for keyword in keywords:
        score = keyword_similarity(name, keyword, config)
        if score > best:
            best_kw, best = keyword, score
    return best_kw, best


# -- classification ----------------------------------------------------------------


@dataclass(frozen=True)
class Rationale:
    rule: str
    keyword: str | None = None
    similarity: float | None = None

    RULES = ("measure", "classification", "material", "application", "regulation", "unknown")


@dataclass(frozen=True)
class ClassifiedProperty:
    record: PropertyRecord
    fbs_class: FbsClass
    shapes: tuple[ValueShape, ...]
    rationale: Rationale
    entity: EntityTag

    @property
    def name(self) -> str:
        return self.record.name

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"name": self.name, "class": self.fbs_class.value, "rule": self.rationale.rule}
        if self.rationale.keyword is not None:
            out["keyword"] = self.rationale.keyword
            out["similarity"] = round(self.rationale.similarity or 0.0, 6)
        return out


def classify_property(record: PropertyRecord, config: RuleConfig) -> ClassifiedProperty:
    shapes = tuple(detect_value_shape(v) for v in record.values)
    entity = tag_entity(record.name, config)
    threshold = config.similarity_threshold

    def done(cls: FbsClass, rule: str, keyword: str | None = None, score: float | None = None) -> ClassifiedProperty:
        return ClassifiedProperty(record, cls, shapes, Rationale(rule, keyword, score), entity)

    if entity.tag is Tag.MEASURABLE_QUANTITY and any(has_number(s) for s in shapes):
        return done(FbsClass.BEHAVIOUR, "measure")
    keyword, score = _best_keyword(record.name, config.classification_keywords, config)
    if keyword is not None and score >= threshold:
        return done(FbsClass.BEHAVIOUR, "classification", keyword, score)
    if entity.tag is Tag.MATERIAL:
        return done(FbsClass.STRUCTURE, "material")
    for rule, keywords in (("application", config.application_keywords), ("regulation", config.regulation_keywords)):
        keyword, score = _best_keyword(record.name, keywords, config)
        if keyword is not None and score >= threshold:
            return done(FbsClass.FUNCTION, rule, keyword, score)
    return done(FbsClass.UNKNOWN, "unknown")


@dataclass
class ClassificationReport:
    properties: list[ClassifiedProperty] = field(default_factory=list)

    @property
    def by_class(self) -> dict[FbsClass, list[ClassifiedProperty]]:
        out: dict[FbsClass, list[ClassifiedProperty]] = {c: [] for c in FBS_ORDER}
        for prop in self.properties:
            out[prop.fbs_class].append(prop)
        return out

    def labels(self) -> dict[str, FbsClass]:
        return {p.name: p.fbs_class for p in self.properties}

    def summary_rows(self) -> list[tuple[str, FbsClass]]:
        """(name, class) pairs sorted by class name, then property name."""
        return sorted(((p.name, p.fbs_class) for p in self.properties), key=lambda r: (r[1].value, r[0]))

    def trace(self) -> str:
        return "\n".join(_trace_lines(self.properties))

    def summary_table(self) -> str:
        rows = self.summary_rows()
        width = max([len("Property Name")] + [len(n) for n, _ in rows])
        lines = [f"{'Property Name':<{width}}  FBS Ontology Classification"]
        lines.extend(f"{name:<{width}}  {cls.value}" for name, cls in rows)
        return "\n".join(lines)

    def to_list(self) -> list[dict[str, Any]]:
        return [p.to_dict() for p in self.properties]


def classify_sheet(sheet: PropertySheet, config: RuleConfig) -> ClassificationReport:
    return ClassificationReport([classify_property(r, config) for r in sheet.records])


def _entities(prop: ClassifiedProperty) -> str:
    if prop.entity.tag is Tag.NONE:
        return "Entities []"
    return f"Entities [[{prop.entity.matched_token!r}, {prop.entity.tag.value!r}]]"


def _trace_lines(props: Sequence[ClassifiedProperty]) -> list[str]:
    lines = ["Classifying properties...", "** Behaviour classifier **"]
    for p in props:
        lines.append(_entities(p))
        upper = p.name.upper()
        if p.rationale.rule == "measure":
            lines.append(f"✔ {upper} is a Behaviour (unit of measure)")
        elif p.rationale.rule == "classification":
            lines.append(f"✔ {upper} is a Behaviour (classification-oriented)")
            lines.append(f"Similar to keyword: {p.rationale.keyword}")
        else:
            lines.append(f"✘ {upper} is not a Behaviour")

    rest = [p for p in props if p.fbs_class is not FbsClass.BEHAVIOUR]
    lines.append("** Structure classifier **")
    for p in rest:
        if p.fbs_class is FbsClass.STRUCTURE:
            lines.append(f"✔ {p.name.upper()} is a Structure (material)")
        else:
            lines.append(f"✘ {p.name.upper()} is not a Structure")

    rest = [p for p in rest if p.fbs_class is not FbsClass.STRUCTURE]
    lines.append("** Function classifier **")
    for p in rest:
        if p.fbs_class is FbsClass.FUNCTION:
            lines.append(f"✔ {p.name.upper()} is a Function ({p.rationale.rule}-oriented)")
            lines.append(f"Similar to keyword: {p.rationale.keyword}")
        else:
            lines.append(f"✘ {p.name.upper()} is not a Function")

    unknown = [p for p in rest if p.fbs_class is FbsClass.UNKNOWN]
    lines.append("** Unknown **")
    lines.extend(f"? {p.name.upper()}" for p in unknown)
    return lines
