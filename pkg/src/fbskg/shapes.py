"""Normalized property values.

Every raw datasheet value is read into one of four shapes: a fixed number, a
one-sided limit, a two-sided range, or plain text. Numbers are kept as
:class:`~decimal.Decimal` so equal catalogue entries compare exactly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from typing import Literal, Union

__all__ = [
    "DualLimit",
    "Fixed",
    "SingleLimit",
    "Text",
    "ValueShape",
    "detect_value_shape",
    "format_number",
    "has_number",
    "parse_number",
]


def _clean_unit(unit: str | None) -> str | None:
    if unit is None:
        return None
    unit = unit.strip()
    return unit or None


@dataclass(frozen=True)
class Fixed:
    value: Decimal
    unit: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "unit", _clean_unit(self.unit))


@dataclass(frozen=True)
class SingleLimit:
    bound: Literal["lower", "upper"]
    limit: Decimal
    unit: str | None = None

    def __post_init__(self) -> None:
        if self.bound not in ("lower", "upper"):
            raise ValueError(f"bound must be 'lower' or 'upper', got {self.bound!r}")
        object.__setattr__(self, "unit", _clean_unit(self.unit))


@dataclass(frozen=True)
class DualLimit:
    lower: Decimal
    upper: Decimal
    unit: str | None = None

    def __post_init__(self) -> None:
        if self.lower > self.upper:
            lo, hi = self.upper, self.lower
            object.__setattr__(self, "lower", lo)
            object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "unit", _clean_unit(self.unit))


@dataclass(frozen=True)
class Text:
    raw: str


ValueShape = Union[Fixed, SingleLimit, DualLimit, Text]


def has_number(shape: ValueShape) -> bool:
    return not isinstance(shape, Text)


_NUM = r"[+\-−]?(?:\d+(?:\.\d*)?|\.\d+)"
_NUM_RE = re.compile(_NUM)
_COMPARATORS = {"≤": "upper", "<=": "upper", "<": "upper", "≥": "lower", ">=": "lower", ">": "lower"}
_CMP = r"(?P<cmp><=|>=|≤|≥|<|>)"
_RANGE_SEP = r"(?:\.{2,3}|…|-|–|\u2014|\bto\b)"

_DUAL_RE = re.compile(rf"^(?P<pre>[^\d+\-−.]*?)\s*(?P<a>{_NUM})\s*{_RANGE_SEP}\s*(?P<b>{_NUM})\s*(?P<post>.*)$")
_LEAD_CMP_RE = re.compile(rf"^{_CMP}\s*(?P<n>{_NUM})\s*(?P<unit>.*)$")
_TRAIL_CMP_RE = re.compile(rf"^(?P<n>{_NUM})\s*(?P<unit>.*?)\s*{_CMP}$")
_FIXED_RE = re.compile(rf"^(?P<pre>.*?)\s*(?<![\w.])(?P<n>{_NUM})(?![\w.])\s*(?P<post>.*)$")

# unit residue: up to two short tokens, no digits, no sentence punctuation
_UNIT_TOKEN_RE = re.compile(r"^[^\W\d_]{1,8}(?:[/·.^][^\W\d_]{1,6})*[²³]?\.?$|^[%°‰µΩ][^\W\d_]{0,3}[²³]?$")
_STOPWORDS = {"to", "up", "of", "for", "and", "or", "in", "at", "with", "the", "by", "on", "from", "per"}


def parse_number(text: str) -> Decimal:
    """Parse a number as written in datasheets (unicode minus allowed)."""
    try:
        return Decimal(text.strip().replace("−", "-"))
    except InvalidOperation:
        raise ValueError(f"not a number: {text!r}") from None


def format_number(value: Decimal) -> str:
    """Plain positional notation, no exponent, trailing zeros kept."""
    text = format(value, "f")
    return "0" if text in ("-0", "+0") else text


def _normalize_raw(raw: str) -> str:
    raw = " ".join(raw.split())
    # "35 mm ²" -> "35 mm²"
    return re.sub(r"\s+([²³])", r"\1", raw)


def _unit_or_invalid(residue: str) -> tuple[bool, str | None]:
    residue = residue.strip()
    if not residue:
        return True, None
    tokens = residue.split()
    if len(tokens) > 2:
        return False, None
    for token in tokens:
        if token.lower() in _STOPWORDS or not _UNIT_TOKEN_RE.match(token):
            return False, None
    return True, residue


def detect_value_shape(raw: str) -> ValueShape:
    """Read a raw datasheet value into a :class:`ValueShape`.

    >>> detect_value_shape("≤100 A")
    SingleLimit(bound='upper', limit=Decimal('100'), unit='A')
    >>> detect_value_shape("-40 ... +125 °C")
    DualLimit(lower=Decimal('-40'), upper=Decimal('125'), unit='°C')
    """
    text = _normalize_raw(raw)
    if not text:
        return Text(raw)
    count = len(_NUM_RE.findall(text))

    m = _DUAL_RE.match(text)
    if m and count == 2:
        pre, post = m["pre"].strip(), m["post"].strip()
        if not (pre and post):
            ok, unit = _unit_or_invalid(pre or post)
            if ok:
                return DualLimit(parse_number(m["a"]), parse_number(m["b"]), unit)

    if count == 1:
        m = _LEAD_CMP_RE.match(text) or _TRAIL_CMP_RE.match(text)
        if m:
            ok, unit = _unit_or_invalid(m["unit"])
            if ok:
                return SingleLimit(_COMPARATORS[m["cmp"]], parse_number(m["n"]), unit)
        m = _FIXED_RE.match(text)
        if m and not any(c in text for c in _COMPARATORS):
            pre, post = m["pre"].strip(), m["post"].strip()
            if not (pre and post):
                ok, unit = _unit_or_invalid(pre or post)
                if ok:
                    return Fixed(parse_number(m["n"]), unit)

    return Text(raw.strip())
