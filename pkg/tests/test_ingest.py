from __future__ import annotations

import json
import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FIXTURES, MALE_DST
from fbskg.ingest import (
    ConfigError,
    IngestError,
    PropertyRecord,
    RawRow,
    associate_orphans,
    disambiguate_duplicates,
    load_datasheet,
    parse_datasheet,
    parse_datasheet_object,
    render_datasheet,
    sheet_to_object,
    strip_noise,
)
from synth import random_sheet

HEADER = "@component Contact\n@model M1\n@part P1\n"


class TestStripNoise:
    def test_default_patterns_drop_page_footer(self):
        assert strip_noise(["Gender | Male", "Page 2 of 3"]) == ["Gender | Male"]

    def test_empty(self):
        assert strip_noise([]) == []

    def test_datasheet_content_is_kept(self):
        assert strip_noise(["RoHS | compliant with exemption"]) == ["RoHS | compliant with exemption"]

    def test_custom_patterns_order_preserved(self):
        lines = ["a", "DRAFT", "b", "c"]
        assert strip_noise(lines, [r"DRAFT"]) == ["a", "b", "c"]

    def test_pattern_must_match_whole_line(self):
        assert strip_noise(["Page 2 of 3 extra"], [r"Page \d+ of \d+"]) == ["Page 2 of 3 extra"]

    def test_invalid_pattern_is_named(self):
        with pytest.raises(ConfigError, match=r"\(unclosed"):
            strip_noise(["x"], ["(unclosed"])


class TestAssociateOrphans:
    def test_orphan_joins_previous_row(self):
        records = associate_orphans([("Specifications", "DIN EN 61984"), ("", "UL 1977")])
        assert records == [PropertyRecord("", "Specifications", ("DIN EN 61984", "UL 1977"))]

    def test_no_orphans(self):
        assert associate_orphans([("Gender", "Male")]) == [PropertyRecord("", "Gender", ("Male",))]

    def test_orphan_without_parent(self):
        with pytest.raises(IngestError) as info:
            associate_orphans([("", "stray value")])
        assert info.value.line == 1

    def test_orphan_does_not_cross_sections(self):
        rows = [RawRow("A", "1", "S1", 3), RawRow("", "2", "S2", 5)]
        with pytest.raises(IngestError) as info:
            associate_orphans(rows)
        assert info.value.line == 5

    def test_header_row_filled_by_orphans(self):
        records = associate_orphans([("Specifications", ""), ("", "UL 1977")])
        assert records[0].values == ("UL 1977",)

    def test_named_row_without_any_value(self):
        with pytest.raises(IngestError, match="no values"):
            associate_orphans([("Specifications", "")])


class TestDisambiguate:
    @staticmethod
    def names(names):
        return [r.name for r in disambiguate_duplicates(PropertyRecord("", n, ("v",)) for n in names)]

    def test_second_occurrence_gets_suffix(self):
        assert self.names(["Conductor cross-section", "Conductor cross-section"]) == [
            "Conductor cross-section",
            "Conductor cross-section-2",
        ]

    def test_single(self):
        assert self.names(["Gender"]) == ["Gender"]

    def test_three(self):
        assert self.names(["A", "A", "A"]) == ["A", "A-2", "A-3"]

    def test_case_sensitive(self):
        assert self.names(["a", "A"]) == ["a", "A"]

    def test_collision_with_existing_suffix(self):
        assert self.names(["A", "A", "A-2"]) == ["A", "A-3", "A-2"]

    @given(st.lists(st.sampled_from(["A", "B", "A-2", "a", "B-3"]), max_size=12))
    def test_idempotent_and_distinct(self, names):
        once = disambiguate_duplicates(PropertyRecord("", n, ("v",)) for n in names)
        assert disambiguate_duplicates(once) == once
        assert len({r.name for r in once}) == len(once)


class TestParseDatasheet:
    def test_male_contact(self, male_sheet):
        assert male_sheet.identity.component_name == "Contact"
        assert male_sheet.get("Operating current").values == ("≤100 A",)
        assert male_sheet.get("Material (contacts)").values == ("Copper alloy",)
        assert male_sheet.get("Limiting temperature").section == "Technical characteristics"
        assert len(male_sheet.records) == 17

    def test_directives_only(self):
        sheet = parse_datasheet(HEADER)
        assert sheet.records == ()

    def test_missing_part(self):
        with pytest.raises(IngestError, match="@part"):
            parse_datasheet("@component Contact\n@model M1\nGender | Male\n")

    def test_malformed_row_has_line_number(self):
        with pytest.raises(IngestError) as info:
            parse_datasheet(HEADER + "# S\nGender Male\n")
        assert info.value.line == 5

    def test_orphan_error_line(self):
        with pytest.raises(IngestError) as info:
            parse_datasheet(HEADER + "\n# S\n| stray\n")
        assert info.value.line == 6

    def test_duplicate_and_unknown_directives(self):
        with pytest.raises(IngestError, match="duplicate"):
            parse_datasheet(HEADER + "@part P2\n")
        with pytest.raises(IngestError, match="unknown directive"):
            parse_datasheet(HEADER + "@vendor X\n")

    def test_trims_and_suffixes(self):
        sheet = parse_datasheet(HEADER + "# S\n  Width  |  3 mm \nWidth | 4 mm\n")
        assert [(r.name, r.values) for r in sheet.records] == [("Width", ("3 mm",)), ("Width-2", ("4 mm",))]

    def test_noise_inside_orphan_run(self):
        sheet = parse_datasheet(HEADER + "# S\nSpecifications | DIN EN 61984\nPage 1 of 2\n| UL 1977\n")
        assert sheet.records[0].values == ("DIN EN 61984", "UL 1977")

    def test_json_equivalent(self, male_sheet):
        assert load_datasheet(FIXTURES / "male_contact.json") == male_sheet

    def test_render_round_trip(self, male_sheet):
        assert parse_datasheet(render_datasheet(male_sheet)) == male_sheet
        assert parse_datasheet_object(json.loads(json.dumps(sheet_to_object(male_sheet)))) == male_sheet

    def test_invalid_json_file(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"component": ', encoding="utf-8")
        with pytest.raises(IngestError):
            load_datasheet(path)


def _object_from_dst(text: str) -> dict:
    """Independent translation of .dst text into the JSON form (no noise removal)."""
    doc = {"sections": []}
    for line in text.splitlines():
        line = line.strip()
        if line.startswith("@"):
            key, _, value = line[1:].partition(" ")
            doc[key] = value
        elif line.startswith("# "):
            doc["sections"].append({"heading": line[2:], "rows": []})
        elif "|" in line:
            name, _, value = line.partition("|")
            if not doc["sections"]:
                doc["sections"].append({"heading": "", "rows": []})
            doc["sections"][-1]["rows"].append({"name": name.strip(), "value": value.strip()})
    return doc


@pytest.mark.parametrize("seed", range(40))
def test_random_sheets_conserve_values_and_agree_across_formats(seed):
    rng = random.Random(seed)
    text, values, names = random_sheet(rng, seed)
    sheet = parse_datasheet(text)
    assert Counter(v for r in sheet.records for v in r.values) == Counter(values)
    assert all(r.name for r in sheet.records)
    assert len(sheet.records) == len(names)
    assert [r.name.rsplit("-", 1)[0] if r.name not in names else r.name for r in sheet.records] == names
    assert parse_datasheet_object(_object_from_dst(text)) == sheet


def test_fixture_file_is_noise_free(male_sheet):
    assert not any("Page" in v for r in male_sheet.records for v in r.values)
    assert MALE_DST.read_text("utf-8").count("Page 1 of 2") == 1


@settings(max_examples=50)
@given(st.lists(st.tuples(st.sampled_from(["", "A", "B"]), st.sampled_from(["x", "y", "z"])), max_size=15))
def test_orphans_total_when_first_row_named(rows):
    if rows and not rows[0][0]:
        with pytest.raises(IngestError):
            associate_orphans(rows)
        return
    records = associate_orphans(rows)
    assert all(r.name for r in records)
    assert sorted(v for r in records for v in r.values) == sorted(v for _, v in rows)
