from __future__ import annotations

from pathlib import Path

import pytest

from fbskg.classify import classify_sheet, default_rule_config
from fbskg.ingest import load_datasheet
from fbskg.kgstore import FbsGraph, upsert_model

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"

NINE_CLAUSE_QUERY = (
    "Give me a crimp contact that conforms to these specifications :- Material (contacts) equal to Copper alloy, "
    "Surface (contacts) equal to Silver plated, Conductor cross-section-2 between 22 and 26, Gender = Female, "
    "Manufacturing process = Turned contacts, Operating Current lesser than or equal to 10, Contact resistance ≤ 3 , "
    "Mating cycles greater than or equal to 500, Stripping length = 8"
)
MALE_DST = FIXTURES / "male_contact.dst"
FEMALE_DST = FIXTURES / "female_crimp_contact.dst"
FEMALE_PART = "09 15 000 6224"


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def rules():
    return default_rule_config()


@pytest.fixture
def male_sheet():
    return load_datasheet(MALE_DST)


@pytest.fixture
def female_sheet():
    return load_datasheet(FEMALE_DST)


def build_graph(*paths, rules=None):
    rules = rules or default_rule_config()
    graph = FbsGraph()
    for path in paths:
        sheet = load_datasheet(path)
        upsert_model(graph, sheet.identity, classify_sheet(sheet, rules))
    return graph


@pytest.fixture
def two_model_graph():
    return build_graph(MALE_DST, FEMALE_DST)
