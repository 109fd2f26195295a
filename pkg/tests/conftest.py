from __future__ import annotations

import json
import os
import sqlite3
from pathlib import Path

import pytest

from infusql import load_tables
from infusql.schema import SchemaRanking

FIXTURES = Path(__file__).parent / "fixtures"

# The running example used throughout: a French request over the
# department_management database, with its dependency and AMR fixtures.
QUESTION_FR = "Inscrivez l'année de création, le nom et le budget de chaque département."
SYNTAX_FRAGMENT = "[row] year; dobj [row] name; conj [row] budget; conj [row] department; pobj"
AMR_FRAGMENT = (
    "(l / list-01 :ARG1 (a / and :op1 (y / year :time-of (c / create-01 "
    ":ARG1 (d / department :mod (e / each)))) :op2 (n / name :poss d) "
    ":op3 (b / budget :poss d)))"
)
SCHEMA_STRING = (
    "| department : department.name , department.creation , "
    "department.budget_in_billions , department.department_id , "
    "department.num_employees "
    "| head : head.name , head.age , head.head_id , head.born_state "
    "| management : management.department_id , management.temporary_acting , "
    "management.head_id "
    "| management.head_id = head.head_id "
    "| management.department_id = department.department_id"
)
GOLD_SQL = "select creation , name , budget_in_billions from department"
TARGET_STRING = "select _ from _ | " + GOLD_SQL

VERBOSE_DUMP = """Inscrivez ROOT Inscrivez PROPN [année, .]
l' det année NOUN []
année obj Inscrivez PROPN [l', création]
de case création NOUN []
création nmod année NOUN [de, ,, nom]
, punct création NOUN []
le det nom NOUN []
nom appos création NOUN [le, budget]
et cc budget NOUN []
le det budget NOUN []
budget conj nom NOUN [et, le, département]
de case département NOUN []
chaque det département NOUN []
département nmod budget NOUN [de, chaque]
. punct Inscrivez PROPN []"""


def fixture_text(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def dm_schema():
    return load_tables(fixture_text("tables.department_management.json"))[0]


@pytest.fixture(scope="session")
def figure_ranking():
    return SchemaRanking.from_json(fixture_text("ranking.department_management.json"))


_DEPARTMENTS = [
    (1, "State", "1789", 9.96, 30266),
    (2, "Treasury", "1789", 11.1, 115897),
    (3, "Defense", "1947", 439.3, 3000000),
    (4, "Justice", "1870", 23.4, 112557),
    (5, "Interior", "1849", 10.7, 71436),
    (6, "Agriculture", "1862", 77.6, 109832),
    (7, "Commerce", "1903", 6.2, 36000),
    (8, "Labor", "1913", 59.7, 17347),
    (9, "Health and Human Services", "1953", 543.2, 67000),
    (10, "Housing and Urban Development", "1965", 46.2, 10600),
    (11, "Transportation", "1966", 58.0, 58622),
    (12, "Energy", "1977", 21.5, 116100),
    (13, "Education", "1979", 62.8, 4487),
    (14, "Veterans Affairs", "1989", 73.2, 235000),
    (15, "Homeland Security", "2002", 44.6, 208000),
]

_HEADS = [
    (1, "Tiger Woods", "Alabama", 67.0),
    (2, "Sergio García", "California", 68.0),
    (3, "K. J. Choi", "Alabama", 69.0),
    (4, "Dudley Hart", "California", 52.0),
    (5, "Jeff Maggert", "Delaware", 53.0),
    (6, "Billy Mayfair", "California", 69.0),
    (7, "Stewart Cink", "Florida", 50.0),
    (8, "Nick Faldo", "California", 56.0),
    (9, "Pádraig Harrington", "Connecticut", 43.0),
    (10, "Franklin Langham", "Connecticut", 67.0),
]

_MANAGEMENT = [
    (2, 5, "Yes"),
    (15, 4, "Yes"),
    (2, 6, "Yes"),
    (7, 3, "No"),
    (11, 10, "Yes"),
]


def build_department_db(path: Path) -> None:
    conn = sqlite3.connect(path)
    try:
        conn.executescript(
            """
            CREATE TABLE department (
                Department_ID INTEGER PRIMARY KEY,
                Name TEXT,
                Creation TEXT,
                Budget_in_Billions REAL,
                Num_Employees INTEGER
            );
            CREATE TABLE head (
                head_ID INTEGER PRIMARY KEY,
                name TEXT,
                born_state TEXT,
                age REAL
            );
            CREATE TABLE management (
                department_ID INTEGER,
                head_ID INTEGER,
                temporary_acting TEXT,
                PRIMARY KEY (department_ID, head_ID)
            );
            """
        )
        conn.executemany("INSERT INTO department VALUES (?, ?, ?, ?, ?)", _DEPARTMENTS)
        conn.executemany("INSERT INTO head VALUES (?, ?, ?, ?)", _HEADS)
        conn.executemany("INSERT INTO management VALUES (?, ?, ?)", _MANAGEMENT)
        conn.commit()
    finally:
        conn.close()


@pytest.fixture(scope="session")
def db_root(tmp_path_factory) -> Path:
    """A Spider-style database directory holding department_management."""
    root = tmp_path_factory.mktemp("database")
    db_dir = root / "department_management"
    db_dir.mkdir()
    build_department_db(db_dir / "department_management.sqlite")
    return root


@pytest.fixture(scope="session")
def dm_db_path(db_root) -> Path:
    return db_root / "department_management" / "department_management.sqlite"


def spider_dir() -> Path | None:
    """Full Spider dataset location, when one is supplied via SPIDER_DIR."""
    value = os.environ.get("SPIDER_DIR")
    if not value:
        return None
    path = Path(value)
    return path if path.exists() else None


requires_spider = pytest.mark.skipif(
    spider_dir() is None, reason="full Spider dataset not available (set SPIDER_DIR)"
)


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(label): acceptance criterion check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    label = marker.kwargs.get("label", item.name)
    if report.when == "call" and not report.skipped:
        status = "PASS" if report.passed else "FAIL"
        print(f"\n[ACCEPTANCE] {label}: {status}")
    elif report.skipped:
        print(f"\n[ACCEPTANCE] {label}: SKIP ({report.longrepr[2] if report.longrepr else ''})")


def write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, ensure_ascii=False, indent=2), encoding="utf-8")
