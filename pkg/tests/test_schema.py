from __future__ import annotations

import json
import random

import pytest

from infusql import load_tables, serialize_schema
from infusql.errors import BadIndex, BadRanking, DuplicateDb
from infusql.schema import Column, DbSchema, SchemaRanking, Table

from conftest import SCHEMA_STRING

MINIMAL = json.dumps(
    [
        {
            "db_id": "mini",
            "table_names_original": ["t"],
            "column_names_original": [[-1, "*"], [0, "c"]],
            "column_types": ["text", "text"],
            "primary_keys": [],
            "foreign_keys": [],
        }
    ]
)


def test_minimal_document():
    schema = load_tables(MINIMAL)[0]
    assert schema.db_id == "mini"
    assert schema.table_names() == ["t"]
    assert schema.table("t").column_names() == ["c"]
    assert schema.primary_keys == ()
    assert schema.foreign_keys == ()


def test_department_management_layout(dm_schema):
    assert dm_schema.table_names() == ["department", "head", "management"]
    assert len(dm_schema.foreign_keys) == 2
    fks = {
        (f"{lt}.{lc}".lower(), f"{rt}.{rc}".lower())
        for (lt, lc), (rt, rc) in dm_schema.foreign_keys
    }
    assert ("management.head_id", "head.head_id") in fks
    assert ("management.department_id", "department.department_id") in fks


def test_bad_foreign_key_index():
    doc = json.loads(MINIMAL)
    doc[0]["foreign_keys"] = [[1, 999]]
    with pytest.raises(BadIndex, match="999"):
        load_tables(json.dumps(doc))


def test_bad_table_index():
    doc = json.loads(MINIMAL)
    doc[0]["column_names_original"].append([5, "ghost"])
    with pytest.raises(BadIndex):
        load_tables(json.dumps(doc))


def test_duplicate_db():
    doc = json.loads(MINIMAL)
    doc.append(doc[0])
    with pytest.raises(DuplicateDb):
        load_tables(json.dumps(doc))


def test_serialize_single_table():
    schema = load_tables(MINIMAL)[0]
    assert serialize_schema(schema) == "| t : t.c"


def test_serialize_reproduces_figure_string(dm_schema, figure_ranking):
    assert serialize_schema(dm_schema, figure_ranking) == SCHEMA_STRING


def test_serialize_lowercases(dm_schema):
    out = serialize_schema(dm_schema)
    assert out == out.lower()
    assert "department.department_id" in out


def test_serialize_is_deterministic(dm_schema, figure_ranking):
    assert serialize_schema(dm_schema, figure_ranking) == serialize_schema(dm_schema, figure_ranking)


def _random_schema(rng: random.Random) -> DbSchema:
    n_tables = rng.randint(1, 4)
    tables = []
    for t in range(n_tables):
        cols = tuple(Column(f"c{t}_{i}") for i in range(rng.randint(1, 5)))
        tables.append(Table(name=f"t{t}", columns=cols))
    fks = []
    for _ in range(rng.randint(0, 3)):
        left = rng.choice(tables)
        right = rng.choice(tables)
        fks.append(((left.name, left.columns[0].name), (right.name, right.columns[0].name)))
    return DbSchema(db_id="r", tables=tuple(tables), foreign_keys=tuple(fks))


def test_segment_count_over_random_schemas():
    rng = random.Random(5)
    for _ in range(50):
        schema = _random_schema(rng)
        out = serialize_schema(schema)
        assert out.count("|") == len(schema.tables) + len(schema.foreign_keys)


def test_every_column_token_is_real_and_unique(dm_schema, figure_ranking):
    out = serialize_schema(dm_schema, figure_ranking)
    table_segments = [s for s in out.split("|") if ":" in s]
    seen = set()
    for segment in table_segments:
        table, _, cols = segment.partition(":")
        for token in cols.split(","):
            token = token.strip()
            t, _, c = token.partition(".")
            assert t == table.strip()
            assert dm_schema.has_column(t, c)
            assert token not in seen
            seen.add(token)


def test_bad_ranking_not_permutation(dm_schema):
    ranking = SchemaRanking(column_orders={"department": ("name", "creation")})
    with pytest.raises(BadRanking):
        serialize_schema(dm_schema, ranking)
    ranking = SchemaRanking(table_order=("department", "head"))
    with pytest.raises(BadRanking):
        serialize_schema(dm_schema, ranking)


def test_star_column_dropped(dm_schema):
    for table in dm_schema.tables:
        assert "*" not in table.column_names()
