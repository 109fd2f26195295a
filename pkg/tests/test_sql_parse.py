from __future__ import annotations

import random

import pytest

from infusql import parse_sql, render_sql
from infusql.errors import UnknownColumn, UnparsableSql
from infusql.sqleval.parse import ColUnit, Limit, SelectItem, TableSource, ValUnit, tokenize

from query_gen import random_query


def test_tokenize_strings_and_operators():
    assert tokenize("select a from t where b != 'x y'") == [
        "select", "a", "from", "t", "where", "b", "!=", '"x y"',
    ]
    assert tokenize("a <> b")[1] == "!="
    assert tokenize("a = 'It''s'") == ["a", "=", '"It\'s"']
    assert tokenize("COUNT(*)") == ["count", "(", "*", ")"]


def test_minimal_query(dm_schema):
    c = parse_sql("select name from head", dm_schema)
    assert c.select == (SelectItem("none", ValUnit("none", ColUnit("none", "head.name", False), None)),)
    assert c.from_tables == (TableSource("table", "head"),)
    assert not c.where
    assert c.order_by is None and c.limit is None


def test_alias_expansion_matches_plain_form(dm_schema):
    plain = parse_sql("select name from head", dm_schema)
    aliased = parse_sql("select T1.name from head as T1", dm_schema)
    assert plain == aliased


def test_unsupported_function_rejected(dm_schema):
    with pytest.raises((UnparsableSql, UnknownColumn)):
        parse_sql("select frobnicate(name) from head", dm_schema)


def test_unknown_column(dm_schema):
    with pytest.raises(UnknownColumn, match="namee"):
        parse_sql("select namee from head", dm_schema)
    with pytest.raises(UnknownColumn, match="head.creation"):
        parse_sql("select head.creation from head", dm_schema)


def test_join_conditions_accumulate_in_from(dm_schema):
    c = parse_sql(
        "select head.name from management join head on management.head_id = head.head_id",
        dm_schema,
    )
    assert [t.value for t in c.from_tables] == ["management", "head"]
    assert len(c.from_conditions.predicates) == 1
    pred = c.from_conditions.predicates[0]
    assert pred.op == "="
    assert pred.value.left.column == "management.head_id"
    assert pred.first == ColUnit("none", "head.head_id", False)


def test_where_with_connectors(dm_schema):
    c = parse_sql(
        "select name from head where age > 56 or born_state = 'Alabama' and age < 70",
        dm_schema,
    )
    assert len(c.where.predicates) == 3
    assert c.where.connectors == ("or", "and")
    assert c.where.predicates[1].first == '"Alabama"'


def test_between(dm_schema):
    c = parse_sql("select name from head where age between 50 and 60", dm_schema)
    pred = c.where.predicates[0]
    assert pred.op == "between"
    assert pred.first == 50.0 and pred.second == 60.0


def test_not_in_subquery(dm_schema):
    c = parse_sql(
        "select name from head where head_id not in ( select head_id from management )",
        dm_schema,
    )
    pred = c.where.predicates[0]
    assert pred.negated and pred.op == "in"
    nested = pred.first
    assert nested.select[0].value.left.column == "management.head_id"


def test_union_attaches_nested(dm_schema):
    c = parse_sql("select name from head union select name from department", dm_schema)
    assert c.union is not None
    assert c.union.select[0].value.left.column == "department.name"
    assert c.intersect is None and c.except_ is None


def test_group_having_order_limit(dm_schema):
    c = parse_sql(
        "select born_state , count ( * ) from head group by born_state "
        "having count ( * ) > 2 order by count ( * ) desc limit 3",
        dm_schema,
    )
    assert c.group_by == (ColUnit("none", "head.born_state", False),)
    assert len(c.having.predicates) == 1
    assert c.order_by.direction == "desc"
    assert c.order_by.values[0].left.agg == "count"
    assert c.limit == Limit(3)


def test_distinct_forms(dm_schema):
    c = parse_sql("select distinct name from head", dm_schema)
    assert c.select_distinct
    c = parse_sql("select count ( distinct born_state ) from head", dm_schema)
    assert c.select[0].agg == "count"
    assert c.select[0].value.left.distinct


def test_arithmetic_val_unit(dm_schema):
    c = parse_sql(
        "select department.num_employees - department.department_id from department", dm_schema
    )
    vu = c.select[0].value
    assert vu.op == "-"
    assert vu.right == ColUnit("none", "department.department_id", False)


def test_from_subquery():
    # derived tables carry no alias in this subset, so columns stay bare
    c = parse_sql("select name from ( select name from head )", None)
    assert c.from_tables[0].kind == "sql"
    assert c.from_tables[0].value.from_tables == (TableSource("table", "head"),)


def test_schemaless_keeps_bare_columns():
    c = parse_sql("select a , b from t join u on t.x = u.y")
    assert c.select[0].value.left.column == "a"
    c = parse_sql("select a from t")
    assert c.select[0].value.left.column == "t.a"  # single table: qualified


def test_trailing_garbage_rejected(dm_schema):
    with pytest.raises(UnparsableSql):
        parse_sql("select name from head extra", dm_schema)


def test_empty_statement_rejected():
    with pytest.raises(UnparsableSql):
        parse_sql("   ")


FIXPOINT_QUERIES = [
    "select name from head",
    "select T1.name from head as T1",
    "select count ( * ) from head where age > 56",
    "select distinct born_state from head order by born_state asc",
    "select born_state , count ( * ) from head group by born_state having count ( * ) > 2",
    "select head.name from management join head on management.head_id = head.head_id "
    "where management.temporary_acting = 'Yes'",
    "select name from head where age between 50 and 60 order by age desc limit 3",
    "select name from head where head_id in ( select head_id from management )",
    "select name from head union select name from department",
    "select name from head except select head.name from management join head "
    "on management.head_id = head.head_id",
    "select avg ( age ) , max ( age ) from head where born_state like '%a%'",
    "select name from head where age = ( select max ( age ) from head )",
]


@pytest.mark.parametrize("sql", FIXPOINT_QUERIES)
def test_parse_render_fixpoint(sql, dm_schema):
    once = parse_sql(sql, dm_schema)
    again = parse_sql(render_sql(once), dm_schema)
    assert once == again


def test_fixpoint_on_generated_queries(dm_schema):
    rng = random.Random(23)
    for _ in range(200):
        sql = random_query(rng).render()
        once = parse_sql(sql, dm_schema)
        again = parse_sql(render_sql(once), dm_schema)
        assert once == again, sql
