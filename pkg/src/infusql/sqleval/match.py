"""Exact-set matching of parsed SQL, following the Spider evaluator's verdicts.

Comparison is order-insensitive where the benchmark is (select items, WHERE
conjuncts, FROM tables) and order-sensitive where it is (ORDER BY, HAVING).
By default literal values are blanked before comparison and DISTINCT flags
are ignored, and columns joined by foreign keys are collapsed onto one
representative, all mirroring the benchmark's conventions.
"""

from __future__ import annotations

from ..schema import DbSchema
from .parse import (
    ColUnit,
    Condition,
    OrderBy,
    Predicate,
    SelectItem,
    SqlComponents,
    TableSource,
    ValUnit,
    render_sql,
)


def _blank_value(value, strict: bool):
    if isinstance(value, SqlComponents):
        return _blank_values(value, strict)
    return value if strict else None


def _blank_condition(cond: Condition, strict: bool) -> Condition:
    preds = tuple(
        Predicate(p.negated, p.op, p.value, _blank_value(p.first, strict), _blank_value(p.second, strict))
        for p in cond.predicates
    )
    return Condition(preds, cond.connectors)


def _blank_values(c: SqlComponents, strict: bool) -> SqlComponents:
    # Nested queries inside FROM keep their values; conditions and set-op
    # branches are processed, matching the reference evaluator's reach.
    changes = {
        "from_conditions": _blank_condition(c.from_conditions, strict),
        "where": _blank_condition(c.where, strict),
        "having": _blank_condition(c.having, strict),
    }
    for attr in ("intersect", "union", "except_"):
        nested = getattr(c, attr)
        if nested is not None:
            changes[attr] = _blank_values(nested, strict)
    return c.replace(**changes)


def _canon_col_unit(cu: ColUnit | None, valid: set[str], fk_map: dict[str, str]) -> ColUnit | None:
    if cu is None:
        return None
    column = cu.column
    if column in fk_map and column in valid:
        column = fk_map[column]
    return ColUnit(cu.agg, column, None)


def _canon_val_unit(vu: ValUnit, valid: set[str], fk_map: dict[str, str]) -> ValUnit:
    return ValUnit(vu.op, _canon_col_unit(vu.left, valid, fk_map), _canon_col_unit(vu.right, valid, fk_map))


def _canon_condition(cond: Condition, valid: set[str], fk_map: dict[str, str]) -> Condition:
    # Values that are column units or nested queries are left untouched here,
    # again matching the reference evaluator.
    preds = tuple(
        Predicate(p.negated, p.op, _canon_val_unit(p.value, valid, fk_map), p.first, p.second)
        for p in cond.predicates
    )
    return Condition(preds, cond.connectors)


def _canon_columns(c: SqlComponents, valid: set[str], fk_map: dict[str, str]) -> SqlComponents:
    changes = {
        "select": tuple(
            SelectItem(i.agg, _canon_val_unit(i.value, valid, fk_map)) for i in c.select
        ),
        "from_conditions": _canon_condition(c.from_conditions, valid, fk_map),
        "where": _canon_condition(c.where, valid, fk_map),
        "group_by": tuple(_canon_col_unit(cu, valid, fk_map) for cu in c.group_by),
        "having": _canon_condition(c.having, valid, fk_map),
    }
    if c.order_by is not None:
        changes["order_by"] = OrderBy(
            c.order_by.direction,
            tuple(_canon_val_unit(vu, valid, fk_map) for vu in c.order_by.values),
        )
    for attr in ("intersect", "union", "except_"):
        nested = getattr(c, attr)
        if nested is not None:
            changes[attr] = _canon_columns(nested, valid, fk_map)
    return c.replace(**changes)


def _valid_columns(c: SqlComponents, schema: DbSchema) -> set[str]:
    column_map = schema.column_map()
    valid: set[str] = set()
    for source in c.from_tables:
        if source.kind == "table":
            for col in column_map.get(source.value, ()):
                valid.add(f"{source.value}.{col}")
    return valid


def rebuild_for_match(
    c: SqlComponents, schema: DbSchema | None = None, strict_values: bool = False
) -> SqlComponents:
    """Normalize components for comparison: blank values, drop DISTINCT, collapse FK columns."""
    c = _blank_values(c, strict_values)
    valid = _valid_columns(c, schema) if schema is not None else set()
    fk_map = schema.foreign_key_canonical_map() if schema is not None else {}
    return _canon_columns(c, valid, fk_map)


# --- partial comparisons ------------------------------------------------


def _multiset_match(pred_items: list, gold_items: list) -> bool:
    if len(pred_items) != len(gold_items):
        return False
    remaining = list(gold_items)
    for item in pred_items:
        if item in remaining:
            remaining.remove(item)
        else:
            return False
    return True


def _sel_match(g: SqlComponents, p: SqlComponents) -> bool:
    if not _multiset_match(list(p.select), list(g.select)):
        return False
    return _multiset_match([i.value for i in p.select], [i.value for i in g.select])


def _where_match(g: SqlComponents, p: SqlComponents) -> bool:
    if not _multiset_match(list(p.where.predicates), list(g.where.predicates)):
        return False
    return _multiset_match(
        [c.value for c in p.where.predicates], [c.value for c in g.where.predicates]
    )


def _bare_name(column: str) -> str:
    return column.split(".", 1)[1] if "." in column else column


def _group_no_having_match(g: SqlComponents, p: SqlComponents) -> bool:
    return _multiset_match(
        [_bare_name(cu.column) for cu in p.group_by],
        [_bare_name(cu.column) for cu in g.group_by],
    )


def _group_having_match(g: SqlComponents, p: SqlComponents) -> bool:
    if bool(g.group_by) != bool(p.group_by):
        return False
    if not g.group_by:
        return True
    return [cu.column for cu in p.group_by] == [cu.column for cu in g.group_by] and (
        p.having == g.having
    )


def _order_match(g: SqlComponents, p: SqlComponents) -> bool:
    if (g.order_by is None) != (p.order_by is None):
        return False
    if g.order_by is None:
        return True
    return p.order_by == g.order_by and (p.limit is None) == (g.limit is None)


def _and_or_match(g: SqlComponents, p: SqlComponents) -> bool:
    return set(p.where.connectors) == set(g.where.connectors)


def _iuen_match(g: SqlComponents, p: SqlComponents) -> bool:
    for attr in ("intersect", "union", "except_"):
        g_sub, p_sub = getattr(g, attr), getattr(p, attr)
        if (g_sub is None) != (p_sub is None):
            return False
        if g_sub is not None and not components_match(g_sub, p_sub):
            return False
    return True


def _all_predicates(c: SqlComponents) -> tuple[Predicate, ...]:
    return c.from_conditions.predicates + c.where.predicates + c.having.predicates


def _keyword_set(c: SqlComponents) -> set[str]:
    res: set[str] = set()
    if c.where:
        res.add("where")
    if c.group_by:
        res.add("group")
    if c.having:
        res.add("having")
    if c.order_by is not None:
        res.add(c.order_by.direction)
        res.add("order")
    if c.limit is not None:
        res.add("limit")
    for op, _ in c.set_ops():
        res.add(op)
    connectors = c.from_conditions.connectors + c.where.connectors + c.having.connectors
    if "or" in connectors:
        res.add("or")
    preds = _all_predicates(c)
    if any(p.negated for p in preds):
        res.add("not")
    if any(p.op == "in" for p in preds):
        res.add("in")
    if any(p.op == "like" for p in preds):
        res.add("like")
    return res


def _keywords_match(g: SqlComponents, p: SqlComponents) -> bool:
    return _keyword_set(g) == _keyword_set(p)


def _table_sort_key(source: TableSource) -> tuple[str, str]:
    value = source.value if isinstance(source.value, str) else render_sql(source.value)
    return (source.kind, value)


def components_match(g: SqlComponents, p: SqlComponents) -> bool:
    """Exact-set match over already-rebuilt components."""
    checks = (
        _sel_match,
        _where_match,
        _group_no_having_match,
        _group_having_match,
        _order_match,
        _and_or_match,
        _iuen_match,
        _keywords_match,
    )
    if not all(check(g, p) for check in checks):
        return False
    if g.from_tables:
        return sorted(g.from_tables, key=_table_sort_key) == sorted(p.from_tables, key=_table_sort_key)
    return True


def exact_set_match(
    gold: SqlComponents,
    pred: SqlComponents,
    schema: DbSchema | None = None,
    *,
    strict_values: bool = False,
) -> bool:
    """True iff the two parsed queries match component-wise under set semantics.

    ``strict_values`` switches literal comparison on; the default ignores
    values (presence and operator still matter), per the Spider convention.
    """
    g = rebuild_for_match(gold, schema=schema, strict_values=strict_values)
    p = rebuild_for_match(pred, schema=schema, strict_values=strict_values)
    return components_match(g, p)
