"""Parsing the Spider SQL subset into canonical, order-insensitive components.

The grammar, the component shapes, and their quirks deliberately follow the
Spider benchmark's evaluation parser so that downstream exact-set-match and
hardness verdicts agree with it: aliases are resolved by a global scan,
identifiers are lowercased, unqualified columns resolve against the FROM
tables in order, and ``ON`` conditions accumulate into the FROM clause.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional, Union

from ..errors import UnknownColumn, UnparsableSql
from ..schema import DbSchema

AGG_OPS = ("none", "max", "min", "count", "sum", "avg")
UNIT_OPS = ("none", "-", "+", "*", "/")
COMPARE_OPS = ("between", "=", ">", "<", ">=", "<=", "!=", "in", "like", "is")
COND_CONNECTORS = ("and", "or")
ORDER_DIRECTIONS = ("asc", "desc")
SET_OPS = ("intersect", "union", "except")
CLAUSE_KEYWORDS = ("select", "from", "where", "group", "order", "limit") + SET_OPS
JOIN_KEYWORDS = ("join", "on", "as")


class ColUnit(NamedTuple):
    agg: str
    column: str  # lowercased "table.col", bare "col", or "*"
    distinct: bool | None


class ValUnit(NamedTuple):
    op: str  # one of UNIT_OPS
    left: ColUnit
    right: ColUnit | None


class SelectItem(NamedTuple):
    agg: str
    value: ValUnit


class TableSource(NamedTuple):
    kind: str  # "table" | "sql"
    value: Union[str, "SqlComponents"]


# A predicate's comparison values: number, quoted string, column, or subquery.
CondValue = Union[float, str, ColUnit, "SqlComponents", None]


class Predicate(NamedTuple):
    negated: bool
    op: str  # one of COMPARE_OPS
    value: ValUnit
    first: CondValue
    second: CondValue  # only for BETWEEN


class Condition(NamedTuple):
    predicates: tuple[Predicate, ...]
    connectors: tuple[str, ...]  # 'and'/'or', one fewer than predicates

    def __bool__(self) -> bool:
        return bool(self.predicates)


EMPTY_CONDITION = Condition((), ())


class OrderBy(NamedTuple):
    direction: str  # 'asc' | 'desc'
    values: tuple[ValUnit, ...]


class Limit(NamedTuple):
    value: int | None  # None when present with an unknown count


@dataclass(frozen=True)
class SqlComponents:
    """Canonical decomposition of one SELECT statement."""

    select_distinct: bool
    select: tuple[SelectItem, ...]
    from_tables: tuple[TableSource, ...]
    from_conditions: Condition
    where: Condition
    group_by: tuple[ColUnit, ...]
    having: Condition
    order_by: OrderBy | None
    limit: Limit | None
    intersect: Optional["SqlComponents"] = None
    union: Optional["SqlComponents"] = None
    except_: Optional["SqlComponents"] = None

    def set_ops(self) -> list[tuple[str, "SqlComponents"]]:
        pairs = [("intersect", self.intersect), ("union", self.union), ("except", self.except_)]
        return [(op, sql) for op, sql in pairs if sql is not None]

    def replace(self, **changes) -> "SqlComponents":
        return replace(self, **changes)


_TOKEN_RE = re.compile(
    r"""
      '(?:[^']|'')*'
    | "[^"]*"
    | [A-Za-z_][A-Za-z0-9_]*(?:\.[A-Za-z_][A-Za-z0-9_]*)*
    | \d+\.\d+ | \d+
    | != | <> | >= | <= | = | < | >
    | [(),;*+\-/]
    """,
    re.VERBOSE,
)


def tokenize(sql: str) -> list[str]:
    """Lowercase token stream; quoted string values keep their case.

    Single-quoted strings are normalized to double quotes, mirroring the
    Spider evaluator, and ``<>`` becomes ``!=``.
    """
    tokens: list[str] = []
    pos = 0
    for match in _TOKEN_RE.finditer(sql):
        if sql[pos : match.start()].strip():
            raise UnparsableSql(f"unexpected character near {sql[pos:match.start()].strip()!r}")
        tok = match.group()
        if tok.startswith("'"):
            tokens.append('"' + tok[1:-1].replace("''", "'") + '"')
        elif tok.startswith('"'):
            tokens.append(tok)
        elif tok == "<>":
            tokens.append("!=")
        else:
            tokens.append(tok.lower())
        pos = match.end()
    if sql[pos:].strip():
        raise UnparsableSql(f"unexpected character near {sql[pos:].strip()!r}")
    return tokens


class _Parser:
    def __init__(self, tokens: list[str], schema: DbSchema | None):
        self.toks = tokens
        self.schema = schema
        self.columns = schema.column_map() if schema is not None else {}
        self.aliases = self._scan_aliases()

    def _scan_aliases(self) -> dict[str, str]:
        # One global scan, as the Spider evaluator does: aliases declared in
        # any subquery are visible everywhere in the statement.
        aliases: dict[str, str] = {}
        for i, tok in enumerate(self.toks):
            if tok == "as" and 0 < i < len(self.toks) - 1:
                aliases[self.toks[i + 1]] = self.toks[i - 1]
        for name in self.columns:
            if name in aliases:
                raise UnparsableSql(f"alias {name!r} shadows a table name")
            aliases[name] = name
        return aliases

    # --- helpers -------------------------------------------------------

    def _fail(self, idx: int, why: str) -> UnparsableSql:
        found = self.toks[idx] if idx < len(self.toks) else "<end>"
        return UnparsableSql(f"token {idx} ({found!r}): {why}")

    def _resolve_table(self, name: str, idx: int) -> str:
        if name in self.aliases:
            return self.aliases[name]
        if self.schema is None and re.match(r"[a-z_][a-z0-9_]*$", name):
            return name
        raise self._fail(idx, f"unknown table or alias {name!r}")

    def _resolve_column(self, tok: str, idx: int, default_tables: list[str] | None) -> str:
        if tok == "*":
            return "*"
        if "." in tok:
            alias, _, col = tok.partition(".")
            table = self.aliases.get(alias, alias if self.schema is None else None)
            if table is None:
                raise UnknownColumn(f"unknown table or alias in column reference {tok!r}")
            if self.schema is not None and col not in self.columns.get(table, ()):
                raise UnknownColumn(f"column {tok!r} does not exist in table {table!r}")
            return f"{table}.{col}"
        if self.schema is not None:
            for table in default_tables or ():
                if tok in self.columns.get(table, ()):
                    return f"{table}.{tok}"
            raise UnknownColumn(f"column {tok!r} not found in FROM tables {default_tables}")
        if default_tables and len(default_tables) == 1:
            return f"{default_tables[0]}.{tok}"
        return tok

    # --- grammar -------------------------------------------------------

    def parse_col_unit(self, idx: int, default_tables: list[str] | None) -> tuple[int, ColUnit]:
        toks = self.toks
        is_block = False
        distinct = False
        if idx < len(toks) and toks[idx] == "(":
            is_block = True
            idx += 1
        if idx < len(toks) and toks[idx] in AGG_OPS and toks[idx] != "none":
            agg = toks[idx]
            idx += 1
            if idx >= len(toks) or toks[idx] != "(":
                raise self._fail(idx, f"expected '(' after aggregate {agg!r}")
            idx += 1
            if toks[idx] == "distinct":
                distinct = True
                idx += 1
            column = self._resolve_column(toks[idx], idx, default_tables)
            idx += 1
            if idx >= len(toks) or toks[idx] != ")":
                raise self._fail(idx, "expected ')' closing aggregate")
            idx += 1
            return idx, ColUnit(agg, column, distinct)
        if idx < len(toks) and toks[idx] == "distinct":
            distinct = True
            idx += 1
        if idx >= len(toks):
            raise self._fail(idx, "expected a column reference")
        column = self._resolve_column(toks[idx], idx, default_tables)
        idx += 1
        if is_block:
            if idx >= len(toks) or toks[idx] != ")":
                raise self._fail(idx, "expected ')'")
            idx += 1
        return idx, ColUnit("none", column, distinct)

    def parse_val_unit(self, idx: int, default_tables: list[str] | None) -> tuple[int, ValUnit]:
        toks = self.toks
        is_block = False
        if idx < len(toks) and toks[idx] == "(":
            is_block = True
            idx += 1
        idx, left = self.parse_col_unit(idx, default_tables)
        op = "none"
        right = None
        if idx < len(toks) and toks[idx] in UNIT_OPS and toks[idx] != "none":
            op = toks[idx]
            idx += 1
            idx, right = self.parse_col_unit(idx, default_tables)
        if is_block:
            if idx >= len(toks) or toks[idx] != ")":
                raise self._fail(idx, "expected ')'")
            idx += 1
        return idx, ValUnit(op, left, right)

    def parse_value(self, idx: int, default_tables: list[str] | None) -> tuple[int, CondValue]:
        toks = self.toks
        is_block = False
        if idx < len(toks) and toks[idx] == "(":
            is_block = True
            idx += 1
        if idx >= len(toks):
            raise self._fail(idx, "expected a comparison value")
        tok = toks[idx]
        value: CondValue
        if tok == "select":
            idx, value = self.parse_sql(idx)
        elif tok.startswith('"'):
            value = tok
            idx += 1
        else:
            try:
                value = float(tok)
                idx += 1
            except ValueError:
                idx, col_unit = self.parse_col_unit(idx, default_tables)
                value = col_unit
                # Arithmetic on the value side keeps only its first column,
                # as the Spider evaluator does.
                if idx < len(toks) and toks[idx] in UNIT_OPS and toks[idx] != "none":
                    idx, _ = self.parse_col_unit(idx + 1, default_tables)
        if is_block:
            if idx >= len(toks) or toks[idx] != ")":
                raise self._fail(idx, "expected ')' closing value")
            idx += 1
        return idx, value

    def parse_condition(self, idx: int, default_tables: list[str] | None) -> tuple[int, Condition]:
        toks = self.toks
        predicates: list[Predicate] = []
        connectors: list[str] = []
        while idx < len(toks):
            idx, val_unit = self.parse_val_unit(idx, default_tables)
            negated = False
            if idx < len(toks) and toks[idx] == "not":
                negated = True
                idx += 1
            if idx >= len(toks) or toks[idx] not in COMPARE_OPS:
                raise self._fail(idx, "expected a comparison operator")
            op = toks[idx]
            idx += 1
            if op == "between":
                idx, first = self.parse_value(idx, default_tables)
                if idx >= len(toks) or toks[idx] != "and":
                    raise self._fail(idx, "expected 'and' inside BETWEEN")
                idx += 1
                idx, second = self.parse_value(idx, default_tables)
            else:
                idx, first = self.parse_value(idx, default_tables)
                second = None
            predicates.append(Predicate(negated, op, val_unit, first, second))
            if idx < len(toks) and (
                toks[idx] in CLAUSE_KEYWORDS or toks[idx] in (")", ";") or toks[idx] in JOIN_KEYWORDS
            ):
                break
            if idx < len(toks) and toks[idx] in COND_CONNECTORS:
                connectors.append(toks[idx])
                idx += 1
            else:
                break
        return idx, Condition(tuple(predicates), tuple(connectors))

    def parse_from(self, idx: int) -> tuple[int, tuple[TableSource, ...], Condition, list[str]]:
        toks = self.toks
        try:
            idx = toks.index("from", idx) + 1
        except ValueError:
            raise UnparsableSql("statement has no FROM clause") from None
        sources: list[TableSource] = []
        predicates: list[Predicate] = []
        connectors: list[str] = []
        default_tables: list[str] = []
        while idx < len(toks):
            is_block = False
            if toks[idx] == "(":
                is_block = True
                idx += 1
            if idx < len(toks) and toks[idx] == "select":
                idx, nested = self.parse_sql(idx)
                sources.append(TableSource("sql", nested))
            else:
                if idx < len(toks) and toks[idx] == "join":
                    idx += 1
                if idx >= len(toks):
                    raise self._fail(idx, "expected a table name")
                table = self._resolve_table(toks[idx], idx)
                if idx + 1 < len(toks) and toks[idx + 1] == "as":
                    idx += 3
                else:
                    idx += 1
                sources.append(TableSource("table", table))
                default_tables.append(table)
            if idx < len(toks) and toks[idx] == "on":
                idx += 1
                idx, cond = self.parse_condition(idx, default_tables)
                if predicates:
                    connectors.append("and")
                predicates.extend(cond.predicates)
                connectors.extend(cond.connectors)
            if is_block:
                if idx >= len(toks) or toks[idx] != ")":
                    raise self._fail(idx, "expected ')' closing FROM block")
                idx += 1
            if idx < len(toks) and (toks[idx] in CLAUSE_KEYWORDS or toks[idx] in (")", ";")):
                break
        if not sources:
            raise UnparsableSql("FROM clause names no tables")
        return idx, tuple(sources), Condition(tuple(predicates), tuple(connectors)), default_tables

    def parse_select(self, idx: int, default_tables: list[str]) -> tuple[int, bool, tuple[SelectItem, ...]]:
        toks = self.toks
        if idx >= len(toks) or toks[idx] != "select":
            raise self._fail(idx, "expected SELECT")
        idx += 1
        distinct = False
        if idx < len(toks) and toks[idx] == "distinct":
            distinct = True
            idx += 1
        items: list[SelectItem] = []
        while idx < len(toks) and toks[idx] not in CLAUSE_KEYWORDS:
            agg = "none"
            if toks[idx] in AGG_OPS and toks[idx] != "none":
                agg = toks[idx]
                idx += 1
            idx, val_unit = self.parse_val_unit(idx, default_tables)
            items.append(SelectItem(agg, val_unit))
            if idx < len(toks) and toks[idx] == ",":
                idx += 1
        if not items:
            raise self._fail(idx, "empty select list")
        return idx, distinct, tuple(items)

    def parse_group_by(self, idx: int, default_tables: list[str]) -> tuple[int, tuple[ColUnit, ...]]:
        toks = self.toks
        if idx >= len(toks) or toks[idx] != "group":
            return idx, ()
        idx += 1
        if idx >= len(toks) or toks[idx] != "by":
            raise self._fail(idx, "expected BY after GROUP")
        idx += 1
        col_units: list[ColUnit] = []
        while idx < len(toks) and toks[idx] not in CLAUSE_KEYWORDS and toks[idx] not in (")", ";"):
            idx, col_unit = self.parse_col_unit(idx, default_tables)
            col_units.append(col_unit)
            if idx < len(toks) and toks[idx] == ",":
                idx += 1
            else:
                break
        return idx, tuple(col_units)

    def parse_order_by(self, idx: int, default_tables: list[str]) -> tuple[int, OrderBy | None]:
        toks = self.toks
        if idx >= len(toks) or toks[idx] != "order":
            return idx, None
        idx += 1
        if idx >= len(toks) or toks[idx] != "by":
            raise self._fail(idx, "expected BY after ORDER")
        idx += 1
        direction = "asc"
        values: list[ValUnit] = []
        while idx < len(toks) and toks[idx] not in CLAUSE_KEYWORDS and toks[idx] not in (")", ";"):
            idx, val_unit = self.parse_val_unit(idx, default_tables)
            values.append(val_unit)
            if idx < len(toks) and toks[idx] in ORDER_DIRECTIONS:
                direction = toks[idx]
                idx += 1
            if idx < len(toks) and toks[idx] == ",":
                idx += 1
            else:
                break
        return idx, OrderBy(direction, tuple(values))

    def parse_where(self, idx: int, default_tables: list[str]) -> tuple[int, Condition]:
        if idx >= len(self.toks) or self.toks[idx] != "where":
            return idx, EMPTY_CONDITION
        return self.parse_condition(idx + 1, default_tables)

    def parse_having(self, idx: int, default_tables: list[str]) -> tuple[int, Condition]:
        if idx >= len(self.toks) or self.toks[idx] != "having":
            return idx, EMPTY_CONDITION
        return self.parse_condition(idx + 1, default_tables)

    def parse_limit(self, idx: int) -> tuple[int, Limit | None]:
        toks = self.toks
        if idx >= len(toks) or toks[idx] != "limit":
            return idx, None
        idx += 1
        if idx >= len(toks):
            raise self._fail(idx, "LIMIT without a count")
        digits = re.findall(r"\d+", toks[idx])
        idx += 1
        return idx, Limit(int(digits[0]) if digits else None)

    def _skip_semicolons(self, idx: int) -> int:
        while idx < len(self.toks) and self.toks[idx] == ";":
            idx += 1
        return idx

    def parse_sql(self, idx: int) -> tuple[int, SqlComponents]:
        toks = self.toks
        is_block = False
        if idx < len(toks) and toks[idx] == "(":
            is_block = True
            idx += 1
        start = idx
        from_end, sources, from_cond, default_tables = self.parse_from(start)
        _, distinct, items = self.parse_select(start, default_tables)
        idx = from_end
        idx, where = self.parse_where(idx, default_tables)
        idx, group_by = self.parse_group_by(idx, default_tables)
        idx, having = self.parse_having(idx, default_tables)
        idx, order_by = self.parse_order_by(idx, default_tables)
        idx, limit = self.parse_limit(idx)
        idx = self._skip_semicolons(idx)
        if is_block:
            if idx >= len(toks) or toks[idx] != ")":
                raise self._fail(idx, "expected ')' closing subquery")
            idx += 1
        idx = self._skip_semicolons(idx)
        sql = SqlComponents(
            select_distinct=distinct,
            select=items,
            from_tables=sources,
            from_conditions=from_cond,
            where=where,
            group_by=group_by,
            having=having,
            order_by=order_by,
            limit=limit,
        )
        if idx < len(toks) and toks[idx] in SET_OPS:
            set_op = toks[idx]
            idx, nested = self.parse_sql(idx + 1)
            field = {"intersect": "intersect", "union": "union", "except": "except_"}[set_op]
            sql = sql.replace(**{field: nested})
        return idx, sql


def parse_sql(sql: str, schema: DbSchema | None = None) -> SqlComponents:
    """Parse one statement of the Spider SQL subset into components.

    With a schema, aliases are expanded and every column reference is
    validated (UnknownColumn names the offender); without one, columns are
    kept as written.  Anything outside the subset raises UnparsableSql.
    """
    tokens = tokenize(sql)
    if not tokens:
        raise UnparsableSql("empty statement")
    parser = _Parser(tokens, schema)
    idx, components = parser.parse_sql(0)
    idx = parser._skip_semicolons(idx)
    if idx != len(tokens):
        raise parser._fail(idx, "trailing tokens after statement")
    return components


# --- canonical rendering -----------------------------------------------


def _render_col_unit(c: ColUnit) -> list[str]:
    inner = ["distinct", c.column] if c.distinct else [c.column]
    if c.agg != "none":
        return [c.agg, "("] + inner + [")"]
    return inner


def _render_val_unit(v: ValUnit) -> list[str]:
    out = _render_col_unit(v.left)
    if v.op != "none" and v.right is not None:
        out += [v.op] + _render_col_unit(v.right)
    return out


def _render_value(value: CondValue) -> list[str]:
    if isinstance(value, SqlComponents):
        return ["("] + _render_tokens(value) + [")"]
    if isinstance(value, ColUnit):
        return _render_col_unit(value)
    if isinstance(value, float):
        return [str(int(value)) if value.is_integer() else str(value)]
    if isinstance(value, str):
        return [value]
    raise ValueError(f"cannot render comparison value {value!r}")


def _render_condition(cond: Condition) -> list[str]:
    out: list[str] = []
    for i, pred in enumerate(cond.predicates):
        if i > 0:
            out.append(cond.connectors[i - 1])
        out += _render_val_unit(pred.value)
        if pred.negated:
            out.append("not")
        out.append(pred.op)
        out += _render_value(pred.first)
        if pred.op == "between":
            out.append("and")
            out += _render_value(pred.second)
    return out


def _render_tokens(c: SqlComponents) -> list[str]:
    out = ["select"]
    if c.select_distinct:
        out.append("distinct")
    for i, item in enumerate(c.select):
        if i > 0:
            out.append(",")
        if item.agg != "none":
            out += [item.agg, "("] + _render_val_unit(item.value) + [")"]
        else:
            out += _render_val_unit(item.value)
    out.append("from")
    for i, source in enumerate(c.from_tables):
        if i > 0:
            out.append("join")
        if source.kind == "table":
            out.append(source.value)
        else:
            out += ["("] + _render_tokens(source.value) + [")"]
    if c.from_conditions:
        out.append("on")
        out += _render_condition(c.from_conditions)
    if c.where:
        out.append("where")
        out += _render_condition(c.where)
    if c.group_by:
        out += ["group", "by"]
        for i, col_unit in enumerate(c.group_by):
            if i > 0:
                out.append(",")
            out += _render_col_unit(col_unit)
    if c.having:
        out.append("having")
        out += _render_condition(c.having)
    if c.order_by is not None:
        out += ["order", "by"]
        for i, val_unit in enumerate(c.order_by.values):
            if i > 0:
                out.append(",")
            out += _render_val_unit(val_unit)
        out.append(c.order_by.direction)
    if c.limit is not None:
        out += ["limit", str(c.limit.value) if c.limit.value is not None else "_"]
    for op, nested in c.set_ops():
        out.append(op)
        out += _render_tokens(nested)
    return out


def render_sql(components: SqlComponents) -> str:
    """Serialize components back to canonical SQL text.

    The output is a fixpoint: parsing it again yields equal components.
    """
    return " ".join(_render_tokens(components))
