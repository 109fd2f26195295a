"""Spider schema loading and the pipe-delimited prompt serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import BadIndex, BadRanking, DuplicateDb


@dataclass(frozen=True)
class Column:
    name: str
    col_type: str = "text"


@dataclass(frozen=True)
class Table:
    name: str
    columns: tuple[Column, ...]

    def column_names(self) -> list[str]:
        return [c.name for c in self.columns]


@dataclass(frozen=True)
class DbSchema:
    """Tables, columns, and key constraints for one database."""

    db_id: str
    tables: tuple[Table, ...]
    primary_keys: tuple[tuple[str, str], ...] = ()
    foreign_keys: tuple[tuple[tuple[str, str], tuple[str, str]], ...] = ()

    def __post_init__(self) -> None:
        names = [t.name.lower() for t in self.tables]
        if len(set(names)) != len(names):
            raise ValueError(f"{self.db_id}: duplicate table names")
        for table in self.tables:
            cols = [c.name.lower() for c in table.columns]
            if len(set(cols)) != len(cols):
                raise ValueError(f"{self.db_id}.{table.name}: duplicate column names")
        for t, c in self.primary_keys:
            if not self.has_column(t, c):
                raise BadIndex(f"{self.db_id}: primary key names missing column {t}.{c}")
        for left, right in self.foreign_keys:
            for t, c in (left, right):
                if not self.has_column(t, c):
                    raise BadIndex(f"{self.db_id}: foreign key names missing column {t}.{c}")

    def table_names(self) -> list[str]:
        return [t.name for t in self.tables]

    def table(self, name: str) -> Table:
        lowered = name.lower()
        for t in self.tables:
            if t.name.lower() == lowered:
                return t
        raise KeyError(name)

    def has_table(self, name: str) -> bool:
        lowered = name.lower()
        return any(t.name.lower() == lowered for t in self.tables)

    def has_column(self, table: str, column: str) -> bool:
        if not self.has_table(table):
            return False
        return column.lower() in {c.name.lower() for c in self.table(table).columns}

    def column_map(self) -> dict[str, list[str]]:
        """Lowercased table name to lowercased column names."""
        return {t.name.lower(): [c.name.lower() for c in t.columns] for t in self.tables}

    def foreign_key_canonical_map(self) -> dict[str, str]:
        """Map each lowercased ``table.column`` in a foreign-key group to one representative.

        Columns linked (transitively) by foreign keys collapse onto the
        lexicographically smallest member, which makes equivalent join
        columns compare equal during exact-set matching.
        """
        groups: list[set[str]] = []
        for (lt, lc), (rt, rc) in self.foreign_keys:
            a = f"{lt.lower()}.{lc.lower()}"
            b = f"{rt.lower()}.{rc.lower()}"
            merged = None
            for g in groups:
                if a in g or b in g:
                    merged = g
                    break
            if merged is None:
                merged = set()
                groups.append(merged)
            merged.update((a, b))
        mapping: dict[str, str] = {}
        for g in groups:
            rep = min(g)
            for col in g:
                mapping[col] = rep
        return mapping


def load_tables(json_text: str) -> list[DbSchema]:
    """Parse a Spider tables.json document into one DbSchema per database.

    Index-based column references are resolved to names and the synthetic
    ``*`` column is dropped.  Raises BadIndex on out-of-range references and
    DuplicateDb on repeated db_ids.
    """
    entries = json.loads(json_text)
    schemas: list[DbSchema] = []
    seen: set[str] = set()
    for entry in entries:
        db_id = entry["db_id"]
        if db_id in seen:
            raise DuplicateDb(f"db_id {db_id!r} appears more than once")
        seen.add(db_id)
        table_names = entry["table_names_original"]
        column_entries = entry["column_names_original"]
        column_types = entry.get("column_types") or ["text"] * len(column_entries)

        columns_by_table: dict[int, list[Column]] = {i: [] for i in range(len(table_names))}
        col_ref: dict[int, tuple[str, str]] = {}
        for col_idx, (table_idx, col_name) in enumerate(column_entries):
            if table_idx == -1:
                continue  # the synthetic '*' column
            if not 0 <= table_idx < len(table_names):
                raise BadIndex(f"{db_id}: column {col_name!r} references table index {table_idx}")
            col_type = column_types[col_idx] if col_idx < len(column_types) else "text"
            columns_by_table[table_idx].append(Column(name=col_name, col_type=col_type))
            col_ref[col_idx] = (table_names[table_idx], col_name)

        def resolve(col_idx: int) -> tuple[str, str]:
            if col_idx not in col_ref:
                raise BadIndex(f"{db_id}: column index {col_idx} out of range")
            return col_ref[col_idx]

        primary_keys = tuple(resolve(i) for i in entry.get("primary_keys", ()))
        foreign_keys = tuple(
            (resolve(a), resolve(b)) for a, b in entry.get("foreign_keys", ())
        )
        tables = tuple(
            Table(name=name, columns=tuple(columns_by_table[i]))
            for i, name in enumerate(table_names)
        )
        schemas.append(
            DbSchema(db_id=db_id, tables=tables, primary_keys=primary_keys, foreign_keys=foreign_keys)
        )
    return schemas


@dataclass(frozen=True)
class SchemaRanking:
    """Externally supplied relevance order for tables and per-table columns.

    Stands in for a learned relevance ranker; names are matched
    case-insensitively and each entry must be a permutation of the schema.
    """

    table_order: tuple[str, ...] | None = None
    column_orders: dict[str, tuple[str, ...]] = field(default_factory=dict)

    @classmethod
    def from_json(cls, json_text: str) -> "SchemaRanking":
        data = json.loads(json_text)
        tables = tuple(data["tables"]) if data.get("tables") else None
        columns = {k: tuple(v) for k, v in data.get("columns", {}).items()}
        return cls(table_order=tables, column_orders=columns)


def _check_permutation(kind: str, supplied: tuple[str, ...], expected: list[str]) -> list[str]:
    lowered = [s.lower() for s in supplied]
    if sorted(lowered) != sorted(e.lower() for e in expected):
        raise BadRanking(
            f"{kind} ranking {list(supplied)} is not a permutation of {expected}"
        )
    return lowered


def serialize_schema(schema: DbSchema, ranking: SchemaRanking | None = None) -> str:
    """Render the schema as the pipe-delimited prompt suffix.

    Format: ``| table : table.col , table.col | table2 : ... | fk = fk``,
    tables and columns in schema order unless a ranking reorders them, all
    names lowercased, one segment per table and per foreign key.
    """
    table_names = [t.name.lower() for t in schema.tables]
    if ranking is not None and ranking.table_order is not None:
        table_names = _check_permutation("table", ranking.table_order, table_names)

    segments: list[str] = []
    for name in table_names:
        columns = [c.lower() for c in schema.table(name).column_names()]
        if ranking is not None:
            for key, order in ranking.column_orders.items():
                if key.lower() == name:
                    columns = _check_permutation(f"column ({name})", order, columns)
                    break
        cols = " , ".join(f"{name}.{c}" for c in columns)
        segments.append(f"{name} : {cols}")
    for (lt, lc), (rt, rc) in schema.foreign_keys:
        segments.append(f"{lt.lower()}.{lc.lower()} = {rt.lower()}.{rc.lower()}")
    return "| " + " | ".join(segments)
