"""Execution accuracy against SQLite databases."""

from __future__ import annotations

import os
import sqlite3
import time
import unicodedata

from ..errors import DbMissing, GoldExecutionFailed, UnparsableSql
from .parse import SqlComponents, parse_sql

DEFAULT_TIMEOUT = 30.0

Row = tuple

# Opcode granularity for the interrupt check; coarse enough to be cheap.
_PROGRESS_INTERVAL = 10_000


def run_query(db_path: str, sql: str, timeout: float = DEFAULT_TIMEOUT) -> list[Row]:
    """Execute one read-only statement and fetch all rows.

    Raises DbMissing when the database file is absent and sqlite3 errors
    (including a timeout-triggered interrupt) otherwise.
    """
    if not os.path.exists(db_path):
        raise DbMissing(f"database file not found: {db_path}")
    conn = sqlite3.connect(f"file:{db_path}?mode=ro", uri=True)
    try:
        conn.text_factory = lambda b: b.decode("utf-8", errors="replace")
        deadline = time.monotonic() + timeout

        def _check() -> int:
            return 1 if time.monotonic() > deadline else 0

        conn.set_progress_handler(_check, _PROGRESS_INTERVAL)
        cursor = conn.execute(sql)
        return cursor.fetchall()
    finally:
        conn.close()


def _normalize_cell(cell):
    if cell is None:
        return (0, "")
    if isinstance(cell, bool):
        return (1, float(cell))
    if isinstance(cell, (int, float)):
        return (1, float(cell))
    if isinstance(cell, bytes):
        return (2, cell.hex())
    return (3, unicodedata.normalize("NFC", str(cell)))


def _normalize_rows(rows: list[Row]) -> list[tuple]:
    return [tuple(_normalize_cell(c) for c in row) for row in rows]


def has_top_order_by(components: SqlComponents) -> bool:
    """True when the query, or any branch of its set-operation chain, orders its result."""
    node: SqlComponents | None = components
    while node is not None:
        if node.order_by is not None:
            return True
        ops = node.set_ops()
        node = ops[0][1] if ops else None
    return False


def rows_equal(gold_rows: list[Row], pred_rows: list[Row], ordered: bool) -> bool:
    gold_n = _normalize_rows(gold_rows)
    pred_n = _normalize_rows(pred_rows)
    if ordered:
        return gold_n == pred_n
    return sorted(gold_n) == sorted(pred_n)


def execution_outcome(
    gold_sql: str,
    pred_sql: str,
    db_path: str,
    timeout: float = DEFAULT_TIMEOUT,
    ordered: bool | None = None,
) -> tuple[bool, str | None]:
    """Compare result sets; returns (match, prediction error message or None).

    Row order matters only when the gold query has a top-level ORDER BY.
    Prediction failures and timeouts score False with the error recorded;
    a failing gold query raises GoldExecutionFailed.
    """
    if ordered is None:
        try:
            ordered = has_top_order_by(parse_sql(gold_sql))
        except UnparsableSql:
            ordered = "order by" in " ".join(gold_sql.lower().split())
    try:
        gold_rows = run_query(db_path, gold_sql, timeout)
    except DbMissing:
        raise
    except sqlite3.Error as exc:
        raise GoldExecutionFailed(f"gold query failed on {db_path}: {exc}") from exc
    try:
        pred_rows = run_query(db_path, pred_sql, timeout)
    except sqlite3.Error as exc:
        return False, str(exc)
    return rows_equal(gold_rows, pred_rows, ordered), None


def execute_accuracy(
    gold_sql: str,
    pred_sql: str,
    db_path: str,
    timeout: float = DEFAULT_TIMEOUT,
    ordered: bool | None = None,
) -> bool:
    """True iff gold and prediction produce the same result set."""
    match, _ = execution_outcome(gold_sql, pred_sql, db_path, timeout=timeout, ordered=ordered)
    return match
