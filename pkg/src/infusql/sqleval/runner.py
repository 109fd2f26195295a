"""Per-example evaluation: one EvalOutcome per gold/prediction pair."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

from ..errors import GoldExecutionFailed, InfusqlError, UnknownColumn, UnparsableSql
from ..schema import DbSchema
from .execute import DEFAULT_TIMEOUT, execution_outcome, has_top_order_by
from .hardness import classify_hardness
from .match import exact_set_match
from .parse import parse_sql


@dataclass
class EvalOutcome:
    """One example's verdicts: hardness, exact-set match, execution match."""

    id: str
    hardness: str
    em: bool
    ex: bool
    pred_error: str | None = None

    def __post_init__(self) -> None:
        if self.pred_error and self.ex:
            raise ValueError("an outcome with a prediction error cannot have ex=True")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class EvalPair:
    """Input to evaluation: aligned gold and predicted SQL over one database."""

    id: str
    gold_sql: str
    pred_sql: str
    db_id: str


def db_path_for(db_root: str, db_id: str) -> str:
    return os.path.join(db_root, db_id, f"{db_id}.sqlite")


def evaluate_pair(
    pair: EvalPair,
    schema: DbSchema,
    db_root: str | None,
    *,
    strict_values: bool = False,
    timeout: float = DEFAULT_TIMEOUT,
    run_execution: bool = True,
) -> EvalOutcome:
    """Score one pair.  Gold-side failures raise; prediction failures score False."""
    try:
        gold = parse_sql(pair.gold_sql, schema)
    except (UnparsableSql, UnknownColumn) as exc:
        raise GoldExecutionFailed(f"{pair.id}: gold query does not parse: {exc}") from exc
    hardness = classify_hardness(gold)

    em = False
    try:
        pred = parse_sql(pair.pred_sql, schema)
        em = exact_set_match(gold, pred, schema, strict_values=strict_values)
    except (UnparsableSql, UnknownColumn):
        pred = None

    ex = False
    pred_error: str | None = None
    if run_execution:
        if db_root is None:
            raise InfusqlError("execution accuracy requested without a database root")
        ex, pred_error = execution_outcome(
            pair.gold_sql,
            pair.pred_sql,
            db_path_for(db_root, pair.db_id),
            timeout=timeout,
            ordered=has_top_order_by(gold),
        )
    return EvalOutcome(id=pair.id, hardness=hardness, em=em, ex=ex, pred_error=pred_error)


def evaluate_pairs(
    pairs: list[EvalPair],
    schemas: dict[str, DbSchema],
    db_root: str | None,
    *,
    strict_values: bool = False,
    timeout: float = DEFAULT_TIMEOUT,
    run_execution: bool = True,
    workers: int = 1,
) -> list[EvalOutcome]:
    """Score all pairs, preserving input order regardless of worker count."""

    def score(pair: EvalPair) -> EvalOutcome:
        if pair.db_id not in schemas:
            raise GoldExecutionFailed(f"{pair.id}: unknown db_id {pair.db_id!r}")
        return evaluate_pair(
            pair,
            schemas[pair.db_id],
            db_root,
            strict_values=strict_values,
            timeout=timeout,
            run_execution=run_execution,
        )

    if workers <= 1:
        return [score(p) for p in pairs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(score, pairs))
