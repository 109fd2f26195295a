"""SQL canonicalization, exact-set match, execution accuracy, and hardness."""

from .execute import (
    execute_accuracy,
    execution_outcome,
    has_top_order_by,
    rows_equal,
    run_query,
)
from .hardness import HARDNESS_LABELS, classify_hardness
from .match import exact_set_match, rebuild_for_match
from .parse import SqlComponents, parse_sql, render_sql, tokenize
from .runner import EvalOutcome, EvalPair, db_path_for, evaluate_pair, evaluate_pairs

__all__ = [
    "EvalOutcome",
    "EvalPair",
    "HARDNESS_LABELS",
    "SqlComponents",
    "classify_hardness",
    "db_path_for",
    "evaluate_pair",
    "evaluate_pairs",
    "exact_set_match",
    "execute_accuracy",
    "execution_outcome",
    "has_top_order_by",
    "parse_sql",
    "rebuild_for_match",
    "render_sql",
    "rows_equal",
    "run_query",
    "tokenize",
]
