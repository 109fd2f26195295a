"""Spider hardness classification, transcribed from the benchmark evaluator.

The counting quirks of the original are preserved on purpose (negated
predicates and HAVING connectors count as aggregates, for instance) so that
labels agree with the published evaluator on the full benchmark.
"""

from __future__ import annotations

from .parse import SqlComponents

HARDNESS_LABELS = ("easy", "medium", "hard", "extra")


def _nested_sqls(c: SqlComponents) -> list[SqlComponents]:
    nested: list[SqlComponents] = []
    for p in c.from_conditions.predicates + c.where.predicates + c.having.predicates:
        if isinstance(p.first, SqlComponents):
            nested.append(p.first)
        if isinstance(p.second, SqlComponents):
            nested.append(p.second)
    for _, sql in c.set_ops():
        nested.append(sql)
    return nested


def _count_component1(c: SqlComponents) -> int:
    count = 0
    if c.where:
        count += 1
    if c.group_by:
        count += 1
    if c.order_by is not None:
        count += 1
    if c.limit is not None:
        count += 1
    count += max(len(c.from_tables) - 1, 0)  # each JOIN beyond the first table
    connectors = c.from_conditions.connectors + c.where.connectors + c.having.connectors
    count += sum(1 for conn in connectors if conn == "or")
    preds = c.from_conditions.predicates + c.where.predicates + c.having.predicates
    count += sum(1 for p in preds if p.op == "like")
    return count


def _count_component2(c: SqlComponents) -> int:
    return len(_nested_sqls(c))


def _count_others(c: SqlComponents) -> int:
    count = 0
    agg_count = sum(1 for item in c.select if item.agg != "none")
    # Slot-0 indexing in the reference evaluator makes negated WHERE
    # predicates count as aggregates; reproduced for label parity.
    agg_count += sum(1 for p in c.where.predicates if p.negated)
    agg_count += sum(1 for cu in c.group_by if cu.agg != "none")
    if c.order_by is not None:
        for vu in c.order_by.values:
            if vu.left is not None and vu.left.agg != "none":
                agg_count += 1
            if vu.right is not None and vu.right.agg != "none":
                agg_count += 1
    # HAVING is scanned as an interleaved list there, so connectors count
    # too, and negated predicates count as aggregates.
    agg_count += sum(1 for p in c.having.predicates if p.negated)
    agg_count += len(c.having.connectors)
    if agg_count > 1:
        count += 1
    if len(c.select) > 1:
        count += 1
    if len(c.where.predicates) > 1:
        count += 1
    if len(c.group_by) > 1:
        count += 1
    return count


def classify_hardness(components: SqlComponents) -> str:
    """Label a parsed query easy, medium, hard, or extra."""
    comp1 = _count_component1(components)
    comp2 = _count_component2(components)
    others = _count_others(components)
    if comp1 <= 1 and others == 0 and comp2 == 0:
        return "easy"
    if (others <= 2 and comp1 <= 1 and comp2 == 0) or (
        comp1 <= 2 and others < 2 and comp2 == 0
    ):
        return "medium"
    if (
        (others > 2 and comp1 <= 2 and comp2 == 0)
        or (2 < comp1 <= 3 and others <= 2 and comp2 == 0)
        or (comp1 <= 1 and others == 0 and comp2 <= 1)
    ):
        return "hard"
    return "extra"
