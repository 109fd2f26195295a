"""Assembling model inputs and skeleton-pipe targets."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from .amr import AmrGraph
from .conllu import DepTree
from .errors import MissingParse, UnparsableSql
from .linearize import InfusionMode, RelationFilter, compose_infusion, linearize_amr, linearize_dependency
from .schema import DbSchema, SchemaRanking, serialize_schema
from .sqleval.parse import SqlComponents, parse_sql, tokenize

TARGET_SEPARATOR = " | "

FALLBACK_POLICIES = ("degrade", "strict")

_SKELETON_TOKENS = frozenset(
    {"_", "select", "distinct", "from", "where", "group", "by", "having", "order", "limit",
     "union", "intersect", "except"}
)


@dataclass
class PromptRecord:
    """One training or inference example, ready for a seq2seq pipeline."""

    id: str
    db_id: str
    question: str
    mode: InfusionMode
    infused_text: str
    schema_text: str
    prompt: str
    target: str | None = None
    warnings: list[str] = field(default_factory=list)
    prompt_chars: int = 0
    prompt_tokens: int = 0

    def __post_init__(self) -> None:
        if self.prompt != f"{self.infused_text} {self.schema_text}":
            raise ValueError("prompt must be the infused text and schema text, space-joined")
        if self.target is not None and self.target.count(TARGET_SEPARATOR) != 1:
            raise ValueError("target must contain exactly one ' | ' separator")

    def to_dict(self) -> dict:
        data = asdict(self)
        data["mode"] = self.mode.value
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)


def _skeleton_tokens(c: SqlComponents) -> list[str]:
    out = ["select"]
    if c.select_distinct:
        out.append("distinct")
    out.append("_")
    if c.from_tables:
        out += ["from", "_"]
    if c.where:
        out += ["where", "_"]
    if c.group_by:
        out += ["group", "by", "_"]
    if c.having:
        out += ["having", "_"]
    if c.order_by is not None:
        out += ["order", "by", "_"]
    if c.limit is not None:
        out += ["limit", "_"]
    for op, nested in c.set_ops():
        out.append(op)
        out += _skeleton_tokens(nested)
    return out


def extract_skeleton(sql: str) -> str:
    """Blank a query down to its clause structure, one ``_`` per clause slot.

    Keywords keep their canonical lowercase order; the select list, the
    table list, each predicate chain, and the grouping, ordering, and limit
    slots each collapse to a single underscore.  Skeletons are their own
    fixpoint: feeding one back in returns it unchanged.
    """
    tokens = tokenize(sql)
    if tokens and all(t in _SKELETON_TOKENS for t in tokens):
        return " ".join(tokens)
    components = parse_sql(sql, None)
    return " ".join(_skeleton_tokens(components))


def build_target(gold_sql: str) -> str:
    """Skeleton, pipe separator, then the gold query exactly as supplied."""
    return f"{extract_skeleton(gold_sql)}{TARGET_SEPARATOR}{gold_sql}"


def split_prediction(model_output: str) -> str:
    """Strip the skeleton prefix from a generated sequence.

    Everything after the first ``|`` is returned, whitespace-trimmed; output
    without a pipe is returned whole.
    """
    _, sep, tail = model_output.partition("|")
    return tail.strip() if sep else model_output


def build_record(
    question: str,
    dep: DepTree | None,
    amr: AmrGraph | None,
    schema: DbSchema,
    mode: InfusionMode,
    gold_sql: str | None = None,
    *,
    record_id: str = "",
    relation_filter: RelationFilter | None = None,
    ranking: SchemaRanking | None = None,
    policy: str = "degrade",
) -> PromptRecord:
    """Assemble the full prompt (and target, when gold SQL is given) for one example.

    A parse required by ``mode`` but missing is an error under the strict
    policy; under the default degrade policy the fragment is dropped and a
    warning is recorded on the record.
    """
    if policy not in FALLBACK_POLICIES:
        raise ValueError(f"unknown fallback policy {policy!r}")
    warnings: list[str] = []
    effective = mode
    if mode.wants_syntax and dep is None:
        if policy == "strict":
            raise MissingParse(f"{record_id}: mode {mode.value} needs a dependency parse")
        warnings.append(f"dep-missing:{record_id}")
        effective = InfusionMode.AMR if effective.wants_amr else InfusionMode.NONE
    if mode.wants_amr and amr is None:
        if policy == "strict":
            raise MissingParse(f"{record_id}: mode {mode.value} needs an AMR graph")
        warnings.append(f"amr-missing:{record_id}")
        effective = InfusionMode.SYNTAX if effective.wants_syntax else InfusionMode.NONE

    syntax_text = linearize_dependency(dep, relation_filter) if effective.wants_syntax else None
    amr_text = linearize_amr(amr) if effective.wants_amr else None
    infused = compose_infusion(question, syntax_text, amr_text, effective)
    schema_text = serialize_schema(schema, ranking)
    prompt = f"{infused} {schema_text}"

    target = None
    if gold_sql is not None:
        try:
            target = build_target(gold_sql)
        except UnparsableSql as exc:
            raise UnparsableSql(f"{record_id}: gold SQL does not parse: {exc}") from exc

    return PromptRecord(
        id=record_id,
        db_id=schema.db_id,
        question=question,
        mode=mode,
        infused_text=infused,
        schema_text=schema_text,
        prompt=prompt,
        target=target,
        warnings=warnings,
        prompt_chars=len(prompt),
        prompt_tokens=len(prompt.split()),
    )
