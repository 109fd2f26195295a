"""Linguistic-structure prompt infusion and Spider-style evaluation for NL2SQL.

The library covers the full path from parser interchange files (CoNLL-U and
PENMAN) through prompt construction with RESDSQL-style schema serialization
and skeleton targets, to exact-set-match / execution-accuracy evaluation and
report tables.  The ``infusql`` command line drives the same pipeline.
"""

from .amr import AmrGraph, read_penman, render_penman
from .conllu import DepToken, DepTree, read_conllu, render_verbose, write_conllu
from .linearize import (
    DEFAULT_RELATIONS,
    InfusionMode,
    RelationFilter,
    compose_infusion,
    linearize_amr,
    linearize_dependency,
)
from .prompts import (
    PromptRecord,
    build_record,
    build_target,
    extract_skeleton,
    split_prediction,
)
from .report import (
    MetricsReport,
    ReportedRow,
    TranslationAnnotation,
    aggregate,
    aggregate_translation_scores,
    check_reported_variations,
    largest_remainder_quotas,
    relative_variation,
    render_tables,
    stratified_sample,
)
from .schema import DbSchema, SchemaRanking, load_tables, serialize_schema
from .sqleval import (
    EvalOutcome,
    EvalPair,
    SqlComponents,
    classify_hardness,
    evaluate_pairs,
    exact_set_match,
    execute_accuracy,
    parse_sql,
    render_sql,
)

__version__ = "0.1.0"
