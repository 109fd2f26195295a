"""Command-line entry point orchestrating the pipeline end to end.

Configuration comes from an optional JSON file (``--config``) with flag
overrides winning, and ``INFUSQL_DB_ROOT`` overriding the database root.
Exit codes: 0 success, 2 configuration error, 3 input-contract violation,
4 corpus defect.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys

from . import __version__
from .amr import AmrGraph, read_penman
from .conllu import DepTree, read_conllu
from .errors import (
    DbMissing,
    GoldExecutionFailed,
    InfusqlError,
    MissingParse,
    UnknownColumn,
    UnparsableSql,
)
from .linearize import InfusionMode, RelationFilter
from .prompts import build_record, extract_skeleton
from .report import (
    MetricsReport,
    aggregate,
    check_reported_variations,
    read_reported_rows,
    render_tables,
    stratified_sample,
)
from .schema import DbSchema, SchemaRanking, load_tables, serialize_schema
from .sqleval import EvalOutcome, EvalPair, classify_hardness, evaluate_pairs, parse_sql

DB_ROOT_ENV = "INFUSQL_DB_ROOT"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONTRACT = 3
EXIT_CORPUS = 4


# --- shared file helpers -------------------------------------------------


def _read_text(path: str) -> str:
    with open(path, encoding="utf-8") as handle:
        return handle.read()


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text)


def read_questions(path: str) -> list[dict]:
    """Load the questions JSON; ids are filled in positionally when absent."""
    data = json.loads(_read_text(path))
    questions = []
    for i, entry in enumerate(data):
        questions.append(
            {
                "id": str(entry.get("id", f"q{i:05d}")),
                "question": entry["question"],
                "db_id": entry["db_id"],
                "query": entry.get("query"),
            }
        )
    return questions


def read_sql_lines(path: str, default_db: str | None = None) -> list[tuple[str, str | None]]:
    """Read one query per line, optionally ``SQL<TAB>db_id``."""
    pairs = []
    for line in _read_text(path).splitlines():
        if not line.strip():
            continue
        sql, _, db = line.partition("\t")
        pairs.append((sql.strip(), db.strip() or default_db))
    return pairs


def load_schemas(path: str) -> dict[str, DbSchema]:
    return {schema.db_id: schema for schema in load_tables(_read_text(path))}


def load_rankings(path: str) -> dict[str | None, SchemaRanking]:
    """A ranking file holds either one ranking or a db_id-keyed map of them."""
    data = json.loads(_read_text(path))
    if "tables" in data or "columns" in data:
        return {None: SchemaRanking.from_json(json.dumps(data))}
    return {db_id: SchemaRanking.from_json(json.dumps(entry)) for db_id, entry in data.items()}


def _ranking_for(rankings: dict[str | None, SchemaRanking] | None, db_id: str) -> SchemaRanking | None:
    if rankings is None:
        return None
    if db_id in rankings:
        return rankings[db_id]
    return rankings.get(None)


def load_dep_trees(path: str) -> dict[str, DepTree]:
    return {tree.sentence_id: tree for tree in read_conllu(_read_text(path))}


def load_amr_graphs(path: str) -> dict[str, AmrGraph]:
    return {g.graph_id: g for g in read_penman(_read_text(path)) if g.graph_id is not None}


def read_outcomes(path: str) -> list[EvalOutcome]:
    outcomes = []
    for line in _read_text(path).splitlines():
        if line.strip():
            outcomes.append(EvalOutcome(**json.loads(line)))
    return outcomes


def _config(args: argparse.Namespace) -> dict:
    if getattr(args, "config", None):
        data = json.loads(_read_text(args.config))
        if not isinstance(data, dict):
            raise ValueError("config file must hold a JSON object")
        return data
    return {}


def _pick(args: argparse.Namespace, config: dict, key: str, default=None, env: str | None = None):
    value = getattr(args, key, None)
    if value is not None:
        return value
    if env is not None and os.environ.get(env):
        return os.environ[env]
    return config.get(key, default)


def _timestamp_header(enabled: bool) -> str:
    if not enabled:
        return ""
    now = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    return f"# generated {now}\n"


# --- subcommands -----------------------------------------------------------


def cmd_ingest_parses(args: argparse.Namespace) -> int:
    config = _config(args)
    conllu_path = _pick(args, config, "conllu")
    amr_path = _pick(args, config, "amr")
    if not conllu_path and not amr_path:
        print("ingest-parses: need --conllu and/or --amr", file=sys.stderr)
        return EXIT_CONFIG
    dep_ids: list[str] = []
    amr_ids: list[str] = []
    if conllu_path:
        dep_ids = [t.sentence_id for t in read_conllu(_read_text(conllu_path))]
        print(f"conllu: {len(dep_ids)} sentences")
    if amr_path:
        amr_ids = [g.graph_id or "?" for g in read_penman(_read_text(amr_path))]
        print(f"amr: {len(amr_ids)} graphs")
    manifest = {"conllu_ids": dep_ids, "amr_ids": amr_ids}
    if conllu_path and amr_path:
        manifest["dep_only"] = sorted(set(dep_ids) - set(amr_ids))
        manifest["amr_only"] = sorted(set(amr_ids) - set(dep_ids))
        if manifest["dep_only"] or manifest["amr_only"]:
            print(
                f"alignment: {len(manifest['dep_only'])} dep-only ids, "
                f"{len(manifest['amr_only'])} amr-only ids"
            )
    if args.out:
        _write_text(args.out, json.dumps(manifest, indent=2) + "\n")
    return EXIT_OK


def cmd_build_prompts(args: argparse.Namespace) -> int:
    config = _config(args)
    questions_path = _pick(args, config, "questions")
    tables_path = _pick(args, config, "tables")
    out_dir = _pick(args, config, "out_dir")
    if not questions_path or not tables_path or not out_dir:
        print("build-prompts: need --questions, --tables, and --out-dir", file=sys.stderr)
        return EXIT_CONFIG
    mode = InfusionMode.from_string(_pick(args, config, "mode", "none"))
    policy = _pick(args, config, "policy", "degrade")
    relations = _pick(args, config, "relations")
    relation_filter = (
        RelationFilter(frozenset(r.strip() for r in relations.split(",") if r.strip()))
        if relations
        else None
    )
    questions = read_questions(questions_path)
    schemas = load_schemas(tables_path)
    conllu_path = _pick(args, config, "conllu")
    amr_path = _pick(args, config, "amr")
    dep_map = load_dep_trees(conllu_path) if conllu_path else {}
    amr_map = load_amr_graphs(amr_path) if amr_path else {}
    ranking_path = _pick(args, config, "ranking")
    rankings = load_rankings(ranking_path) if ranking_path else None

    if policy == "strict":
        missing = [
            q["id"]
            for q in questions
            if (mode.wants_syntax and q["id"] not in dep_map)
            or (mode.wants_amr and q["id"] not in amr_map)
        ]
        if missing:
            print(f"strict policy: missing parses for ids: {', '.join(missing)}", file=sys.stderr)
            return EXIT_CONTRACT

    records = []
    for q in questions:
        if q["db_id"] not in schemas:
            print(f"unknown db_id {q['db_id']!r} for question {q['id']}", file=sys.stderr)
            return EXIT_CONFIG
        records.append(
            build_record(
                q["question"],
                dep_map.get(q["id"]),
                amr_map.get(q["id"]),
                schemas[q["db_id"]],
                mode,
                q["query"],
                record_id=q["id"],
                relation_filter=relation_filter,
                ranking=_ranking_for(rankings, q["db_id"]),
                policy=policy,
            )
        )

    os.makedirs(out_dir, exist_ok=True)
    _write_text(
        os.path.join(out_dir, "records.jsonl"),
        "".join(r.to_json() + "\n" for r in records),
    )
    _write_text(os.path.join(out_dir, "source.txt"), "".join(r.prompt + "\n" for r in records))
    with_targets = [r for r in records if r.target is not None]
    if with_targets:
        _write_text(
            os.path.join(out_dir, "target.txt"),
            "".join((r.target or "") + "\n" for r in records),
        )
    warned = [r for r in records if r.warnings]
    print(f"records: {len(records)} ({len(with_targets)} with targets, {len(warned)} with warnings)")
    if warned:
        tally: dict[str, int] = {}
        for r in warned:
            for w in r.warnings:
                kind = w.split(":", 1)[0]
                tally[kind] = tally.get(kind, 0) + 1
        print("warnings: " + ", ".join(f"{k}={v}" for k, v in sorted(tally.items())))
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    config = _config(args)
    gold_path = _pick(args, config, "gold")
    pred_path = _pick(args, config, "predictions")
    tables_path = _pick(args, config, "tables")
    db_root = _pick(args, config, "db_root", env=DB_ROOT_ENV)
    if not gold_path or not pred_path or not tables_path or not db_root:
        print("evaluate: need --gold, --pred, --tables, and --db-root", file=sys.stderr)
        return EXIT_CONFIG
    if not os.path.isdir(db_root):
        print(f"evaluate: database root {db_root!r} does not exist", file=sys.stderr)
        return EXIT_CONFIG
    gold = read_sql_lines(gold_path, default_db=_pick(args, config, "db_id"))
    preds = read_sql_lines(pred_path)
    if len(gold) != len(preds):
        print(
            f"evaluate: gold ({len(gold)}) and predictions ({len(preds)}) are not line-aligned",
            file=sys.stderr,
        )
        return EXIT_CONFIG
    schemas = load_schemas(tables_path)
    pairs = []
    for i, ((gold_sql, db_id), (pred_sql, _)) in enumerate(zip(gold, preds), start=1):
        if not db_id:
            print(f"evaluate: line {i} has no db_id", file=sys.stderr)
            return EXIT_CONFIG
        pairs.append(EvalPair(id=str(i), gold_sql=gold_sql, pred_sql=pred_sql, db_id=db_id))

    outcomes = evaluate_pairs(
        pairs,
        schemas,
        db_root,
        strict_values=bool(_pick(args, config, "strict_values", False)),
        timeout=float(_pick(args, config, "timeout", 30.0)),
        workers=int(_pick(args, config, "workers", 1)),
    )
    out_path = _pick(args, config, "out")
    if out_path:
        _write_text(out_path, "".join(json.dumps(o.to_dict()) + "\n" for o in outcomes))

    label = _pick(args, config, "label", "run")
    baseline_path = _pick(args, config, "baseline_outcomes")
    baseline_report = None
    if baseline_path:
        baseline_label = _pick(args, config, "baseline", "baseline")
        baseline_report = aggregate(read_outcomes(baseline_path), baseline_label)
    report = aggregate(outcomes, label, baseline=baseline_report)
    reports = ([baseline_report] if baseline_report else []) + [report]
    print(render_tables(reports), end="")
    errors = sum(1 for o in outcomes if o.pred_error)
    print(f"n={report.n} em={report.em:.3f} ex={report.ex:.3f} prediction-errors={errors}")
    report_dir = _pick(args, config, "report_dir")
    if report_dir:
        _write_reports(reports, report_dir, timestamp=not args.no_timestamp)
    return EXIT_OK


def _write_reports(reports: list[MetricsReport], out_dir: str, timestamp: bool) -> None:
    os.makedirs(out_dir, exist_ok=True)
    header = _timestamp_header(timestamp)
    _write_text(os.path.join(out_dir, "report.txt"), header + render_tables(reports, "text"))
    _write_text(os.path.join(out_dir, "report.csv"), render_tables(reports, "csv"))
    _write_text(os.path.join(out_dir, "report.json"), render_tables(reports, "json") + "\n")


def cmd_report(args: argparse.Namespace) -> int:
    config = _config(args)
    runs: list[tuple[str, str]] = []
    for spec_item in args.run or config.get("runs", []):
        label, _, path = spec_item.partition("=")
        if not path:
            print(f"report: --run wants LABEL=PATH, got {spec_item!r}", file=sys.stderr)
            return EXIT_CONFIG
        runs.append((label, path))
    if not runs and not args.check:
        print("report: nothing to do (no --run, no --check)", file=sys.stderr)
        return EXIT_CONFIG

    if runs:
        baseline_label = _pick(args, config, "baseline")
        by_label = {label: read_outcomes(path) for label, path in runs}
        baseline_report = None
        if baseline_label:
            if baseline_label not in by_label:
                print(f"report: baseline {baseline_label!r} is not among the runs", file=sys.stderr)
                return EXIT_CONFIG
            baseline_report = aggregate(by_label[baseline_label], baseline_label)
        reports = []
        for label, _ in runs:
            if baseline_report is not None and label == baseline_label:
                reports.append(baseline_report)
            else:
                reports.append(aggregate(by_label[label], label, baseline=baseline_report))
        print(render_tables(reports), end="")
        out_dir = _pick(args, config, "out_dir")
        if out_dir:
            _write_reports(reports, out_dir, timestamp=not args.no_timestamp)

    if args.check:
        groups = read_reported_rows(_read_text(args.check))
        flagged = 0
        for baseline_row, rows in groups:
            for check in check_reported_variations(baseline_row, rows):
                if check.status == "flagged":
                    flagged += 1
                print(
                    f"[{check.status:>7}] {check.row_label} v{check.metric.upper()}: "
                    f"printed {check.printed} vs recomputed {check.recomputed} "
                    f"(delta {check.delta})"
                )
        print(f"flagged cells: {flagged}")
    return EXIT_OK


def cmd_sample(args: argparse.Namespace) -> int:
    config = _config(args)
    gold_path = _pick(args, config, "gold")
    tables_path = _pick(args, config, "tables")
    if not gold_path or not tables_path:
        print("sample: need --gold and --tables", file=sys.stderr)
        return EXIT_CONFIG
    n = int(_pick(args, config, "n", 300))
    seed = int(_pick(args, config, "seed", 0))
    schemas = load_schemas(tables_path)
    gold = read_sql_lines(gold_path, default_db=_pick(args, config, "db_id"))
    population = []
    for i, (sql, db_id) in enumerate(gold, start=1):
        if not db_id or db_id not in schemas:
            raise GoldExecutionFailed(f"line {i}: unknown db_id {db_id!r}")
        try:
            components = parse_sql(sql, schemas[db_id])
        except (UnparsableSql, UnknownColumn) as exc:
            raise GoldExecutionFailed(f"line {i}: gold query does not parse: {exc}") from exc
        population.append((str(i), classify_hardness(components)))
    selected = stratified_sample(population, n, seed)
    counts = {label: 0 for label in ("easy", "medium", "hard", "extra")}
    hardness_of = dict(population)
    for item in selected:
        counts[hardness_of[item]] += 1
    print(
        "quotas: " + ", ".join(f"{label}={counts[label]}" for label in ("easy", "medium", "hard", "extra"))
    )
    out_path = _pick(args, config, "out")
    if out_path:
        _write_text(out_path, "".join(item + "\n" for item in selected))
    else:
        for item in selected:
            print(item)
    return EXIT_OK


def cmd_serialize_schema(args: argparse.Namespace) -> int:
    config = _config(args)
    tables_path = _pick(args, config, "tables")
    db_id = _pick(args, config, "db_id")
    if not tables_path or not db_id:
        print("serialize-schema: need --tables and --db-id", file=sys.stderr)
        return EXIT_CONFIG
    schemas = load_schemas(tables_path)
    if db_id not in schemas:
        print(f"serialize-schema: unknown db_id {db_id!r}", file=sys.stderr)
        return EXIT_CONFIG
    ranking_path = _pick(args, config, "ranking")
    rankings = load_rankings(ranking_path) if ranking_path else None
    print(serialize_schema(schemas[db_id], _ranking_for(rankings, db_id)))
    return EXIT_OK


def cmd_skeleton(args: argparse.Namespace) -> int:
    statements: list[str] = []
    if args.sql:
        statements.append(args.sql)
    if args.file:
        statements.extend(sql for sql, _ in read_sql_lines(args.file))
    if not statements:
        print("skeleton: need --sql or --file", file=sys.stderr)
        return EXIT_CONFIG
    try:
        for sql in statements:
            print(extract_skeleton(sql))
    except UnparsableSql as exc:
        print(f"skeleton: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    return EXIT_OK


# --- argument wiring -------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="infusql",
        description="Build linguistically infused NL2SQL prompts and evaluate predictions.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON config file; flags override its values")

    p = sub.add_parser("ingest-parses", help="validate CoNLL-U / PENMAN interchange files")
    add_common(p)
    p.add_argument("--conllu")
    p.add_argument("--amr")
    p.add_argument("--out", help="write a JSON manifest of ids")
    p.set_defaults(func=cmd_ingest_parses)

    p = sub.add_parser("build-prompts", help="assemble prompts and skeleton targets")
    add_common(p)
    p.add_argument("--questions")
    p.add_argument("--tables")
    p.add_argument("--conllu")
    p.add_argument("--amr")
    p.add_argument("--mode", help="none | syntax | amr | syntax_and_amr")
    p.add_argument("--relations", help="comma-separated dependency relations to keep")
    p.add_argument("--policy", choices=("degrade", "strict"))
    p.add_argument("--ranking", help="JSON ranking file (single or db_id-keyed)")
    p.add_argument("--out-dir", dest="out_dir")
    p.set_defaults(func=cmd_build_prompts)

    p = sub.add_parser("evaluate", help="exact-set match and execution accuracy")
    add_common(p)
    p.add_argument("--gold")
    p.add_argument("--pred", dest="predictions")
    p.add_argument("--tables")
    p.add_argument("--db-root", dest="db_root")
    p.add_argument("--db-id", dest="db_id", help="default db_id for gold files without one")
    p.add_argument("--workers", type=int)
    p.add_argument("--timeout", type=float)
    p.add_argument("--strict-values", action="store_true", default=None, dest="strict_values")
    p.add_argument("--out", help="write per-example outcomes (JSON lines)")
    p.add_argument("--label")
    p.add_argument("--baseline-outcomes", dest="baseline_outcomes")
    p.add_argument("--baseline", help="label for the baseline run")
    p.add_argument("--report-dir", dest="report_dir")
    p.add_argument("--no-timestamp", action="store_true")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="render metric tables and check published cells")
    add_common(p)
    p.add_argument("--run", action="append", metavar="LABEL=OUTCOMES", default=None)
    p.add_argument("--baseline")
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--check", help="JSON file of published rows to recompute")
    p.add_argument("--no-timestamp", action="store_true")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("sample", help="hardness-stratified sampling of a gold corpus")
    add_common(p)
    p.add_argument("--gold")
    p.add_argument("--tables")
    p.add_argument("--db-id", dest="db_id")
    p.add_argument("-n", type=int, dest="n")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("serialize-schema", help="print the prompt suffix for one database")
    add_common(p)
    p.add_argument("--tables")
    p.add_argument("--db-id", dest="db_id")
    p.add_argument("--ranking")
    p.set_defaults(func=cmd_serialize_schema)

    p = sub.add_parser("skeleton", help="print the clause skeleton of SQL statements")
    add_common(p)
    p.add_argument("--sql")
    p.add_argument("--file")
    p.set_defaults(func=cmd_skeleton)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MissingParse as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    except (GoldExecutionFailed, DbMissing, UnparsableSql, UnknownColumn) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CORPUS
    except (InfusqlError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
