"""Aggregation into EM/EX tables, relative variation, sampling, and QA scores."""

from __future__ import annotations

import csv
import io
import json
import random
from dataclasses import dataclass, field

from .errors import BadQuota, EmptyRun, EmptyStratum, ZeroBaseline
from .sqleval.hardness import HARDNESS_LABELS
from .sqleval.runner import EvalOutcome


@dataclass
class HardnessSlice:
    n: int
    em: float
    ex: float


@dataclass
class MetricsReport:
    """Aggregate metrics for one run, with optional variation vs. a baseline."""

    run_label: str
    n: int
    em: float
    ex: float
    per_hardness: dict[str, HardnessSlice] = field(default_factory=dict)
    vem: float | None = None
    vex: float | None = None
    baseline_label: str | None = None

    def to_dict(self) -> dict:
        return {
            "run_label": self.run_label,
            "n": self.n,
            "em": self.em,
            "ex": self.ex,
            "per_hardness": {
                k: {"n": v.n, "em": v.em, "ex": v.ex} for k, v in self.per_hardness.items()
            },
            "vem": self.vem,
            "vex": self.vex,
            "baseline_label": self.baseline_label,
        }


def relative_variation(model: float, base: float) -> float:
    """Percent change of ``model`` against ``base``, at 2-decimal precision."""
    if base <= 0:
        raise ZeroBaseline(f"baseline must be positive, got {base}")
    return round((model - base) / base * 100.0, 2)


def aggregate(
    outcomes: list[EvalOutcome], run_label: str, baseline: "MetricsReport | None" = None
) -> MetricsReport:
    """Fold per-example outcomes into overall and per-hardness fractions."""
    if not outcomes:
        raise EmptyRun(f"run {run_label!r} has no outcomes")
    n = len(outcomes)
    per_hardness: dict[str, HardnessSlice] = {}
    for label in HARDNESS_LABELS:
        subset = [o for o in outcomes if o.hardness == label]
        if subset:
            per_hardness[label] = HardnessSlice(
                n=len(subset),
                em=sum(o.em for o in subset) / len(subset),
                ex=sum(o.ex for o in subset) / len(subset),
            )
    report = MetricsReport(
        run_label=run_label,
        n=n,
        em=sum(o.em for o in outcomes) / n,
        ex=sum(o.ex for o in outcomes) / n,
        per_hardness=per_hardness,
    )
    if baseline is not None:
        report.vem = relative_variation(report.em, baseline.em)
        report.vex = relative_variation(report.ex, baseline.ex)
        report.baseline_label = baseline.run_label
    return report


def largest_remainder_quotas(sizes: list[int], n: int) -> list[int]:
    """Apportion ``n`` over strata proportionally, exact floors plus largest remainders."""
    total = sum(sizes)
    if n > total:
        raise BadQuota(f"cannot sample {n} from a population of {total}")
    exact = [size * n / total for size in sizes]
    quotas = [int(x) for x in exact]
    short = n - sum(quotas)
    by_remainder = sorted(range(len(sizes)), key=lambda i: (quotas[i] - exact[i], i))
    for i in by_remainder[:short]:
        quotas[i] += 1
    return quotas


def stratified_sample(
    population: list[tuple[str, str]], n: int, seed: int
) -> list[str]:
    """Pick ``n`` ids keeping the population's hardness proportions.

    Quotas come from largest-remainder apportionment; picks within each
    stratum are uniform under a generator seeded with ``seed``, so reruns
    are identical.  Ids are returned grouped by stratum in label order.
    """
    strata: dict[str, list[str]] = {label: [] for label in HARDNESS_LABELS}
    for item_id, hardness in population:
        if hardness not in strata:
            raise EmptyStratum(f"unknown hardness label {hardness!r} for id {item_id!r}")
        strata[hardness].append(item_id)
    for label in HARDNESS_LABELS:
        if not strata[label]:
            raise EmptyStratum(f"stratum {label!r} has no members")
    sizes = [len(strata[label]) for label in HARDNESS_LABELS]
    quotas = largest_remainder_quotas(sizes, n)
    rng = random.Random(seed)
    selected: list[str] = []
    for label, quota in zip(HARDNESS_LABELS, quotas):
        members = strata[label]
        picks = sorted(rng.sample(range(len(members)), quota))
        selected.extend(members[i] for i in picks)
    return selected


@dataclass(frozen=True)
class TranslationAnnotation:
    """One translated query graded by a human reviewer."""

    query_id: str
    hardness: str
    score: int
    criteria: tuple[bool, bool, bool, bool, bool] = (True,) * 5

    def __post_init__(self) -> None:
        if not 1 <= self.score <= 5:
            raise ValueError(f"score must be 1..5, got {self.score}")


def aggregate_translation_scores(
    annotations: list[TranslationAnnotation],
) -> dict[str, float]:
    """Mean grade per hardness level, at 2-decimal precision."""
    means: dict[str, float] = {}
    for label in HARDNESS_LABELS:
        scores = [a.score for a in annotations if a.hardness == label]
        if not scores:
            raise EmptyStratum(f"no annotations for stratum {label!r}")
        means[label] = round(sum(scores) / len(scores), 2)
    return means


def read_annotations_csv(text: str) -> list[TranslationAnnotation]:
    """Read annotation rows: query_id, hardness, score, then five 0/1 criterion flags."""
    annotations = []
    reader = csv.DictReader(io.StringIO(text))
    for row in reader:
        flags = tuple(row.get(f"criterion_{i}", "1").strip() in ("1", "true", "True") for i in range(1, 6))
        annotations.append(
            TranslationAnnotation(
                query_id=row["query_id"],
                hardness=row["hardness"].strip().lower(),
                score=int(row["score"]),
                criteria=flags,
            )
        )
    return annotations


# --- table rendering -----------------------------------------------------

_COLUMNS = ("Model", "EM", "EX", "vEM", "vEX")


def _format_fraction(value: float) -> str:
    return f"{value:.3f}"


def _format_variation(value: float | None) -> str:
    return "-" if value is None else f"{value:.1f}"


def _rows(reports: list[MetricsReport]) -> list[tuple[str, str, str, str, str]]:
    return [
        (
            r.run_label,
            _format_fraction(r.em),
            _format_fraction(r.ex),
            _format_variation(r.vem),
            _format_variation(r.vex),
        )
        for r in reports
    ]


def render_tables(reports: list[MetricsReport], layout: str = "text") -> str:
    """Render runs as an aligned text table, CSV, or JSON (``layout`` picks which).

    Rows keep the given order; vEM/vEX render as ``-`` for runs without a
    baseline.
    """
    if layout == "json":
        return json.dumps([r.to_dict() for r in reports], indent=2)
    rows = _rows(reports)
    if layout == "csv":
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(_COLUMNS)
        writer.writerows(rows)
        return out.getvalue()
    if layout != "text":
        raise ValueError(f"unknown layout {layout!r}")
    widths = [
        max(len(_COLUMNS[i]), *(len(row[i]) for row in rows)) if rows else len(_COLUMNS[i])
        for i in range(len(_COLUMNS))
    ]
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(_COLUMNS)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
    return "\n".join(lines) + "\n"


# --- conformance checking of published variation cells -------------------


@dataclass(frozen=True)
class ReportedRow:
    """A printed results row: fractions plus the variation cells as published."""

    label: str
    em: float
    ex: float
    vem: float | None = None
    vex: float | None = None


@dataclass(frozen=True)
class VariationCheck:
    row_label: str
    metric: str  # "em" | "ex"
    printed: float
    recomputed: float
    delta: float
    status: str  # "ok" | "minor" | "flagged"


# Agreement bands: within one digit of table precision is ok; up to one
# point is rounding noise worth reporting; beyond that the printed cell
# cannot come from its own row and gets flagged.
OK_DELTA = 0.1
FLAG_DELTA = 1.0


def check_reported_variations(
    baseline: ReportedRow, rows: list[ReportedRow]
) -> list[VariationCheck]:
    """Recompute each row's variation cells from its fractions and diff against print."""
    checks: list[VariationCheck] = []
    for row in rows:
        for metric, printed, base in (("em", row.vem, baseline.em), ("ex", row.vex, baseline.ex)):
            if printed is None:
                continue
            model = row.em if metric == "em" else row.ex
            recomputed = relative_variation(model, base)
            delta = round(abs(recomputed - printed), 4)
            status = "ok" if delta <= OK_DELTA else ("minor" if delta <= FLAG_DELTA else "flagged")
            checks.append(
                VariationCheck(
                    row_label=row.label,
                    metric=metric,
                    printed=printed,
                    recomputed=recomputed,
                    delta=delta,
                    status=status,
                )
            )
    return checks


def read_reported_rows(json_text: str) -> list[tuple[ReportedRow, list[ReportedRow]]]:
    """Load published rows for checking: a list of {baseline: row, rows: [row...]} groups."""
    groups = []
    for group in json.loads(json_text):
        baseline = ReportedRow(**group["baseline"])
        rows = [ReportedRow(**row) for row in group["rows"]]
        groups.append((baseline, rows))
    return groups
