from __future__ import annotations

import csv
import io

import pytest
from hypothesis import given, strategies as st

from infusql import (
    EvalOutcome,
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
from infusql.errors import BadQuota, EmptyRun, EmptyStratum, ZeroBaseline
from infusql.report import read_annotations_csv


def _outcome(i, hardness="easy", em=True, ex=True):
    return EvalOutcome(id=str(i), hardness=hardness, em=em, ex=ex)


def test_aggregate_all_correct():
    report = aggregate([_outcome(i) for i in range(4)], "run")
    assert report.em == 1.0 and report.ex == 1.0


def test_aggregate_fractions():
    outcomes = [
        _outcome(0, em=True, ex=True),
        _outcome(1, em=True, ex=True),
        _outcome(2, em=True, ex=False),
        _outcome(3, em=False, ex=False),
    ]
    report = aggregate(outcomes, "run")
    assert report.em == 0.75 and report.ex == 0.5


def test_aggregate_per_hardness_consistency():
    outcomes = [
        _outcome(0, "easy", em=True, ex=False),
        _outcome(1, "easy", em=False, ex=False),
        _outcome(2, "hard", em=True, ex=True),
    ]
    report = aggregate(outcomes, "run")
    assert sum(s.n for s in report.per_hardness.values()) == report.n
    weighted_em = sum(s.em * s.n for s in report.per_hardness.values()) / report.n
    assert weighted_em == pytest.approx(report.em)


def test_aggregate_empty_run():
    with pytest.raises(EmptyRun):
        aggregate([], "run")


def test_relative_variation_published_cells():
    assert relative_variation(0.623, 0.612) == 1.80
    assert relative_variation(0.693, 0.618) == 12.14
    assert relative_variation(0.684, 0.618) == 10.68


def test_relative_variation_identity_and_sign():
    assert relative_variation(0.5, 0.5) == 0.0
    assert relative_variation(0.4, 0.5) < 0
    with pytest.raises(ZeroBaseline):
        relative_variation(0.5, 0.0)


@given(st.floats(0.01, 1.0), st.floats(0.01, 1.0))
def test_relative_variation_sign_property(model, base):
    value = relative_variation(model, base)
    if model > base:
        assert value >= 0
    elif model < base:
        assert value <= 0


def test_quotas_match_published_sample():
    assert largest_remainder_quotas([1609, 2377, 1626, 1388], 300) == [69, 102, 70, 59]


def test_quotas_trivial_cases():
    assert largest_remainder_quotas([10, 10, 10, 10], 4) == [1, 1, 1, 1]
    assert largest_remainder_quotas([3, 5], 8) == [3, 5]


@given(
    st.lists(st.integers(1, 5000), min_size=2, max_size=6),
    st.integers(0, 100),
)
def test_quota_properties(sizes, n):
    total = sum(sizes)
    n = min(n, total)
    quotas = largest_remainder_quotas(sizes, n)
    assert sum(quotas) == n
    for size, quota in zip(sizes, quotas):
        assert abs(quota - size * n / total) < 1


def test_quota_overflow():
    with pytest.raises(BadQuota):
        largest_remainder_quotas([2, 2], 5)


def _population():
    population = []
    for label, size in (("easy", 20), ("medium", 30), ("hard", 25), ("extra", 25)):
        population += [(f"{label}-{i}", label) for i in range(size)]
    return population


def test_stratified_sample_deterministic():
    population = _population()
    first = stratified_sample(population, 40, seed=123)
    second = stratified_sample(population, 40, seed=123)
    assert first == second
    assert len(first) == 40
    changed = stratified_sample(population, 40, seed=124)
    assert changed != first


def test_stratified_sample_exhaustive():
    population = _population()
    assert sorted(stratified_sample(population, len(population), seed=1)) == sorted(
        item_id for item_id, _ in population
    )


def test_stratified_sample_empty_stratum():
    population = [(f"e{i}", "easy") for i in range(5)]
    with pytest.raises(EmptyStratum):
        stratified_sample(population, 2, seed=0)


def test_translation_means():
    annotations = [TranslationAnnotation("q1", "easy", 4), TranslationAnnotation("q2", "easy", 5)]
    annotations += [
        TranslationAnnotation(f"m{i}", "medium", 5) for i in range(3)
    ] + [
        TranslationAnnotation(f"h{i}", "hard", 5) for i in range(2)
    ] + [
        TranslationAnnotation(f"x{i}", "extra", 5) for i in range(2)
    ]
    means = aggregate_translation_scores(annotations)
    assert means["easy"] == 4.5
    assert means["medium"] == 5.0


def test_translation_score_bounds():
    with pytest.raises(ValueError):
        TranslationAnnotation("q", "easy", 6)


def test_translation_empty_stratum():
    with pytest.raises(EmptyStratum):
        aggregate_translation_scores([TranslationAnnotation("q", "easy", 4)])


def test_annotation_csv_reader():
    text = (
        "query_id,hardness,score,criterion_1,criterion_2,criterion_3,criterion_4,criterion_5\n"
        "q1,easy,4,1,1,1,0,1\n"
        "q2,hard,5,1,1,1,1,1\n"
    )
    annotations = read_annotations_csv(text)
    assert annotations[0].criteria == (True, True, True, False, True)
    assert annotations[1].score == 5


def _report(label, em, ex, vem=None, vex=None):
    return MetricsReport(run_label=label, n=100, em=em, ex=ex, vem=vem, vex=vex)


def test_render_baseline_dashes():
    text = render_tables([_report("T5 without info", 0.612, 0.618)])
    row = [line for line in text.splitlines() if line.startswith("T5 without info")][0]
    assert row.split()[-2:] == ["-", "-"]


def test_render_matches_published_row():
    baseline = _report("T5 without info", 0.612, 0.618)
    model = _report(
        "T5 with syntax",
        0.623,
        0.649,
        vem=relative_variation(0.623, 0.612),
        vex=relative_variation(0.649, 0.618),
    )
    text = render_tables([baseline, model])
    row = [line for line in text.splitlines() if line.startswith("T5 with syntax")][0]
    assert row.split()[-4:] == ["0.623", "0.649", "1.8", "5.0"]


def test_csv_round_trip():
    reports = [
        _report("base", 0.612, 0.618),
        _report("syntax", 0.623, 0.649, vem=1.8, vex=5.02),
    ]
    text = render_tables(reports, "csv")
    rows = list(csv.DictReader(io.StringIO(text)))
    assert rows[0]["vEM"] == "-"
    assert rows[1]["EM"] == "0.623"
    assert rows[1]["vEX"] == "5.0"
    rendered = render_tables(reports, "text")
    for row in rows:
        for value in row.values():
            assert value in rendered


def test_variation_checker_statuses():
    baseline = ReportedRow("base", em=0.612, ex=0.618)
    rows = [
        ReportedRow("ok-row", em=0.623, ex=0.649, vem=1.8, vex=5.0),
        ReportedRow("flagged-row", em=0.623, ex=0.649, vem=40.0, vex=5.0),
    ]
    checks = check_reported_variations(baseline, rows)
    by_key = {(c.row_label, c.metric): c for c in checks}
    assert by_key[("ok-row", "em")].status == "ok"
    assert by_key[("ok-row", "ex")].status == "ok"
    assert by_key[("flagged-row", "em")].status == "flagged"
    assert by_key[("flagged-row", "em")].delta > 30
