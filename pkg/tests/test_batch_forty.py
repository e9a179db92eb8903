"""A full four-category, 40-question batch through the CLI, then grading."""

import csv

import pytest
from click.testing import CliRunner

from kleio.cli import main

from conftest import PLANTED_FACTS, planted_question


@pytest.fixture
def forty_questions(tmp_path, planted_corpus):
    """40 questions, 10 per category, two phrasings per planted fact."""
    rows = [["id", "category", "question"]]
    categories = ("factual", "argumentative", "descriptive", "integrative")
    for i, (name, verb, _) in enumerate(PLANTED_FACTS):
        rows.append([f"q{2 * i:02d}", categories[(2 * i) % 4],
                     planted_question(name, verb)])
        rows.append([f"q{2 * i + 1:02d}", categories[(2 * i + 1) % 4],
                     f"When was the {name} {verb}?"])
    path = tmp_path / "forty.csv"
    with open(path, "w", newline="", encoding="utf-8") as handle:
        csv.writer(handle).writerows(rows)
    return path


def test_forty_question_batch_then_grade(tmp_path, planted_corpus, forty_questions):
    runner = CliRunner()
    base = ["--store", str(tmp_path / "store"), "--index", str(tmp_path / "index")]

    result = runner.invoke(main, base + ["ingest", str(planted_corpus.corpus_dir)])
    assert result.exit_code == 0, result.output

    report = tmp_path / "report.csv"
    result = runner.invoke(main, base + [
        "batch", "--in", str(forty_questions), "--out", str(report),
        "--chunks", "4"])
    assert result.exit_code == 0, result.output
    assert "40 rows" in result.output

    with open(report, newline="", encoding="utf-8") as handle:
        rows = list(csv.DictReader(handle))
    assert len(rows) == 40
    assert [r["id"] for r in rows] == [f"q{i:02d}" for i in range(40)]

    # Human grading: every factual and descriptive answer passes, 8 of 10
    # argumentative, 9 of 10 integrative -> total 37/40 = 92.5%.
    fail_budget = {"factual": 0, "descriptive": 0, "argumentative": 2,
                   "integrative": 1}
    grades = tmp_path / "grades.csv"
    with open(grades, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["id", "category", "model_id", "k", "pass"])
        for row in rows:
            category = row["category"]
            if fail_budget[category] > 0:
                fail_budget[category] -= 1
                passed = 0
            else:
                passed = 1
            writer.writerow([row["id"], category, row["model_id"],
                             row["k"], passed])

    result = runner.invoke(main, [
        "grade", "--report", str(report), "--grades", str(grades),
        "--format", "markdown"])
    assert result.exit_code == 0, result.output
    total_cell = result.output.splitlines()[2].split("|")[-2].strip()
    assert "92.5%" in total_cell

    csv_result = runner.invoke(main, [
        "grade", "--report", str(report), "--grades", str(grades),
        "--format", "csv"])
    assert csv_result.exit_code == 0
    assert csv_result.output.splitlines()[1].endswith("92.5")
