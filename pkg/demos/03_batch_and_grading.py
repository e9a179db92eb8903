"""Batch-answer a question CSV, then aggregate human grades into a table.

Mirrors the evaluation workflow: a prepared CSV of questions in four
categories goes in, a report CSV with answers and sources comes out, and
a hand-authored pass/fail grades CSV aggregates into per-category accuracy
percentages:

    python demos/03_batch_and_grading.py
"""

import csv
import tempfile
from pathlib import Path

from kleio import (
    DocumentStore,
    EmbedderProfile,
    MockChatBackend,
    ModelProfile,
    VectorIndex,
    aggregate,
    render_table,
)
from kleio.grading import GradeRecord
from kleio.qa import ingest_and_index, read_report_csv, run_batch

workdir = Path(tempfile.mkdtemp(prefix="kleio-demo-"))
corpus_dir = workdir / "corpus"
corpus_dir.mkdir()

facts = [
    ("Harwick Mill", "ground its first flour in 1802"),
    ("Selton Academy", "enrolled ninety pupils in 1815"),
    ("Dunmore Quay", "shipped salted herring from 1797"),
    ("Caldwell Printworks", "printed its first broadside in 1821"),
]
for i, (name, fact) in enumerate(facts):
    (corpus_dir / f"doc{i}.txt").write_text(
        f"{name} figures prominently in the county records. The {name} "
        f"{fact}. Local historians copied the relevant pages into the "
        "society's transactions, where the details can still be checked "
        "against the original ledgers held in the muniment room."
    )

questions_csv = workdir / "questions.csv"
with open(questions_csv, "w", newline="") as handle:
    writer = csv.writer(handle)
    writer.writerow(["id", "category", "question"])
    writer.writerow(["q1", "factual", "What did the Harwick Mill do in 1802?"])
    writer.writerow(["q2", "factual", "How many pupils did Selton Academy enroll?"])
    writer.writerow(["q3", "descriptive", "What did the Dunmore Quay ship from 1797?"])
    writer.writerow(["q4", "descriptive", "What did the Caldwell Printworks print in 1821?"])

store = DocumentStore(workdir / "store")
index = VectorIndex(384)
ingest_and_index(corpus_dir, store, index, EmbedderProfile())

report_csv = workdir / "report.csv"
summary = run_batch(questions_csv, 2, index, EmbedderProfile(), ModelProfile(),
                    report_csv, chat_backend=MockChatBackend(corpus_aware=True))
print(f"batch: {summary.rows_processed} rows, {len(summary.row_errors)} errors\n")

rows, _ = read_report_csv(report_csv)
for row in rows:
    print(f"{row.id}: {row.answer}")

# A human reads the report and grades each answer pass/fail. Here the
# grader passes everything except q2.
grades = [
    GradeRecord(id=row.id, category=row.category, model_id=row.model_id,
                k=row.k, passed=0 if row.id == "q2" else 1)
    for row in rows
]
print()
print(render_table(aggregate(grades)))
