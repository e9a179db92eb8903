"""Pass/fail grade aggregation into per-category accuracy tables.

Grades are authored by a human (one bit per answered question) and arrive
as a CSV with header id,category,model_id,k,pass. Aggregation is exact
rational arithmetic; rendering rounds half-up to one decimal and drops a
trailing .0, so 92.5 prints as "92.5" and 60.0 prints as "60".
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .errors import DuplicateGrade, InputCsvMalformed, UnknownCategory

CATEGORIES = ("factual", "argumentative", "descriptive", "integrative")


@dataclass(frozen=True)
class GradeRecord:
    id: str
    category: str
    model_id: str
    k: int
    passed: int  # 0 or 1

    def __post_init__(self):
        if self.passed not in (0, 1):
            raise ValueError(f"pass must be 0 or 1, got {self.passed!r}")


@dataclass(frozen=True)
class AccuracyRow:
    model_id: str
    k: int
    by_category: dict[str, Fraction]  # percentage per category present
    total: Fraction  # percentage over all grades in the group


@dataclass(frozen=True)
class AccuracyTable:
    rows: tuple[AccuracyRow, ...]


def read_grades_csv(path: str | Path) -> list[GradeRecord]:
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            reader = csv.DictReader(handle)
            fields = reader.fieldnames or []
            if not {"id", "category", "model_id", "k", "pass"} <= set(fields):
                raise InputCsvMalformed(
                    f"expected header id,category,model_id,k,pass, got {fields}"
                )
            records = []
            for row in reader:
                try:
                    records.append(GradeRecord(
                        id=row["id"].strip(),
                        category=row["category"].strip(),
                        model_id=row["model_id"].strip(),
                        k=int(row["k"]),
                        passed=int(row["pass"]),
                    ))
                except (TypeError, ValueError, AttributeError) as exc:
                    raise InputCsvMalformed(f"bad grade row {row!r}: {exc}") from exc
            return records
    except OSError as exc:
        raise InputCsvMalformed(f"cannot read {path}: {exc}") from exc


def aggregate(grades: list[GradeRecord]) -> AccuracyTable:
    """Exact per-category and total percentages per (model_id, k) group.

    Group order follows first appearance in the input; the numbers
    themselves are order-independent.
    """
    seen: set[tuple[str, str, int]] = set()
    group_order: list[tuple[str, int]] = []
    counts: dict[tuple[str, int], dict[str, list[int]]] = {}

    for grade in grades:
        if grade.category not in CATEGORIES:
            raise UnknownCategory(grade.category)
        key = (grade.id, grade.model_id, grade.k)
        if key in seen:
            raise DuplicateGrade(f"duplicate grade for {key}")
        seen.add(key)
        group = (grade.model_id, grade.k)
        if group not in counts:
            counts[group] = {}
            group_order.append(group)
        passes, total = counts[group].setdefault(grade.category, [0, 0])
        counts[group][grade.category] = [passes + grade.passed, total + 1]

    rows = []
    for model_id, k in group_order:
        by_category = {}
        all_passes = all_total = 0
        for category, (passes, total) in counts[(model_id, k)].items():
            by_category[category] = Fraction(100 * passes, total)
            all_passes += passes
            all_total += total
        rows.append(AccuracyRow(
            model_id=model_id, k=k, by_category=by_category,
            total=Fraction(100 * all_passes, all_total),
        ))
    return AccuracyTable(rows=tuple(rows))


def format_pct(value: Fraction) -> str:
    """Round half-up to one decimal; drop a trailing .0."""
    tenths_scaled = value * 10 + Fraction(1, 2)
    tenths = tenths_scaled.numerator // tenths_scaled.denominator
    whole, frac = divmod(tenths, 10)
    return str(whole) if frac == 0 else f"{whole}.{frac}"


_COLUMNS = ("model", "#chunks", *CATEGORIES, "total")


def _cell_values(row: AccuracyRow) -> list[Fraction | None]:
    return [row.by_category.get(c) for c in CATEGORIES] + [row.total]


def render_table(table: AccuracyTable, fmt: str = "markdown") -> str:
    """Render as markdown (best value per column in bold) or RFC-4180 CSV."""
    if fmt not in ("markdown", "csv"):
        raise ValueError(f"unknown format: {fmt!r}")

    value_grid = [_cell_values(row) for row in table.rows]
    best = []
    for col in range(len(CATEGORIES) + 1):
        present = [grid[col] for grid in value_grid if grid[col] is not None]
        best.append(max(present) if present else None)

    if fmt == "csv":
        import io
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(_COLUMNS)
        for row, values in zip(table.rows, value_grid):
            writer.writerow(
                [row.model_id, str(row.k)]
                + ["" if v is None else format_pct(v) for v in values]
            )
        return buffer.getvalue()

    lines = [
        "| " + " | ".join(_COLUMNS) + " |",
        "|" + "|".join(["---"] * len(_COLUMNS)) + "|",
    ]
    for row, values in zip(table.rows, value_grid):
        cells = [row.model_id, str(row.k)]
        for col, value in enumerate(values):
            if value is None:
                cells.append("")
                continue
            text = format_pct(value) + "%"
            cells.append(f"**{text}**" if value == best[col] else text)
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def parse_accuracy_csv(text: str) -> AccuracyTable:
    """Inverse of render_table(..., fmt="csv") for values that print exactly."""
    reader = csv.reader(text.splitlines())
    header = next(reader, None)
    if header != list(_COLUMNS):
        raise InputCsvMalformed(f"unexpected accuracy header: {header}")
    rows = []
    for record in reader:
        model_id, k_text, *cells = record
        by_category = {
            category: Fraction(cell)
            for category, cell in zip(CATEGORIES, cells[:4])
            if cell != ""
        }
        rows.append(AccuracyRow(
            model_id=model_id, k=int(k_text),
            by_category=by_category, total=Fraction(cells[4]),
        ))
    return AccuracyTable(rows=tuple(rows))
