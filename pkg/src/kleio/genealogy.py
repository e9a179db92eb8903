"""Tabular person extraction from genealogical prose.

A model is prompted, page by page, to list every person in a table; the
returned table is parsed into PersonRecords, dates are validated against
the DD-MM-YYYY grammar, compound-surname truncations ("Ajuria" for
"Ajuria y Urratia") are detected against the source page, and results can
be diffed field-by-field against a hand-checked gold table.
"""

from __future__ import annotations

import csv
import logging
import re
from dataclasses import dataclass, replace
from pathlib import Path

from . import gateway
from .errors import (
    HeaderUnrecognized,
    NoTableFound,
    PageTooLarge,
    ValidationError,
)
from .gateway import ModelProfile, estimate_tokens
from .names_es import FEMALE_NAMES, MALE_NAMES
from .textutil import fold_accents

logger = logging.getLogger(__name__)

EXTRACTION_PROMPT = (
    "From the previous text, list all the names of people in a table with "
    "columns: full name of each person, relationship, date of birth (format "
    "DD-MM-YYYY), place of birth, date of death (format DD-MM-YYYY), baptism "
    "date (format DD-MM-YYYY), marriage date (format DD-MM-YYYY), place of "
    "residence, full name and surname of father, full name and surname of "
    "mother, full name and surname of children, full name and surname of "
    "spouse, and occupation. Try to infer the gender of each person, and add "
    "a column Gender."
)

GENDERS = ("Male", "Female", "Unknown")

_DAYS_IN_MONTH = (31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31)
_DATE_RE = re.compile(r"(\d{2})-(\d{2})-(\d{4})")


@dataclass(frozen=True)
class PartialDate:
    day: int | None
    month: int | None
    year: int | None
    raw: str

    @classmethod
    def unknown(cls, raw: str = "Unknown") -> "PartialDate":
        return cls(day=None, month=None, year=None, raw=raw)

    @property
    def is_unknown(self) -> bool:
        return self.day is None and self.month is None and self.year is None

    def render(self) -> str:
        if self.day is not None and self.month is not None and self.year is not None:
            return f"{self.day:02d}-{self.month:02d}-{self.year:04d}"
        return "Unknown"

    def key(self):
        return (self.day, self.month, self.year)


def validate_date(text: str) -> PartialDate:
    """Accept DD-MM-YYYY with a calendar-valid day/month, or "Unknown".

    Day validity is checked against the month's maximum length with
    February allowed 29 days (the year is not consulted). Anything else
    raises ValidationError carrying the raw text.
    """
    stripped = text.strip()
    if stripped.casefold() == "unknown":
        return PartialDate.unknown(text)
    match = _DATE_RE.fullmatch(stripped)
    if not match:
        raise ValidationError(f"not a DD-MM-YYYY date: {text!r}", raw=text)
    day, month, year = int(match.group(1)), int(match.group(2)), int(match.group(3))
    if not 1 <= month <= 12:
        raise ValidationError(f"month out of range in {text!r}", raw=text)
    if not 1 <= day <= _DAYS_IN_MONTH[month - 1]:
        raise ValidationError(f"day out of range in {text!r}", raw=text)
    return PartialDate(day=day, month=month, year=year, raw=text)


@dataclass(frozen=True)
class PersonRecord:
    full_name: str
    relationship: str | None = None
    date_of_birth: PartialDate = PartialDate.unknown()
    place_of_birth: str | None = None
    date_of_death: PartialDate = PartialDate.unknown()
    baptism_date: PartialDate = PartialDate.unknown()
    marriage_date: PartialDate = PartialDate.unknown()
    residence: str | None = None
    father_name: str | None = None
    mother_name: str | None = None
    children: tuple[str, ...] = ()
    spouse_name: str | None = None
    occupation: str | None = None
    gender: str = "Unknown"

    def __post_init__(self):
        if not self.full_name:
            raise ValueError("full_name must be non-empty")
        if self.gender not in GENDERS:
            raise ValueError(f"gender must be one of {GENDERS}, got {self.gender!r}")


DATE_FIELDS = ("date_of_birth", "date_of_death", "baptism_date", "marriage_date")
NAME_FIELDS = ("father_name", "mother_name", "spouse_name")
TEXT_FIELDS = ("relationship", "place_of_birth", "residence", "occupation")
DIFF_FIELDS = ("full_name", *DATE_FIELDS, *NAME_FIELDS, *TEXT_FIELDS,
               "children", "gender")


# --- gender inference ---

def infer_gender(full_name: str) -> str:
    """Dictionary lookup on the first given-name token, then an -a/-o
    ending heuristic, else Unknown. Deterministic and total."""
    tokens = full_name.split()
    if not tokens:
        return "Unknown"
    first = fold_accents(tokens[0]).casefold().strip(".,;:'\"")
    if first in MALE_NAMES:
        return "Male"
    if first in FEMALE_NAMES:
        return "Female"
    if first.endswith("a"):
        return "Female"
    if first.endswith("o"):
        return "Male"
    return "Unknown"


def reconcile_genders(records: list[PersonRecord]) -> \
        tuple[list[PersonRecord], list[tuple[str, str, str]]]:
    """Fill Unknown genders from the name rules; cross-check the rest.

    A model-supplied gender always wins; disagreements with the rule-based
    inference are returned as (full_name, model_value, inferred) notes.
    """
    reconciled = []
    disagreements = []
    for record in records:
        inferred = infer_gender(record.full_name)
        if record.gender == "Unknown" and inferred != "Unknown":
            record = replace(record, gender=inferred)
        elif record.gender != "Unknown" and inferred not in ("Unknown", record.gender):
            disagreements.append((record.full_name, record.gender, inferred))
            logger.warning("gender disagreement for %s: model says %s, rules say %s",
                           record.full_name, record.gender, inferred)
        reconciled.append(record)
    return reconciled, disagreements


# --- prompt building ---

def build_extraction_prompt(page_text: str, profile: ModelProfile) -> str:
    """Page text followed by the extraction instruction, budget-checked."""
    if not page_text.strip():
        raise ValueError("page_text must be non-empty")
    prompt = f"{page_text}\n\n{EXTRACTION_PROMPT}"
    estimate = estimate_tokens(prompt)
    if estimate > profile.prompt_budget:
        raise PageTooLarge(
            f"page needs ~{estimate} tokens, budget is {profile.prompt_budget}; "
            "split the page"
        )
    return prompt


# --- table parsing ---

_HEADER_SYNONYMS = {
    "full name": "full_name",
    "full name of each person": "full_name",
    "name": "full_name",
    "person": "full_name",
    "relationship": "relationship",
    "date of birth": "date_of_birth",
    "birth date": "date_of_birth",
    "place of birth": "place_of_birth",
    "birthplace": "place_of_birth",
    "date of death": "date_of_death",
    "death date": "date_of_death",
    "baptism date": "baptism_date",
    "date of baptism": "baptism_date",
    "marriage date": "marriage_date",
    "date of marriage": "marriage_date",
    "place of residence": "residence",
    "residence": "residence",
    "father's full name": "father_name",
    "full name and surname of father": "father_name",
    "father": "father_name",
    "mother's full name": "mother_name",
    "full name and surname of mother": "mother_name",
    "mother": "mother_name",
    "children's full name": "children",
    "full name and surname of children": "children",
    "children": "children",
    "spouse's full name": "spouse_name",
    "full name and surname of spouse": "spouse_name",
    "spouse": "spouse_name",
    "occupation": "occupation",
    "gender": "gender",
    "sex": "gender",
}

_DIVIDER_RE = re.compile(r"^[\s|:\-]+$")


def _split_row(line: str) -> list[str]:
    cells = line.strip().strip("|").split("|")
    return [c.strip() for c in cells]


def _header_field(cell: str) -> str | None:
    return _HEADER_SYNONYMS.get(cell.strip().strip("*").strip().casefold())


def _clean_cell(cell: str) -> str | None:
    value = cell.strip().strip("*").strip()
    if not value or value.casefold() in ("unknown", "n/a", "-"):
        return None
    return value


def parse_person_table(table_text: str) -> list[PersonRecord]:
    """Parse a markdown or bare pipe-delimited person table.

    Header names are matched case-insensitively against known synonyms;
    unknown columns are ignored. Rows that cannot be turned into a record
    (no name, malformed date) are skipped with a warning, not fatal.
    """
    pipe_lines = [line for line in table_text.splitlines() if "|" in line]
    if not pipe_lines:
        raise NoTableFound("no pipe-delimited rows in response")

    header_idx = None
    mapping: list[str | None] = []
    for i, line in enumerate(pipe_lines):
        fields = [_header_field(cell) for cell in _split_row(line)]
        if "full_name" in fields:
            header_idx, mapping = i, fields
            break
    if header_idx is None:
        raise HeaderUnrecognized('no header row naming "Full Name"')

    records = []
    for line in pipe_lines[header_idx + 1:]:
        if _DIVIDER_RE.match(line):
            continue
        cells = _split_row(line)
        values: dict[str, str | None] = {}
        for field_name, cell in zip(mapping, cells):
            if field_name is not None:
                values[field_name] = _clean_cell(cell)
        if not values.get("full_name"):
            logger.warning("skipping table row without a name: %r", line)
            continue
        try:
            records.append(_record_from_cells(values))
        except ValidationError as exc:
            logger.warning("skipping unparseable table row %r: %s", line, exc)
    return records


def _record_from_cells(values: dict[str, str | None]) -> PersonRecord:
    def date_of(field_name):
        raw = values.get(field_name)
        return PartialDate.unknown() if raw is None else validate_date(raw)

    children_raw = values.get("children")
    children = tuple(
        part.strip() for part in (children_raw or "").split(";") if part.strip()
    )
    gender_raw = (values.get("gender") or "unknown").casefold()
    gender = {"male": "Male", "m": "Male", "female": "Female", "f": "Female"}.get(
        gender_raw, "Unknown"
    )
    return PersonRecord(
        full_name=values["full_name"],
        relationship=values.get("relationship"),
        date_of_birth=date_of("date_of_birth"),
        place_of_birth=values.get("place_of_birth"),
        date_of_death=date_of("date_of_death"),
        baptism_date=date_of("baptism_date"),
        marriage_date=date_of("marriage_date"),
        residence=values.get("residence"),
        father_name=values.get("father_name"),
        mother_name=values.get("mother_name"),
        children=children,
        spouse_name=values.get("spouse_name"),
        occupation=values.get("occupation"),
        gender=gender,
    )


# --- compound-surname repair ---

_CONTINUATION_RE = re.compile(r"[ \t]+y[ \t]+([^\W\d_][\w'À-ɏ\-]*)")


def repair_compound_surnames(records: list[PersonRecord],
                             source_text: str) -> list[tuple[PersonRecord, str]]:
    """Suggest fuller names for records truncated before a "y"-joined surname.

    A record whose full_name occurs in the source immediately followed by
    " y <Capitalized-word>" yields a suggestion with that fragment appended.
    Records are never mutated; duplicate suggestions are dropped.
    """
    folded_source = fold_accents(source_text).lower()
    suggestions = []
    seen = set()
    for record in records:
        name = record.full_name.strip()
        if not name:
            continue
        folded_name = fold_accents(name).lower()
        for match in re.finditer(re.escape(folded_name), folded_source):
            continuation = _CONTINUATION_RE.match(source_text, match.end())
            if not continuation:
                continue
            word = continuation.group(1)
            if not word[0].isupper():
                continue
            suggestion = f"{name} y {word}"
            key = (id(record), suggestion)
            if key not in seen:
                seen.add(key)
                suggestions.append((record, suggestion))
    return suggestions


# --- diffing against gold ---

@dataclass
class FieldCounts:
    correct: int = 0
    missing: int = 0
    wrong: int = 0
    spurious: int = 0


@dataclass(frozen=True)
class Discrepancy:
    record_key: str
    field: str
    expected: str
    got: str
    kind: str  # "missing" | "wrong" | "spurious"


@dataclass
class ExtractionDiff:
    counts: dict[str, FieldCounts]
    discrepancies: list[Discrepancy]
    ambiguous: list[str]
    unmatched_gold: list[str]
    unmatched_got: list[str]

    def total(self, kind: str) -> int:
        return sum(getattr(fc, kind) for fc in self.counts.values())


def _norm_name(name: str | None) -> str:
    if not name:
        return ""
    return " ".join(fold_accents(name).casefold().split())


_CONJUNCTIONS = (" y ", " e ")


def _name_relation(gold_name: str | None, got_name: str | None) -> str:
    """"equal", "truncated" (got is a conjunction-prefix of gold),
    "extended" (the reverse), or "different"."""
    gold_n, got_n = _norm_name(gold_name), _norm_name(got_name)
    if gold_n == got_n:
        return "equal"
    if got_n and gold_n.startswith(got_n) and \
            any(gold_n[len(got_n):].startswith(c) for c in _CONJUNCTIONS):
        return "truncated"
    if gold_n and got_n.startswith(gold_n) and \
            any(got_n[len(gold_n):].startswith(c) for c in _CONJUNCTIONS):
        return "extended"
    return "different"


def _align(gold: list[PersonRecord], got: list[PersonRecord]):
    """Pair gold records with got records by name.

    Exact (normalized) matches claim first; the remainder pair through
    compound-surname prefix matching in list order. When a prefix match
    has several differently-named candidates the earliest is claimed and
    the ambiguity reported.
    """
    claimed: set[int] = set()
    pairs: dict[int, int] = {}
    ambiguous: list[str] = []

    for gi, grec in enumerate(gold):
        for ti, trec in enumerate(got):
            if ti not in claimed and _norm_name(grec.full_name) == _norm_name(trec.full_name):
                pairs[gi] = ti
                claimed.add(ti)
                break

    for gi, grec in enumerate(gold):
        if gi in pairs:
            continue
        candidates = [
            ti for ti, trec in enumerate(got)
            if ti not in claimed
            and _name_relation(grec.full_name, trec.full_name) in ("truncated", "extended")
        ]
        if not candidates:
            continue
        names = {_norm_name(got[ti].full_name) for ti in candidates}
        if len(names) > 1:
            ambiguous.append(grec.full_name)
        pairs[gi] = candidates[0]
        claimed.add(candidates[0])
    return pairs, claimed, ambiguous


def _diff_children(gold_children, got_children, counts, discrepancies, key):
    remaining = list(got_children)
    for child in gold_children:
        exact = next((c for c in remaining if _name_relation(child, c) == "equal"), None)
        if exact is not None:
            remaining.remove(exact)
            counts.correct += 1
            continue
        truncated = next(
            (c for c in remaining if _name_relation(child, c) == "truncated"), None
        )
        if truncated is not None:
            remaining.remove(truncated)
            counts.missing += 1
            discrepancies.append(Discrepancy(key, "children", child, truncated, "missing"))
            continue
        counts.missing += 1
        discrepancies.append(Discrepancy(key, "children", child, "", "missing"))
    for extra in remaining:
        counts.wrong += 1
        discrepancies.append(Discrepancy(key, "children", "", extra, "wrong"))


def diff_extraction(gold: list[PersonRecord], got: list[PersonRecord]) -> ExtractionDiff:
    """Field-level comparison of an extraction against a gold table.

    Per populated gold field: correct when got agrees, missing when got
    lacks it (including compound-surname truncations), wrong when got
    disagrees. A got value where gold asserts Unknown counts as wrong (an
    invented value). Got records with no gold counterpart count their
    populated fields as spurious. Fields unknown on both sides are not
    counted.
    """
    counts = {f: FieldCounts() for f in DIFF_FIELDS}
    discrepancies: list[Discrepancy] = []
    pairs, claimed, ambiguous = _align(gold, got)
    unmatched_gold: list[str] = []
    unmatched_got: list[str] = []

    def compare_scalar(field_name, key, gold_value, got_value, name_like):
        fc = counts[field_name]
        if gold_value is None and got_value is None:
            return
        if gold_value is None:
            fc.wrong += 1
            discrepancies.append(
                Discrepancy(key, field_name, "Unknown", got_value, "wrong"))
        elif got_value is None:
            fc.missing += 1
            discrepancies.append(
                Discrepancy(key, field_name, gold_value, "", "missing"))
        else:
            if name_like:
                relation = _name_relation(gold_value, got_value)
            else:
                relation = "equal" if _norm_name(gold_value) == _norm_name(got_value) \
                    else "different"
            if relation == "equal":
                fc.correct += 1
            elif relation == "truncated":
                fc.missing += 1
                discrepancies.append(
                    Discrepancy(key, field_name, gold_value, got_value, "missing"))
            else:
                fc.wrong += 1
                discrepancies.append(
                    Discrepancy(key, field_name, gold_value, got_value, "wrong"))

    for gi, grec in enumerate(gold):
        key = grec.full_name
        if gi not in pairs:
            unmatched_gold.append(key)
            for field_name in DIFF_FIELDS:
                value = _field_text(grec, field_name)
                if field_name == "children":
                    counts[field_name].missing += len(grec.children)
                    for child in grec.children:
                        discrepancies.append(
                            Discrepancy(key, "children", child, "", "missing"))
                elif value is not None:
                    counts[field_name].missing += 1
                    discrepancies.append(
                        Discrepancy(key, field_name, value, "", "missing"))
            continue

        trec = got[pairs[gi]]
        relation = _name_relation(grec.full_name, trec.full_name)
        if relation == "equal":
            counts["full_name"].correct += 1
        elif relation == "truncated":
            counts["full_name"].missing += 1
            discrepancies.append(Discrepancy(
                key, "full_name", grec.full_name, trec.full_name, "missing"))
        else:
            counts["full_name"].wrong += 1
            discrepancies.append(Discrepancy(
                key, "full_name", grec.full_name, trec.full_name, "wrong"))

        for field_name in DATE_FIELDS:
            gold_date: PartialDate = getattr(grec, field_name)
            got_date: PartialDate = getattr(trec, field_name)
            compare_scalar(
                field_name, key,
                None if gold_date.is_unknown else gold_date.render(),
                None if got_date.is_unknown else got_date.render(),
                name_like=False,
            )
        for field_name in NAME_FIELDS:
            compare_scalar(field_name, key, getattr(grec, field_name),
                           getattr(trec, field_name), name_like=True)
        for field_name in TEXT_FIELDS:
            compare_scalar(field_name, key, getattr(grec, field_name),
                           getattr(trec, field_name), name_like=False)
        _diff_children(grec.children, trec.children, counts["children"],
                       discrepancies, key)
        if grec.gender == trec.gender:
            counts["gender"].correct += 1
        else:
            counts["gender"].wrong += 1
            discrepancies.append(
                Discrepancy(key, "gender", grec.gender, trec.gender, "wrong"))

    for ti, trec in enumerate(got):
        if ti in claimed:
            continue
        unmatched_got.append(trec.full_name)
        counts["full_name"].spurious += 1
        discrepancies.append(
            Discrepancy(trec.full_name, "full_name", "", trec.full_name, "spurious"))
        for field_name in DIFF_FIELDS:
            if field_name == "full_name":
                continue
            value = _field_text(trec, field_name)
            if field_name == "children":
                counts[field_name].spurious += len(trec.children)
            elif value is not None:
                counts[field_name].spurious += 1

    return ExtractionDiff(
        counts=counts,
        discrepancies=discrepancies,
        ambiguous=ambiguous,
        unmatched_gold=unmatched_gold,
        unmatched_got=unmatched_got,
    )


def _field_text(record: PersonRecord, field_name: str) -> str | None:
    value = getattr(record, field_name)
    if field_name in DATE_FIELDS:
        return None if value.is_unknown else value.render()
    if field_name == "children":
        return "; ".join(value) if value else None
    if field_name == "gender":
        return None if value == "Unknown" else value
    return value


# --- page-wise extraction run ---

@dataclass(frozen=True)
class PageReport:
    page: int
    status: str  # "ok" | "error"
    detail: str = ""
    records_found: int = 0


@dataclass(frozen=True)
class ExtractionRun:
    records: tuple[tuple[int, PersonRecord], ...]  # (page index, record)
    suggestions: tuple[tuple[int, str, str], ...]  # (page, full_name, suggestion)
    reports: tuple[PageReport, ...]


def extract_from_pages(pages: list[str], model_profile: ModelProfile,
                       chat_backend=None) -> ExtractionRun:
    """Prompt, parse, validate, and repair-suggest for each page in turn.

    Per-page failures are recorded in the run report and do not stop the
    remaining pages.
    """
    if chat_backend is None:
        chat_backend = gateway.make_backend(model_profile)
    all_records: list[tuple[int, PersonRecord]] = []
    suggestions: list[tuple[int, str, str]] = []
    reports: list[PageReport] = []

    for page_no, page_text in enumerate(pages):
        try:
            prompt = build_extraction_prompt(page_text, model_profile)
            exchange = gateway.complete(model_profile, "", prompt,
                                        backend=chat_backend)
            records, _ = reconcile_genders(parse_person_table(exchange.answer_text))
        except Exception as exc:  # page isolation
            reports.append(PageReport(page=page_no, status="error", detail=str(exc)))
            logger.warning("page %d failed: %s", page_no, exc)
            continue
        for record, suggestion in repair_compound_surnames(records, page_text):
            suggestions.append((page_no, record.full_name, suggestion))
        all_records.extend((page_no, r) for r in records)
        reports.append(PageReport(page=page_no, status="ok",
                                  records_found=len(records)))
    return ExtractionRun(
        records=tuple(all_records),
        suggestions=tuple(suggestions),
        reports=tuple(reports),
    )


# --- records CSV ---

RECORDS_HEADER = [
    "page", "full_name", "relationship", "date_of_birth", "place_of_birth",
    "date_of_death", "baptism_date", "marriage_date", "residence",
    "father_name", "mother_name", "children", "spouse_name", "occupation",
    "gender",
]


def write_records_csv(rows: list[tuple[int, PersonRecord]], path: str | Path) -> None:
    """Absent values render as "Unknown"; children join on ";"."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(RECORDS_HEADER)
        for page, record in rows:
            writer.writerow([
                str(page),
                record.full_name,
                record.relationship or "Unknown",
                record.date_of_birth.render(),
                record.place_of_birth or "Unknown",
                record.date_of_death.render(),
                record.baptism_date.render(),
                record.marriage_date.render(),
                record.residence or "Unknown",
                record.father_name or "Unknown",
                record.mother_name or "Unknown",
                "; ".join(record.children) if record.children else "Unknown",
                record.spouse_name or "Unknown",
                record.occupation or "Unknown",
                record.gender,
            ])


def read_records_csv(path: str | Path) -> list[tuple[int, PersonRecord]]:
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames != RECORDS_HEADER:
            raise HeaderUnrecognized(
                f"expected records header {RECORDS_HEADER}, got {reader.fieldnames}"
            )
        rows = []
        for row in reader:
            values = {k: _clean_cell(v or "") for k, v in row.items() if k != "page"}
            record = _record_from_cells(values)
            rows.append((int(row["page"] or 0), record))
    return rows
