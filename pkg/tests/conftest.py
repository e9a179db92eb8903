"""Shared fixtures: a planted-fact corpus and genealogical page fixtures."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import pytest

DATA_DIR = Path(__file__).parent / "data"

# 20 fictional institutions, one planted fact each. Names are invented so
# no two documents share discriminative vocabulary.
PLANTED_FACTS = [
    ("Velmora Foundry", "founded", 1811),
    ("Quarzien Bridge", "completed", 1824),
    ("Tallowick Mill", "rebuilt", 1837),
    ("Ostrevan Lighthouse", "kindled", 1829),
    ("Brindlemere Canal", "opened", 1806),
    ("Fenwycke Abbey", "dissolved", 1791),
    ("Sarobel Observatory", "erected", 1843),
    ("Marridon Harbour", "dredged", 1852),
    ("Cholvane Academy", "chartered", 1818),
    ("Ilvereth Printworks", "established", 1834),
    ("Dunmarrow Asylum", "commissioned", 1846),
    ("Pellover Aqueduct", "finished", 1799),
    ("Graviston Hospital", "endowed", 1827),
    ("Nerbault Distillery", "licensed", 1815),
    ("Wrenhollow Chapel", "consecrated", 1788),
    ("Skellmere Quarry", "leased", 1840),
    ("Avendale Gasworks", "inaugurated", 1849),
    ("Corvewall Arsenal", "fortified", 1803),
    ("Lumsbridge Theatre", "restored", 1856),
    ("Hathercote Infirmary", "founded", 1861),
]


def planted_sentence(name: str, verb: str, year: int) -> str:
    return f"The {name} was {verb} in {year}."


def planted_question(name: str, verb: str) -> str:
    return f"In which year was the {name} {verb}?"


def planted_doc_text(name: str, verb: str, year: int) -> str:
    return (
        f"{name} Chronicle. "
        f"{planted_sentence(name, verb, year)} "
        "Parish clerks noted the event in the margins of the vestry ledger. "
        f"Later stewards of the {name} kept careful minutes, and the "
        "surviving volumes passed to the county repository."
    )


@dataclass
class PlantedCorpus:
    corpus_dir: Path
    questions_csv: Path
    facts: list
    categories: list


@pytest.fixture
def planted_corpus(tmp_path) -> PlantedCorpus:
    corpus_dir = tmp_path / "corpus"
    corpus_dir.mkdir()
    categories = []
    rows = ["id,category,question"]
    category_cycle = ("factual", "argumentative", "descriptive", "integrative")
    for i, (name, verb, year) in enumerate(PLANTED_FACTS):
        (corpus_dir / f"doc{i:02d}.txt").write_text(
            planted_doc_text(name, verb, year), encoding="utf-8"
        )
        category = category_cycle[i % 4]
        categories.append(category)
        question = planted_question(name, verb)
        rows.append(f'q{i:02d},{category},"{question}"')
    questions_csv = tmp_path / "questions.csv"
    questions_csv.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return PlantedCorpus(
        corpus_dir=corpus_dir,
        questions_csv=questions_csv,
        facts=list(PLANTED_FACTS),
        categories=categories,
    )


@pytest.fixture(scope="session")
def family_page() -> str:
    return (DATA_DIR / "family_page.txt").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def raw_extraction_table() -> str:
    return (DATA_DIR / "raw_extraction.md").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def gold_records_csv() -> Path:
    return DATA_DIR / "gold_table.csv"
