"""The retrieve-prompt-answer loop and the CSV batch runner.

ask() embeds a question, pulls the top-k eligible chunks, assembles a
budgeted prompt, calls the model, and returns the answer with source
attributions plus a grounding score (mean per-sentence content-token
overlap between answer and kept chunks). run_batch() maps a question CSV
to a report CSV row by row, isolating per-row failures.
"""

from __future__ import annotations

import csv
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

from . import gateway
from .chunker import ChunkingConfig, chunk_document
from .corpus import DocumentStore, ingest_path
from .embedder import EmbedderProfile, embed_texts
from .errors import ContextOverflow, InputCsvMalformed, KleioError, PipelineError
from .gateway import ModelProfile, estimate_tokens
from .index import IndexEntry, VectorIndex
from .textutil import content_tokens, split_sentences

logger = logging.getLogger(__name__)

CATEGORIES = ("factual", "argumentative", "descriptive", "integrative")

DEFAULT_SYSTEM_TEXT = (
    "You are a research assistant for historians. Answer using the provided "
    "sources when given; if the sources and your knowledge are insufficient, "
    "say: I don't know the answer."
)

GROUNDING_THRESHOLD = 0.15
SNIPPET_CHARS = 80


class ContextChunk(NamedTuple):
    chunk_id: str
    text: str
    score: float


@dataclass(frozen=True)
class PromptBundle:
    system_text: str
    question: str
    context_chunks: tuple[ContextChunk, ...]
    token_estimate: int


@dataclass(frozen=True)
class SourceAttribution:
    chunk_id: str
    doc_id: str
    doc_title: str
    score: float
    rank: int
    snippet: str
    char_start: int
    char_end: int


@dataclass(frozen=True)
class Answer:
    text: str
    model_id: str
    k_requested: int
    sources: tuple[SourceAttribution, ...]
    grounding_score: float
    grounded: bool
    latency: float


@dataclass(frozen=True)
class QuestionRow:
    id: str
    category: str
    question: str


@dataclass(frozen=True)
class ReportRow:
    id: str
    category: str
    question: str
    answer: str
    model_id: str
    k: int
    grounding_score: float
    sources: tuple[str, ...]  # formatted cells, padded to k with ""


def _render_user_text(question: str, contexts) -> str:
    if not contexts:
        return question
    blocks = [f"[SOURCE {i}]\n{ctx.text}" for i, ctx in enumerate(contexts, start=1)]
    return "\n\n".join(blocks) + f"\n\nQUESTION: {question}"


def build_prompt(question: str, contexts: list[ContextChunk],
                 profile: ModelProfile,
                 system_text: str = DEFAULT_SYSTEM_TEXT) -> PromptBundle:
    """Assemble the prompt, dropping lowest-scored sources until it fits.

    contexts must already be sorted by descending score. Raises
    ContextOverflow only if the bare question alone exceeds the budget.
    """
    kept = list(contexts)
    while True:
        user_text = _render_user_text(question, kept)
        estimate = estimate_tokens(system_text) + estimate_tokens(user_text)
        if estimate <= profile.prompt_budget:
            return PromptBundle(
                system_text=system_text,
                question=question,
                context_chunks=tuple(kept),
                token_estimate=estimate,
            )
        if not kept:
            raise ContextOverflow(
                f"question alone estimates {estimate} tokens, "
                f"budget is {profile.prompt_budget}"
            )
        kept.pop()  # lowest score sits last


def grounding_score(answer_text: str, context_texts: list[str]) -> float:
    """Mean over answer sentences of the best per-chunk content-token overlap.

    Sentences with no content tokens are skipped; no contexts, or no
    scoreable sentences, gives 0.0.
    """
    if not context_texts:
        return 0.0
    chunk_tokens = [content_tokens(t) for t in context_texts]
    scores = []
    for sentence in split_sentences(answer_text):
        tokens = content_tokens(sentence)
        if not tokens:
            continue
        best = max(len(tokens & ct) / len(tokens) for ct in chunk_tokens)
        scores.append(best)
    if not scores:
        return 0.0
    return sum(scores) / len(scores)


def _snippet(text: str) -> str:
    return text[:SNIPPET_CHARS].replace("\n", " ").replace("\r", " ")


def ask(question: str, k: int, index: VectorIndex,
        embedder_profile: EmbedderProfile, model_profile: ModelProfile,
        chat_backend=None, system_text: str = DEFAULT_SYSTEM_TEXT,
        grounding_threshold: float = GROUNDING_THRESHOLD) -> Answer:
    """One full pass of the pipeline; stage names label any failure."""
    if not question or not question.strip():
        raise PipelineError("validation", "empty question")
    if k < 0:
        raise PipelineError("validation", "k must be >= 0")

    started = time.perf_counter()
    try:
        query_vector = embed_texts([question], embedder_profile)[0]
    except KleioError as exc:
        raise PipelineError("embed", exc) from exc

    try:
        hits = index.query_top_k(query_vector, k)
    except KleioError as exc:
        raise PipelineError("retrieve", exc) from exc

    entries = {hit.chunk_id: index.get(hit.chunk_id) for hit in hits}
    contexts = [
        ContextChunk(hit.chunk_id, entries[hit.chunk_id].chunk.text, hit.score)
        for hit in hits
    ]
    try:
        bundle = build_prompt(question, contexts, model_profile, system_text)
    except ContextOverflow as exc:
        raise PipelineError("prompt", exc) from exc

    try:
        exchange = gateway.complete(
            model_profile, bundle.system_text,
            _render_user_text(question, bundle.context_chunks),
            backend=chat_backend,
        )
    except KleioError as exc:
        raise PipelineError("complete", exc) from exc

    kept_ids = {ctx.chunk_id for ctx in bundle.context_chunks}
    sources = []
    for hit in hits:
        if hit.chunk_id not in kept_ids:
            continue
        entry = entries[hit.chunk_id]
        sources.append(SourceAttribution(
            chunk_id=hit.chunk_id,
            doc_id=entry.chunk.doc_id,
            doc_title=entry.doc_title,
            score=hit.score,
            rank=len(sources) + 1,
            snippet=_snippet(entry.chunk.text),
            char_start=entry.chunk.char_start,
            char_end=entry.chunk.char_end,
        ))
    score = grounding_score(exchange.answer_text,
                            [ctx.text for ctx in bundle.context_chunks])
    return Answer(
        text=exchange.answer_text,
        model_id=model_profile.model_id,
        k_requested=k,
        sources=tuple(sources),
        grounding_score=score,
        grounded=score >= grounding_threshold,
        latency=time.perf_counter() - started,
    )


# --- batch runner ---

def read_questions_csv(path: str | Path) -> list[QuestionRow]:
    """Load the batch input CSV (header: id,category,question)."""
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            reader = csv.DictReader(handle)
            fields = reader.fieldnames or []
            if not {"id", "category", "question"} <= set(fields):
                raise InputCsvMalformed(
                    f"expected header id,category,question, got {fields}"
                )
            return [
                QuestionRow(
                    id=(row.get("id") or "").strip(),
                    category=(row.get("category") or "").strip(),
                    question=row.get("question") or "",
                )
                for row in reader
            ]
    except OSError as exc:
        raise InputCsvMalformed(f"cannot read {path}: {exc}") from exc
    except csv.Error as exc:
        raise InputCsvMalformed(f"CSV parse error in {path}: {exc}") from exc


_PIPE_ESCAPE = "\\|"


def format_source_cell(source: SourceAttribution) -> str:
    title = source.doc_title.replace("|", _PIPE_ESCAPE)
    snippet = source.snippet.replace("|", _PIPE_ESCAPE)
    return f"{title}|{source.chunk_id}|{source.score:.6f}|{snippet}"


def write_report_csv(rows: list[ReportRow], path: str | Path, k: int) -> None:
    header = ["id", "category", "question", "answer", "model_id", "k",
              "grounding_score"] + [f"source_{i}" for i in range(1, k + 1)]
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            cells = list(row.sources) + [""] * (k - len(row.sources))
            writer.writerow([
                row.id, row.category, row.question, row.answer, row.model_id,
                str(row.k), f"{row.grounding_score:.4f}", *cells[:k],
            ])


def read_report_csv(path: str | Path) -> tuple[list[ReportRow], int]:
    """Parse a report CSV back into rows; returns (rows, k)."""
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None:
            raise InputCsvMalformed("report CSV is empty")
        source_cols = [h for h in header if h.startswith("source_")]
        fixed = ["id", "category", "question", "answer", "model_id", "k",
                 "grounding_score"]
        if header[:7] != fixed:
            raise InputCsvMalformed(f"unexpected report header: {header}")
        k = len(source_cols)
        rows = []
        for record in reader:
            sources = tuple(record[7:7 + k])
            rows.append(ReportRow(
                id=record[0], category=record[1], question=record[2],
                answer=record[3], model_id=record[4], k=int(record[5]),
                grounding_score=float(record[6]), sources=sources,
            ))
    return rows, k


@dataclass(frozen=True)
class BatchSummary:
    rows_processed: int
    row_errors: tuple[tuple[str, str], ...]  # (row id, stage)


def _run_row(row: QuestionRow, k, index, embedder_profile, model_profile,
             chat_backend, grounding_threshold) -> tuple[ReportRow, str | None]:
    try:
        if row.category not in CATEGORIES:
            raise PipelineError("validation", f"unknown category {row.category!r}")
        answer = ask(row.question, k, index, embedder_profile, model_profile,
                     chat_backend=chat_backend,
                     grounding_threshold=grounding_threshold)
    except PipelineError as exc:
        logger.warning("row %s failed at stage %s: %s", row.id, exc.stage, exc.cause)
        return ReportRow(
            id=row.id, category=row.category, question=row.question,
            answer=f"ERROR: {exc.stage}", model_id=model_profile.model_id,
            k=k, grounding_score=0.0, sources=(),
        ), exc.stage
    return ReportRow(
        id=row.id, category=row.category, question=row.question,
        answer=answer.text, model_id=answer.model_id, k=k,
        grounding_score=round(answer.grounding_score, 4),
        sources=tuple(format_source_cell(s) for s in answer.sources),
    ), None


def run_batch(questions_csv_path, k: int, index: VectorIndex,
              embedder_profile: EmbedderProfile, model_profile: ModelProfile,
              report_csv_path, chat_backend=None,
              grounding_threshold: float = GROUNDING_THRESHOLD,
              parallel: int = 1) -> BatchSummary:
    """Answer every row of a question CSV into a report CSV, in input order.

    Row failures produce "ERROR: <stage>" answers and do not stop the batch.
    With deterministic backends the output is byte-stable across runs.
    """
    questions = read_questions_csv(questions_csv_path)
    if chat_backend is None:
        chat_backend = gateway.make_backend(model_profile)

    args = (k, index, embedder_profile, model_profile, chat_backend,
            grounding_threshold)
    if parallel > 1:
        with ThreadPoolExecutor(max_workers=parallel) as pool:
            results = list(pool.map(lambda q: _run_row(q, *args), questions))
    else:
        results = [_run_row(q, *args) for q in questions]

    rows = [row for row, _ in results]
    errors = tuple(
        (row.id, stage) for (row, stage) in results if stage is not None
    )
    write_report_csv(rows, report_csv_path, k)
    return BatchSummary(rows_processed=len(rows), row_errors=errors)


# --- ingestion pipeline (corpus -> chunks -> vectors -> index) ---

@dataclass(frozen=True)
class IngestSummary:
    documents_added: int
    chunks_indexed: int
    failures: tuple[tuple[str, str], ...]  # (path, error)


def ingest_and_index(path, store: DocumentStore, index: VectorIndex,
                     embedder_profile: EmbedderProfile,
                     chunking: ChunkingConfig = ChunkingConfig()) -> IngestSummary:
    """Run the full first-stage pipeline over a file or directory."""
    failures: list[tuple[str, str]] = []
    before = len(store)
    docs = ingest_path(path, store,
                       on_error=lambda p, e: failures.append((str(p), str(e))))
    added = len(store) - before

    chunks_indexed = 0
    for doc in docs:
        chunks = chunk_document(doc, chunking)
        if not chunks:
            continue
        vectors = embed_texts([c.text for c in chunks], embedder_profile)
        entries = [
            IndexEntry.from_chunk(chunk, vector, chunking, doc_title=doc.title)
            for chunk, vector in zip(chunks, vectors)
        ]
        chunks_indexed += index.add(entries)
    return IngestSummary(
        documents_added=added,
        chunks_indexed=chunks_indexed,
        failures=tuple(failures),
    )
