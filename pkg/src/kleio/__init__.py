"""kleio: retrieval-augmented question answering over private corpora.

The pipeline: ingest documents into a store, slice them into overlapping
chunks, embed the chunks into a cosine vector index, then answer questions
by retrieving the top-k eligible chunks into a budgeted prompt for a chat
model. Includes a CSV batch evaluation harness with pass/fail grade
aggregation, and tabular person extraction from genealogical text.
"""

from .chunker import Chunk, ChunkingConfig, chunk_document, eligible_for_retrieval
from .corpus import CorpusStats, Document, DocumentStore, corpus_stats, ingest_path
from .embedder import EmbedderProfile, deterministic_embed, embed_texts
from .gateway import (
    ABSTENTION,
    ChatExchange,
    MockChatBackend,
    ModelProfile,
    complete,
    estimate_tokens,
)
from .genealogy import (
    ExtractionDiff,
    PartialDate,
    PersonRecord,
    build_extraction_prompt,
    diff_extraction,
    extract_from_pages,
    infer_gender,
    parse_person_table,
    reconcile_genders,
    repair_compound_surnames,
    validate_date,
)
from .grading import AccuracyTable, GradeRecord, aggregate, render_table
from .index import IndexEntry, RetrievalHit, VectorIndex
from .qa import (
    Answer,
    PromptBundle,
    QuestionRow,
    ReportRow,
    ask,
    build_prompt,
    grounding_score,
    ingest_and_index,
    run_batch,
)

__version__ = "0.1.0"

__all__ = [
    "ABSTENTION",
    "AccuracyTable",
    "Answer",
    "ChatExchange",
    "Chunk",
    "ChunkingConfig",
    "CorpusStats",
    "Document",
    "DocumentStore",
    "EmbedderProfile",
    "ExtractionDiff",
    "GradeRecord",
    "IndexEntry",
    "MockChatBackend",
    "ModelProfile",
    "PartialDate",
    "PersonRecord",
    "PromptBundle",
    "QuestionRow",
    "ReportRow",
    "RetrievalHit",
    "VectorIndex",
    "aggregate",
    "ask",
    "build_extraction_prompt",
    "build_prompt",
    "chunk_document",
    "complete",
    "corpus_stats",
    "deterministic_embed",
    "diff_extraction",
    "eligible_for_retrieval",
    "embed_texts",
    "estimate_tokens",
    "extract_from_pages",
    "grounding_score",
    "infer_gender",
    "ingest_and_index",
    "ingest_path",
    "parse_person_table",
    "reconcile_genders",
    "render_table",
    "repair_compound_surnames",
    "run_batch",
    "validate_date",
]
