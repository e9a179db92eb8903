"""Fixed-size overlapping chunking plus retrieval-eligibility rules.

Chunks are strict character slices: text that fits in one chunk yields one
chunk; otherwise chunks start at every stride multiple (stride = chunk_size
- overlap) below the text length, with the trailing chunks clipped at the
end of the text. Eligibility filters chunks that are too short or that look
like bibliography material.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .corpus import Document

_HEADING_WORDS = {"bibliography", "references", "works cited", "sources"}
_YEAR_RE = re.compile(r"\b\d{4}\b")
_CITATION_MARKERS = ("pp.", "ed.", "Press", "University", "vol.")


@dataclass(frozen=True)
class ChunkingConfig:
    chunk_size: int = 1000
    overlap: int = 200
    min_chunk_chars: int = 200
    # Bibliography heuristics; see is_bibliographic.
    bib_tail_fraction: float = 0.25
    bib_line_fraction: float = 0.60

    def __post_init__(self):
        if not 0 <= self.overlap < self.chunk_size:
            raise ValueError("require 0 <= overlap < chunk_size")
        if self.min_chunk_chars < 0:
            raise ValueError("min_chunk_chars must be >= 0")


@dataclass(frozen=True)
class Chunk:
    chunk_id: str
    doc_id: str
    seq_index: int
    text: str
    char_start: int
    char_end: int
    page_hint: int
    bibliographic: bool


def _heading_key(line: str) -> str:
    return line.strip().lstrip("#=* ").rstrip(" :.").casefold()


def bibliography_start(doc: Document, cfg: ChunkingConfig = ChunkingConfig()) -> int | None:
    """Offset of the last bibliography-style heading in the document tail.

    Only headings in the final bib_tail_fraction of the text count; a
    matching heading earlier in the document (say, a chapter discussing
    sources) does not mark everything after it as bibliography.
    """
    text = doc.full_text
    threshold = (1.0 - cfg.bib_tail_fraction) * len(text)
    found = None
    offset = 0
    for line in text.splitlines(keepends=True):
        if offset >= threshold and _heading_key(line) in _HEADING_WORDS:
            found = offset
        offset += len(line)
    return found


def _looks_like_citations(text: str, cfg: ChunkingConfig) -> bool:
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        return False
    matching = sum(
        1 for line in lines
        if _YEAR_RE.search(line) and any(marker in line for marker in _CITATION_MARKERS)
    )
    return matching / len(lines) >= cfg.bib_line_fraction


def is_bibliographic(chunk: Chunk, doc: Document,
                     cfg: ChunkingConfig = ChunkingConfig()) -> bool:
    """True when a chunk sits in a trailing reference section or reads like
    a run of citation lines."""
    bib_start = bibliography_start(doc, cfg)
    if bib_start is not None and chunk.char_start >= bib_start:
        return True
    return _looks_like_citations(chunk.text, cfg)


def chunk_document(doc: Document, cfg: ChunkingConfig = ChunkingConfig()) -> list[Chunk]:
    """Slice a document into overlapping chunks; pure in (full_text, cfg)."""
    text = doc.full_text
    n = len(text)
    if n == 0:
        return []
    stride = cfg.chunk_size - cfg.overlap
    starts = [0] if n <= cfg.chunk_size else list(range(0, n, stride))
    bib_start = bibliography_start(doc, cfg)

    chunks = []
    for seq, start in enumerate(starts):
        end = min(start + cfg.chunk_size, n)
        piece = text[start:end]
        bibliographic = (
            (bib_start is not None and start >= bib_start)
            or _looks_like_citations(piece, cfg)
        )
        chunks.append(Chunk(
            chunk_id=f"{doc.doc_id}:{seq}",
            doc_id=doc.doc_id,
            seq_index=seq,
            text=piece,
            char_start=start,
            char_end=end,
            page_hint=doc.page_for_offset(start),
            bibliographic=bibliographic,
        ))
    return chunks


def eligible_for_retrieval(chunk: Chunk, cfg: ChunkingConfig = ChunkingConfig()) -> bool:
    """Retrieval keeps chunks that are long enough and not bibliography."""
    return len(chunk.text) >= cfg.min_chunk_chars and not chunk.bibliographic
