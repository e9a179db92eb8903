"""Document ingestion and the on-disk document store.

Sources are PDF files with a text layer, or plain text (.txt/.md). Each
ingested file becomes an immutable Document identified by a hash of its
normalized text, so re-ingesting identical bytes is a no-op.

Store layout:
    store/manifest.json          - {"format_version": 1, "doc_ids": [...]}
    store/docs/<doc_id>.json     - document metadata
    store/docs/<doc_id>.txt      - normalized full text, UTF-8, LF endings
"""

from __future__ import annotations

import bisect
import hashlib
import json
import logging
import threading
import time
from dataclasses import dataclass
from pathlib import Path

from . import _pdftext
from .errors import EmptyDocument, MalformedFile, NoTextLayer, PathNotFound
from .textutil import normalize_text, words

logger = logging.getLogger(__name__)

INGESTIBLE_SUFFIXES = {".pdf", ".txt", ".md"}
_PAGE_JOIN = "\n"


@dataclass(frozen=True)
class Document:
    """One ingested source document."""

    doc_id: str
    source_path: str
    title: str
    language_tag: str
    full_text: str
    page_offsets: tuple[int, ...]
    ingested_at: int

    def page_for_offset(self, offset: int) -> int:
        """0-based index of the page containing the given character offset."""
        if not self.page_offsets:
            return 0
        return max(0, bisect.bisect_right(self.page_offsets, offset) - 1)


@dataclass(frozen=True)
class CorpusStats:
    document_count: int
    total_words: int
    unique_word_forms: int


def doc_id_for_text(full_text: str) -> str:
    return hashlib.sha256(full_text.encode("utf-8")).hexdigest()[:16]


def extract_text(file_bytes: bytes, kind: str) -> tuple[str, list[int]]:
    """Extract (full_text, page_offsets) from raw bytes.

    kind is "pdf" or "plain". Plain text gets a single page at offset 0.
    For PDFs, the text of page i starts at page_offsets[i].
    """
    if kind == "plain":
        try:
            text = file_bytes.decode("utf-8")
        except UnicodeDecodeError:
            text = file_bytes.decode("latin-1")
        text = normalize_text(text)
        if not text.strip():
            raise EmptyDocument("extraction produced only whitespace")
        return text, [0]

    if kind == "pdf":
        page_texts = [normalize_text(t) for t in _pdftext.extract_page_texts(file_bytes)]
        if not any(t.strip() for t in page_texts):
            raise NoTextLayer("PDF has no extractable text; OCR it first")
        offsets = []
        cursor = 0
        for i, text in enumerate(page_texts):
            offsets.append(cursor)
            cursor += len(text)
            if i < len(page_texts) - 1:
                cursor += len(_PAGE_JOIN)
        return _PAGE_JOIN.join(page_texts), offsets

    raise MalformedFile(f"unknown document kind: {kind!r}")


class DocumentStore:
    """Directory-backed store of Documents; single writer, many readers."""

    FORMAT_VERSION = 1

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self._docs_dir = self.root / "docs"
        self._lock = threading.Lock()
        self._doc_ids: list[str] = []
        self._cache: dict[str, Document] = {}
        manifest = self.root / "manifest.json"
        if manifest.exists():
            payload = json.loads(manifest.read_text(encoding="utf-8"))
            self._doc_ids = list(payload.get("doc_ids", []))

    def __len__(self) -> int:
        return len(self._doc_ids)

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._doc_ids

    @property
    def doc_ids(self) -> list[str]:
        return list(self._doc_ids)

    def add(self, doc: Document) -> bool:
        """Persist a document. Returns False when the doc_id already exists."""
        with self._lock:
            if doc.doc_id in self._doc_ids:
                return False
            self._docs_dir.mkdir(parents=True, exist_ok=True)
            meta = {
                "doc_id": doc.doc_id,
                "source_path": doc.source_path,
                "title": doc.title,
                "language_tag": doc.language_tag,
                "page_offsets": list(doc.page_offsets),
                "ingested_at": doc.ingested_at,
            }
            (self._docs_dir / f"{doc.doc_id}.json").write_text(
                json.dumps(meta, ensure_ascii=False, indent=2), encoding="utf-8"
            )
            (self._docs_dir / f"{doc.doc_id}.txt").write_text(
                doc.full_text, encoding="utf-8", newline="\n"
            )
            self._doc_ids.append(doc.doc_id)
            self._cache[doc.doc_id] = doc
            self._write_manifest()
            return True

    def get(self, doc_id: str) -> Document:
        if doc_id not in self._doc_ids:
            raise KeyError(doc_id)
        if doc_id not in self._cache:
            meta = json.loads(
                (self._docs_dir / f"{doc_id}.json").read_text(encoding="utf-8")
            )
            text = (self._docs_dir / f"{doc_id}.txt").read_text(encoding="utf-8")
            self._cache[doc_id] = Document(
                doc_id=meta["doc_id"],
                source_path=meta["source_path"],
                title=meta["title"],
                language_tag=meta["language_tag"],
                full_text=text,
                page_offsets=tuple(meta["page_offsets"]),
                ingested_at=meta["ingested_at"],
            )
        return self._cache[doc_id]

    def documents(self):
        for doc_id in self._doc_ids:
            yield self.get(doc_id)

    def _write_manifest(self):
        self.root.mkdir(parents=True, exist_ok=True)
        tmp = self.root / "manifest.json.tmp"
        tmp.write_text(
            json.dumps(
                {"format_version": self.FORMAT_VERSION, "doc_ids": self._doc_ids},
                indent=2,
            ),
            encoding="utf-8",
        )
        tmp.replace(self.root / "manifest.json")


def ingest_file(path: Path, store: DocumentStore, language_tag: str = "en") -> Document:
    """Ingest a single file; idempotent on byte-identical content."""
    kind = "pdf" if path.suffix.lower() == ".pdf" else "plain"
    full_text, page_offsets = extract_text(path.read_bytes(), kind)
    doc_id = doc_id_for_text(full_text)
    if doc_id in store:
        return store.get(doc_id)
    doc = Document(
        doc_id=doc_id,
        source_path=str(path),
        title=path.stem,
        language_tag=language_tag,
        full_text=full_text,
        page_offsets=tuple(page_offsets),
        ingested_at=int(time.time()),
    )
    store.add(doc)
    return doc


def ingest_path(path: str | Path, store: DocumentStore, on_error=None) -> list[Document]:
    """Ingest a file or every .pdf/.txt/.md under a directory.

    Unreadable files are reported through on_error(path, exception) (default:
    a warning log) and skipped; they never abort the rest of the batch.
    """
    path = Path(path)
    if not path.exists():
        raise PathNotFound(str(path))
    if path.is_file():
        candidates = [path]
    else:
        candidates = sorted(
            p for p in path.rglob("*")
            if p.is_file() and p.suffix.lower() in INGESTIBLE_SUFFIXES
        )
    ingested = []
    for file_path in candidates:
        try:
            ingested.append(ingest_file(file_path, store))
        except Exception as exc:  # per-file isolation
            if on_error is not None:
                on_error(file_path, exc)
            else:
                logger.warning("skipping %s: %s", file_path, exc)
    return ingested


def corpus_stats(store: DocumentStore) -> CorpusStats:
    """Word counts over the whole store (case-folded, punctuation-stripped)."""
    total = 0
    forms: set[str] = set()
    for doc in store.documents():
        tokens = words(doc.full_text)
        total += len(tokens)
        forms.update(tokens)
    return CorpusStats(
        document_count=len(store),
        total_words=total,
        unique_word_forms=len(forms),
    )
