"""Exact top-k cosine index over chunk vectors.

A brute-force scored scan over a contiguous float32 matrix: exact by
construction, fast enough for corpora up to millions of chunks, and
trivially mirrored by an independent oracle in the tests. Queries run
against immutable snapshots; adds take a writer lock and publish a new
snapshot, so no query ever sees a half-written entry.

Persistence layout (one directory):
    manifest.json  - format_version, dim, count, per-file sha256 checksums
    chunks.jsonl   - one JSON record per chunk (ids, offsets, flags, text)
    vectors.f32    - little-endian float32, row i at byte offset i*dim*4
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .chunker import Chunk, ChunkingConfig
from .errors import CorruptIndex, DimensionMismatch, FormatVersionMismatch

FORMAT_VERSION = 1


@dataclass(frozen=True)
class IndexEntry:
    chunk: Chunk
    vector: np.ndarray
    length_ok: bool
    bibliographic: bool
    doc_title: str = ""

    @property
    def chunk_id(self) -> str:
        return self.chunk.chunk_id

    @classmethod
    def from_chunk(cls, chunk: Chunk, vector: np.ndarray,
                   cfg: ChunkingConfig = ChunkingConfig(), doc_title: str = ""):
        return cls(
            chunk=chunk,
            vector=np.asarray(vector, dtype=np.float32),
            length_ok=len(chunk.text) >= cfg.min_chunk_chars,
            bibliographic=chunk.bibliographic,
            doc_title=doc_title,
        )

    def eligible(self) -> bool:
        return self.length_ok and not self.bibliographic


@dataclass(frozen=True)
class RetrievalHit:
    chunk_id: str
    score: float
    rank: int


class VectorIndex:
    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = dim
        self._write_lock = threading.Lock()
        self._snapshot: tuple[list[IndexEntry], np.ndarray] = (
            [], np.empty((0, dim), dtype=np.float32),
        )

    def __len__(self) -> int:
        return len(self._snapshot[0])

    def __contains__(self, chunk_id: str) -> bool:
        return any(e.chunk_id == chunk_id for e in self._snapshot[0])

    def get(self, chunk_id: str) -> IndexEntry | None:
        for entry in self._snapshot[0]:
            if entry.chunk_id == chunk_id:
                return entry
        return None

    def entries(self) -> list[IndexEntry]:
        return list(self._snapshot[0])

    def add(self, entries: list[IndexEntry]) -> int:
        """Upsert entries; duplicate chunk_ids replace the stored vector.

        Returns the number of chunk_ids that were new to the index.
        """
        for entry in entries:
            if entry.vector.shape != (self.dim,):
                raise DimensionMismatch(
                    f"entry {entry.chunk_id} has dim {entry.vector.shape}, "
                    f"index dim is {self.dim}"
                )
        with self._write_lock:
            current, _ = self._snapshot
            merged: dict[str, IndexEntry] = {e.chunk_id: e for e in current}
            before = len(merged)
            for entry in entries:
                merged[entry.chunk_id] = entry
            new_entries = list(merged.values())
            matrix = (
                np.stack([e.vector for e in new_entries]).astype(np.float32)
                if new_entries else np.empty((0, self.dim), dtype=np.float32)
            )
            self._snapshot = (new_entries, matrix)
            return len(merged) - before

    def query_top_k(self, query_vector: np.ndarray, k: int,
                    predicate=None) -> list[RetrievalHit]:
        """Exact cosine top-k over eligible entries.

        Scores are dot products computed in float64 (vectors are stored
        unit-norm). Ties break by ascending chunk_id; k=0 returns [].
        """
        query = np.asarray(query_vector, dtype=np.float64)
        if query.shape != (self.dim,):
            raise DimensionMismatch(
                f"query dim {query.shape} does not match index dim {self.dim}"
            )
        if k < 0:
            raise ValueError("k must be >= 0")
        entries, matrix = self._snapshot
        if k == 0 or not entries:
            return []
        if predicate is None:
            predicate = IndexEntry.eligible
        keep = [i for i, entry in enumerate(entries) if predicate(entry)]
        if not keep:
            return []
        scores = matrix[keep].astype(np.float64) @ query
        ids = np.array([entries[i].chunk_id for i in keep])
        order = np.lexsort((ids, -scores))[:k]
        return [
            RetrievalHit(chunk_id=str(ids[j]), score=float(scores[j]), rank=rank)
            for rank, j in enumerate(order, start=1)
        ]

    # --- persistence ---

    def save(self, path: str | Path) -> None:
        path = Path(path)
        path.mkdir(parents=True, exist_ok=True)
        entries, matrix = self._snapshot
        vector_bytes = np.ascontiguousarray(matrix, dtype="<f4").tobytes()
        chunk_lines = []
        for entry in entries:
            c = entry.chunk
            chunk_lines.append(json.dumps({
                "chunk_id": c.chunk_id,
                "doc_id": c.doc_id,
                "seq_index": c.seq_index,
                "char_start": c.char_start,
                "char_end": c.char_end,
                "page_hint": c.page_hint,
                "length_ok": entry.length_ok,
                "bibliographic": entry.bibliographic,
                "doc_title": entry.doc_title,
                "text": c.text,
            }, ensure_ascii=False))
        chunks_bytes = ("\n".join(chunk_lines) + ("\n" if chunk_lines else "")).encode("utf-8")

        (path / "vectors.f32").write_bytes(vector_bytes)
        (path / "chunks.jsonl").write_bytes(chunks_bytes)
        manifest = {
            "format_version": FORMAT_VERSION,
            "dim": self.dim,
            "count": len(entries),
            "vectors_sha256": hashlib.sha256(vector_bytes).hexdigest(),
            "chunks_sha256": hashlib.sha256(chunks_bytes).hexdigest(),
        }
        (path / "manifest.json").write_text(json.dumps(manifest, indent=2),
                                            encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "VectorIndex":
        path = Path(path)
        try:
            manifest = json.loads((path / "manifest.json").read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise CorruptIndex(f"no manifest at {path}") from None
        except json.JSONDecodeError as exc:
            raise CorruptIndex(f"unreadable manifest: {exc}") from None
        if manifest.get("format_version") != FORMAT_VERSION:
            raise FormatVersionMismatch(
                f"index format {manifest.get('format_version')!r}, "
                f"supported {FORMAT_VERSION}"
            )
        dim = int(manifest["dim"])
        count = int(manifest["count"])

        vector_bytes = (path / "vectors.f32").read_bytes()
        chunks_bytes = (path / "chunks.jsonl").read_bytes()
        if hashlib.sha256(vector_bytes).hexdigest() != manifest["vectors_sha256"]:
            raise CorruptIndex("vectors.f32 checksum mismatch")
        if hashlib.sha256(chunks_bytes).hexdigest() != manifest["chunks_sha256"]:
            raise CorruptIndex("chunks.jsonl checksum mismatch")
        if len(vector_bytes) != count * dim * 4:
            raise CorruptIndex(
                f"vectors.f32 holds {len(vector_bytes)} bytes, "
                f"expected {count * dim * 4}"
            )

        matrix = np.frombuffer(vector_bytes, dtype="<f4").reshape(count, dim)
        entries = []
        lines = [ln for ln in chunks_bytes.decode("utf-8").splitlines() if ln]
        if len(lines) != count:
            raise CorruptIndex(f"chunks.jsonl holds {len(lines)} records, expected {count}")
        for i, line in enumerate(lines):
            rec = json.loads(line)
            chunk = Chunk(
                chunk_id=rec["chunk_id"],
                doc_id=rec["doc_id"],
                seq_index=rec["seq_index"],
                text=rec["text"],
                char_start=rec["char_start"],
                char_end=rec["char_end"],
                page_hint=rec["page_hint"],
                bibliographic=rec["bibliographic"],
            )
            entries.append(IndexEntry(
                chunk=chunk,
                vector=matrix[i].copy(),
                length_ok=rec["length_ok"],
                bibliographic=rec["bibliographic"],
                doc_title=rec.get("doc_title", ""),
            ))
        index = cls(dim)
        index.add(entries)
        return index
