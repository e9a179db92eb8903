"""JSON-over-HTTP service around the pipeline, with conversation sessions.

Endpoints (all under /api/): ask, ingest, chunk lookup, health. Sessions
are in-memory, identified by random 128-bit hex ids, with optional JSONL
logging. The service exposes document titles and ids, never raw paths.
"""

from __future__ import annotations

import json
import secrets
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import qa
from .chunker import ChunkingConfig
from .corpus import DocumentStore
from .embedder import EmbedderProfile
from .errors import BackendError, BackendUnreachable, PathNotFound, PipelineError
from .gateway import ModelProfile
from .index import VectorIndex


@dataclass
class Session:
    session_id: str
    created_at: float
    k_default: int
    turns: list = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)


@dataclass
class ServiceState:
    store: DocumentStore
    index: VectorIndex
    embedder_profile: EmbedderProfile
    model_profile: ModelProfile
    chat_backend: object = None
    chunking: ChunkingConfig = field(default_factory=ChunkingConfig)
    session_log: Path | None = None
    sessions: dict[str, Session] = field(default_factory=dict)
    sessions_lock: threading.Lock = field(default_factory=threading.Lock)
    ingest_lock: threading.Lock = field(default_factory=threading.Lock)


class AskRequest(BaseModel):
    question: str | None = None
    k: int = 4
    session_id: str | None = None


class IngestRequest(BaseModel):
    path: str


def _source_payload(source: qa.SourceAttribution) -> dict:
    return {
        "chunk_id": source.chunk_id,
        "doc_title": source.doc_title,
        "score": source.score,
        "rank": source.rank,
        "snippet": source.snippet,
        "char_start": source.char_start,
        "char_end": source.char_end,
    }


def create_app(state: ServiceState) -> FastAPI:
    app = FastAPI(title="kleio", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def get_session(session_id: str | None, k: int) -> Session:
        with state.sessions_lock:
            if session_id and session_id in state.sessions:
                return state.sessions[session_id]
            new_id = session_id or secrets.token_hex(16)
            session = Session(session_id=new_id, created_at=time.time(), k_default=k)
            state.sessions[new_id] = session
            return session

    def log_turn(session: Session, question: str, answer: qa.Answer):
        if state.session_log is None:
            return
        with open(state.session_log, "a", encoding="utf-8") as handle:
            handle.write(json.dumps({
                "session_id": session.session_id,
                "ts": time.time(),
                "question": question,
                "answer": answer.text,
                "sources": [s.chunk_id for s in answer.sources],
            }, ensure_ascii=False) + "\n")

    @app.post("/api/ask")
    def api_ask(body: AskRequest):
        if not body.question or not body.question.strip():
            raise HTTPException(status_code=400, detail="question is required")
        if body.k < 0:
            raise HTTPException(status_code=422, detail="k must be >= 0")
        session = get_session(body.session_id, body.k)
        try:
            answer = qa.ask(
                body.question, body.k, state.index,
                state.embedder_profile, state.model_profile,
                chat_backend=state.chat_backend,
            )
        except PipelineError as exc:
            if isinstance(exc.cause, (BackendUnreachable, BackendError)):
                raise HTTPException(status_code=503,
                                    detail=f"backend unavailable: {exc.cause}")
            raise HTTPException(status_code=500, detail=str(exc))
        with session.lock:
            session.turns.append((body.question, answer))
        log_turn(session, body.question, answer)
        return {
            "answer": answer.text,
            "sources": [_source_payload(s) for s in answer.sources],
            "grounding_score": answer.grounding_score,
            "grounded": answer.grounded,
            "session_id": session.session_id,
        }

    @app.post("/api/ingest")
    def api_ingest(body: IngestRequest):
        if not state.ingest_lock.acquire(blocking=False):
            raise HTTPException(status_code=409, detail="index locked by another writer")
        try:
            summary = qa.ingest_and_index(
                body.path, state.store, state.index,
                state.embedder_profile, state.chunking,
            )
        except PathNotFound:
            raise HTTPException(status_code=404, detail=f"path not found: {body.path}")
        finally:
            state.ingest_lock.release()
        return {
            "documents_added": summary.documents_added,
            "chunks_indexed": summary.chunks_indexed,
            "failures": [{"path": p, "error": e} for p, e in summary.failures],
        }

    @app.get("/api/chunk/{chunk_id}")
    def api_chunk(chunk_id: str):
        entry = state.index.get(chunk_id)
        if entry is None:
            raise HTTPException(status_code=404, detail=f"unknown chunk: {chunk_id}")
        return {
            "doc_title": entry.doc_title,
            "text": entry.chunk.text,
            "char_start": entry.chunk.char_start,
            "char_end": entry.chunk.char_end,
            "page_hint": entry.chunk.page_hint,
        }

    @app.get("/api/health")
    def api_health():
        return {
            "status": "ok",
            "index_size": len(state.index),
            "embedder_backend": state.embedder_profile.backend,
            "llm_backend": ("mock" if state.model_profile.endpoint == "mock"
                            else "http"),
        }

    return app


def mount_ui(app: FastAPI, ui_dir: str | Path) -> bool:
    """Serve the web UI's static build from / when the directory exists."""
    ui_dir = Path(ui_dir)
    if not (ui_dir / "index.html").exists():
        return False
    app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    return True
