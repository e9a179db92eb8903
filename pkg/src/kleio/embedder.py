"""Text-to-vector backends.

Two backends share one contract (unit-norm float32 vectors, one per input,
order preserved): an HTTP client for a sentence-embedding service, and a
hashed bag-of-tokens embedder that is fully deterministic and needs no
network or model weights. The deterministic backend exists so retrieval
mechanics (top-k, filters, persistence) can be tested offline; it makes no
claim to semantic quality.
"""

from __future__ import annotations

import hashlib
import logging
import threading
import time
from dataclasses import dataclass

import numpy as np
import requests

from .errors import BackendUnreachable, DimensionMismatch, EmptyInput

logger = logging.getLogger(__name__)

DEFAULT_DIM = 384


@dataclass(frozen=True)
class EmbedderProfile:
    backend: str = "deterministic"  # "deterministic" | "http"
    endpoint: str = ""
    model: str = ""
    dim: int = DEFAULT_DIM
    timeout: float = 30.0
    batch_size: int = 64
    max_retries: int = 3
    backoff: float = 0.5
    max_in_flight: int = 4

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")


def _hash64(token: str) -> int:
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def deterministic_embed(text: str, dim: int = DEFAULT_DIM) -> np.ndarray:
    """Hashed bag-of-tokens embedding, stable across runs and platforms.

    Tokens are whitespace splits of the case-folded text. Each token lands
    in bucket hash(token) mod dim with sign taken from the hash's top bit.
    Empty text (no tokens) maps to the unit vector e_0.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    values = np.zeros(dim, dtype=np.float64)
    for token in text.casefold().split():
        h = _hash64(token)
        sign = 1.0 if h < 1 << 63 else -1.0
        values[h % dim] += sign
    norm = np.linalg.norm(values)
    if norm == 0.0:
        values[0] = 1.0
        norm = 1.0
    return (values / norm).astype(np.float32)


def _normalize(vector: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(vector)
    if norm == 0.0:
        out = np.zeros_like(vector)
        out[0] = 1.0
        return out
    return (vector / norm).astype(np.float32)


class HttpEmbeddingClient:
    """Client for the de-facto embeddings endpoint shape.

    POST {"input": [texts...], "model": name} ->
    {"data": [{"embedding": [...], "index": i}, ...]}
    """

    def __init__(self, profile: EmbedderProfile, session: requests.Session | None = None):
        self.profile = profile
        self.session = session or requests.Session()
        self._in_flight = threading.Semaphore(profile.max_in_flight)

    def embed_batch(self, texts: list[str]) -> list[np.ndarray]:
        payload = {"input": texts, "model": self.profile.model}
        last_exc = None
        for attempt in range(self.profile.max_retries):
            if attempt:
                time.sleep(self.profile.backoff * 2 ** (attempt - 1))
            try:
                with self._in_flight:
                    response = self.session.post(
                        self.profile.endpoint, json=payload,
                        timeout=self.profile.timeout,
                    )
                response.raise_for_status()
                return self._parse(response.json(), len(texts))
            except (requests.ConnectionError, requests.Timeout) as exc:
                last_exc = exc
                logger.warning("embedding backend unreachable (attempt %d): %s",
                               attempt + 1, exc)
            except requests.HTTPError as exc:
                raise BackendUnreachable(f"embedding backend error: {exc}") from exc
        raise BackendUnreachable(f"embedding backend unreachable: {last_exc}")

    def _parse(self, body, expected_count: int) -> list[np.ndarray]:
        data = body.get("data")
        if not isinstance(data, list) or len(data) != expected_count:
            raise DimensionMismatch(
                f"backend returned {0 if not isinstance(data, list) else len(data)} "
                f"vectors for {expected_count} inputs"
            )
        vectors = [None] * expected_count
        for item in data:
            vec = np.asarray(item["embedding"], dtype=np.float64)
            if vec.shape != (self.profile.dim,):
                raise DimensionMismatch(
                    f"backend vector length {vec.shape[0]} != dim {self.profile.dim}"
                )
            vectors[item["index"]] = _normalize(vec)
        if any(v is None for v in vectors):
            raise DimensionMismatch("backend response indices do not cover the batch")
        return vectors


def embed_texts(texts: list[str], profile: EmbedderProfile,
                client: HttpEmbeddingClient | None = None) -> list[np.ndarray]:
    """Embed texts in order; every output is unit-norm float32 of profile.dim."""
    if not texts:
        raise EmptyInput("no texts to embed")
    for i, text in enumerate(texts):
        if not isinstance(text, str) or not text:
            raise EmptyInput(f"text at position {i} is empty")

    if profile.backend == "deterministic":
        return [deterministic_embed(t, profile.dim) for t in texts]
    if profile.backend == "http":
        client = client or HttpEmbeddingClient(profile)
        out: list[np.ndarray] = []
        for start in range(0, len(texts), profile.batch_size):
            out.extend(client.embed_batch(texts[start:start + profile.batch_size]))
        return out
    raise ValueError(f"unknown embedder backend: {profile.backend!r}")
