"""Chat-completion gateway: one interface over an HTTP backend and a mock.

The gateway owns temperature and context budgeting. Token counts are
estimated as ceil(chars / 4), a deliberate upper-bound heuristic; the
budget check happens client-side so an over-budget request is never sent.

The mock backend is a test double, not a model. In corpus-aware mode it
answers with the sentence from the prompt's source blocks that best
overlaps the question, or abstains; scripted entries override that.
"""

from __future__ import annotations

import hashlib
import logging
import re
import threading
import time
from dataclasses import dataclass

import requests

from .errors import BackendError, BackendUnreachable, ContextOverflow
from .textutil import content_tokens, split_sentences

logger = logging.getLogger(__name__)

ABSTENTION = "I don't know the answer."

# Context sizes of the chat models this tool is pointed at in practice.
KNOWN_CONTEXT_SIZES = {
    "falcon-7b-instruct": 4096,
    "xgen-7b-8k-inst": 8192,
    "StableBeluga-7b": 4096,
    "gpt-3.5-turbo": 4096,
}


@dataclass(frozen=True)
class ModelProfile:
    model_id: str = "mock-model"
    context_tokens: int = 4096
    endpoint: str = "mock"  # "mock" or an HTTP chat-completions URL
    temperature: float = 1e-5
    max_answer_tokens: int = 512
    api_key: str = ""
    timeout: float = 60.0

    def __post_init__(self):
        if self.context_tokens <= self.max_answer_tokens:
            raise ValueError("context_tokens must exceed max_answer_tokens")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")

    @property
    def prompt_budget(self) -> int:
        return self.context_tokens - self.max_answer_tokens


@dataclass(frozen=True)
class ChatExchange:
    system_text: str
    user_text: str
    answer_text: str
    prompt_token_estimate: int
    latency: float


def estimate_tokens(text: str) -> int:
    """ceil(len / 4): a crude upper-bound proxy for tokenizer counts."""
    return (len(text) + 3) // 4


_SOURCE_HEADER = re.compile(r"^\[SOURCE \d+\]$", re.M)
_QUESTION_LINE = re.compile(r"^QUESTION: ", re.M)


def _parse_prompt(user_text: str) -> tuple[list[str], str] | None:
    """Split a pipeline-built prompt into (chunk texts, question).

    Returns None when the text does not look like the pipeline template.
    The question delimiter is the last line starting with "QUESTION: ".
    """
    question_matches = list(_QUESTION_LINE.finditer(user_text))
    if not question_matches:
        return None
    q_match = question_matches[-1]
    question = user_text[q_match.end():].strip()
    body = user_text[:q_match.start()]
    headers = list(_SOURCE_HEADER.finditer(body))
    chunks = []
    for i, header in enumerate(headers):
        start = header.end()
        end = headers[i + 1].start() if i + 1 < len(headers) else len(body)
        chunks.append(body[start:end].strip())
    return chunks, question


class MockChatBackend:
    """Deterministic stand-in for a chat model.

    script maps substrings of the user text to canned answers (first
    insertion-ordered match wins). With corpus_aware=True and no script
    match, the mock extracts the best-overlapping sentence from the
    prompt's source chunks, or abstains when no chunk shares at least
    min_shared_tokens content tokens with the question.
    """

    def __init__(self, script: dict[str, str] | None = None,
                 corpus_aware: bool = False, min_shared_tokens: int = 2):
        self.script = dict(script or {})
        self.corpus_aware = corpus_aware
        self.min_shared_tokens = min_shared_tokens

    def complete(self, profile: ModelProfile, system_text: str, user_text: str) -> str:
        for key, answer in self.script.items():
            if key in user_text:
                return answer
        if self.corpus_aware:
            parsed = _parse_prompt(user_text)
            if parsed is not None:
                return self._answer_from_chunks(*parsed)
        return ABSTENTION

    def _answer_from_chunks(self, chunks: list[str], question: str) -> str:
        question_tokens = content_tokens(question)
        if not chunks or not question_tokens:
            return ABSTENTION
        if max(len(content_tokens(c) & question_tokens) for c in chunks) < self.min_shared_tokens:
            return ABSTENTION
        best_sentence, best_overlap = None, 0
        for chunk in chunks:  # prompt order; earlier sentence wins ties
            for sentence in split_sentences(chunk):
                overlap = len(content_tokens(sentence) & question_tokens)
                if overlap > best_overlap:
                    best_sentence, best_overlap = sentence, overlap
        return best_sentence if best_sentence is not None else ABSTENTION


class HttpChatBackend:
    """Chat-completions HTTP client.

    POST {"model", "temperature", "max_tokens", "messages": [...]} ->
    {"choices": [{"message": {"content": ...}}]}
    """

    TRANSPORT_RETRIES = 2

    def __init__(self, session: requests.Session | None = None):
        self.session = session or requests.Session()
        self._in_flight = threading.Semaphore(2)
        self._seen: dict[str, str] = {}
        self._seen_lock = threading.Lock()

    def complete(self, profile: ModelProfile, system_text: str, user_text: str) -> str:
        payload = {
            "model": profile.model_id,
            "temperature": profile.temperature,
            "max_tokens": profile.max_answer_tokens,
            "messages": [
                {"role": "system", "content": system_text},
                {"role": "user", "content": user_text},
            ],
        }
        headers = {}
        if profile.api_key:
            headers["Authorization"] = f"Bearer {profile.api_key}"
        last_exc = None
        for attempt in range(self.TRANSPORT_RETRIES + 1):
            try:
                with self._in_flight:
                    response = self.session.post(
                        profile.endpoint, json=payload, headers=headers,
                        timeout=profile.timeout,
                    )
                break
            except (requests.ConnectionError, requests.Timeout) as exc:
                last_exc = exc
                logger.warning("chat backend unreachable (attempt %d): %s",
                               attempt + 1, exc)
        else:
            raise BackendUnreachable(f"chat backend unreachable: {last_exc}")
        if not 200 <= response.status_code < 300:
            raise BackendError(response.status_code, response.text)
        answer = response.json()["choices"][0]["message"]["content"]
        self._note_determinism(profile, system_text, user_text, answer)
        return answer

    def _note_determinism(self, profile, system_text, user_text, answer):
        # Near-zero temperature should make repeats deterministic; a drifting
        # answer is worth a log line but is not an error.
        if profile.temperature > 1e-3:
            return
        key = hashlib.sha256(
            f"{profile.model_id}\x00{system_text}\x00{user_text}".encode()
        ).hexdigest()
        digest = hashlib.sha256(answer.encode()).hexdigest()
        with self._seen_lock:
            previous = self._seen.get(key)
            if previous is not None and previous != digest:
                logger.warning(
                    "nondeterministic answer at temperature %g for model %s",
                    profile.temperature, profile.model_id,
                )
            if len(self._seen) > 256:
                self._seen.clear()
            self._seen[key] = digest


def make_backend(profile: ModelProfile):
    if profile.endpoint == "mock":
        return MockChatBackend(corpus_aware=True)
    return HttpChatBackend()


def complete(profile: ModelProfile, system_text: str, user_text: str,
             backend=None) -> ChatExchange:
    """Run one chat completion after enforcing the context budget."""
    estimate = estimate_tokens(system_text) + estimate_tokens(user_text)
    if estimate > profile.prompt_budget:
        raise ContextOverflow(
            f"prompt estimate {estimate} exceeds budget {profile.prompt_budget} "
            f"(context {profile.context_tokens} - answer {profile.max_answer_tokens})"
        )
    if backend is None:
        backend = make_backend(profile)
    started = time.perf_counter()
    answer = backend.complete(profile, system_text, user_text)
    return ChatExchange(
        system_text=system_text,
        user_text=user_text,
        answer_text=answer.rstrip(),
        prompt_token_estimate=estimate,
        latency=time.perf_counter() - started,
    )
