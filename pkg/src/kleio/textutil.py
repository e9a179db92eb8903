"""Shared text helpers: normalization, tokenization, sentence splitting."""

from __future__ import annotations

import re
import unicodedata

_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])\s+")


def normalize_text(text: str) -> str:
    """NFC-normalize and convert CRLF / lone CR line endings to LF."""
    text = unicodedata.normalize("NFC", text)
    return text.replace("\r\n", "\n").replace("\r", "\n")


def _strip_punctuation(token: str) -> str:
    start, end = 0, len(token)
    while start < end and unicodedata.category(token[start]).startswith("P"):
        start += 1
    while end > start and unicodedata.category(token[end - 1]).startswith("P"):
        end -= 1
    return token[start:end]


def words(text: str) -> list[str]:
    """Whitespace tokens, case-folded, with surrounding punctuation stripped.

    Tokens that are pure punctuation disappear.
    """
    out = []
    for raw in text.casefold().split():
        token = _strip_punctuation(raw)
        if token:
            out.append(token)
    return out


def content_tokens(text: str, min_len: int = 4) -> set[str]:
    """The set of words of length >= min_len; the overlap/grounding unit."""
    return {w for w in words(text) if len(w) >= min_len}


def split_sentences(text: str) -> list[str]:
    """Naive sentence split on terminal punctuation followed by whitespace."""
    return [s.strip() for s in _SENTENCE_SPLIT.split(text) if s.strip()]


def fold_accents(text: str) -> str:
    """Replace accented characters with their base letter, preserving length.

    Length preservation keeps offsets into the original string valid, which
    the compound-surname scan relies on.
    """
    out = []
    for ch in text:
        decomposed = unicodedata.normalize("NFD", ch)
        base = next((c for c in decomposed if not unicodedata.combining(c)), ch)
        out.append(base)
    return "".join(out)
