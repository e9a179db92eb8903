"""Layered CLI configuration: flag > env > config file > default.

The config file is TOML (default ~/.config/kleio/config.toml, overridable
with --config). Environment variables cover the backend endpoints:
KLEIO_EMBED_URL, KLEIO_EMBED_MODEL, KLEIO_LLM_URL, KLEIO_LLM_KEY.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace
from pathlib import Path

try:
    import tomllib
except ImportError:  # Python 3.10
    import tomli as tomllib

from .chunker import ChunkingConfig
from .embedder import EmbedderProfile
from .gateway import ModelProfile

DEFAULT_CONFIG_PATH = Path.home() / ".config" / "kleio" / "config.toml"


@dataclass(frozen=True)
class CliConfig:
    store_dir: str = "store"
    index_dir: str = "index"
    embed_backend: str = "deterministic"
    embed_url: str = ""
    embed_model: str = ""
    embed_dim: int = 384
    llm_url: str = "mock"
    llm_key: str = ""
    model_id: str = "mock-model"
    context_tokens: int = 4096
    temperature: float = 1e-5
    max_answer_tokens: int = 512
    chunk_size: int = 1000
    overlap: int = 200
    min_chunk_chars: int = 200

    def embedder_profile(self) -> EmbedderProfile:
        return EmbedderProfile(
            backend=self.embed_backend,
            endpoint=self.embed_url,
            model=self.embed_model,
            dim=self.embed_dim,
        )

    def model_profile(self) -> ModelProfile:
        return ModelProfile(
            model_id=self.model_id,
            context_tokens=self.context_tokens,
            endpoint=self.llm_url,
            temperature=self.temperature,
            max_answer_tokens=self.max_answer_tokens,
            api_key=self.llm_key,
        )

    def chunking_config(self) -> ChunkingConfig:
        return ChunkingConfig(
            chunk_size=self.chunk_size,
            overlap=self.overlap,
            min_chunk_chars=self.min_chunk_chars,
        )


_FILE_KEYS = {
    "store_dir": ("store_dir",),
    "index_dir": ("index_dir",),
    "embed_backend": ("embedder", "backend"),
    "embed_url": ("embedder", "url"),
    "embed_model": ("embedder", "model"),
    "embed_dim": ("embedder", "dim"),
    "llm_url": ("llm", "url"),
    "llm_key": ("llm", "key"),
    "model_id": ("llm", "model"),
    "context_tokens": ("llm", "context_tokens"),
    "temperature": ("llm", "temperature"),
    "max_answer_tokens": ("llm", "max_answer_tokens"),
    "chunk_size": ("chunking", "chunk_size"),
    "overlap": ("chunking", "overlap"),
    "min_chunk_chars": ("chunking", "min_chunk_chars"),
}

_ENV_KEYS = {
    "embed_url": "KLEIO_EMBED_URL",
    "embed_model": "KLEIO_EMBED_MODEL",
    "llm_url": "KLEIO_LLM_URL",
    "llm_key": "KLEIO_LLM_KEY",
}


def _dig(payload: dict, path: tuple[str, ...]):
    node = payload
    for key in path:
        if not isinstance(node, dict) or key not in node:
            return None
        node = node[key]
    return node


def resolve_config(flags: dict | None = None, env: dict | None = None,
                   config_path: str | Path | None = None) -> CliConfig:
    """Merge sources into a CliConfig; later layers win: file, env, flags."""
    env = os.environ if env is None else env
    cfg = CliConfig()

    path = Path(config_path) if config_path else DEFAULT_CONFIG_PATH
    if path.exists():
        payload = tomllib.loads(path.read_text(encoding="utf-8"))
        file_values = {
            field_name: value
            for field_name, key_path in _FILE_KEYS.items()
            if (value := _dig(payload, key_path)) is not None
        }
        cfg = replace(cfg, **file_values)

    env_values = {
        field_name: env[env_key]
        for field_name, env_key in _ENV_KEYS.items()
        if env.get(env_key)
    }
    cfg = replace(cfg, **env_values)
    # An embedding URL implies the HTTP backend unless a flag says otherwise.
    if env.get("KLEIO_EMBED_URL") and "embed_backend" not in (flags or {}):
        cfg = replace(cfg, embed_backend="http")

    if flags:
        cfg = replace(cfg, **{k: v for k, v in flags.items() if v is not None})
    return cfg
