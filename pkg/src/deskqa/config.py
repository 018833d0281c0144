"""Application configuration: one JSON file mirrors every knob.

Credential values never appear here; they are read from environment
variables by the HTTP provider/backend themselves.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .dense import HashingEmbedder, HttpEmbeddingProvider
from .errors import ConfigError
from .fusion import MODES
from .ingest import ChunkingConfig
from .llm import GenerationConfig


@dataclass(frozen=True)
class EmbedderConfig:
    provider: str = "hashing"  # hashing | http
    dimension: int = 384
    endpoint: str | None = None
    name: str = "remote"
    timeout: float = 10.0
    retries: int = 2

    def build(self):
        if self.provider == "hashing":
            return HashingEmbedder(dimension=self.dimension)
        if self.provider == "http":
            if not self.endpoint:
                raise ConfigError("http embedder requires an endpoint")
            return HttpEmbeddingProvider(
                endpoint=self.endpoint,
                name=self.name,
                dimension=self.dimension,
                timeout=self.timeout,
                retries=self.retries,
            )
        raise ConfigError(f"unknown embedding provider {self.provider!r}")


@dataclass(frozen=True)
class Bm25Config:
    k1: float = 1.2
    b: float = 0.75


@dataclass(frozen=True)
class RetrievalSettings:
    n_dense: int = 3
    n_sparse: int = 3
    n_hybrid: int = 3
    rrf_k: float = 60.0
    mode: str = "hybrid"

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"unknown retrieval mode {self.mode!r}")


@dataclass(frozen=True)
class AppConfig:
    manifest: str | None = None
    dictionary: str | None = None
    index_dir: str = "var/index"
    chunking: ChunkingConfig = field(default_factory=ChunkingConfig)
    bm25: Bm25Config = field(default_factory=Bm25Config)
    retrieval: RetrievalSettings = field(default_factory=RetrievalSettings)
    embedder: EmbedderConfig = field(default_factory=EmbedderConfig)
    generation: GenerationConfig = field(default_factory=GenerationConfig)
    adh_enabled: bool = True
    history_depth: int = 4
    session_ttl_seconds: float = 3600.0
    feedback_path: str = "var/feedback.jsonl"
    transcript_path: str | None = None
    host: str = "127.0.0.1"
    port: int = 8080


def _build(section_cls, data: dict, path: Path, name: str):
    try:
        return section_cls(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: bad {name} section: {exc}") from exc


def load_config(path: str | Path) -> AppConfig:
    """Read an AppConfig from JSON; relative paths resolve against the file."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a JSON object")

    def resolve(key: str) -> None:
        value = data.get(key)
        if value and not Path(value).is_absolute():
            data[key] = str(path.parent / value)

    for key in ("manifest", "dictionary", "index_dir", "feedback_path", "transcript_path"):
        resolve(key)

    kwargs = dict(data)
    for key, cls in (
        ("chunking", ChunkingConfig),
        ("bm25", Bm25Config),
        ("retrieval", RetrievalSettings),
        ("embedder", EmbedderConfig),
        ("generation", GenerationConfig),
    ):
        if key in kwargs:
            kwargs[key] = _build(cls, kwargs[key], path, key)
    try:
        return AppConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
