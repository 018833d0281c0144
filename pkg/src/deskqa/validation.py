"""Input validation helpers used by the estimator-style retrievers."""

from __future__ import annotations

from typing import Iterable

from .ingest import Chunk


def ensure_chunks(chunks: Iterable[Chunk]) -> list[Chunk]:
    """Materialize chunks and check they are non-empty with unique ids."""
    out = list(chunks)
    if not out:
        raise ValueError("at least one chunk is required")
    seen: set[str] = set()
    for chunk in out:
        if chunk.chunk_id in seen:
            raise ValueError(f"duplicate chunk_id: {chunk.chunk_id!r}")
        seen.add(chunk.chunk_id)
    return out


def ensure_positive(name: str, value: int) -> int:
    if value < 1:
        raise ValueError(f"{name} must be >= 1, got {value}")
    return value
