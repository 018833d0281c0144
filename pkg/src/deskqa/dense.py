"""Dense retrieval: embedding providers plus exact cosine top-k search.

The index stores unit-normalized rows, so cosine similarity is a dot product.
Search is an exact scan over all rows; corpora here are desk-scale and
exactness keeps the brute-force oracle tests trivial.
"""

from __future__ import annotations

import json
import logging
import os
import zlib
from typing import Iterable, Protocol, runtime_checkable

import numpy as np
import requests
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .errors import ProviderError, SnapshotError
from .ingest import Chunk
from .sparse import tokenize
from .validation import ensure_chunks, ensure_positive

logger = logging.getLogger(__name__)

DENSE_SNAPSHOT_VERSION = 1
EMBED_AUTH_ENV = "DESKQA_EMBED_TOKEN"


@runtime_checkable
class EmbeddingProvider(Protocol):
    """Anything that can embed a batch of texts into fixed-size vectors."""

    name: str
    dimension: int

    def embed(self, texts: list[str]) -> np.ndarray: ...


class HashingEmbedder:
    """Deterministic offline embedder: L2-normalized bag of hashed tokens.

    Each token is hashed with crc32 into one of `dimension` buckets and the
    bucket accumulates the token count. Identical texts always map to
    identical vectors, and texts sharing tokens have positive cosine.
    Meant as the test/demo stand-in for a real sentence embedder.
    """

    def __init__(self, dimension: int = 384):
        if dimension < 2:
            raise ValueError("dimension must be >= 2")
        self.dimension = dimension
        self.name = "hashing"

    def bucket(self, token: str) -> int:
        return zlib.crc32(token.encode("utf-8")) % self.dimension

    def embed(self, texts: list[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dimension), dtype=np.float64)
        for row, text in enumerate(texts):
            for token in tokenize(text):
                out[row, self.bucket(token)] += 1.0
            norm = np.linalg.norm(out[row])
            if norm > 0:
                out[row] /= norm
        return out


class HttpEmbeddingProvider:
    """Remote embedder speaking JSON: {"texts": [...]} -> {"vectors": [[...]]}.

    The auth token, if any, comes from the DESKQA_EMBED_TOKEN environment
    variable; it is never read from configuration files.
    """

    def __init__(
        self,
        endpoint: str,
        name: str = "remote",
        dimension: int | None = None,
        timeout: float = 10.0,
        retries: int = 2,
        batch_size: int = 64,
    ):
        self.endpoint = endpoint
        self.name = name
        self.dimension = dimension
        self.timeout = timeout
        self.retries = retries
        self.batch_size = batch_size

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        token = os.environ.get(EMBED_AUTH_ENV)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        return headers

    def _post(self, texts: list[str]) -> list[list[float]]:
        last_error: Exception | None = None
        attempts = self.retries + 1
        for _ in range(attempts):
            try:
                resp = requests.post(
                    self.endpoint,
                    json={"texts": texts},
                    headers=self._headers(),
                    timeout=self.timeout,
                )
                resp.raise_for_status()
                return resp.json()["vectors"]
            except (requests.RequestException, KeyError, ValueError) as exc:
                last_error = exc
        raise ProviderError(
            f"embedding endpoint failed after {attempts} attempts: {last_error}"
        )

    def embed(self, texts: list[str]) -> np.ndarray:
        vectors: list[list[float]] = []
        for start in range(0, len(texts), self.batch_size):
            batch = texts[start : start + self.batch_size]
            got = self._post(batch)
            if len(got) != len(batch):
                raise ProviderError(
                    f"provider returned {len(got)} vectors for {len(batch)} texts"
                )
            vectors.extend(got)
        matrix = np.asarray(vectors, dtype=np.float64)
        if matrix.ndim != 2:
            raise ProviderError("provider returned ragged vectors")
        if self.dimension is None:
            self.dimension = int(matrix.shape[1])
        elif matrix.shape[1] != self.dimension:
            raise ProviderError(
                f"dimension mismatch: expected {self.dimension}, got {matrix.shape[1]}"
            )
        return matrix


def _normalize_rows(matrix: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Unit-normalize rows; zero rows become the first basis vector."""
    replaced = []
    out = matrix.astype(np.float64, copy=True)
    for i in range(out.shape[0]):
        norm = np.linalg.norm(out[i])
        if norm == 0.0:
            out[i, 0] = 1.0
            replaced.append(i)
        else:
            out[i] /= norm
    return out, replaced


class DenseRetriever(BaseEstimator):
    """Dense retriever: fit() embeds and normalizes, search() scans by cosine.

    The same provider (matched by name) must serve both fit and search.
    """

    def __init__(self, provider: EmbeddingProvider | None = None):
        self.provider = provider

    def fit(self, chunks: Iterable[Chunk], y=None) -> "DenseRetriever":
        if self.provider is None:
            raise ProviderError("an embedding provider is required to fit")
        chunks = ensure_chunks(chunks)
        texts = [chunk.text for chunk in chunks]
        matrix = np.asarray(self.provider.embed(texts), dtype=np.float64)
        if matrix.shape[0] != len(texts):
            raise ProviderError(
                f"provider returned {matrix.shape[0]} vectors for {len(texts)} chunks"
            )
        if not np.all(np.isfinite(matrix)):
            raise ProviderError("provider returned non-finite embedding values")
        matrix, replaced = _normalize_rows(matrix)
        if replaced:
            logger.warning(
                "replaced %d zero embedding(s) with a basis vector", len(replaced)
            )
        self.ids_ = [chunk.chunk_id for chunk in chunks]
        self.matrix_ = matrix
        self.provider_name_ = self.provider.name
        self.dimension_ = int(matrix.shape[1])
        return self

    def search(self, query: str, n: int) -> list[tuple[str, float]]:
        """Top-n chunks by exact cosine, descending, ties by ascending chunk_id."""
        check_is_fitted(self)
        ensure_positive("n", n)
        if self.provider is None:
            raise ProviderError("an embedding provider is required to search")
        if self.provider.name != self.provider_name_:
            raise ProviderError(
                f"provider mismatch: index built with {self.provider_name_!r}, "
                f"queried with {self.provider.name!r}"
            )
        vec = np.asarray(self.provider.embed([query]), dtype=np.float64)[0]
        if vec.shape[0] != self.dimension_:
            raise ProviderError(
                f"query dimension {vec.shape[0]} != index dimension {self.dimension_}"
            )
        norm = np.linalg.norm(vec)
        if norm > 0:
            vec = vec / norm
        sims = self.matrix_ @ vec
        ranked = sorted(
            zip(self.ids_, sims.tolist()), key=lambda item: (-item[1], item[0])
        )
        return ranked[:n]

    def to_payload(self) -> dict:
        check_is_fitted(self)
        return {
            "version": DENSE_SNAPSHOT_VERSION,
            "kind": "dense",
            "provider_name": self.provider_name_,
            "dimension": self.dimension_,
            "ids": list(self.ids_),
            "matrix": self.matrix_.tolist(),
        }

    @classmethod
    def from_payload(
        cls, payload: dict, provider: EmbeddingProvider | None = None
    ) -> "DenseRetriever":
        if payload.get("kind") != "dense" or payload.get("version") != DENSE_SNAPSHOT_VERSION:
            raise SnapshotError("not a compatible dense index snapshot")
        retriever = cls(provider=provider)
        retriever.ids_ = list(payload["ids"])
        retriever.matrix_ = np.asarray(payload["matrix"], dtype=np.float64)
        retriever.provider_name_ = payload["provider_name"]
        retriever.dimension_ = int(payload["dimension"])
        if provider is not None and provider.name != retriever.provider_name_:
            raise ProviderError(
                f"provider mismatch: snapshot built with {retriever.provider_name_!r}, "
                f"loaded with {provider.name!r}"
            )
        return retriever

    def dumps(self) -> str:
        return json.dumps(self.to_payload(), ensure_ascii=False, sort_keys=True)

    @classmethod
    def loads(cls, text: str, provider: EmbeddingProvider | None = None) -> "DenseRetriever":
        try:
            return cls.from_payload(json.loads(text), provider=provider)
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise SnapshotError(f"corrupt dense snapshot: {exc}") from exc
