"""Reciprocal rank fusion of sparse and dense candidate lists.

Each candidate d scores sum(1 / (rrf_k + rank_r(d))) over the rankings that
contain it (ranks are 1-based; absent rankings contribute nothing). The fused
list is cut to n_hybrid and finally reversed into ascending relevance so the
strongest context sits closest to the question in the prompt.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .dense import DenseRetriever, EmbeddingProvider
from .ingest import Chunk
from .sparse import Bm25Retriever
from .validation import ensure_chunks

MODES = ("hybrid", "sparse", "dense", "none")


@dataclass(frozen=True)
class RetrievalConfig:
    n_dense: int = 3
    n_sparse: int = 3
    n_hybrid: int = 3
    rrf_k: float = 60.0

    def __post_init__(self) -> None:
        for name in ("n_dense", "n_sparse", "n_hybrid"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.rrf_k <= 0:
            raise ValueError("rrf_k must be positive")


@dataclass(frozen=True)
class RankedCandidate:
    chunk_id: str
    dense_rank: int | None
    sparse_rank: int | None
    rrf_score: float


def _check_unique(ids: Sequence[str], source: str) -> None:
    if len(set(ids)) != len(ids):
        raise ValueError(f"duplicate chunk_id in {source} ranking")


def rrf_fuse(
    dense_ids: Sequence[str],
    sparse_ids: Sequence[str],
    cfg: RetrievalConfig,
) -> list[RankedCandidate]:
    """Fuse two ranked id lists; descending score, ties by ascending chunk_id."""
    _check_unique(dense_ids, "dense")
    _check_unique(sparse_ids, "sparse")
    dense_rank = {cid: i + 1 for i, cid in enumerate(dense_ids)}
    sparse_rank = {cid: i + 1 for i, cid in enumerate(sparse_ids)}
    candidates = []
    for cid in sorted(set(dense_rank) | set(sparse_rank)):
        score = 0.0
        if cid in dense_rank:
            score += 1.0 / (cfg.rrf_k + dense_rank[cid])
        if cid in sparse_rank:
            score += 1.0 / (cfg.rrf_k + sparse_rank[cid])
        candidates.append(
            RankedCandidate(
                chunk_id=cid,
                dense_rank=dense_rank.get(cid),
                sparse_rank=sparse_rank.get(cid),
                rrf_score=score,
            )
        )
    candidates.sort(key=lambda c: (-c.rrf_score, c.chunk_id))
    return candidates[: cfg.n_hybrid]


def candidate_to_dict(candidate: RankedCandidate) -> dict:
    return {
        "chunk_id": candidate.chunk_id,
        "dense_rank": candidate.dense_rank,
        "sparse_rank": candidate.sparse_rank,
        "rrf_score": candidate.rrf_score,
    }


class HybridRetriever(BaseEstimator):
    """Paired sparse + dense indexes over one chunk set, fused with RRF.

    fit() builds both indexes; retrieve() runs the mode-selected search and
    returns chunks in ascending relevance (best last).
    """

    def __init__(
        self,
        provider: EmbeddingProvider | None = None,
        k1: float = 1.2,
        b: float = 0.75,
        n_dense: int = 3,
        n_sparse: int = 3,
        n_hybrid: int = 3,
        rrf_k: float = 60.0,
    ):
        self.provider = provider
        self.k1 = k1
        self.b = b
        self.n_dense = n_dense
        self.n_sparse = n_sparse
        self.n_hybrid = n_hybrid
        self.rrf_k = rrf_k

    @property
    def retrieval_config(self) -> RetrievalConfig:
        return RetrievalConfig(
            n_dense=self.n_dense,
            n_sparse=self.n_sparse,
            n_hybrid=self.n_hybrid,
            rrf_k=self.rrf_k,
        )

    def fit(self, chunks: Iterable[Chunk], y=None) -> "HybridRetriever":
        chunks = ensure_chunks(chunks)
        self.sparse_ = Bm25Retriever(k1=self.k1, b=self.b).fit(chunks)
        self.dense_ = DenseRetriever(provider=self.provider).fit(chunks)
        self.chunks_ = {chunk.chunk_id: chunk for chunk in chunks}
        return self

    @classmethod
    def from_parts(
        cls,
        chunks: Sequence[Chunk],
        sparse: Bm25Retriever | None,
        dense: DenseRetriever | None,
        **params,
    ) -> "HybridRetriever":
        """Assemble a retriever from persisted parts; either index may be absent."""
        retriever = cls(**params)
        retriever.chunks_ = {chunk.chunk_id: chunk for chunk in chunks}
        if sparse is not None:
            retriever.sparse_ = sparse
        if dense is not None:
            retriever.dense_ = dense
        return retriever

    def _require(self, attr: str, mode: str):
        index = getattr(self, attr, None)
        if index is None:
            raise ValueError(f"mode {mode!r} needs the {attr.rstrip('_')} index")
        return index

    def candidates(self, question: str, mode: str = "hybrid") -> list[RankedCandidate]:
        """The scored candidate table for a question under the given mode."""
        check_is_fitted(self, "chunks_")
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r} (expected one of {MODES})")
        cfg = self.retrieval_config
        if mode == "none":
            return []
        if mode == "hybrid":
            dense_ids = [
                cid for cid, _ in self._require("dense_", mode).search(question, cfg.n_dense)
            ]
            sparse_ids = [
                cid for cid, _ in self._require("sparse_", mode).search(question, cfg.n_sparse)
            ]
            return rrf_fuse(dense_ids, sparse_ids, cfg)
        if mode == "sparse":
            hits = self._require("sparse_", mode).search(question, cfg.n_hybrid)
            return [
                RankedCandidate(cid, None, rank, 1.0 / (cfg.rrf_k + rank))
                for rank, (cid, _) in enumerate(hits, start=1)
            ]
        hits = self._require("dense_", mode).search(question, cfg.n_hybrid)
        return [
            RankedCandidate(cid, rank, None, 1.0 / (cfg.rrf_k + rank))
            for rank, (cid, _) in enumerate(hits, start=1)
        ]

    def retrieve(self, question: str, mode: str = "hybrid") -> list[Chunk]:
        """Context chunks for a question, ordered by ascending relevance."""
        ranked = self.candidates(question, mode=mode)
        descending = [self.chunks_[c.chunk_id] for c in ranked]
        return list(reversed(descending))
