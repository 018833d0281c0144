"""Okapi BM25 retrieval over an in-memory inverted index.

The tokenizer keeps '.', ':' and '-' compounds so technical identifiers such
as ``ess::get_pin_capacitance`` survive as a single searchable term. Scoring
uses the non-negative idf variant ln((N - df + 0.5)/(df + 0.5) + 1).
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from typing import Iterable

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .errors import SnapshotError
from .ingest import Chunk
from .validation import ensure_chunks, ensure_positive

# \w+ optionally extended through letter/digit-adjacent runs of . : -
_COMPOUND_RE = re.compile(r"\w+(?:[.:\-]+\w+)*")
_SIMPLE_RE = re.compile(r"\w+")

SPARSE_SNAPSHOT_VERSION = 1


def tokenize(text: str, compounds: bool = True) -> list[str]:
    """Lowercased word tokens; no stemming, no stopword removal.

    With compounds=True (the index default), '.', ':' and '-' join adjacent
    word characters into one token. With compounds=False only \\w+ runs are
    kept, which is the form the ROUGE scorer uses.
    """
    pattern = _COMPOUND_RE if compounds else _SIMPLE_RE
    return [match.group(0).lower() for match in pattern.finditer(text)]


class Bm25Retriever(BaseEstimator):
    """Sparse retriever: fit() builds the inverted index, search() ranks.

    Fitted attributes:
        postings_: term -> list of (chunk_id, term_frequency)
        doc_lengths_: chunk_id -> token count
        avg_doc_length_, doc_count_
    """

    def __init__(self, k1: float = 1.2, b: float = 0.75):
        self.k1 = k1
        self.b = b

    def _validate_params(self) -> None:
        if self.k1 < 0:
            raise ValueError("k1 must be >= 0")
        if not 0 <= self.b <= 1:
            raise ValueError("b must be in [0, 1]")

    def fit(self, chunks: Iterable[Chunk], y=None) -> "Bm25Retriever":
        self._validate_params()
        chunks = ensure_chunks(chunks)
        postings: dict[str, list[tuple[str, int]]] = {}
        doc_lengths: dict[str, int] = {}
        for chunk in chunks:
            tokens = tokenize(chunk.text)
            doc_lengths[chunk.chunk_id] = len(tokens)
            for term, tf in Counter(tokens).items():
                postings.setdefault(term, []).append((chunk.chunk_id, tf))
        self.postings_ = postings
        self.doc_lengths_ = doc_lengths
        self.doc_count_ = len(doc_lengths)
        self.avg_doc_length_ = sum(doc_lengths.values()) / len(doc_lengths)
        return self

    def search(self, query: str, n: int) -> list[tuple[str, float]]:
        """Top-n chunks by BM25, descending score, ties by ascending chunk_id.

        Chunks containing none of the query terms are excluded.
        """
        check_is_fitted(self)
        ensure_positive("n", n)
        scores: dict[str, float] = {}
        n_docs = self.doc_count_
        for term in tokenize(query):
            postings = self.postings_.get(term)
            if not postings:
                continue
            df = len(postings)
            idf = math.log((n_docs - df + 0.5) / (df + 0.5) + 1.0)
            for chunk_id, tf in postings:
                length = self.doc_lengths_[chunk_id]
                denom = tf + self.k1 * (
                    1.0 - self.b + self.b * length / self.avg_doc_length_
                )
                scores[chunk_id] = (
                    scores.get(chunk_id, 0.0) + idf * (tf * (self.k1 + 1.0)) / denom
                )
        ranked = sorted(scores.items(), key=lambda item: (-item[1], item[0]))
        return ranked[:n]

    def to_payload(self) -> dict:
        check_is_fitted(self)
        return {
            "version": SPARSE_SNAPSHOT_VERSION,
            "kind": "sparse",
            "k1": self.k1,
            "b": self.b,
            "postings": {
                term: [[chunk_id, tf] for chunk_id, tf in entries]
                for term, entries in self.postings_.items()
            },
            "doc_lengths": self.doc_lengths_,
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "Bm25Retriever":
        if payload.get("kind") != "sparse" or payload.get("version") != SPARSE_SNAPSHOT_VERSION:
            raise SnapshotError("not a compatible sparse index snapshot")
        retriever = cls(k1=payload["k1"], b=payload["b"])
        retriever.postings_ = {
            term: [(chunk_id, tf) for chunk_id, tf in entries]
            for term, entries in payload["postings"].items()
        }
        retriever.doc_lengths_ = dict(payload["doc_lengths"])
        retriever.doc_count_ = len(retriever.doc_lengths_)
        retriever.avg_doc_length_ = sum(retriever.doc_lengths_.values()) / len(
            retriever.doc_lengths_
        )
        return retriever

    def dumps(self) -> str:
        return json.dumps(self.to_payload(), ensure_ascii=False, sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "Bm25Retriever":
        try:
            return cls.from_payload(json.loads(text))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise SnapshotError(f"corrupt sparse snapshot: {exc}") from exc
