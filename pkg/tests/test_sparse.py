import math
import random
import string
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deskqa.sparse import Bm25Retriever, tokenize

from conftest import make_chunk


def bm25_brute_force(
    texts: dict[str, str], query: str, n: int, k1: float = 1.2, b: float = 0.75
) -> list[tuple[str, float]]:
    """Independent reference scorer: applies the formula to every chunk."""
    token_lists = {cid: tokenize(text) for cid, text in texts.items()}
    n_docs = len(texts)
    avgdl = sum(len(toks) for toks in token_lists.values()) / n_docs
    df = Counter()
    for toks in token_lists.values():
        df.update(set(toks))
    ranked = []
    for cid, toks in sorted(token_lists.items()):
        counts = Counter(toks)
        score = 0.0
        for term in tokenize(query):
            tf = counts.get(term, 0)
            if tf == 0:
                continue
            idf = math.log((n_docs - df[term] + 0.5) / (df[term] + 0.5) + 1.0)
            score += idf * (tf * (k1 + 1.0)) / (
                tf + k1 * (1.0 - b + b * len(toks) / avgdl)
            )
        if score > 0:
            ranked.append((cid, score))
    ranked.sort(key=lambda item: (-item[1], item[0]))
    return ranked[:n]


def random_corpus(rng: random.Random, max_chunks: int = 500, max_vocab: int = 200):
    vocab_size = rng.randint(5, max_vocab)
    vocab = [
        "".join(rng.choices(string.ascii_lowercase, k=rng.randint(2, 8)))
        for _ in range(vocab_size)
    ]
    n_chunks = rng.randint(2, max_chunks)
    texts = {
        f"c{idx:04d}": " ".join(rng.choices(vocab, k=rng.randint(1, 40)))
        for idx in range(n_chunks)
    }
    return vocab, texts


class TestTokenize:
    def test_empty(self):
        assert tokenize("") == []

    def test_lowercase_and_split(self):
        assert tokenize("The CAT sat") == ["the", "cat", "sat"]

    def test_command_token_survives(self):
        assert tokenize("ess::get_pin_capacitance") == ["ess::get_pin_capacitance"]

    def test_compound_connectors(self):
        assert tokenize("run ess::get_pin_capacitance now") == [
            "run",
            "ess::get_pin_capacitance",
            "now",
        ]
        assert tokenize("state-of-the-art v1.2.3") == ["state-of-the-art", "v1.2.3"]

    def test_trailing_punctuation_dropped(self):
        assert tokenize("stop.") == ["stop"]
        assert tokenize("really?!") == ["really"]

    def test_simple_mode_splits_connectors(self):
        assert tokenize("a.b c:d e-f g_h", compounds=False) == [
            "a", "b", "c", "d", "e", "f", "g_h",
        ]

    @given(st.text(max_size=200))
    @settings(max_examples=200, deadline=None)
    def test_tokens_are_lowercase_without_whitespace(self, text):
        for token in tokenize(text):
            assert token
            assert token == token.lower()
            assert not any(ch.isspace() for ch in token)


class TestFit:
    def test_hand_counted_postings(self):
        index = Bm25Retriever().fit([make_chunk("c0", "a b a")])
        assert index.postings_ == {"a": [("c0", 2)], "b": [("c0", 1)]}
        assert index.avg_doc_length_ == 3

    def test_avg_doc_length(self):
        index = Bm25Retriever().fit(
            [make_chunk("c0", "x"), make_chunk("c1", "x x")]
        )
        assert index.avg_doc_length_ == 1.5
        assert index.doc_count_ == 2

    def test_duplicate_ids_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            Bm25Retriever().fit([make_chunk("c0", "a"), make_chunk("c0", "b")])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            Bm25Retriever().fit([])

    def test_param_validation(self):
        with pytest.raises(ValueError):
            Bm25Retriever(k1=-1).fit([make_chunk("c0", "a")])
        with pytest.raises(ValueError):
            Bm25Retriever(b=1.5).fit([make_chunk("c0", "a")])

    def test_get_params(self):
        assert Bm25Retriever().get_params() == {"k1": 1.2, "b": 0.75}


class TestSearch:
    def test_no_indexed_term(self):
        index = Bm25Retriever().fit([make_chunk("c0", "apple")])
        assert index.search("missing", 5) == []

    def test_exclusive_term(self):
        index = Bm25Retriever().fit(
            [make_chunk("c0", "apple"), make_chunk("c1", "banana")]
        )
        hits = index.search("apple", 5)
        assert [cid for cid, _ in hits] == ["c0"]

    def test_n_validation(self):
        index = Bm25Retriever().fit([make_chunk("c0", "a")])
        with pytest.raises(ValueError):
            index.search("a", 0)

    def test_zero_score_excluded_and_positive_scores(self):
        index = Bm25Retriever().fit(
            [make_chunk("c0", "apple pie"), make_chunk("c1", "banana")]
        )
        hits = index.search("apple banana", 10)
        assert len(hits) == 2
        assert all(score > 0 for _, score in hits)

    def test_matches_brute_force_on_random_corpora(self):
        rng = random.Random(20240817)
        for _ in range(10):
            vocab, texts = random_corpus(rng, max_chunks=120, max_vocab=60)
            index = Bm25Retriever().fit(
                [make_chunk(cid, text) for cid, text in sorted(texts.items())]
            )
            for _ in range(5):
                query = " ".join(rng.choices(vocab, k=rng.randint(1, 6)))
                expected = bm25_brute_force(texts, query, 10)
                got = index.search(query, 10)
                assert [cid for cid, _ in got] == [cid for cid, _ in expected]
                for (_, a), (_, e) in zip(got, expected):
                    assert a == pytest.approx(e, abs=1e-9)

    def test_added_unrelated_chunk_reranked_consistently(self):
        # adding a chunk with none of the query terms changes N and avgdl;
        # the implementation must still agree with the oracle on the new corpus
        rng = random.Random(7)
        vocab, texts = random_corpus(rng, max_chunks=50, max_vocab=30)
        query = " ".join(rng.choices(vocab, k=3))
        extended = dict(texts)
        extended["zzzz"] = "unrelatedterm anotherunused"
        index = Bm25Retriever().fit(
            [make_chunk(cid, text) for cid, text in sorted(extended.items())]
        )
        expected = bm25_brute_force(extended, query, 20)
        got = index.search(query, 20)
        assert [cid for cid, _ in got] == [cid for cid, _ in expected]


class TestPersistence:
    def test_roundtrip_identical_results(self):
        rng = random.Random(3)
        vocab, texts = random_corpus(rng, max_chunks=40, max_vocab=25)
        index = Bm25Retriever().fit(
            [make_chunk(cid, text) for cid, text in sorted(texts.items())]
        )
        restored = Bm25Retriever.loads(index.dumps())
        for _ in range(10):
            query = " ".join(rng.choices(vocab, k=2))
            assert restored.search(query, 10) == index.search(query, 10)

    def test_dumps_deterministic(self):
        chunks = [make_chunk("c0", "a b"), make_chunk("c1", "b c")]
        assert Bm25Retriever().fit(chunks).dumps() == Bm25Retriever().fit(chunks).dumps()
