"""Summary-level ROUGE-L (ROUGE-Lsum).

Both texts are split into sentences (newlines, or '.', '!', '?' followed by
whitespace), tokenized to lowercase \\w+ runs, and each reference sentence is
credited with the union of LCS match positions against all candidate
sentences, counting each reference token at most once. Recall divides the
total hits by the reference token count, precision by the candidate token
count. Scores are splitter- and tokenizer-sensitive, so both rules are fixed
here and shared with nothing but the evaluation harness.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .sparse import tokenize

_SENTENCE_BOUNDARY = re.compile(r"[.!?]+(?=\s)|\n+")


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float


ZERO_SCORE = RougeScore(0.0, 0.0, 0.0)


def split_sentences(text: str) -> list[str]:
    """Sentence spans; boundaries are newlines or .!? followed by whitespace."""
    parts = _SENTENCE_BOUNDARY.split(text)
    return [part.strip() for part in parts if part.strip()]


def _lcs_match_positions(reference: list[str], candidate: list[str]) -> set[int]:
    """Reference-side indices on one canonical LCS of the two token lists.

    Standard DP table; backtracking prefers the diagonal on a match and the
    reference side on ties, which makes the chosen positions deterministic.
    """
    n, m = len(reference), len(candidate)
    if n == 0 or m == 0:
        return set()
    table = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        row = table[i]
        prev = table[i - 1]
        for j in range(1, m + 1):
            if reference[i - 1] == candidate[j - 1]:
                row[j] = prev[j - 1] + 1
            else:
                row[j] = prev[j] if prev[j] >= row[j - 1] else row[j - 1]
    positions: set[int] = set()
    i, j = n, m
    while i > 0 and j > 0:
        if reference[i - 1] == candidate[j - 1]:
            positions.add(i - 1)
            i -= 1
            j -= 1
        elif table[i - 1][j] >= table[i][j - 1]:
            i -= 1
        else:
            j -= 1
    return positions


def lcs_length(a: list[str], b: list[str]) -> int:
    return len(_lcs_match_positions(a, b))


def rouge_lsum(reference: str, candidate: str) -> RougeScore:
    """Union-LCS ROUGE score of a candidate text against a reference text."""
    ref_sentences = [
        tokens
        for sentence in split_sentences(reference)
        if (tokens := tokenize(sentence, compounds=False))
    ]
    cand_sentences = [
        tokens
        for sentence in split_sentences(candidate)
        if (tokens := tokenize(sentence, compounds=False))
    ]
    ref_total = sum(len(tokens) for tokens in ref_sentences)
    cand_total = sum(len(tokens) for tokens in cand_sentences)
    if ref_total == 0 or cand_total == 0:
        return ZERO_SCORE

    hits = 0
    for ref_tokens in ref_sentences:
        matched: set[int] = set()
        for cand_tokens in cand_sentences:
            matched |= _lcs_match_positions(ref_tokens, cand_tokens)
        hits += len(matched)

    recall = hits / ref_total
    precision = hits / cand_total
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return RougeScore(precision=precision, recall=recall, f1=f1)
