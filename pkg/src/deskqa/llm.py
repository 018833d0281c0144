"""Completion backends and answer generation.

Backends receive the rendered prompt string only. Two deterministic stubs
support offline tests: an echo backend that returns the abbreviation block
plus the first context block, and an extractive backend that returns the
context sentence with the highest token overlap with the question. The HTTP
backend talks to any endpoint speaking the simple JSON chat protocol.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import requests

from .errors import BackendError
from .prompt import (
    PromptBundle,
    context_blocks_from_section,
    render_prompt,
    split_sections,
    truncate_to_budget,
)
from .rouge import split_sentences
from .sparse import tokenize

BACKENDS = ("http_chat", "stub_echo", "stub_extractive")
LLM_AUTH_ENV = "DESKQA_LLM_TOKEN"


@dataclass(frozen=True)
class GenerationConfig:
    context_length: int = 8192
    max_new_tokens: int = 4096
    backend: str = "stub_echo"
    model: str | None = None
    endpoint: str | None = None
    temperature: float = 0.0
    timeout: float = 30.0
    retries: int = 2

    def __post_init__(self) -> None:
        if self.context_length < 1:
            raise ValueError("context_length must be positive")
        if not 0 < self.max_new_tokens < self.context_length:
            raise ValueError("max_new_tokens must be in (0, context_length)")
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r} (expected {BACKENDS})")

    @property
    def prompt_budget(self) -> int:
        return self.context_length - self.max_new_tokens


@dataclass(frozen=True)
class CompletionResult:
    text: str
    usage: dict[str, int] = field(default_factory=dict)


@dataclass(frozen=True)
class AnswerEnvelope:
    answer: str
    sources: list[str]
    usage: dict[str, int]


def count_tokens_whitespace(text: str) -> int:
    """Whitespace-split token count, the budget heuristic for stub backends."""
    return len(text.split())


class EchoBackend:
    """Returns the abbreviation block plus the first context block verbatim."""

    name = "stub_echo"

    def count_tokens(self, text: str) -> int:
        return count_tokens_whitespace(text)

    def complete(self, rendered_prompt: str, cfg: GenerationConfig) -> CompletionResult:
        sections = split_sections(rendered_prompt)
        parts = []
        abbr = sections.get("Abbreviations", "")
        if abbr:
            parts.append(abbr)
        blocks = context_blocks_from_section(sections.get("Context", ""))
        if blocks:
            parts.append(blocks[0][1])
        text = "\n".join(parts)
        return CompletionResult(
            text=text,
            usage={
                "prompt_tokens": count_tokens_whitespace(rendered_prompt),
                "completion_tokens": count_tokens_whitespace(text),
            },
        )


class ExtractiveBackend:
    """Returns the context sentence with maximal token overlap with the question.

    Sentences are scanned in descending chunk relevance, then in order within
    a chunk; the first sentence reaching the maximum wins, so with no lexical
    overlap at all the lead sentence of the most relevant chunk is returned.
    No context yields an empty answer.
    """

    name = "stub_extractive"

    def count_tokens(self, text: str) -> int:
        return count_tokens_whitespace(text)

    def complete(self, rendered_prompt: str, cfg: GenerationConfig) -> CompletionResult:
        sections = split_sections(rendered_prompt)
        question_tokens = set(tokenize(sections.get("Question", "")))
        blocks = context_blocks_from_section(sections.get("Context", ""))
        best_sentence = ""
        best_overlap = -1
        for _, text in reversed(blocks):  # rendered ascending -> scan best first
            for sentence in split_sentences(text):
                overlap = len(question_tokens & set(tokenize(sentence)))
                if overlap > best_overlap:
                    best_overlap = overlap
                    best_sentence = sentence
        text = best_sentence if blocks else ""
        return CompletionResult(
            text=text,
            usage={
                "prompt_tokens": count_tokens_whitespace(rendered_prompt),
                "completion_tokens": count_tokens_whitespace(text),
            },
        )


class HttpChatBackend:
    """POSTs {model, prompt, max_new_tokens, temperature} and expects {text, usage}.

    The bearer token, if any, comes from the DESKQA_LLM_TOKEN environment
    variable. Failures are retried cfg.retries times before raising.
    """

    name = "http_chat"

    def count_tokens(self, text: str) -> int:
        # No tokenizer access over the wire; whitespace count is the budget proxy.
        return count_tokens_whitespace(text)

    def complete(self, rendered_prompt: str, cfg: GenerationConfig) -> CompletionResult:
        if not cfg.endpoint:
            raise BackendError("http_chat backend requires an endpoint")
        headers = {"Content-Type": "application/json"}
        token = os.environ.get(LLM_AUTH_ENV)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        payload = {
            "model": cfg.model,
            "prompt": rendered_prompt,
            "max_new_tokens": cfg.max_new_tokens,
            "temperature": cfg.temperature,
        }
        attempts = cfg.retries + 1
        last_error: Exception | None = None
        for _ in range(attempts):
            try:
                resp = requests.post(
                    cfg.endpoint, json=payload, headers=headers, timeout=cfg.timeout
                )
                resp.raise_for_status()
                body = resp.json()
                return CompletionResult(
                    text=body["text"], usage=dict(body.get("usage", {}))
                )
            except (requests.RequestException, KeyError, ValueError) as exc:
                last_error = exc
        raise BackendError(
            f"completion endpoint failed after {attempts} attempts: {last_error}"
        )


def make_backend(cfg: GenerationConfig):
    if cfg.backend == "stub_echo":
        return EchoBackend()
    if cfg.backend == "stub_extractive":
        return ExtractiveBackend()
    return HttpChatBackend()


def fit_to_budget(bundle: PromptBundle, cfg: GenerationConfig, backend) -> PromptBundle:
    """Truncate a bundle so the rendered prompt fits cfg's token budget."""
    return truncate_to_budget(bundle, cfg.prompt_budget, backend.count_tokens)


def generate(bundle: PromptBundle, backend, cfg: GenerationConfig) -> AnswerEnvelope:
    """Render, complete, and wrap the answer with its source chunk ids.

    Sources are the bundle's context chunk ids in descending relevance,
    regardless of what the backend produced.
    """
    rendered = render_prompt(bundle)
    result = backend.complete(rendered, cfg)
    sources = [chunk_id for chunk_id, _ in reversed(bundle.context_blocks)]
    return AnswerEnvelope(answer=result.text, sources=sources, usage=dict(result.usage))
