"""Prompt assembly: labeled sections in a fixed order.

Rendered layout is always System -> History -> Context -> Abbreviations ->
Question, with empty sections omitted. Context blocks are kept in ascending
relevance so the best chunk sits right above the abbreviation block and the
question. Overflow drops the oldest history pair first, then the least
relevant context chunk; the system prompt, abbreviation block and question
are never dropped.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Callable, Sequence

from .errors import PromptBudgetError
from .ingest import Chunk

DEFAULT_SYSTEM_PROMPT = (
    "You are a helpful AI language model. Your primary function is to assist "
    "users in answering questions, generating text, and engaging in "
    "conversation. Given the following extracted parts of a long document and "
    "a question, create a final answer. If asking for a command, please "
    "return the first one only."
)

SECTION_LABELS = ("System", "History", "Context", "Abbreviations", "Question")

_CONTEXT_BLOCK_RE = re.compile(r"^\[(?P<chunk_id>[^\]]+)\] ", re.MULTILINE)


@dataclass(frozen=True)
class PromptBundle:
    """All prompt parts, ready to render.

    context_blocks are (chunk_id, text) pairs in ascending relevance; history
    is (question, answer) pairs, oldest first.
    """

    system_prompt: str
    context_blocks: tuple[tuple[str, str], ...]
    abbreviation_block: str
    history: tuple[tuple[str, str], ...]
    query: str


def build_prompt(
    query: str,
    context_chunks: Sequence[Chunk] = (),
    abbr_snippets: str = "",
    history: Sequence[tuple[str, str]] = (),
    system_prompt: str = DEFAULT_SYSTEM_PROMPT,
) -> PromptBundle:
    """Bundle prompt parts; context_chunks must already be ascending relevance."""
    if not query or not query.strip():
        raise ValueError("query must be non-empty")
    return PromptBundle(
        system_prompt=system_prompt,
        context_blocks=tuple((c.chunk_id, c.text) for c in context_chunks),
        abbreviation_block=abbr_snippets,
        history=tuple(history),
        query=query,
    )


def render_prompt(bundle: PromptBundle) -> str:
    """Flatten a bundle into the labeled-sections text sent to the backend."""
    sections: list[str] = []
    if bundle.system_prompt:
        sections.append(f"System: {bundle.system_prompt}")
    if bundle.history:
        lines = ["History:"]
        for question, answer in bundle.history:
            lines.append(f"Q: {question}")
            lines.append(f"A: {answer}")
        sections.append("\n".join(lines))
    if bundle.context_blocks:
        blocks = "\n\n".join(
            f"[{chunk_id}] {text}" for chunk_id, text in bundle.context_blocks
        )
        sections.append(f"Context:\n{blocks}")
    if bundle.abbreviation_block:
        sections.append(f"Abbreviations:\n{bundle.abbreviation_block}")
    sections.append(f"Question: {bundle.query}")
    return "\n\n".join(sections)


def split_sections(rendered: str) -> dict[str, str]:
    """Recover the labeled sections of a rendered prompt.

    Used by the stub backends, which only see the rendered string. Assumes
    section labels do not occur at line starts inside chunk text, which holds
    for the shipped fixtures and tests.
    """
    label_re = re.compile(
        r"^(System|History|Context|Abbreviations|Question):[ \n]", re.MULTILINE
    )
    matches = list(label_re.finditer(rendered))
    sections: dict[str, str] = {}
    for i, match in enumerate(matches):
        start = match.end()
        end = matches[i + 1].start() if i + 1 < len(matches) else len(rendered)
        sections[match.group(1)] = rendered[start:end].strip("\n").strip()
    return sections


def context_blocks_from_section(section: str) -> list[tuple[str, str]]:
    """Parse '[chunk_id] text' blocks back out of a rendered Context section."""
    matches = list(_CONTEXT_BLOCK_RE.finditer(section))
    blocks = []
    for i, match in enumerate(matches):
        end = matches[i + 1].start() if i + 1 < len(matches) else len(section)
        text = section[match.end() : end].strip("\n").strip()
        blocks.append((match.group("chunk_id"), text))
    return blocks


def truncate_to_budget(
    bundle: PromptBundle,
    budget: int,
    count_tokens: Callable[[str], int],
) -> PromptBundle:
    """Shrink a bundle until its rendering fits in `budget` tokens.

    Drop order: oldest history pair, then least relevant context block. The
    system prompt, abbreviation block and query are never dropped; if they
    alone exceed the budget this raises PromptBudgetError. Idempotent.
    """
    current = bundle
    while count_tokens(render_prompt(current)) > budget:
        if current.history:
            current = replace(current, history=current.history[1:])
        elif current.context_blocks:
            current = replace(current, context_blocks=current.context_blocks[1:])
        else:
            raise PromptBudgetError(
                "system prompt, abbreviation block and query alone exceed the "
                f"budget of {budget} tokens"
            )
    return current
