import random
import re

import pytest

from deskqa.errors import PromptBudgetError
from deskqa.llm import count_tokens_whitespace
from deskqa.prompt import (
    DEFAULT_SYSTEM_PROMPT,
    build_prompt,
    context_blocks_from_section,
    render_prompt,
    split_sections,
    truncate_to_budget,
)

from conftest import make_chunk

LABELS = ("System", "History", "Context", "Abbreviations", "Question")


def section_order(rendered: str) -> list[str]:
    positions = []
    for label in LABELS:
        match = re.search(rf"^{label}:", rendered, re.MULTILINE)
        if match:
            positions.append((match.start(), label))
    return [label for _, label in sorted(positions)]


def random_bundle(rng: random.Random):
    chunks = [
        make_chunk(f"c{i:02d}", f"chunk body {i} " + " ".join(f"w{rng.randint(0, 9)}" for _ in range(rng.randint(0, 6))))
        for i in range(rng.randint(0, 4))
    ]
    history = [(f"old question {i}", f"old answer {i}") for i in range(rng.randint(0, 3))]
    abbr = "ZZZ is usually short for Zig Zag Zone." if rng.random() < 0.5 else ""
    system = DEFAULT_SYSTEM_PROMPT if rng.random() < 0.8 else ""
    return build_prompt(
        query=f"question {rng.randint(0, 99)}",
        context_chunks=chunks,
        abbr_snippets=abbr,
        history=history,
        system_prompt=system,
    )


class TestBuildAndRender:
    def test_empty_query_rejected(self):
        with pytest.raises(ValueError):
            build_prompt("")
        with pytest.raises(ValueError):
            build_prompt("   ")

    def test_query_only(self):
        bundle = build_prompt("What?")
        rendered = render_prompt(bundle)
        assert rendered == f"System: {DEFAULT_SYSTEM_PROMPT}\n\nQuestion: What?"

    def test_default_system_prompt_text(self):
        assert DEFAULT_SYSTEM_PROMPT.startswith("You are a helpful AI language model.")
        assert DEFAULT_SYSTEM_PROMPT.endswith("please return the first one only.")

    def test_context_renders_in_given_order(self):
        # retrieval hands over ascending relevance: weakest first, best last
        chunks = [make_chunk("c3", "weakest"), make_chunk("c2", "middle"), make_chunk("c1", "strongest")]
        rendered = render_prompt(build_prompt("q", context_chunks=chunks))
        assert rendered.index("weakest") < rendered.index("middle") < rendered.index("strongest")

    def test_abbreviations_between_context_and_question(self):
        rendered = render_prompt(
            build_prompt(
                "q",
                context_chunks=[make_chunk("c1", "ctx")],
                abbr_snippets="A is usually short for Alpha.",
            )
        )
        assert (
            rendered.index("Context:")
            < rendered.index("Abbreviations:")
            < rendered.index("Question:")
        )

    def test_history_layout(self):
        rendered = render_prompt(build_prompt("q", history=[("q1", "a1"), ("q2", "a2")]))
        assert "History:\nQ: q1\nA: a1\nQ: q2\nA: a2" in rendered

    def test_section_order_random_bundles(self):
        rng = random.Random(123)
        for _ in range(100):
            rendered = render_prompt(random_bundle(rng))
            order = section_order(rendered)
            assert order == [l for l in LABELS if l in order]
            assert order[-1] == "Question"

    def test_split_sections_roundtrip(self):
        chunks = [make_chunk("idA", "alpha text"), make_chunk("idB", "beta text")]
        bundle = build_prompt(
            "the query",
            context_chunks=chunks,
            abbr_snippets="A is usually short for Alpha.",
            history=[("hq", "ha")],
        )
        sections = split_sections(render_prompt(bundle))
        assert sections["Question"] == "the query"
        assert sections["Abbreviations"] == "A is usually short for Alpha."
        blocks = context_blocks_from_section(sections["Context"])
        assert blocks == [("idA", "alpha text"), ("idB", "beta text")]


class TestTruncate:
    def make(self, n_history=2, n_context=2):
        return build_prompt(
            "the final question",
            context_chunks=[make_chunk(f"c{i}", f"context body {i}") for i in range(n_context)],
            abbr_snippets="A is usually short for Alpha.",
            history=[(f"question {i}", f"answer {i}") for i in range(n_history)],
            system_prompt="Short system prompt.",
        )

    def test_under_budget_unchanged(self):
        bundle = self.make()
        out = truncate_to_budget(bundle, 10_000, count_tokens_whitespace)
        assert out == bundle

    def test_drops_oldest_history_first(self):
        bundle = self.make(n_history=2, n_context=2)
        full = count_tokens_whitespace(render_prompt(bundle))
        out = truncate_to_budget(bundle, full - 1, count_tokens_whitespace)
        assert out.history == bundle.history[1:]
        assert out.context_blocks == bundle.context_blocks

    def test_drops_least_relevant_context_after_history(self):
        from dataclasses import replace

        bundle = self.make(n_history=1, n_context=3)
        # budget that forces all history out plus the weakest context block
        without_history = replace(bundle, history=())
        budget = count_tokens_whitespace(render_prompt(without_history)) - 1
        out = truncate_to_budget(bundle, budget, count_tokens_whitespace)
        assert out.history == ()
        assert out.context_blocks == bundle.context_blocks[1:]

    def test_never_drops_system_abbr_query(self):
        bundle = self.make(n_history=3, n_context=3)
        minimal = truncate_to_budget(
            bundle,
            count_tokens_whitespace(
                render_prompt(
                    build_prompt(
                        bundle.query,
                        abbr_snippets=bundle.abbreviation_block,
                        system_prompt=bundle.system_prompt,
                    )
                )
            ),
            count_tokens_whitespace,
        )
        assert minimal.query == bundle.query
        assert minimal.abbreviation_block == bundle.abbreviation_block
        assert minimal.system_prompt == bundle.system_prompt

    def test_irreducible_overflow_raises(self):
        bundle = build_prompt("q", system_prompt="very long system prompt indeed")
        with pytest.raises(PromptBudgetError):
            truncate_to_budget(bundle, 2, count_tokens_whitespace)

    def test_idempotent(self):
        bundle = self.make(n_history=3, n_context=3)
        budget = count_tokens_whitespace(render_prompt(bundle)) - 3
        once = truncate_to_budget(bundle, budget, count_tokens_whitespace)
        twice = truncate_to_budget(once, budget, count_tokens_whitespace)
        assert once == twice
