"""End-to-end question answering: retrieve, augment, prompt, generate.

One AnswerPipeline instance backs the CLI, the HTTP service and the
evaluation harness, so their answers agree for identical configuration.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .adh import EMPTY_DICTIONARY, AbbreviationDictionary, find_abbreviations, render_snippets
from .config import AppConfig
from .errors import ConfigError
from .fusion import HybridRetriever, RankedCandidate
from .ingest import Chunk, ingest_corpus, load_manifest
from .llm import AnswerEnvelope, GenerationConfig, fit_to_budget, generate, make_backend
from .prompt import DEFAULT_SYSTEM_PROMPT, build_prompt
from .snapshot import load_snapshot


@dataclass
class AskResult:
    answer: str
    sources: list[Chunk]  # descending relevance
    candidates: list[RankedCandidate]
    usage: dict[str, int] = field(default_factory=dict)


class AnswerPipeline:
    def __init__(
        self,
        retriever: HybridRetriever,
        dictionary: AbbreviationDictionary = EMPTY_DICTIONARY,
        generation: GenerationConfig | None = None,
        docs: dict[str, dict] | None = None,
        system_prompt: str = DEFAULT_SYSTEM_PROMPT,
        adh_enabled: bool = True,
        history_depth: int = 4,
    ):
        self.retriever = retriever
        self.dictionary = dictionary
        self.generation = generation or GenerationConfig()
        self.backend = make_backend(self.generation)
        self.docs = docs or {}
        self.system_prompt = system_prompt
        self.adh_enabled = adh_enabled
        self.history_depth = history_depth

    @property
    def chunk_count(self) -> int:
        return len(getattr(self.retriever, "chunks_", {}))

    def doc_uri(self, doc_id: str) -> str:
        return self.docs.get(doc_id, {}).get("uri", "")

    def ask(
        self,
        question: str,
        history: Sequence[tuple[str, str]] = (),
        mode: str = "hybrid",
        adh: bool | None = None,
    ) -> AskResult:
        """Answer one question; history is (question, answer) pairs, oldest first."""
        use_adh = self.adh_enabled if adh is None else adh
        candidates = self.retriever.candidates(question, mode=mode)
        context = self.retriever.retrieve(question, mode=mode)  # ascending relevance

        snippets = ""
        if use_adh and len(self.dictionary):
            entries = find_abbreviations(question, context, self.dictionary)
            snippets = render_snippets(entries)

        bundle = build_prompt(
            query=question,
            context_chunks=context,
            abbr_snippets=snippets,
            history=list(history)[-self.history_depth :] if self.history_depth else [],
            system_prompt=self.system_prompt,
        )
        bundle = fit_to_budget(bundle, self.generation, self.backend)
        envelope: AnswerEnvelope = generate(bundle, self.backend, self.generation)

        by_id = {chunk.chunk_id: chunk for chunk in context}
        sources = [by_id[cid] for cid in envelope.sources if cid in by_id]
        return AskResult(
            answer=envelope.answer,
            sources=sources,
            candidates=candidates,
            usage=envelope.usage,
        )


def build_pipeline_from_corpus(config: AppConfig) -> AnswerPipeline:
    """Ingest the manifest and fit fresh indexes (no snapshot involved)."""
    if not config.manifest:
        raise ConfigError("config has no corpus manifest")
    result = ingest_corpus(load_manifest(config.manifest), config.chunking)
    retriever = HybridRetriever(
        provider=config.embedder.build(),
        k1=config.bm25.k1,
        b=config.bm25.b,
        n_dense=config.retrieval.n_dense,
        n_sparse=config.retrieval.n_sparse,
        n_hybrid=config.retrieval.n_hybrid,
        rrf_k=config.retrieval.rrf_k,
    ).fit(result.chunks)
    docs = {d.doc_id: {"uri": d.uri, "format": d.format} for d in result.documents}
    return _assemble(config, retriever, docs)


def build_pipeline_from_snapshot(config: AppConfig) -> AnswerPipeline:
    provider = config.embedder.build()
    snap = load_snapshot(config.index_dir, provider=provider)
    retriever = HybridRetriever.from_parts(
        snap.chunks,
        snap.sparse,
        snap.dense,
        provider=provider,
        k1=config.bm25.k1,
        b=config.bm25.b,
        n_dense=config.retrieval.n_dense,
        n_sparse=config.retrieval.n_sparse,
        n_hybrid=config.retrieval.n_hybrid,
        rrf_k=config.retrieval.rrf_k,
    )
    return _assemble(config, retriever, snap.docs)


def _assemble(
    config: AppConfig, retriever: HybridRetriever, docs: dict[str, dict]
) -> AnswerPipeline:
    from .adh import load_dictionary

    dictionary = EMPTY_DICTIONARY
    if config.dictionary:
        if not Path(config.dictionary).exists():
            raise ConfigError(f"dictionary file not found: {config.dictionary}")
        dictionary = load_dictionary(config.dictionary)
    return AnswerPipeline(
        retriever=retriever,
        dictionary=dictionary,
        generation=config.generation,
        docs=docs,
        adh_enabled=config.adh_enabled,
        history_depth=config.history_depth,
    )
