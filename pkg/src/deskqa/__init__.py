"""deskqa: hybrid-retrieval question answering for engineering documentation."""

from .adh import (
    AbbreviationDictionary,
    AbbreviationEntry,
    find_abbreviations,
    load_dictionary,
    render_snippets,
)
from .dense import DenseRetriever, HashingEmbedder, HttpEmbeddingProvider
from .evaluate import QaExample, load_dataset, render_report, run_eval
from .fusion import HybridRetriever, RankedCandidate, RetrievalConfig, rrf_fuse
from .ingest import (
    Chunk,
    ChunkingConfig,
    SourceDocument,
    chunk_document,
    ingest_corpus,
    load_document,
)
from .llm import GenerationConfig, generate
from .pipeline import AnswerPipeline
from .prompt import DEFAULT_SYSTEM_PROMPT, PromptBundle, build_prompt, render_prompt
from .rouge import RougeScore, rouge_lsum
from .sparse import Bm25Retriever, tokenize

__version__ = "0.1.0"

__all__ = [
    "AbbreviationDictionary",
    "AbbreviationEntry",
    "AnswerPipeline",
    "Bm25Retriever",
    "Chunk",
    "ChunkingConfig",
    "DEFAULT_SYSTEM_PROMPT",
    "DenseRetriever",
    "GenerationConfig",
    "HashingEmbedder",
    "HttpEmbeddingProvider",
    "HybridRetriever",
    "PromptBundle",
    "QaExample",
    "RankedCandidate",
    "RetrievalConfig",
    "RougeScore",
    "SourceDocument",
    "build_prompt",
    "chunk_document",
    "find_abbreviations",
    "generate",
    "ingest_corpus",
    "load_dataset",
    "load_dictionary",
    "load_document",
    "render_prompt",
    "render_report",
    "render_snippets",
    "rouge_lsum",
    "rrf_fuse",
    "run_eval",
    "tokenize",
]
