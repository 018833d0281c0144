"""Document loading and fixed-width overlapping chunking.

Supported source formats are plain text, markdown, JSON, CSV and TSV.
Structured formats are flattened to "key: value" lines, one record per
paragraph, so question/answer style records stay co-located inside a chunk.
Chunking is purely positional over the normalized document body: a window of
``chunk_size`` Unicode code points advancing by ``chunk_size - chunk_overlap``.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import CorpusIngestError, DocumentLoadError

logger = logging.getLogger(__name__)

FORMATS = ("plain_text", "markdown", "json", "csv", "tsv")

_EXTENSION_FORMATS = {
    ".txt": "plain_text",
    ".text": "plain_text",
    ".md": "markdown",
    ".markdown": "markdown",
    ".json": "json",
    ".csv": "csv",
    ".tsv": "tsv",
}


@dataclass(frozen=True)
class SourceDocument:
    """A loaded document with a normalized (LF line endings) body."""

    doc_id: str
    uri: str
    format: str
    body: str
    metadata: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class Chunk:
    """A contiguous span of a document body.

    ``char_start``/``char_end`` are offsets in Unicode code points into the
    normalized body, so ``body[char_start:char_end] == text``.
    """

    chunk_id: str
    doc_id: str
    ordinal: int
    text: str
    char_start: int
    char_end: int


@dataclass(frozen=True)
class ChunkingConfig:
    chunk_size: int = 2048
    chunk_overlap: int = 256

    def __post_init__(self) -> None:
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be positive")
        if self.chunk_overlap < 0:
            raise ValueError("chunk_overlap must be non-negative")
        if self.chunk_overlap >= self.chunk_size:
            raise ValueError("chunk_overlap must be smaller than chunk_size")


@dataclass(frozen=True)
class ManifestEntry:
    uri: str
    format: str | None = None
    doc_id: str | None = None


@dataclass
class IngestResult:
    documents: list[SourceDocument]
    chunks: list[Chunk]
    warnings: list[str]


def detect_format(uri: str) -> str:
    ext = Path(uri).suffix.lower()
    try:
        return _EXTENSION_FORMATS[ext]
    except KeyError:
        raise DocumentLoadError(
            f"unsupported extension {ext!r} for {uri!r}; pass an explicit format"
        ) from None


def _normalize(text: str) -> str:
    return text.replace("\r\n", "\n").replace("\r", "\n")


def _fmt_value(value: object) -> str:
    if isinstance(value, str):
        return value
    return json.dumps(value, ensure_ascii=False)


def _flatten_json(text: str, uri: str) -> str:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentLoadError(f"invalid JSON in {uri!r}: {exc}") from exc
    records = data if isinstance(data, list) else [data]
    paragraphs = []
    for record in records:
        if isinstance(record, dict):
            lines = [f"{key}: {_fmt_value(value)}" for key, value in record.items()]
        else:
            lines = [_fmt_value(record)]
        paragraphs.append("\n".join(lines))
    return "\n\n".join(paragraphs)


def _flatten_delimited(text: str, delimiter: str) -> str:
    rows = [row for row in csv.reader(io.StringIO(text), delimiter=delimiter) if row]
    if not rows:
        return ""
    header, data_rows = rows[0], rows[1:]
    paragraphs = []
    for row in data_rows:
        lines = [f"{key}: {value}" for key, value in zip(header, row)]
        paragraphs.append("\n".join(lines))
    return "\n\n".join(paragraphs)


def load_document(
    uri: str,
    format_override: str | None = None,
    doc_id: str | None = None,
) -> SourceDocument:
    """Load one document, normalize it, and flatten structured formats.

    Raises DocumentLoadError for unreadable paths, unsupported extensions
    without an override, and bodies that are empty after normalization.
    """
    fmt = format_override or detect_format(uri)
    if fmt not in FORMATS:
        raise DocumentLoadError(f"unknown format {fmt!r} (expected one of {FORMATS})")

    path = Path(uri)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise DocumentLoadError(f"cannot read {uri!r}: {exc}") from exc

    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        text = raw.decode("utf-8", errors="replace")
        logger.warning("invalid UTF-8 in %s; bad sequences replaced", uri)

    text = _normalize(text)
    if fmt == "json":
        body = _flatten_json(text, uri)
    elif fmt == "csv":
        body = _flatten_delimited(text, ",")
    elif fmt == "tsv":
        body = _flatten_delimited(text, "\t")
    else:
        body = text

    if not body:
        raise DocumentLoadError(f"document {uri!r} is empty after normalization")

    return SourceDocument(
        doc_id=doc_id or path.stem,
        uri=uri,
        format=fmt,
        body=body,
    )


def chunk_document(doc: SourceDocument, cfg: ChunkingConfig) -> list[Chunk]:
    """Split a document into overlapping windows of cfg.chunk_size code points.

    Consecutive chunks overlap by exactly cfg.chunk_overlap; the final chunk
    may be shorter. Dropping the first chunk_overlap characters of every chunk
    after the first and concatenating reproduces the body exactly.
    """
    body = doc.body
    length = len(body)
    stride = cfg.chunk_size - cfg.chunk_overlap
    chunks: list[Chunk] = []
    start = 0
    ordinal = 0
    while True:
        end = min(start + cfg.chunk_size, length)
        chunks.append(
            Chunk(
                chunk_id=f"{doc.doc_id}#{ordinal:04d}",
                doc_id=doc.doc_id,
                ordinal=ordinal,
                text=body[start:end],
                char_start=start,
                char_end=end,
            )
        )
        if end >= length:
            return chunks
        start += stride
        ordinal += 1


def ingest_corpus(
    sources: Iterable[str | ManifestEntry],
    cfg: ChunkingConfig | None = None,
) -> IngestResult:
    """Load and chunk a batch of documents, tolerating per-document failures.

    Failed documents are reported in IngestResult.warnings; the call raises
    CorpusIngestError only if every document fails (or none were given).
    """
    cfg = cfg or ChunkingConfig()
    entries = [
        entry if isinstance(entry, ManifestEntry) else ManifestEntry(uri=entry)
        for entry in sources
    ]
    if not entries:
        raise CorpusIngestError("no documents to ingest")

    documents: list[SourceDocument] = []
    chunks: list[Chunk] = []
    warnings: list[str] = []
    seen_ids: set[str] = set()
    for entry in entries:
        try:
            doc = load_document(entry.uri, entry.format, entry.doc_id)
            if doc.doc_id in seen_ids:
                raise DocumentLoadError(f"duplicate doc_id {doc.doc_id!r}")
        except DocumentLoadError as exc:
            warnings.append(str(exc))
            logger.warning("skipping document: %s", exc)
            continue
        seen_ids.add(doc.doc_id)
        documents.append(doc)
        chunks.extend(chunk_document(doc, cfg))

    if not documents:
        raise CorpusIngestError(
            "all documents failed to ingest: " + "; ".join(warnings)
        )
    return IngestResult(documents=documents, chunks=chunks, warnings=warnings)


def load_manifest(path: str | Path) -> list[ManifestEntry]:
    """Read a corpus manifest: a JSON array of {uri, format?, doc_id?}.

    Relative uris are resolved against the manifest's directory.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CorpusIngestError(f"cannot read manifest {path}: {exc}") from exc
    if not isinstance(data, list):
        raise CorpusIngestError(f"manifest {path} must be a JSON array")
    entries = []
    for item in data:
        if not isinstance(item, dict) or "uri" not in item:
            raise CorpusIngestError(f"manifest {path}: every entry needs a uri")
        uri = item["uri"]
        if not Path(uri).is_absolute():
            uri = str(path.parent / uri)
        entries.append(
            ManifestEntry(uri=uri, format=item.get("format"), doc_id=item.get("doc_id"))
        )
    return entries


def chunk_to_dict(chunk: Chunk) -> dict:
    return {
        "chunk_id": chunk.chunk_id,
        "doc_id": chunk.doc_id,
        "ordinal": chunk.ordinal,
        "text": chunk.text,
        "char_start": chunk.char_start,
        "char_end": chunk.char_end,
    }


def chunk_from_dict(data: dict) -> Chunk:
    return Chunk(
        chunk_id=data["chunk_id"],
        doc_id=data["doc_id"],
        ordinal=data["ordinal"],
        text=data["text"],
        char_start=data["char_start"],
        char_end=data["char_end"],
    )


def dump_chunks_jsonl(chunks: Iterable[Chunk]) -> str:
    """Debug/persistence dump: one chunk per line, all fields."""
    return "".join(
        json.dumps(chunk_to_dict(c), ensure_ascii=False, sort_keys=True) + "\n"
        for c in chunks
    )


def parse_chunks_jsonl(text: str) -> list[Chunk]:
    return [chunk_from_dict(json.loads(line)) for line in text.splitlines() if line]
