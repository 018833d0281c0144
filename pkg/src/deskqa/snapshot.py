"""Index snapshots: a directory of deterministic JSON files.

Layout: chunks.jsonl (one chunk per line), docs.json (doc_id -> provenance),
sparse.json and dense.json (index payloads), meta.json (version tag). Writes
contain no timestamps, so re-ingesting identical input produces byte-identical
files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .dense import DenseRetriever, EmbeddingProvider
from .errors import SnapshotError
from .ingest import Chunk, SourceDocument, dump_chunks_jsonl, parse_chunks_jsonl
from .sparse import Bm25Retriever

SNAPSHOT_VERSION = 1

CHUNKS_FILE = "chunks.jsonl"
DOCS_FILE = "docs.json"
SPARSE_FILE = "sparse.json"
DENSE_FILE = "dense.json"
META_FILE = "meta.json"


@dataclass
class Snapshot:
    chunks: list[Chunk]
    docs: dict[str, dict]  # doc_id -> {uri, format}
    sparse: Bm25Retriever | None
    dense: DenseRetriever | None


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8", newline="\n")


def save_snapshot(
    directory: str | Path,
    chunks: list[Chunk],
    documents: list[SourceDocument],
    sparse: Bm25Retriever | None,
    dense: DenseRetriever | None,
) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    _write(directory / CHUNKS_FILE, dump_chunks_jsonl(chunks))
    docs = {doc.doc_id: {"uri": doc.uri, "format": doc.format} for doc in documents}
    _write(
        directory / DOCS_FILE,
        json.dumps(docs, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
    )
    if sparse is not None:
        _write(directory / SPARSE_FILE, sparse.dumps() + "\n")
    if dense is not None:
        _write(directory / DENSE_FILE, dense.dumps() + "\n")
    meta = {"version": SNAPSHOT_VERSION, "chunks": len(chunks), "docs": len(docs)}
    _write(
        directory / META_FILE,
        json.dumps(meta, ensure_ascii=False, sort_keys=True) + "\n",
    )


def load_snapshot(
    directory: str | Path, provider: EmbeddingProvider | None = None
) -> Snapshot:
    directory = Path(directory)
    meta_path = directory / META_FILE
    if not meta_path.exists():
        raise SnapshotError(f"no snapshot at {directory} (missing {META_FILE})")
    try:
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SnapshotError(f"corrupt snapshot meta: {exc}") from exc
    if meta.get("version") != SNAPSHOT_VERSION:
        raise SnapshotError(f"unsupported snapshot version {meta.get('version')!r}")

    chunks = parse_chunks_jsonl((directory / CHUNKS_FILE).read_text(encoding="utf-8"))
    docs = json.loads((directory / DOCS_FILE).read_text(encoding="utf-8"))

    sparse = None
    sparse_path = directory / SPARSE_FILE
    if sparse_path.exists():
        sparse = Bm25Retriever.loads(sparse_path.read_text(encoding="utf-8"))

    dense = None
    dense_path = directory / DENSE_FILE
    if dense_path.exists():
        dense = DenseRetriever.loads(
            dense_path.read_text(encoding="utf-8"), provider=provider
        )

    return Snapshot(chunks=chunks, docs=docs, sparse=sparse, dense=dense)
