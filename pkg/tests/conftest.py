import pytest

from deskqa.ingest import Chunk


def make_chunk(chunk_id: str, text: str, doc_id: str | None = None) -> Chunk:
    return Chunk(
        chunk_id=chunk_id,
        doc_id=doc_id or chunk_id.split("#")[0],
        ordinal=0,
        text=text,
        char_start=0,
        char_end=len(text),
    )


@pytest.fixture
def chunk_factory():
    return make_chunk
