"""Abbreviation knowledge for prompts.

A small dictionary maps abbreviation terms to full names (and optional
descriptions). Terms found in the question or the retrieved context are
rendered as one-line expansions and injected between context and question,
which keeps the model from inventing expansions for unfamiliar shorthand.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .errors import DictionaryError
from .ingest import Chunk

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AbbreviationEntry:
    abbr: str
    name: str
    desc: str | None = None


@dataclass(frozen=True)
class AbbreviationDictionary:
    entries: tuple[AbbreviationEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def get(self, abbr: str) -> AbbreviationEntry | None:
        return {e.abbr: e for e in self.entries}.get(abbr)


EMPTY_DICTIONARY = AbbreviationDictionary(entries=())


def load_dictionary(path: str | Path) -> AbbreviationDictionary:
    """Load a JSON array of {abbr, name, desc?} entries.

    Duplicate abbr keys are an error (all offenders listed); an empty
    dictionary is allowed with a warning.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DictionaryError(f"cannot read dictionary {path}: {exc}") from exc
    if not isinstance(data, list):
        raise DictionaryError(f"dictionary {path} must be a JSON array")

    entries: list[AbbreviationEntry] = []
    seen: dict[str, int] = {}
    duplicates: list[str] = []
    for item in data:
        if not isinstance(item, dict) or not item.get("abbr") or not item.get("name"):
            raise DictionaryError(
                f"dictionary {path}: every entry needs non-empty abbr and name"
            )
        abbr = item["abbr"]
        seen[abbr] = seen.get(abbr, 0) + 1
        if seen[abbr] == 2:
            duplicates.append(abbr)
        entries.append(
            AbbreviationEntry(abbr=abbr, name=item["name"], desc=item.get("desc"))
        )
    if duplicates:
        raise DictionaryError(
            f"dictionary {path}: duplicate abbr keys: {', '.join(sorted(duplicates))}"
        )
    if not entries:
        logger.warning("abbreviation dictionary %s is empty", path)
    return AbbreviationDictionary(entries=tuple(entries))


def _first_occurrence(text: str, abbr: str) -> int | None:
    """First position where abbr occurs as a whole token, else None.

    Matching is case-sensitive; boundaries are non-alphanumeric characters or
    the string edges. Multi-word keys match across any run of whitespace.
    """
    words = abbr.split()
    if not words:
        return None
    pattern = r"\s+".join(re.escape(word) for word in words)
    for match in re.finditer(pattern, text):
        before = text[match.start() - 1] if match.start() > 0 else ""
        after = text[match.end()] if match.end() < len(text) else ""
        if not before.isalnum() and not after.isalnum():
            return match.start()
    return None


def find_abbreviations(
    query: str,
    context_chunks: Sequence[Chunk],
    dictionary: AbbreviationDictionary,
) -> list[AbbreviationEntry]:
    """Dictionary entries whose abbr occurs in the query or any context chunk.

    Query matches come first (by position), then context matches (by chunk
    order, then position). Each entry appears at most once.
    """
    remaining = list(dictionary.entries)
    found: list[AbbreviationEntry] = []

    def take(text: str) -> None:
        hits = []
        for entry in remaining:
            pos = _first_occurrence(text, entry.abbr)
            if pos is not None:
                hits.append((pos, entry))
        hits.sort(key=lambda item: item[0])
        for _, entry in hits:
            found.append(entry)
            remaining.remove(entry)

    take(query)
    for chunk in context_chunks:
        if not remaining:
            break
        take(chunk.text)
    return found


def render_snippets(entries: Sequence[AbbreviationEntry]) -> str:
    """One expansion line per entry, joined by newlines; empty input -> ''."""
    lines = []
    for entry in entries:
        if entry.desc:
            lines.append(
                f"{entry.abbr} is usually short for {entry.name}, which is {entry.desc}."
            )
        else:
            lines.append(f"{entry.abbr} is usually short for {entry.name}.")
    return "\n".join(lines)
