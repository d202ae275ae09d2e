"""Append-only upsert journal behind a small storage interface.

Every database mutation normalizes to one upsert entry
``{"table", "key", "updated_at", "fields"}``; replaying the journal in
order rebuilds the exact database state (upserts are last-write-wins, so
replay is also idempotent).  The file form is JSON-lines with sorted
keys, flushed per append.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Iterable, Iterator, Protocol

from ..errors import ValidationError


class JournalStore(Protocol):
    def append(self, entry: dict) -> None: ...

    def entries(self) -> Iterator[dict]: ...


class MemoryJournal:
    """In-process journal, mostly for tests."""

    def __init__(self):
        self._entries: list[dict] = []

    def append(self, entry: dict) -> None:
        self._entries.append(entry)

    def entries(self) -> Iterator[dict]:
        return iter(list(self._entries))

    def __len__(self):
        return len(self._entries)


class FileJournal:
    """JSONL journal; appends are flushed so a crash loses at most one line."""

    def __init__(self, path: str | os.PathLike):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._handle = None

    def append(self, entry: dict) -> None:
        if self._handle is None:
            self._handle = self.path.open("a", encoding="utf-8")
        self._handle.write(json.dumps(entry, sort_keys=True, separators=(",", ":")))
        self._handle.write("\n")
        self._handle.flush()

    def entries(self) -> Iterator[dict]:
        if not self.path.exists():
            return iter(())
        return self._iter_lines()

    def _iter_lines(self) -> Iterator[dict]:
        with self.path.open("r", encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    yield json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ValidationError(
                        f"{self.path}:{lineno}: corrupt journal line: {exc}"
                    ) from None

    def close(self) -> None:
        if self._handle is not None:
            self._handle.close()
            self._handle = None


def validate_entry(entry: dict) -> dict:
    for field in ("table", "key", "updated_at", "fields"):
        if field not in entry:
            raise ValidationError(f"journal entry missing {field!r}: {entry!r}")
    if not isinstance(entry["key"], (list, tuple)):
        raise ValidationError(f"journal key must be a list, got {entry['key']!r}")
    return entry


def entries_or_empty(journal: JournalStore | None) -> Iterable[dict]:
    return journal.entries() if journal is not None else ()
