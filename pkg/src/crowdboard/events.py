"""Append-only event log: the single source of truth for service state.

Events are line-delimited JSON ({seq, type, payload}); state is a pure fold
over them (see store.py), so replaying the log reproduces identical state.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator


@dataclass(frozen=True)
class Event:
    seq: int
    type: str
    payload: dict

    def to_dict(self) -> dict:
        return {"seq": self.seq, "type": self.type, "payload": self.payload}

    @classmethod
    def from_dict(cls, d: dict) -> Event:
        return cls(seq=d["seq"], type=d["type"], payload=d["payload"])


class InMemoryEventLog:
    """Log for tests and ephemeral runs; same interface as the file log."""

    def __init__(self):
        self._events: list[Event] = []

    def append(self, type: str, payload: dict) -> Event:
        event = Event(seq=len(self._events), type=type, payload=payload)
        self._events.append(event)
        return event

    def events(self, start: int = 0) -> Iterator[Event]:
        return iter(self._events[start:])

    def __len__(self) -> int:
        return len(self._events)


class FileEventLog:
    """Durable JSONL log; every append is flushed and fsynced."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._count = 0
        if self.path.exists():
            with open(self.path, encoding="utf-8") as fh:
                self._count = sum(1 for line in fh if line.strip())
        self._fh = open(self.path, "a", encoding="utf-8")

    def append(self, type: str, payload: dict) -> Event:
        event = Event(seq=self._count, type=type, payload=payload)
        self._fh.write(json.dumps(event.to_dict(), ensure_ascii=False) + "\n")
        self._fh.flush()
        os.fsync(self._fh.fileno())
        self._count += 1
        return event

    def events(self, start: int = 0) -> Iterator[Event]:
        with open(self.path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                event = Event.from_dict(json.loads(line))
                if event.seq >= start:
                    yield event

    def close(self) -> None:
        self._fh.close()

    def __len__(self) -> int:
        return self._count
