"""Append-only session journal: the language model's context source and the
analytics input.

One JSONL record per event, field order fixed (tick, wall_time, kind,
payload), so a journal file round-trips byte-identically through load and
re-serialize. The journal has a single writer (the tick loop); readers get
immutable snapshots.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Iterator

from .adjudicator import Vec2, classify_area
from .domain import AreaLayout

DEFAULT_CONTEXT_EVENTS = 40
EVENT_LINE_CHAR_CAP = 120
DEFAULT_SHORT_TERM_WINDOW = 5


class EventKind(str, Enum):
    POSITION_UPDATE = "position_update"
    SPAWN = "spawn"
    CAR_LEAVING = "car_leaving"
    COLLISION = "collision"
    STAR_COLLECTED = "star_collected"
    UTTERANCE = "utterance"
    PHASE_CHANGE = "phase_change"
    SCAFFOLD_SHOWN = "scaffold_shown"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Event:
    tick: int
    kind: EventKind
    payload: dict[str, Any]
    wall_time: float

    def to_record(self) -> dict[str, Any]:
        # Field order is the wire contract for the JSONL journal.
        return {
            "tick": self.tick,
            "wall_time": self.wall_time,
            "kind": self.kind.value,
            "payload": self.payload,
        }

    @classmethod
    def from_record(cls, record: dict[str, Any]) -> "Event":
        return cls(
            tick=int(record["tick"]),
            kind=EventKind(record["kind"]),
            payload=dict(record["payload"]),
            wall_time=float(record["wall_time"]),
        )


def event_to_line(event: Event) -> str:
    return json.dumps(event.to_record(), separators=(",", ":"), ensure_ascii=True)


class OutOfOrderTick(ValueError):
    """An event arrived with a tick earlier than the last recorded one."""


class StorageFailure(RuntimeError):
    """The journal file could not be written."""


class Journal:
    """Append-only event journal, optionally backed by a JSONL file.

    Appends are acknowledged only after the line has been written and
    flushed, so a reopened file replays to the same in-memory sequence.
    """

    def __init__(self, path: str | Path | None = None) -> None:
        self._events: list[Event] = []
        self._path = Path(path) if path is not None else None
        self._fh = None
        if self._path is not None:
            try:
                self._path.parent.mkdir(parents=True, exist_ok=True)
                self._fh = open(self._path, "a", encoding="utf-8")
            except OSError as exc:
                raise StorageFailure(str(exc)) from exc

    @property
    def path(self) -> Path | None:
        return self._path

    @property
    def events(self) -> tuple[Event, ...]:
        return tuple(self._events)

    def __len__(self) -> int:
        return len(self._events)

    def __iter__(self) -> Iterator[Event]:
        return iter(self._events)

    def last_tick(self) -> int | None:
        return self._events[-1].tick if self._events else None

    def record(self, event: Event) -> None:
        last = self.last_tick()
        if last is not None and event.tick < last:
            raise OutOfOrderTick(f"event tick {event.tick} precedes last tick {last}")
        if self._fh is not None:
            try:
                self._fh.write(event_to_line(event) + "\n")
                self._fh.flush()
            except OSError as exc:
                raise StorageFailure(str(exc)) from exc
        self._events.append(event)

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    @classmethod
    def load(cls, path: str | Path) -> "Journal":
        """Replay a JSONL journal file into memory (read-only journal)."""
        journal = cls(path=None)
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    journal._events.append(Event.from_record(json.loads(line)))
        return journal

    def dump_lines(self) -> str:
        return "".join(event_to_line(e) + "\n" for e in self._events)


@dataclass(frozen=True)
class ErrorStats:
    """Crossing-error rates over a short recent window and over the whole session."""

    short_term_error_rate: float
    long_term_error_rate: float
    trial_count: int


EMPTY_STATS = ErrorStats(0.0, 0.0, 0)


def trial_errors(events: Iterable[Event]) -> list[bool]:
    """Per-trial error flags, in trial order, from car-leaving adjudications."""
    return [
        e.payload.get("verdict") != "correct"
        for e in events
        if e.kind is EventKind.CAR_LEAVING
    ]


def stats_from_errors(errors: list[bool], window: int) -> ErrorStats:
    if window < 1:
        raise ValueError("window must be >= 1")
    if not errors:
        return EMPTY_STATS
    recent = errors[-window:]
    return ErrorStats(
        short_term_error_rate=sum(recent) / len(recent),
        long_term_error_rate=sum(errors) / len(errors),
        trial_count=len(errors),
    )


def performance(journal: Journal, window: int = DEFAULT_SHORT_TERM_WINDOW) -> ErrorStats:
    """Short-/long-term error rates; a trial is one adjudicated crossing."""
    return stats_from_errors(trial_errors(journal), window)


def _render_event(event: Event) -> str:
    bits = " ".join(f"{k}={_short(v)}" for k, v in event.payload.items())
    line = f"tick {event.tick:05d} {event.kind.value} {bits}".rstrip()
    return line[:EVENT_LINE_CHAR_CAP]


def _short(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.2f}"
    if isinstance(value, (list, tuple)):
        return "(" + ",".join(_short(v) for v in value) + ")"
    return str(value)


def snapshot_context(
    journal: Journal,
    layout: AreaLayout,
    max_events: int = DEFAULT_CONTEXT_EVENTS,
    window: int = DEFAULT_SHORT_TERM_WINDOW,
    start_pos: Vec2 | None = None,
) -> str:
    """Render the journal suffix as model-readable context text.

    Includes the participant's current area by description, the last
    max_events events (newest last), and the error summary. Output length is
    bounded by the event cap and the per-line character cap.
    """
    if max_events < 1:
        raise ValueError("max_events must be >= 1")

    pos = start_pos
    for event in reversed(journal.events):
        if event.kind is EventKind.POSITION_UPDATE:
            pos = tuple(event.payload["pos"])
            break
    if pos is None:
        first_safe = next(a for a in layout.sorted_areas() if a.is_safe)
        pos = (
            (first_safe.rect.x0 + first_safe.rect.x1) / 2.0,
            (first_safe.rect.y0 + first_safe.rect.y1) / 2.0,
        )
    area = layout.by_id(classify_area(pos, layout))
    stats = performance(journal, window)

    lines = [
        f"participant area: {area.description}",
        f"trials: {stats.trial_count} | short-term error rate: "
        f"{stats.short_term_error_rate:.2f} | long-term error rate: "
        f"{stats.long_term_error_rate:.2f}",
        "recent events:",
    ]
    tail = journal.events[-max_events:]
    if tail:
        lines.extend(_render_event(e) for e in tail)
    else:
        lines.append("(none yet)")
    return "\n".join(lines)
