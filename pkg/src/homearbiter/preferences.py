"""Preference extraction from historical usage under a conflict window.

A resident's preference score for an item is the sum, over their past
events that overlap the conflict window and carry that item value, of each
event's temporal proximity to the window.  An event occupying exactly the
window weighs 1; partial overlaps weigh less, so ``k`` exact repeats plus
one partial overlap of weight ``p`` score ``k + p``.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .intervals import TimeOfDayInterval, covering_span, intervals_overlap
from .model import ServiceEvent, ConflictSituation, normalize_location


@dataclass
class OverlappingEvent:
    """A historical event paired with its (lazily computed) window weight."""

    event: ServiceEvent
    proximity: float | None = None

    def __post_init__(self) -> None:
        if self.proximity is not None and not 0.0 < self.proximity <= 1.0:
            raise ValueError(f"proximity must be in (0, 1], got {self.proximity}")


def temporal_proximity(intervals: Sequence[TimeOfDayInterval]) -> float:
    """Coincidence weight of a set of daily windows, in (0, 1].

    Defined as the total covered time of all intervals (overlaps counted with
    multiplicity) divided by ``span * n``, where ``span`` is the smallest arc
    containing every interval.  Equals 1 exactly when all intervals coincide;
    the more the intervals spread out, the closer to 0 it gets.
    """
    n = len(intervals)
    if n == 0:
        raise ValueError("temporal proximity of an empty interval set is undefined")
    total = sum(iv.duration() for iv in intervals)
    span = covering_span(intervals)
    return total / (span * n)


def event_window_proximity(event_interval: TimeOfDayInterval, window: TimeOfDayInterval) -> float:
    """Weight of one historical event against a conflict window.

    The pair proximity of the event's interval and the window: 1.0 when they
    coincide, strictly less otherwise.  Raises ``ValueError`` when the event
    does not overlap the window at all.
    """
    if not intervals_overlap(event_interval, window):
        raise ValueError(f"event interval {event_interval} does not overlap window {window}")
    return temporal_proximity((event_interval, window))


def frequency(items: Iterable[str], item: str) -> int:
    """Occurrence count of ``item`` in a sequence of item labels."""
    return sum(1 for x in items if x == item)


def find_overlapping_events(
    history: Sequence[ServiceEvent],
    window: TimeOfDayInterval,
    service_id: str,
    location: str,
) -> list[OverlappingEvent]:
    """All events of the service/location whose time of day touches the window.

    Matching is by time of day only: an event from any past date counts as
    long as its daily interval overlaps the window.  Proximities are left
    unset.
    """
    loc = normalize_location(location)
    return [
        OverlappingEvent(event=e)
        for e in history
        if e.service_id == service_id
        and e.location == loc
        and intervals_overlap(e.interval, window)
    ]


def weight_by_window(events: Iterable[OverlappingEvent], window: TimeOfDayInterval) -> list[OverlappingEvent]:
    return [replace(oe, proximity=event_window_proximity(oe.event.interval, window)) for oe in events]


def preference_score(overlapping: Sequence[OverlappingEvent], attribute: str, item: str) -> float:
    """Proximity-weighted usage count of ``item`` among weighted events."""
    score = 0.0
    for oe in overlapping:
        value = oe.event.attribute(attribute)
        if value is None or value.item_label() != item:
            continue
        if oe.proximity is None:
            raise ValueError(f"event {oe.event.event_id} has no proximity weight")
        score += oe.proximity
    return score


@dataclass(frozen=True)
class PreferenceTable:
    """Nonnegative scores per (resident, item) for one conflict window."""

    entries: dict[tuple[str, str], float]
    window: TimeOfDayInterval | None
    service_id: str

    def __post_init__(self) -> None:
        for (resident, item), score in self.entries.items():
            if score < 0:
                raise ValueError(f"negative score for ({resident}, {item})")

    def residents(self) -> tuple[str, ...]:
        return tuple(sorted({r for r, _ in self.entries}))

    def items(self) -> tuple[str, ...]:
        return tuple(sorted({i for _, i in self.entries}))

    def score(self, resident: str, item: str) -> float:
        return self.entries.get((resident, item), 0.0)

    def row(self, resident: str) -> dict[str, float]:
        return {i: s for (r, i), s in self.entries.items() if r == resident}

    def top_items(self, resident: str, count: int) -> tuple[str, ...]:
        row = sorted(self.row(resident).items(), key=lambda kv: (-kv[1], kv[0]))
        return tuple(item for item, _ in row[:count])

    def max_score(self, resident: str) -> float:
        row = self.row(resident)
        return max(row.values()) if row else 0.0

    def to_csv_text(self) -> str:
        lines = ["resident,item,score"]
        for (resident, item) in sorted(self.entries):
            lines.append(f"{resident},{item},{self.entries[(resident, item)]:.4f}")
        return "\n".join(lines) + "\n"


def filter_lookback(history: Sequence[ServiceEvent], lookback_days: int | None) -> list[ServiceEvent]:
    """Keep only events within the trailing ``lookback_days`` of the log."""
    events = list(history)
    if lookback_days is None or not events:
        return events
    horizon = max(e.date for e in events) - dt.timedelta(days=lookback_days - 1)
    return [e for e in events if e.date >= horizon]


def build_preference_table(
    history: Sequence[ServiceEvent],
    situation: ConflictSituation,
    lookback_days: int | None = None,
) -> PreferenceTable:
    """Score every item each situation member used in window-overlapping events.

    Residents with no matching history get an empty row (no entries).
    """
    scoped = filter_lookback(history, lookback_days)
    overlapping = weight_by_window(
        find_overlapping_events(scoped, situation.window, situation.service_id, situation.location),
        situation.window,
    )
    entries: dict[tuple[str, str], float] = {}
    members = set(situation.residents)
    for oe in overlapping:
        if oe.event.resident not in members:
            continue
        value = oe.event.attribute(situation.attribute)
        if value is None:
            continue
        key = (oe.event.resident, value.item_label())
        entries[key] = entries.get(key, 0.0) + oe.proximity
    return PreferenceTable(entries=entries, window=situation.window, service_id=situation.service_id)
