"""Time-of-day intervals and their overlap arithmetic.

All times are integer seconds since midnight at 1-second resolution.
An interval whose end is smaller than its start wraps around midnight;
internally every interval is handled as one or two non-wrapping segments
``(start, end)`` with ``end`` in ``(start, 86400]``, so the rest of the
package only ever sees ordinary intervals.  Overlap uses open-interval
semantics: intervals that merely touch at an endpoint do not overlap.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

SECONDS_PER_DAY = 86400


def parse_hms(text: str) -> int:
    """Parse ``HH:MM:SS`` into seconds since midnight."""
    parts = text.strip().split(":")
    if len(parts) != 3:
        raise ValueError(f"expected HH:MM:SS, got {text!r}")
    h, m, s = (int(p) for p in parts)
    if not (0 <= h <= 23 and 0 <= m <= 59 and 0 <= s <= 59):
        raise ValueError(f"time of day out of range: {text!r}")
    return h * 3600 + m * 60 + s


def format_hms(seconds: int) -> str:
    """Format seconds since midnight as ``HH:MM:SS``."""
    if not 0 <= seconds < SECONDS_PER_DAY:
        raise ValueError(f"seconds out of range: {seconds}")
    return f"{seconds // 3600:02d}:{seconds % 3600 // 60:02d}:{seconds % 60:02d}"


@dataclass(frozen=True)
class TimeOfDayInterval:
    """A daily time window ``[start, end]`` in seconds since midnight.

    ``end < start`` denotes a wrap around midnight (e.g. 23:00 -> 01:00).
    Zero-length intervals are rejected: a window must contain time.
    """

    start: int
    end: int

    def __post_init__(self) -> None:
        for name, value in (("start", self.start), ("end", self.end)):
            if not isinstance(value, int):
                raise ValueError(f"{name} must be an integer second, got {value!r}")
            if not 0 <= value <= SECONDS_PER_DAY - 1:
                raise ValueError(f"{name} must be in [0, 86399], got {value}")
        if self.start == self.end:
            raise ValueError("zero-length interval")

    @classmethod
    def from_hms(cls, start: str, end: str) -> "TimeOfDayInterval":
        return cls(parse_hms(start), parse_hms(end))

    @property
    def wraps(self) -> bool:
        return self.end < self.start

    def segments(self) -> tuple[tuple[int, int], ...]:
        """Non-wrapping segments ``(s, e)`` with ``e`` in ``(s, 86400]``."""
        if not self.wraps:
            return ((self.start, self.end),)
        if self.end == 0:
            return ((self.start, SECONDS_PER_DAY),)
        return ((self.start, SECONDS_PER_DAY), (0, self.end))

    def duration(self) -> int:
        return sum(e - s for s, e in self.segments())

    def covers(self, start: int, end: int) -> bool:
        """True when the arc ``(start, end)`` lies inside this interval."""
        return any(s <= start and end <= e for s, e in self.segments())

    def __str__(self) -> str:
        return f"[{format_hms(self.start)},{format_hms(self.end)}]"


def _segment_overlap(a: tuple[int, int], b: tuple[int, int]) -> int:
    return max(0, min(a[1], b[1]) - max(a[0], b[0]))


def overlap_length(a: TimeOfDayInterval, b: TimeOfDayInterval) -> int:
    """Length in seconds of the common part of two daily windows.

    Symmetric, nonnegative, and zero for windows that only touch at an
    endpoint.
    """
    return sum(_segment_overlap(sa, sb) for sa in a.segments() for sb in b.segments())


def _interval_from_segment(s: int, e: int) -> TimeOfDayInterval:
    return TimeOfDayInterval(s, e % SECONDS_PER_DAY)


def intersect(a: TimeOfDayInterval, b: TimeOfDayInterval) -> TimeOfDayInterval | None:
    """Common sub-window of two intervals, or ``None`` when they do not overlap.

    With wrapping inputs the true intersection can consist of two arcs; the
    longest one is returned (ties: the one starting earliest).
    """
    pieces = []
    for sa in a.segments():
        for sb in b.segments():
            s, e = max(sa[0], sb[0]), min(sa[1], sb[1])
            if e > s:
                pieces.append((s, e))
    if not pieces:
        return None
    pieces.sort()
    # Join pieces that are contiguous across midnight (…,86400) + (0,…).
    if len(pieces) > 1 and pieces[0][0] == 0 and pieces[-1][1] == SECONDS_PER_DAY:
        first, last = pieces[0], pieces[-1]
        merged = (last[0], last[1] + first[1])  # end measured past midnight
        rest = pieces[1:-1]
        candidates = rest + [merged]
    else:
        candidates = pieces
    best = max(candidates, key=lambda p: (p[1] - p[0], -p[0]))
    return _interval_from_segment(best[0], best[1])


def covering_span(intervals: Sequence[TimeOfDayInterval]) -> int:
    """Length of the smallest circular arc containing every interval.

    For a set whose hull does not cross midnight this equals
    ``max(end) - min(start)``, the plain linear span.
    """
    segs: list[tuple[int, int]] = []
    for iv in intervals:
        segs.extend(iv.segments())
    segs.sort()
    merged: list[list[int]] = []
    for s, e in segs:
        if merged and s <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], e)
        else:
            merged.append([s, e])
    if len(merged) > 1 and merged[0][0] == 0 and merged[-1][1] == SECONDS_PER_DAY:
        merged[0][0] = merged[-1][0] - SECONDS_PER_DAY
        merged.pop()
    covered = sum(e - s for s, e in merged)
    if covered >= SECONDS_PER_DAY:
        return SECONDS_PER_DAY
    max_gap = 0
    for (s1, e1), (s2, e2) in zip(merged, merged[1:]):
        max_gap = max(max_gap, s2 - e1)
    wrap_gap = merged[0][0] + SECONDS_PER_DAY - merged[-1][1]
    max_gap = max(max_gap, wrap_gap)
    return SECONDS_PER_DAY - max_gap


def intervals_overlap(a: TimeOfDayInterval, b: TimeOfDayInterval) -> bool:
    return overlap_length(a, b) > 0
