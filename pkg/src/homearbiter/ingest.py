"""Log parsing, value stabilization, statistical binning, household merging.

Input formats
-------------
Event-log CSV (header required, UTF-8, LF):
    date,time,sensor,status,value,resident,location
with date ``YYYY-MM-DD``, time ``HH:MM:SS``, status one of ON/OFF/SET and a
free-form value field.  A value of the form ``name=val`` sets the attribute
``name``; a bare value sets the attribute ``value``; an empty value marks a
plain activation (attribute ``state=on``).  Values that parse as numbers
become numeric attributes, everything else is categorical.

Request file: one JSON object per line with keys request_id, service_id,
attribute, value, start, end (HH:MM:SS), location, resident.

Ratings table CSV: ``resident,item,score`` with scores in [1, 100], loaded
directly as a preference table.
"""

from __future__ import annotations

import bisect
import csv
import datetime as dt
import hashlib
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DataError, ParseError
from .intervals import SECONDS_PER_DAY, TimeOfDayInterval, format_hms, parse_hms
from .model import AttributeValue, ServiceEvent, ServiceRequest, normalize_location

LOG_COLUMNS = ["date", "time", "sensor", "status", "value", "resident", "location"]
END_OF_DAY = SECONDS_PER_DAY - 1
STORE_SCHEMA = "homearbiter-store/1"
PRNG_NAME = "numpy-randomstate-mt19937/v1"


@dataclass(frozen=True)
class RawLogRecord:
    date: dt.date
    time: int  # seconds since midnight
    sensor: str
    status: str
    value: str
    resident: str
    location: str


@dataclass(frozen=True)
class StabilizationConfig:
    """Fold bursts of value changes closer together than ``settling_window``."""

    settling_window: int = 60

    def __post_init__(self) -> None:
        if self.settling_window <= 0:
            raise ValueError("settling_window must be positive")


@dataclass(frozen=True)
class BinningSpec:
    """Cut points for one numeric attribute.

    ``boundaries`` are left-inclusive lower bounds of the next bin: a value
    lands in bin ``i`` when ``boundaries[i-1] <= value < boundaries[i]``
    (first bin open below, last open above).  ``lo``/``hi`` record the
    observed range so out-of-range inputs can be flagged.
    """

    attribute: str
    bin_count: int
    boundaries: tuple[float, ...]
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if self.bin_count < 1:
            raise ValueError("bin_count must be positive")
        if len(self.boundaries) != self.bin_count - 1:
            raise ValueError("need bin_count - 1 boundaries")
        if any(b2 <= b1 for b1, b2 in zip(self.boundaries, self.boundaries[1:])):
            raise ValueError("boundaries must be strictly increasing")

    def bin_index(self, value: float) -> int:
        return bisect.bisect_right(self.boundaries, value)

    def bin_bounds(self, index: int) -> tuple[float, float]:
        lower = self.lo if index == 0 else self.boundaries[index - 1]
        upper = self.hi if index == self.bin_count - 1 else self.boundaries[index]
        return (lower, upper)


@dataclass
class ParseResult:
    events: list[ServiceEvent]
    warnings: list[str]


def _parse_attribute(raw: str) -> tuple[str, AttributeValue]:
    raw = raw.strip()
    if not raw:
        return ("state", AttributeValue.categorical("on"))
    if "=" in raw:
        name, _, val = raw.partition("=")
        name = name.strip() or "value"
        raw = val.strip()
    else:
        name = "value"
    try:
        return (name, AttributeValue.numeric(float(raw)))
    except ValueError:
        return (name, AttributeValue.categorical(raw))


def _read_log_records(path: str | Path, resident: str | None) -> Iterable[RawLogRecord]:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            return
        if [h.strip() for h in header] != LOG_COLUMNS:
            raise ParseError(f"expected header {','.join(LOG_COLUMNS)!r}", path=str(path), line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(LOG_COLUMNS):
                raise ParseError(f"expected {len(LOG_COLUMNS)} fields, got {len(row)}", path=str(path), line=lineno)
            date_s, time_s, sensor, status, value, row_resident, location = (f.strip() for f in row)
            try:
                date = dt.date.fromisoformat(date_s)
                time = parse_hms(time_s)
            except ValueError as exc:
                raise ParseError(str(exc), path=str(path), line=lineno) from exc
            if not sensor:
                raise ParseError("empty sensor label", path=str(path), line=lineno)
            status = status.upper()
            if status not in ("ON", "OFF", "SET"):
                raise ParseError(f"unknown status {status!r}", path=str(path), line=lineno)
            effective_resident = resident if resident is not None else row_resident
            if not effective_resident:
                raise ParseError("no resident id (column empty and none supplied)", path=str(path), line=lineno)
            yield RawLogRecord(date, time, sensor, status, value, effective_resident, location)


class _OpenSession:
    __slots__ = ("date", "start", "attributes", "location")

    def __init__(self, date: dt.date, start: int, attributes: dict, location: str):
        self.date = date
        self.start = start
        self.attributes = attributes
        self.location = location


def parse_event_log(
    path: str | Path,
    resident: str | None = None,
    location_map: Mapping[str, str] | None = None,
) -> ParseResult:
    """Fold ON/OFF/SET records into service events.

    ON opens a session per (sensor, resident); SET closes the running value
    segment and starts a new one with the changed attribute; OFF closes the
    session.  A session left open at a date change or at end of file is
    closed at 23:59:59 and reported in the warnings list.  An OFF on the next
    calendar day at an earlier time of day closes the session as an
    overnight, wrap-around event.
    """
    location_map = dict(location_map or {})
    events: list[ServiceEvent] = []
    warnings: list[str] = []
    open_sessions: dict[tuple[str, str], _OpenSession] = {}
    counter = 0

    def effective_location(sensor: str, row_location: str) -> str:
        return normalize_location(location_map.get(sensor, row_location))

    def emit(sensor: str, res: str, session: _OpenSession, end: int, wraps: bool) -> None:
        nonlocal counter
        if not wraps and end <= session.start:
            if end == session.start:
                return  # zero-length segment: value changed within one second
            raise ParseError(f"event for {sensor} ends before it starts", path=str(path))
        counter += 1
        events.append(
            ServiceEvent(
                event_id=f"{res}-{counter:06d}",
                service_id=sensor,
                attributes=dict(session.attributes),
                date=session.date,
                interval=TimeOfDayInterval(session.start, end),
                location=session.location,
                resident=res,
            )
        )

    def close_at_day_end(key: tuple[str, str], session: _OpenSession) -> None:
        emit(key[0], key[1], session, END_OF_DAY, wraps=False)
        warnings.append(
            f"{key[0]}/{key[1]}: ON at {session.date} {format_hms(session.start)} without OFF; closed at end of day"
        )

    for rec in _read_log_records(path, resident):
        key = (rec.sensor, rec.resident)
        session = open_sessions.get(key)
        if session is not None and rec.date != session.date:
            next_day = session.date + dt.timedelta(days=1)
            if rec.status == "OFF" and rec.date == next_day and rec.time < session.start:
                emit(rec.sensor, rec.resident, session, rec.time, wraps=True)
                del open_sessions[key]
                continue
            close_at_day_end(key, session)
            del open_sessions[key]
            session = None
        if rec.status == "ON":
            if session is not None:
                emit(rec.sensor, rec.resident, session, rec.time, wraps=False)
                warnings.append(f"{rec.sensor}/{rec.resident}: ON at {rec.date} {format_hms(rec.time)} while already on")
            attrs = dict([_parse_attribute(rec.value)])
            open_sessions[key] = _OpenSession(rec.date, rec.time, attrs, effective_location(rec.sensor, rec.location))
        elif rec.status == "SET":
            if session is None:
                warnings.append(f"{rec.sensor}/{rec.resident}: SET at {rec.date} {format_hms(rec.time)} while off; ignored")
                continue
            emit(rec.sensor, rec.resident, session, rec.time, wraps=False)
            name, value = _parse_attribute(rec.value)
            attrs = dict(session.attributes)
            attrs[name] = value
            open_sessions[key] = _OpenSession(rec.date, rec.time, attrs, session.location)
        else:  # OFF
            if session is None:
                warnings.append(f"{rec.sensor}/{rec.resident}: OFF at {rec.date} {format_hms(rec.time)} while not on; ignored")
                continue
            emit(rec.sensor, rec.resident, session, rec.time, wraps=False)
            del open_sessions[key]

    for key in sorted(open_sessions):
        close_at_day_end(key, open_sessions[key])

    events.sort(key=lambda e: (e.date, e.interval.start, e.resident, e.event_id))
    return ParseResult(events=events, warnings=warnings)


def stabilize(events: Sequence[ServiceEvent], cfg: StabilizationConfig) -> list[ServiceEvent]:
    """Keep only the settled value of each burst of rapid changes.

    Within one (resident, service, location, day), consecutive events whose
    start times are closer than the settling window form a run; only the
    run's final event survives, its interval stretched back to the first
    change.  Idempotent: surviving starts are at least a window apart.
    """
    groups: dict[tuple, list[ServiceEvent]] = {}
    for e in events:
        groups.setdefault((e.resident, e.service_id, e.location, e.date), []).append(e)
    out: list[ServiceEvent] = []
    for key in groups:
        run: list[ServiceEvent] = []
        for e in sorted(groups[key], key=lambda e: (e.interval.start, e.event_id)):
            if run and e.interval.start - run[-1].interval.start < cfg.settling_window:
                run.append(e)
            else:
                if run:
                    out.append(_fold_run(run))
                run = [e]
        if run:
            out.append(_fold_run(run))
    out.sort(key=lambda e: (e.date, e.interval.start, e.resident, e.event_id))
    return out


def _fold_run(run: list[ServiceEvent]) -> ServiceEvent:
    if len(run) == 1:
        return run[0]
    survivor = run[-1]
    return replace(survivor, interval=TimeOfDayInterval(run[0].interval.start, survivor.interval.end))


def compute_bins(values: Sequence[float], bin_count: int, attribute: str = "value") -> BinningSpec:
    """Optimal 1-D partition of the values into ``bin_count`` groups.

    Minimizes the total within-bin sum of squared deviations from bin means
    by exact dynamic programming over the sorted distinct values (weighted by
    multiplicity).  Ties between equally good partitions break toward the
    earliest split.
    """
    if bin_count < 1:
        raise ValueError("bin_count must be positive")
    vals = sorted(float(v) for v in values)
    if len(vals) < bin_count:
        raise DataError(f"attribute {attribute!r}: {len(vals)} values cannot fill {bin_count} bins")
    distinct: list[float] = []
    weights: list[int] = []
    for v in vals:
        if distinct and v == distinct[-1]:
            weights[-1] += 1
        else:
            distinct.append(v)
            weights.append(1)
    d = len(distinct)
    if d < bin_count:
        raise DataError(f"attribute {attribute!r}: {d} distinct values cannot fill {bin_count} bins")

    w = np.asarray(weights, dtype=np.float64)
    x = np.asarray(distinct, dtype=np.float64)
    cw = np.concatenate([[0.0], np.cumsum(w)])
    cs = np.concatenate([[0.0], np.cumsum(w * x)])
    cq = np.concatenate([[0.0], np.cumsum(w * x * x)])

    def sse(i: int, j: int) -> float:
        # weighted SSE of distinct[i..j] inclusive
        ww = cw[j + 1] - cw[i]
        ss = cs[j + 1] - cs[i]
        qq = cq[j + 1] - cq[i]
        return max(0.0, qq - ss * ss / ww)

    inf = math.inf
    cost = [[inf] * d for _ in range(bin_count + 1)]
    prev = [[-1] * d for _ in range(bin_count + 1)]
    for j in range(d):
        cost[1][j] = sse(0, j)
    for m in range(2, bin_count + 1):
        for j in range(m - 1, d):
            best, arg = inf, -1
            for i in range(m - 1, j + 1):
                c = cost[m - 1][i - 1] + sse(i, j)
                if c < best:
                    best, arg = c, i
            cost[m][j] = best
            prev[m][j] = arg

    cuts: list[int] = []
    j = d - 1
    for m in range(bin_count, 1, -1):
        i = prev[m][j]
        cuts.append(i)
        j = i - 1
    cuts.reverse()
    boundaries = tuple(distinct[i] for i in cuts)
    return BinningSpec(attribute=attribute, bin_count=bin_count, boundaries=boundaries, lo=vals[0], hi=vals[-1])


def binning_sse(values: Sequence[float], spec: BinningSpec) -> float:
    """Total within-bin SSE of the values under the spec's boundaries."""
    groups: dict[int, list[float]] = {}
    for v in values:
        groups.setdefault(spec.bin_index(float(v)), []).append(float(v))
    total = 0.0
    for vs in groups.values():
        mean = sum(vs) / len(vs)
        total += sum((v - mean) ** 2 for v in vs)
    return total


def bin_value(value: float, spec: BinningSpec) -> tuple[AttributeValue, str | None]:
    """Bin a numeric value; out-of-observed-range values clamp with a warning."""
    warning = None
    if value < spec.lo or value > spec.hi:
        warning = f"attribute {spec.attribute!r}: value {value:g} outside observed range [{spec.lo:g}, {spec.hi:g}]; clamped"
    index = min(spec.bin_index(value), spec.bin_count - 1)
    return AttributeValue.binned(index, spec.bin_bounds(index)), warning


def apply_bins(event: ServiceEvent, spec: BinningSpec, warnings: list[str] | None = None) -> ServiceEvent:
    """Replace the event's numeric attribute named by the spec with its bin."""
    current = event.attribute(spec.attribute)
    if current is None or current.kind != "numeric":
        raise ValueError(f"event {event.event_id} has no numeric attribute {spec.attribute!r}")
    binned, warning = bin_value(current.value, spec)
    if warning and warnings is not None:
        warnings.append(f"event {event.event_id}: {warning}")
    attrs = dict(event.attributes)
    attrs[spec.attribute] = binned
    return replace(event, attributes=attrs)


def merge_households(logs: Sequence[tuple[str, Sequence[ServiceEvent]]]) -> list[ServiceEvent]:
    """Overlay per-resident logs into one household log sorted by (date, start)."""
    seen: set[str] = set()
    merged: list[ServiceEvent] = []
    for resident, events in logs:
        if resident in seen:
            raise DataError(f"duplicate resident id {resident!r} in household merge")
        seen.add(resident)
        for e in events:
            if e.resident != resident:
                raise DataError(f"event {e.event_id} belongs to {e.resident!r}, not {resident!r}")
            merged.append(e)
    merged.sort(key=lambda e: (e.date, e.interval.start, e.resident, e.event_id))
    return merged


def augment_channels(
    events: Sequence[ServiceEvent],
    channels: Sequence[str],
    seed: int,
    service_id: str = "TV",
    attribute: str = "channel",
) -> list[ServiceEvent]:
    """Assign a uniformly random channel to TV events that lack one.

    Draws come from a fixed, versioned generator (``PRNG_NAME``) seeded with
    ``seed``, so the same seed always produces the same augmented log.
    Events already carrying the attribute pass through untouched.
    """
    if not channels:
        raise ValueError("channels must be non-empty")
    rng = np.random.RandomState(seed)
    out: list[ServiceEvent] = []
    for e in events:
        if e.service_id == service_id and e.attribute(attribute) is None:
            pick = channels[int(rng.randint(0, len(channels)))]
            attrs = dict(e.attributes)
            attrs[attribute] = AttributeValue.categorical(pick)
            out.append(replace(e, attributes=attrs))
        else:
            out.append(e)
    return out


# ---------------------------------------------------------------------------
# Requests

def load_requests(path: str | Path, bin_specs: Mapping[tuple[str, str], BinningSpec] | None = None) -> list[ServiceRequest]:
    """Read a JSON-lines request file.

    When ``bin_specs`` (keyed by (service_id, attribute)) is given, numeric
    request values are mapped into the matching bins so requested items live
    in the same item space as a binned history.
    """
    path = Path(path)
    requests: list[ServiceRequest] = []
    with path.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"bad JSON: {exc.msg}", path=str(path), line=lineno) from exc
            try:
                raw_value = obj["value"]
                if isinstance(raw_value, (int, float)) and not isinstance(raw_value, bool):
                    value = AttributeValue.numeric(float(raw_value))
                else:
                    value = AttributeValue.categorical(str(raw_value))
                service_id = str(obj["service_id"])
                attribute = str(obj["attribute"])
                if value.kind == "numeric" and bin_specs:
                    spec = bin_specs.get((service_id, attribute))
                    if spec is not None:
                        value, _ = bin_value(value.value, spec)
                requests.append(
                    ServiceRequest(
                        request_id=str(obj["request_id"]),
                        service_id=service_id,
                        attribute=attribute,
                        value=value,
                        interval=TimeOfDayInterval(parse_hms(obj["start"]), parse_hms(obj["end"])),
                        location=str(obj["location"]),
                        resident=str(obj["resident"]),
                    )
                )
            except KeyError as exc:
                raise ParseError(f"missing field {exc.args[0]!r}", path=str(path), line=lineno) from exc
            except ValueError as exc:
                raise ParseError(str(exc), path=str(path), line=lineno) from exc
    ids = [r.request_id for r in requests]
    if len(set(ids)) != len(ids):
        raise DataError(f"{path}: duplicate request ids")
    return requests


# ---------------------------------------------------------------------------
# Canonical event store

def _event_to_json(e: ServiceEvent) -> dict:
    return {
        "event_id": e.event_id,
        "service_id": e.service_id,
        "attributes": {name: e.attributes[name].to_json() for name in sorted(e.attributes)},
        "date": e.date.isoformat(),
        "start": e.interval.start,
        "end": e.interval.end,
        "location": e.location,
        "resident": e.resident,
    }


def _event_from_json(obj: Mapping) -> ServiceEvent:
    return ServiceEvent(
        event_id=obj["event_id"],
        service_id=obj["service_id"],
        attributes={k: AttributeValue.from_json(v) for k, v in obj["attributes"].items()},
        date=dt.date.fromisoformat(obj["date"]),
        interval=TimeOfDayInterval(obj["start"], obj["end"]),
        location=obj["location"],
        resident=obj["resident"],
    )


def dumps_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


@dataclass
class EventStore:
    events: list[ServiceEvent]
    header: dict

    def bin_specs(self) -> dict[tuple[str, str], BinningSpec]:
        specs = {}
        for entry in self.header.get("bins", []):
            spec = BinningSpec(
                attribute=entry["attribute"],
                bin_count=entry["bin_count"],
                boundaries=tuple(entry["boundaries"]),
                lo=entry["lo"],
                hi=entry["hi"],
            )
            specs[(entry["service_id"], entry["attribute"])] = spec
        return specs


def store_to_text(events: Sequence[ServiceEvent], header: Mapping) -> str:
    header = {"schema": STORE_SCHEMA, **header}
    ordered = sorted(events, key=lambda e: (e.date, e.interval.start, e.resident, e.event_id))
    lines = [dumps_json(header)]
    lines.extend(dumps_json(_event_to_json(e)) for e in ordered)
    return "\n".join(lines) + "\n"


def write_store(path: str | Path, events: Sequence[ServiceEvent], header: Mapping) -> None:
    Path(path).write_text(store_to_text(events, header), encoding="utf-8", newline="\n")


def load_store(path: str | Path) -> EventStore:
    path = Path(path)
    events: list[ServiceEvent] = []
    header: dict = {}
    with path.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"bad JSON: {exc.msg}", path=str(path), line=lineno) from exc
            if lineno == 1:
                if obj.get("schema") != STORE_SCHEMA:
                    raise ParseError(f"unknown store schema {obj.get('schema')!r}", path=str(path), line=1)
                header = obj
                continue
            try:
                events.append(_event_from_json(obj))
            except (KeyError, ValueError) as exc:
                raise ParseError(f"bad event record: {exc}", path=str(path), line=lineno) from exc
    return EventStore(events=events, header=header)


# ---------------------------------------------------------------------------
# Ratings table import

def load_ratings_table(path: str | Path):
    """Load a ``resident,item,score`` CSV directly as a preference table."""
    from .preferences import PreferenceTable

    path = Path(path)
    entries: dict[tuple[str, str], float] = {}
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty ratings file", path=str(path), line=1)
        if [h.strip() for h in header] != ["resident", "item", "score"]:
            raise ParseError("expected header 'resident,item,score'", path=str(path), line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 3:
                raise ParseError(f"expected 3 fields, got {len(row)}", path=str(path), line=lineno)
            resident, item, score_s = (f.strip() for f in row)
            try:
                score = float(score_s)
            except ValueError as exc:
                raise ParseError(f"bad score {score_s!r}", path=str(path), line=lineno) from exc
            if not 1.0 <= score <= 100.0:
                raise ParseError(f"score {score:g} outside [1, 100]", path=str(path), line=lineno)
            if (resident, item) in entries:
                raise ParseError(f"duplicate rating for ({resident}, {item})", path=str(path), line=lineno)
            entries[(resident, item)] = score
    return PreferenceTable(entries=entries, window=None, service_id="ratings")


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    digest.update(Path(path).read_bytes())
    return digest.hexdigest()
