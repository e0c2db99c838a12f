import datetime as dt

import pytest

from homearbiter.intervals import TimeOfDayInterval, parse_hms
from homearbiter.model import AttributeValue, ServiceEvent, ServiceRequest


def hms(text: str) -> int:
    return parse_hms(text)


def interval(start: str, end: str) -> TimeOfDayInterval:
    return TimeOfDayInterval.from_hms(start, end)


_EVENT_COUNTER = [0]


def make_event(
    resident: str,
    start: str,
    end: str,
    channel: str | None = "Ch1",
    service: str = "TV",
    location: str = "living room",
    date: dt.date = dt.date(2026, 1, 1),
    attributes: dict | None = None,
    event_id: str | None = None,
) -> ServiceEvent:
    _EVENT_COUNTER[0] += 1
    if attributes is None:
        attributes = {"channel": AttributeValue.categorical(channel)} if channel else {}
    return ServiceEvent(
        event_id=event_id or f"ev-{_EVENT_COUNTER[0]:05d}",
        service_id=service,
        attributes=attributes,
        date=date,
        interval=interval(start, end),
        location=location,
        resident=resident,
    )


def make_request(
    resident: str,
    value: str,
    start: str = "20:00:00",
    end: str = "20:30:00",
    service: str = "TV",
    attribute: str = "channel",
    location: str = "living room",
    request_id: str | None = None,
    numeric: bool = False,
) -> ServiceRequest:
    _EVENT_COUNTER[0] += 1
    av = AttributeValue.numeric(float(value)) if numeric else AttributeValue.categorical(value)
    return ServiceRequest(
        request_id=request_id or f"req-{_EVENT_COUNTER[0]:05d}",
        service_id=service,
        attribute=attribute,
        value=av,
        interval=interval(start, end),
        location=location,
        resident=resident,
    )


@pytest.fixture
def reference_history():
    from homearbiter.demo import reference_history as build

    return build()


@pytest.fixture
def reference_requests():
    from homearbiter.demo import reference_requests as build

    return build()


@pytest.fixture
def reference_situation(reference_requests):
    from homearbiter.detect import detect_conflicts

    situations = detect_conflicts(reference_requests)
    assert len(situations) == 1
    return situations[0]


@pytest.fixture
def reference_table(reference_history, reference_situation):
    from homearbiter.preferences import build_preference_table

    return build_preference_table(reference_history, reference_situation)
