import pytest
from hypothesis import given, strategies as st

from homearbiter.intervals import (
    SECONDS_PER_DAY,
    TimeOfDayInterval,
    covering_span,
    format_hms,
    intersect,
    overlap_length,
    parse_hms,
)

from conftest import interval


def test_parse_format_roundtrip():
    assert parse_hms("20:00:00") == 72000
    assert parse_hms("00:00:00") == 0
    assert parse_hms("23:59:59") == 86399
    assert format_hms(72000) == "20:00:00"
    for text in ("07:03:59", "00:00:01", "12:30:00"):
        assert format_hms(parse_hms(text)) == text


def test_parse_rejects_garbage():
    for bad in ("24:00:00", "aa:bb:cc", "20:00", "-1:00:00", "20:61:00"):
        with pytest.raises(ValueError):
            parse_hms(bad)


def test_zero_length_rejected():
    with pytest.raises(ValueError):
        TimeOfDayInterval(100, 100)


def test_bounds_enforced():
    with pytest.raises(ValueError):
        TimeOfDayInterval(-1, 100)
    with pytest.raises(ValueError):
        TimeOfDayInterval(0, SECONDS_PER_DAY)


def test_overlap_golden_quarter_hour():
    a = interval("20:00:00", "21:00:00")
    b = interval("20:45:00", "21:45:00")
    assert overlap_length(a, b) == 900


def test_overlap_identical():
    a = interval("20:00:00", "20:30:00")
    assert overlap_length(a, a) == 1800


def test_overlap_disjoint():
    assert overlap_length(interval("08:00:00", "09:00:00"), interval("10:00:00", "11:00:00")) == 0


def test_overlap_touching_is_zero():
    assert overlap_length(interval("08:00:00", "09:00:00"), interval("09:00:00", "10:00:00")) == 0


def test_overlap_wraparound():
    wrap = interval("23:00:00", "01:00:00")
    assert wrap.wraps
    assert wrap.duration() == 7200
    assert overlap_length(wrap, interval("00:30:00", "02:00:00")) == 1800


def test_intersect_golden():
    got = intersect(interval("20:00:00", "21:00:00"), interval("20:45:00", "21:45:00"))
    assert (got.start, got.end) == (parse_hms("20:45:00"), parse_hms("21:00:00"))


def test_intersect_identity_and_empty():
    a = interval("20:00:00", "20:30:00")
    assert intersect(a, a) == a
    assert intersect(interval("08:00:00", "09:00:00"), interval("10:00:00", "11:00:00")) is None


def test_intersect_across_midnight():
    got = intersect(interval("23:00:00", "01:00:00"), interval("23:30:00", "01:30:00"))
    assert (got.start, got.end) == (parse_hms("23:30:00"), parse_hms("01:00:00"))
    assert got.wraps


def test_intersect_disconnected_returns_longest_arc():
    # [22:00 -> 02:00] meets [01:00 -> 23:00] in two arcs: [22:00,23:00] and
    # [01:00,02:00]; both are one hour, the earlier-start one wins the tie.
    got = intersect(interval("22:00:00", "02:00:00"), interval("01:00:00", "23:00:00"))
    assert (got.start, got.end) == (parse_hms("01:00:00"), parse_hms("02:00:00"))


def _intervals(draw_wrap: bool = True):
    def build(pair):
        s, e = pair
        return TimeOfDayInterval(s, e)

    base = st.tuples(st.integers(0, SECONDS_PER_DAY - 1), st.integers(0, SECONDS_PER_DAY - 1)).filter(
        lambda p: p[0] != p[1]
    )
    if not draw_wrap:
        base = base.filter(lambda p: p[0] < p[1])
    return base.map(build)


@given(a=_intervals(), b=_intervals())
def test_overlap_symmetric(a, b):
    assert overlap_length(a, b) == overlap_length(b, a)


@given(a=_intervals())
def test_overlap_self_is_duration(a):
    assert overlap_length(a, a) == a.duration()


@given(a=_intervals(), b=_intervals())
def test_overlap_bounded_by_durations(a, b):
    assert overlap_length(a, b) <= min(a.duration(), b.duration())


@given(a=_intervals(), b=_intervals())
def test_intersect_length_matches_overlap_when_connected(a, b):
    got = intersect(a, b)
    if got is None:
        assert overlap_length(a, b) == 0
    else:
        assert got.duration() <= overlap_length(a, b)
        assert overlap_length(got, a) == got.duration()
        assert overlap_length(got, b) == got.duration()


@given(a=_intervals())
def test_covering_span_of_single_interval(a):
    assert covering_span([a]) == a.duration()
