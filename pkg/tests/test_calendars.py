import pytest
from hypothesis import given, strategies as st

from meetmate.calendars import (
    BusyInterval,
    Person,
    Role,
    Universe,
    UnknownPersonError,
    commit_meeting,
)
from meetmate.timegrid import TimeSlot


def day0_universe(busy_minutes, owner="p1"):
    people = (
        Person("p1", "Anton", Role.MEMBER, "t1"),
        Person("p2", "Bella", Role.MANAGER, "t1"),
    )
    busy = tuple(BusyInterval(owner, TimeSlot.of(s, e)) for s, e in busy_minutes)
    return Universe(("t1",), people, busy)


def test_touching_slots_do_not_conflict():
    view = day0_universe([(9 * 60, 10 * 60)]).free_busy()
    assert view.is_free("p1", TimeSlot.of(10 * 60, 10 * 60 + 30))
    assert view.is_free("p1", TimeSlot.of(8 * 60 + 30, 9 * 60))
    assert not view.is_free("p1", TimeSlot.of(9 * 60 + 30, 10 * 60 + 30))


def test_unknown_person_raises():
    view = day0_universe([]).free_busy()
    with pytest.raises(UnknownPersonError):
        view.is_free("ghost", TimeSlot.of(0, 30))
    with pytest.raises(UnknownPersonError):
        view.id_for_name("Nobody")


def test_free_count_over_two_people():
    view = day0_universe([(9 * 60, 10 * 60)]).free_busy()
    assert view.free_count(["p1", "p2"], TimeSlot.of(9 * 60, 9 * 60 + 30)) == 1
    assert view.free_count(["p1", "p2"], TimeSlot.of(11 * 60, 11 * 60 + 30)) == 2


def test_gap_before_to_latest_busy_end():
    view = day0_universe([(9 * 60, 10 * 60)]).free_busy()
    assert view.gap_before("p1", TimeSlot.of(10 * 60 + 30, 11 * 60)) == 30
    assert view.gap_before("p1", TimeSlot.of(10 * 60, 10 * 60 + 30)) == 0


def test_gap_before_defaults_to_minutes_since_midnight():
    view = day0_universe([]).free_busy()
    assert view.gap_before("p1", TimeSlot.of(9 * 60, 9 * 60 + 30)) == 540


def test_gap_after_to_next_busy_start():
    view = day0_universe([(11 * 60, 12 * 60)]).free_busy()
    assert view.gap_after("p1", TimeSlot.of(10 * 60, 10 * 60 + 30)) == 30
    # nothing later that day: minutes until midnight
    assert view.gap_after("p1", TimeSlot.of(13 * 60, 13 * 60 + 30)) == 1440 - 13 * 60 - 30


def test_gap_queries_see_merged_intervals():
    # the inner interval's end (9:25) must not count as a busy boundary
    view = day0_universe([(9 * 60, 10 * 60), (9 * 60 + 15, 9 * 60 + 25)]).free_busy()
    assert view.gap_before("p1", TimeSlot.of(9 * 60 + 40, 10 * 60 + 40)) == 9 * 60 + 40


def test_interval_covering_the_slot_start_is_not_a_gap_neighbor():
    view = day0_universe([(9 * 60, 11 * 60)]).free_busy()
    # 10:00 falls inside 9-11; the covering run ends after the slot start
    assert view.gap_before("p1", TimeSlot.of(10 * 60, 10 * 60 + 30)) == 10 * 60


busy_lists = st.lists(
    st.tuples(st.integers(0, 1380), st.integers(1, 120)), min_size=0, max_size=8
)


def _bitmap(busy_minutes):
    covered = set()
    for s, d in busy_minutes:
        covered.update(range(s, min(s + d, 1440)))
    return covered


@given(busy=busy_lists, start=st.integers(0, 1380), dur=st.integers(1, 60))
def test_is_free_matches_minute_sweep(busy, start, dur):
    uni = day0_universe([(s, min(s + d, 1440)) for s, d in busy])
    covered = _bitmap(busy)
    expected = all(m not in covered for m in range(start, start + dur))
    assert uni.free_busy().is_free("p1", TimeSlot.of(start, start + dur)) == expected


@given(busy=busy_lists, start=st.integers(1, 1380))
def test_gap_before_matches_run_scan(busy, start):
    uni = day0_universe([(s, min(s + d, 1440)) for s, d in busy])
    covered = _bitmap(busy)
    expected = start  # minutes since midnight fallback
    for m in range(start - 1, -1, -1):
        if m in covered and (m + 1) not in covered:
            expected = start - (m + 1)
            break
    assert uni.free_busy().gap_before("p1", TimeSlot.of(start, start + 15)) == expected


@given(busy=busy_lists, end=st.integers(30, 1439))
def test_gap_after_matches_run_scan(busy, end):
    uni = day0_universe([(s, min(s + d, 1440)) for s, d in busy])
    covered = _bitmap(busy)
    expected = 1440 - end
    for m in range(end, 1440):
        if m in covered and (m == 0 or (m - 1) not in covered):
            expected = m - end
            break
    assert uni.free_busy().gap_after("p1", TimeSlot.of(end - 15, end)) == expected


def test_commit_meeting_books_all_attendees():
    uni = day0_universe([])
    slot = TimeSlot.of(10 * 60, 11 * 60)
    booked = commit_meeting(uni, ["p1", "p2"], slot)
    assert len(uni.busy) == 0  # original untouched
    assert not booked.free_busy().is_free("p1", slot)
    assert not booked.free_busy().is_free("p2", slot)


def test_commit_meeting_is_idempotent_per_slot():
    uni = day0_universe([])
    slot = TimeSlot.of(10 * 60, 11 * 60)
    once = commit_meeting(uni, ["p1"], slot)
    twice = commit_meeting(once, ["p1"], slot)
    assert len(twice.busy) == len(once.busy) == 1


def test_commit_meeting_rejects_unknown_attendee():
    with pytest.raises(UnknownPersonError):
        commit_meeting(day0_universe([]), ["ghost"], TimeSlot.of(0, 30))


def test_universe_json_round_trip():
    uni = day0_universe([(9 * 60, 10 * 60), (600, 660)])
    assert Universe.from_json_dict(uni.to_json_dict()) == uni


def test_busy_within_clips_to_window():
    view = day0_universe([(9 * 60, 11 * 60)]).free_busy()
    got = view.busy_within("p1", TimeSlot.of(10 * 60, 12 * 60))
    assert got == [TimeSlot.of(10 * 60, 11 * 60)]


def test_duplicate_person_ids_rejected():
    people = (
        Person("p1", "Anton", Role.MEMBER, "t1"),
        Person("p1", "Bella", Role.MEMBER, "t1"),
    )
    with pytest.raises(ValueError):
        Universe(("t1",), people, ())
