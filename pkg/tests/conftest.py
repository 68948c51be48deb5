import pytest

from meetmate.calendars import BusyInterval, Person, Role, Universe
from meetmate.dsl import EvalContext
from meetmate.timegrid import TimeSlot


def small_universe() -> Universe:
    people = (
        Person("p1", "Anton", Role.MEMBER, "t1"),
        Person("p2", "Bella", Role.MANAGER, "t1"),
        Person("p3", "Chen", Role.MEMBER, "t1"),
        Person("p4", "Dana Holt", Role.MEMBER, "t1"),
    )
    busy = (
        BusyInterval("p1", TimeSlot.of(9 * 60, 10 * 60)),  # Anton, day 0 morning
        BusyInterval("p2", TimeSlot.of(12 * 60, 12 * 60 + 30)),  # Bella, day 0 lunch
        BusyInterval("p1", TimeSlot.of(1440 + 14 * 60, 1440 + 15 * 60)),  # Anton, day 1
    )
    return Universe(("t1",), people, busy)


@pytest.fixture
def universe() -> Universe:
    return small_universe()


@pytest.fixture
def make_ctx(universe):
    def _make(start_minutes=9 * 60, duration=30, horizon_days=5, attendees=("p2", "p1", "p3")):
        horizon = TimeSlot.of(0, horizon_days * 1440)
        return EvalContext(
            organizer="p2",
            attendees=tuple(attendees),
            duration_minutes=duration,
            candidate=TimeSlot.of(start_minutes, start_minutes + duration),
            free_busy=universe.free_busy(),
            horizon_start=horizon.start,
            now=horizon.start,
        )

    return _make
