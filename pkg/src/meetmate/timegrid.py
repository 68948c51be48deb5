"""Minute-granularity time axis, candidate slot enumeration, and slot distance.

All times are minutes since a fixed local midnight epoch (2024-01-01, a Monday),
so weekday arithmetic is a plain mod 7 and serialized forms are naive local
ISO-8601 strings without an offset. Candidate meeting times start on absolute
15-minute clock boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime, timedelta

EPOCH = datetime(2024, 1, 1)  # Monday
MINUTES_PER_DAY = 24 * 60
STEP_MINUTES = 15

WEEKDAY_NAMES = ("MON", "TUE", "WED", "THU", "FRI", "SAT", "SUN")

BUSINESS_START_MINUTE = 8 * 60
BUSINESS_END_MINUTE = 18 * 60


class InvalidDurationError(ValueError):
    """Raised for durations that are not positive multiples of 15 minutes."""


@dataclass(frozen=True, order=True)
class Instant:
    """A point in time at minute granularity, non-negative from the epoch."""

    minutes: int

    def __post_init__(self) -> None:
        if self.minutes < 0:
            raise ValueError(f"instant before epoch: {self.minutes}")

    @property
    def minute_of_day(self) -> int:
        return self.minutes % MINUTES_PER_DAY

    @property
    def hour(self) -> int:
        return self.minute_of_day // 60

    @property
    def minute(self) -> int:
        return self.minutes % 60

    @property
    def day_number(self) -> int:
        """Whole calendar days since the epoch."""
        return self.minutes // MINUTES_PER_DAY

    @property
    def weekday(self) -> str:
        return WEEKDAY_NAMES[self.day_number % 7]

    def plus(self, minutes: int) -> "Instant":
        return Instant(self.minutes + minutes)

    def to_datetime(self) -> datetime:
        return EPOCH + timedelta(minutes=self.minutes)

    def isoformat(self) -> str:
        return self.to_datetime().strftime("%Y-%m-%dT%H:%M")

    @classmethod
    def from_iso(cls, text: str) -> "Instant":
        dt = datetime.strptime(text, "%Y-%m-%dT%H:%M")
        delta = dt - EPOCH
        return cls(delta.days * MINUTES_PER_DAY + delta.seconds // 60)

    @classmethod
    def from_parts(cls, day: int, hour: int = 0, minute: int = 0) -> "Instant":
        return cls(day * MINUTES_PER_DAY + hour * 60 + minute)


@dataclass(frozen=True, order=True)
class TimeSlot:
    """Half-open interval [start, end); touching slots do not overlap."""

    start: Instant
    end: Instant

    def __post_init__(self) -> None:
        if self.end <= self.start:
            raise ValueError(f"empty or inverted slot: {self.start}..{self.end}")

    @property
    def duration_minutes(self) -> int:
        return self.end.minutes - self.start.minutes

    def overlaps(self, other: "TimeSlot") -> bool:
        return self.start < other.end and other.start < self.end

    def contains(self, instant: Instant) -> bool:
        return self.start <= instant < self.end

    def isoformat(self) -> str:
        return f"{self.start.isoformat()}/{self.end.isoformat()}"

    @classmethod
    def of(cls, start_minutes: int, end_minutes: int) -> "TimeSlot":
        return cls(Instant(start_minutes), Instant(end_minutes))


@dataclass(frozen=True)
class TimeGrid:
    """Candidate slots of one duration, strictly increasing by start, inside a horizon."""

    slots: tuple[TimeSlot, ...]
    horizon: TimeSlot
    duration_minutes: int

    def __post_init__(self) -> None:
        prev = -1
        for s in self.slots:
            if s.duration_minutes != self.duration_minutes:
                raise ValueError("slot duration differs from grid duration")
            if s.start.minutes <= prev:
                raise ValueError("slots not strictly increasing by start")
            if s.start < self.horizon.start or s.end > self.horizon.end:
                raise ValueError("slot outside horizon")
            prev = s.start.minutes

    def __len__(self) -> int:
        return len(self.slots)


def enumerate_candidates(horizon: TimeSlot, duration_minutes: int) -> TimeGrid:
    """All duration-length slots starting on 15-minute boundaries within horizon.

    The grid may be empty (horizon shorter than the duration); that is not an
    error here, only at the point where somebody needs a non-empty grid.
    """
    if duration_minutes <= 0 or duration_minutes % STEP_MINUTES != 0:
        raise InvalidDurationError(
            f"duration must be a positive multiple of {STEP_MINUTES} minutes, "
            f"got {duration_minutes}"
        )
    # first boundary at or after horizon.start
    first = -(-horizon.start.minutes // STEP_MINUTES) * STEP_MINUTES
    slots = []
    start = first
    while start + duration_minutes <= horizon.end.minutes:
        slots.append(TimeSlot(Instant(start), Instant(start + duration_minutes)))
        start += STEP_MINUTES
    return TimeGrid(tuple(slots), horizon, duration_minutes)


def business_hours_grid(
    horizon: TimeSlot,
    duration_minutes: int,
    day_start_minute: int = BUSINESS_START_MINUTE,
    day_end_minute: int = BUSINESS_END_MINUTE,
    weekdays_only: bool = True,
) -> TimeGrid:
    """enumerate_candidates restricted to working hours on working days."""
    full = enumerate_candidates(horizon, duration_minutes)
    kept = []
    for s in full.slots:
        day_base = s.start.day_number * MINUTES_PER_DAY
        if s.start.minutes < day_base + day_start_minute:
            continue
        if s.end.minutes > day_base + day_end_minute:
            continue
        if weekdays_only and s.start.day_number % 7 >= 5:
            continue
        kept.append(s)
    return TimeGrid(tuple(kept), horizon, duration_minutes)


def distance(a: TimeSlot, b: TimeSlot) -> float:
    """log of the start-to-start gap in minutes, plus one; 0 iff same start."""
    return math.log(abs(a.start.minutes - b.start.minutes) + 1)
