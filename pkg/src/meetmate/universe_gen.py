"""Seeded generator for the synthetic organization and its scheduling work.

Everything here is a pure function of (params, seed): people and team
assignments, their busy calendars, and the meeting instances that need
scheduling. Names come from fixed word lists rather than anything learned,
so output is reproducible offline; the lists are audited (by test) to avoid
words that the capability checker or cue matchers would react to.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import Sequence

from .calendars import BusyInterval, Person, Role, Universe
from .timegrid import (
    BUSINESS_END_MINUTE,
    BUSINESS_START_MINUTE,
    MINUTES_PER_DAY,
    STEP_MINUTES,
    Instant,
    TimeSlot,
)

FIRST_NAMES = (
    "Amara", "Bela", "Boris", "Clara", "Daniel", "Elif", "Frida", "Gustav",
    "Hana", "Igor", "Jonas", "Katya", "Lena", "Marco", "Nadia", "Oskar",
    "Petra", "Quinn", "Rosa", "Stefan", "Talia", "Ulrich", "Vera", "Wendel",
    "Xenia", "Yusuf", "Zofia", "Arne", "Bianca", "Casper", "Dora", "Emil",
    "Greta", "Henrik", "Ines", "Jorge", "Kira", "Lars", "Mona", "Nils",
)
LAST_NAMES = (
    "Abel", "Berg", "Castillo", "Dvorak", "Egede", "Farkas", "Geller",
    "Horvat", "Iversen", "Jansen", "Kovacs", "Lindqvist", "Moreau", "Novak",
    "Olsen", "Petrov", "Quist", "Rossi", "Sato", "Tanaka", "Ullmann",
    "Vargas", "Weiss", "Xu", "Yamada", "Zimmer", "Andersen", "Baptiste",
    "Cardoso", "Duarte", "Elgar", "Fontaine", "Gruber", "Haas", "Ibarra",
    "Joshi", "Keller", "Lombardi", "Mercado", "Nilsen",
)

MEETING_DURATIONS = (30, 60)
ATTENDEE_COUNTS = (2, 3, 4, 5, 6)
ATTENDEE_COUNT_WEIGHTS = (1, 2, 4, 2, 1)  # mean 4.0 attendees


@dataclass(frozen=True)
class GenParams:
    seed: int
    n_people: int = 32
    n_teams: int = 4
    horizon_days: int = 10  # business days of calendar to populate
    manager_meetings_per_week: tuple[int, int] = (25, 35)
    member_meetings_per_week: tuple[int, int] = (10, 20)

    def __post_init__(self):
        if self.n_people <= 0 or self.n_teams <= 0 or self.horizon_days <= 0:
            raise ValueError("people, teams and horizon must all be positive")
        if self.n_people % self.n_teams != 0:
            raise ValueError(
                f"{self.n_people} people do not split evenly into {self.n_teams} teams"
            )
        if self.n_people > len(FIRST_NAMES) * len(LAST_NAMES):
            raise ValueError("not enough distinct names for that many people")
        for lo, hi in (self.manager_meetings_per_week, self.member_meetings_per_week):
            if lo < 0 or hi < lo:
                raise ValueError(f"empty meetings-per-week range ({lo}, {hi})")


def _business_days(count: int) -> list[int]:
    days, d = [], 0
    while len(days) < count:
        if d % 7 < 5:
            days.append(d)
        d += 1
    return days


def generate_universe(params: GenParams) -> Universe:
    rng = random.Random(params.seed)
    teams = tuple(f"team-{i + 1}" for i in range(params.n_teams))
    per_team = params.n_people // params.n_teams
    combos = rng.sample(range(len(FIRST_NAMES) * len(LAST_NAMES)), params.n_people)
    people = []
    for i, combo in enumerate(combos):
        people.append(
            Person(
                id=f"p{i:02d}",
                name=f"{FIRST_NAMES[combo // len(LAST_NAMES)]} {LAST_NAMES[combo % len(LAST_NAMES)]}",
                role=Role.MANAGER if i % per_team == 0 else Role.MEMBER,
                team_id=teams[i // per_team],
            )
        )

    days = _business_days(params.horizon_days)
    weeks = [days[i : i + 5] for i in range(0, len(days), 5)]
    busy = []
    for person in people:
        lo, hi = (
            params.manager_meetings_per_week
            if person.role is Role.MANAGER
            else params.member_meetings_per_week
        )
        for block in weeks:
            if len(block) == 5:
                count = rng.randint(lo, hi)
            else:  # trailing partial week: scale the load down
                count = rng.randint(lo * len(block) // 5, hi * len(block) // 5)
            for _ in range(count):
                day = rng.choice(block)
                duration = rng.choice(MEETING_DURATIONS)
                start_minute = rng.randrange(
                    BUSINESS_START_MINUTE, BUSINESS_END_MINUTE - duration + 1, STEP_MINUTES
                )
                start = day * MINUTES_PER_DAY + start_minute
                busy.append(
                    BusyInterval(person.id, TimeSlot(Instant(start), Instant(start + duration)))
                )

    provenance = {
        "seed": params.seed,
        "params": {
            "n_people": params.n_people,
            "n_teams": params.n_teams,
            "horizon_days": params.horizon_days,
            "manager_meetings_per_week": list(params.manager_meetings_per_week),
            "member_meetings_per_week": list(params.member_meetings_per_week),
        },
    }
    return Universe(teams, tuple(people), tuple(busy), provenance)


@dataclass(frozen=True)
class MeetingInstance:
    id: str
    organizer: str
    attendees: tuple[str, ...]
    duration_minutes: int
    horizon: TimeSlot

    def __post_init__(self):
        if self.organizer not in self.attendees:
            raise ValueError("organizer must attend")
        if self.duration_minutes not in MEETING_DURATIONS:
            raise ValueError(f"duration must be one of {MEETING_DURATIONS}")
        length = self.horizon.duration_minutes
        if not 2 * MINUTES_PER_DAY <= length <= 14 * MINUTES_PER_DAY:
            raise ValueError("horizon must span 2 to 14 days")


def generate_instances(universe: Universe, seed: int, n: int = 75) -> list[MeetingInstance]:
    if not universe.people:
        raise ValueError("universe has nobody to schedule")
    rng = random.Random(seed)
    span_days = (
        max(b.slot.end.day_number for b in universe.busy) + 1 if universe.busy else 14
    )
    instances = []
    for i in range(n):
        size = min(rng.choices(ATTENDEE_COUNTS, weights=ATTENDEE_COUNT_WEIGHTS)[0], len(universe.people))
        attendees = tuple(p.id for p in rng.sample(universe.people, size))
        horizon_len = rng.randrange(2, 15)
        start_day = rng.randrange(0, max(1, span_days - horizon_len + 1))
        instances.append(
            MeetingInstance(
                id=f"m{i:03d}",
                organizer=attendees[0],
                attendees=attendees,
                duration_minutes=rng.choice(MEETING_DURATIONS),
                horizon=TimeSlot(
                    Instant(start_day * MINUTES_PER_DAY),
                    Instant((start_day + horizon_len) * MINUTES_PER_DAY),
                ),
            )
        )
    return instances


def instance_to_dict(instance: MeetingInstance) -> dict:
    return {
        "id": instance.id,
        "organizer": instance.organizer,
        "attendees": list(instance.attendees),
        "duration_minutes": instance.duration_minutes,
        "horizon_start": instance.horizon.start.isoformat(),
        "horizon_end": instance.horizon.end.isoformat(),
    }


def instance_from_dict(doc: dict) -> MeetingInstance:
    return MeetingInstance(
        id=doc["id"],
        organizer=doc["organizer"],
        attendees=tuple(doc["attendees"]),
        duration_minutes=doc["duration_minutes"],
        horizon=TimeSlot(
            Instant.from_iso(doc["horizon_start"]), Instant.from_iso(doc["horizon_end"])
        ),
    )


def dump_instances(instances: Sequence[MeetingInstance], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump([instance_to_dict(m) for m in instances], fh, indent=2)
        fh.write("\n")


def load_instances(path) -> list[MeetingInstance]:
    with open(path, "r", encoding="utf-8") as fh:
        return [instance_from_dict(doc) for doc in json.load(fh)]
