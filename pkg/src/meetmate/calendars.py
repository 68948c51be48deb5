"""People, teams, busy calendars, and the free/busy projection used for scheduling.

A Universe is an immutable snapshot: people grouped into teams plus their busy
intervals. Scheduling code only sees the FreeBusyView, which answers free/busy
and gap queries as if each person's intervals were merged; event details beyond
occupancy never cross that boundary.
"""

from __future__ import annotations

import bisect
import enum
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .timegrid import MINUTES_PER_DAY, Instant, TimeSlot


class UnknownPersonError(KeyError):
    """A person id or display name that does not exist in the universe."""


class Role(str, enum.Enum):
    MANAGER = "manager"
    MEMBER = "member"


@dataclass(frozen=True)
class Person:
    id: str
    name: str
    role: Role
    team_id: str


@dataclass(frozen=True)
class BusyInterval:
    owner: str  # person id
    slot: TimeSlot


@dataclass(frozen=True)
class Universe:
    """Immutable world snapshot; provenance records the seed and generator params."""

    teams: tuple[str, ...]
    people: tuple[Person, ...]
    busy: tuple[BusyInterval, ...]
    provenance: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        ids = [p.id for p in self.people]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate person ids")
        names = [p.name for p in self.people]
        if len(set(names)) != len(names):
            raise ValueError("duplicate person names")
        team_set = set(self.teams)
        known = set(ids)
        for p in self.people:
            if p.team_id not in team_set:
                raise ValueError(f"person {p.id} in unknown team {p.team_id}")
        for b in self.busy:
            if b.owner not in known:
                raise ValueError(f"busy interval for unknown person {b.owner}")

    def person_by_id(self, person_id: str) -> Person:
        for p in self.people:
            if p.id == person_id:
                return p
        raise UnknownPersonError(person_id)

    def person_by_name(self, name: str) -> Person:
        for p in self.people:
            if p.name == name:
                return p
        raise UnknownPersonError(name)

    def free_busy(self) -> "FreeBusyView":
        return FreeBusyView(self)

    def to_json_dict(self) -> dict:
        return {
            "seed": self.provenance.get("seed"),
            "params": dict(self.provenance.get("params", {})),
            "teams": list(self.teams),
            "people": [
                {"id": p.id, "name": p.name, "role": p.role.value, "team_id": p.team_id}
                for p in self.people
            ],
            "busy": [
                {
                    "owner": b.owner,
                    "start": b.slot.start.isoformat(),
                    "end": b.slot.end.isoformat(),
                }
                for b in self.busy
            ],
        }

    @classmethod
    def from_json_dict(cls, doc: Mapping) -> "Universe":
        people = tuple(
            Person(p["id"], p["name"], Role(p["role"]), p["team_id"])
            for p in doc["people"]
        )
        busy = tuple(
            BusyInterval(
                b["owner"],
                TimeSlot(Instant.from_iso(b["start"]), Instant.from_iso(b["end"])),
            )
            for b in doc["busy"]
        )
        provenance: dict[str, object] = {}
        if doc.get("seed") is not None or doc.get("params"):
            provenance = {"seed": doc.get("seed"), "params": doc.get("params", {})}
        return cls(
            teams=tuple(doc["teams"]),
            people=people,
            busy=busy,
            provenance=provenance,
        )

    def dump(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path: str) -> "Universe":
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


def _merge(intervals: Iterable[tuple[int, int]]) -> list[tuple[int, int]]:
    """Merge overlapping or touching [start, end) minute intervals."""
    merged: list[tuple[int, int]] = []
    for s, e in sorted(intervals):
        if merged and s <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], e))
        else:
            merged.append((s, e))
    return merged


class FreeBusyView:
    """Occupancy-only projection of a universe.

    Queries behave as if each person's busy intervals were merged, regardless of
    how they are stored. Names resolve case-sensitively.
    """

    def __init__(self, universe: Universe) -> None:
        self._by_id = {p.id: p for p in universe.people}
        self._id_by_name = {p.name: p.id for p in universe.people}
        per_person: dict[str, list[tuple[int, int]]] = {p.id: [] for p in universe.people}
        for b in universe.busy:
            per_person[b.owner].append((b.slot.start.minutes, b.slot.end.minutes))
        self._merged = {pid: _merge(iv) for pid, iv in per_person.items()}
        self._starts = {pid: [s for s, _ in iv] for pid, iv in self._merged.items()}
        self._ends = {pid: [e for _, e in iv] for pid, iv in self._merged.items()}

    def _require(self, person_id: str) -> str:
        if person_id not in self._by_id:
            raise UnknownPersonError(person_id)
        return person_id

    def id_for_name(self, name: str) -> str:
        try:
            return self._id_by_name[name]
        except KeyError:
            raise UnknownPersonError(name) from None

    def merged_intervals(self, person_id: str) -> list[tuple[int, int]]:
        return list(self._merged[self._require(person_id)])

    def is_free(self, person_id: str, slot: TimeSlot) -> bool:
        """True when no busy interval overlaps the slot (open-interval overlap)."""
        self._require(person_id)
        starts = self._starts[person_id]
        ends = self._ends[person_id]
        # last interval starting before slot.end is the only possible overlap
        i = bisect.bisect_left(starts, slot.end.minutes) - 1
        return i < 0 or ends[i] <= slot.start.minutes

    def free_count(self, person_ids: Sequence[str], slot: TimeSlot) -> int:
        return sum(1 for pid in person_ids if self.is_free(pid, slot))

    def gap_before(self, person_id: str, slot: TimeSlot) -> int:
        """Minutes between the latest merged busy end at or before slot.start and
        slot.start, on slot.start's calendar day; minutes since midnight if none."""
        self._require(person_id)
        s = slot.start.minutes
        day_base = slot.start.day_number * MINUTES_PER_DAY
        ends = self._ends[person_id]
        i = bisect.bisect_right(ends, s) - 1
        if i >= 0 and ends[i] > day_base:
            return s - ends[i]
        return s - day_base

    def gap_after(self, person_id: str, slot: TimeSlot) -> int:
        """Minutes between slot.end and the next merged busy start at or after it,
        within slot.start's calendar day; minutes until midnight if none."""
        self._require(person_id)
        e = slot.end.minutes
        day_end = (slot.start.day_number + 1) * MINUTES_PER_DAY
        starts = self._starts[person_id]
        i = bisect.bisect_left(starts, e)
        if i < len(starts) and starts[i] < day_end:
            return starts[i] - e
        return max(0, day_end - e)

    def busy_within(self, person_id: str, window: TimeSlot) -> list[TimeSlot]:
        """Merged busy intervals clipped to the window; free/busy only."""
        self._require(person_id)
        out = []
        for s, e in self._merged[person_id]:
            cs = max(s, window.start.minutes)
            ce = min(e, window.end.minutes)
            if cs < ce:
                out.append(TimeSlot.of(cs, ce))
        return out


def commit_meeting(
    universe: Universe, attendee_ids: Sequence[str], slot: TimeSlot
) -> Universe:
    """New universe with the slot booked on every attendee's calendar.

    Idempotent per (attendee, slot): booking the same meeting twice adds nothing.
    """
    known = {p.id for p in universe.people}
    for pid in attendee_ids:
        if pid not in known:
            raise UnknownPersonError(pid)
    existing = {(b.owner, b.slot) for b in universe.busy}
    additions = tuple(
        BusyInterval(pid, slot)
        for pid in attendee_ids
        if (pid, slot) not in existing
    )
    if not additions:
        return universe
    return Universe(
        teams=universe.teams,
        people=universe.people,
        busy=universe.busy + additions,
        provenance=universe.provenance,
    )
