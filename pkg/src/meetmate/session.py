"""Conversation-driven scheduling sessions.

A session owns one meeting request plus an ordered list of prioritized
constraints, and advances through chat turns: each user message is translated
into explicit actions (add / delete / reprioritize / message / suggest), every
add is screened by a capability checker and compiled by a coder, and any
change to the constraint list refreshes the suggestion set through the
solver. All mutation goes through `dispatch`, so the HTTP service and the
REPL share identical behavior.

The translator interface is pluggable; `MockTranslator` is the deterministic
offline implementation used by tests and the default CLI paths.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Mapping, Optional, Protocol, Sequence, Union

from .calendars import FreeBusyView, Universe, commit_meeting
from .coder import Coder, CoderContext, CoderError, RuleBasedCoder
from .dsl import EvalContext, parse, render
from .solver import (
    PrioritizedConstraint,
    Suggestion,
    assign_weights,
    diverse_topk,
    initial_suggestion,
)
from .timegrid import Instant, TimeGrid, TimeSlot, business_hours_grid


class SessionError(Exception):
    pass


class ClosedSessionError(SessionError):
    pass


class UnknownConstraintError(SessionError):
    pass


# --------------------------------------------------------------------------
# Request and session state


@dataclass(frozen=True)
class MeetingRequest:
    organizer: str
    attendees: tuple[str, ...]
    duration_minutes: int
    horizon_start: Instant
    horizon_end: Instant
    suggestion_count: int = 1

    def __post_init__(self):
        object.__setattr__(self, "attendees", tuple(self.attendees))
        if self.duration_minutes <= 0 or self.duration_minutes % 15 != 0:
            raise ValueError(f"duration must be a positive multiple of 15, got {self.duration_minutes}")
        if not self.attendees:
            raise ValueError("a meeting needs at least one attendee")
        if self.horizon_end <= self.horizon_start:
            raise ValueError("horizon must be non-empty")
        if self.suggestion_count < 1:
            raise ValueError("suggestion_count must be >= 1")
        if self.organizer not in self.attendees:
            object.__setattr__(self, "attendees", (self.organizer, *self.attendees))


@dataclass(frozen=True)
class ChatEntry:
    speaker: str  # "user" | "assistant"
    text: str
    timestamp: int  # logical clock: position in the transcript


class SessionStatus(str, Enum):
    OPEN = "open"
    SCHEDULED = "scheduled"
    ABANDONED = "abandoned"


@dataclass
class Session:
    id: str
    request: MeetingRequest
    constraints: list[PrioritizedConstraint] = field(default_factory=list)
    chat: list[ChatEntry] = field(default_factory=list)
    last_suggestions: list[Suggestion] = field(default_factory=list)
    status: SessionStatus = SessionStatus.OPEN
    _next_constraint_number: int = 1

    def new_constraint_id(self) -> str:
        cid = f"c-{self._next_constraint_number}"
        self._next_constraint_number += 1
        return cid

    def say(self, speaker: str, text: str) -> None:
        self.chat.append(ChatEntry(speaker, text, timestamp=len(self.chat)))


# --------------------------------------------------------------------------
# Actions


@dataclass(frozen=True)
class AddConstraint:
    nl_text: str
    rank_hint: Union[str, int] = "top"  # "top" | "bottom" | explicit rank

    def __post_init__(self):
        if isinstance(self.rank_hint, str) and self.rank_hint not in ("top", "bottom"):
            raise ValueError(f"rank_hint must be 'top', 'bottom' or an int, got {self.rank_hint!r}")


@dataclass(frozen=True)
class ChangePriority:
    constraint_id: str
    new_rank: int


@dataclass(frozen=True)
class DeleteConstraint:
    constraint_id: str


@dataclass(frozen=True)
class MessageUser:
    text: str


@dataclass(frozen=True)
class GenerateSuggestion:
    pass


Action = Union[AddConstraint, ChangePriority, DeleteConstraint, MessageUser, GenerateSuggestion]


# --------------------------------------------------------------------------
# Capability screening


@dataclass(frozen=True)
class CheckResult:
    supported: bool
    rationale: str


class Checker(Protocol):
    def check(self, nl_text: str) -> CheckResult: ...


_DEFAULT_UNSUPPORTED = {
    "facility": ("room", "building", "conference room"),
    "weather": ("sunny", "rain", "weather"),
    "travel": ("commute", "drive", "transit"),
    "external_info": ("timezone of",),
}


@dataclass(frozen=True)
class CapabilityConfig:
    """Phrase lists that mark a request as outside the schedulable scope."""

    unsupported: Mapping[str, tuple[str, ...]] = field(
        default_factory=lambda: dict(_DEFAULT_UNSUPPORTED)
    )

    @classmethod
    def from_json_file(cls, path) -> "CapabilityConfig":
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        return cls(unsupported={k: tuple(v) for k, v in raw.items()})


class RuleChecker:
    """Flags constraint texts that mention information we cannot observe."""

    def __init__(self, config: Optional[CapabilityConfig] = None):
        self.config = config or CapabilityConfig()

    def check(self, nl_text: str) -> CheckResult:
        lowered = nl_text.lower()
        for category, phrases in self.config.unsupported.items():
            for phrase in phrases:
                if phrase in lowered:
                    return CheckResult(
                        supported=False,
                        rationale=f"mentions {phrase!r}, which needs {category} information we do not have",
                    )
        return CheckResult(supported=True, rationale="expressible over calendars and the clock")


# --------------------------------------------------------------------------
# Translation


class TranslationError(Exception):
    pass


class Translator(Protocol):
    def translate(self, message: str, session: Session) -> list[Action]: ...


_DEMOTE_CUES = ("never mind", "undo", "remove that")
_PROMOTE_CUES = ("must", "need", "has to")
_SOFT_CUES = ("if possible", "ideally", "would be nice")
_QUESTION_WORDS = ("why", "what", "how")


class MockTranslator:
    """Deterministic cue-phrase manager used for offline runs and tests.

    Splits the message into sentences and maps each one independently:
    retraction cues delete the newest constraint, insistence cues promote the
    matching constraint to the top rank, softeners append at the bottom,
    leading question words get a canned reply, and everything else becomes a
    top-ranked addition.
    """

    def __init__(self, universe: Universe):
        self.universe = universe

    def translate(self, message: str, session: Session) -> list[Action]:
        text = message.strip()
        if not text:
            return [MessageUser("Tell me what you need and I will adjust the schedule.")]
        actions: list[Action] = []
        for sentence in re.split(r"[.!?]+\s+", text):
            sentence = sentence.strip().rstrip(".!?")
            if sentence:
                actions.append(self._one(sentence, session))
        return actions

    def _one(self, sentence: str, session: Session) -> Action:
        lowered = sentence.lower()
        if any(cue in lowered for cue in _DEMOTE_CUES):
            if not session.constraints:
                return MessageUser("There is nothing to remove yet.")
            newest = max(session.constraints, key=lambda c: int(c.id.split("-")[1]))
            return DeleteConstraint(newest.id)
        if any(cue in lowered for cue in _PROMOTE_CUES):
            target = self._match_existing(lowered, session)
            if target is not None:
                return ChangePriority(target.id, new_rank=0)
        if any(cue in lowered for cue in _SOFT_CUES):
            return AddConstraint(sentence, rank_hint="bottom")
        if lowered.split()[0] in _QUESTION_WORDS:
            return MessageUser(
                "I pick times by checking your constraints in priority order against everyone's calendar."
            )
        return AddConstraint(sentence, rank_hint="top")

    def _match_existing(self, lowered: str, session: Session) -> Optional[PrioritizedConstraint]:
        for c in sorted(session.constraints, key=lambda c: c.rank):
            if c.nl_text.lower() in lowered:
                return c
            for person in self.universe.people:
                name = person.name.lower()
                if name in lowered and name in c.nl_text.lower():
                    return c
        return None


# --------------------------------------------------------------------------
# Engine plumbing


def _display_names(universe: Universe, request: MeetingRequest) -> CoderContext:
    return CoderContext(
        organizer_name=universe.person_by_id(request.organizer).name,
        attendee_names=tuple(universe.person_by_id(a).name for a in request.attendees),
        duration_minutes=request.duration_minutes,
    )


def _eval_context(universe: Universe, request: MeetingRequest, view: Optional[FreeBusyView] = None) -> EvalContext:
    seed_slot = TimeSlot(
        request.horizon_start, request.horizon_start.plus(request.duration_minutes)
    )
    return EvalContext(
        organizer=request.organizer,
        attendees=request.attendees,
        duration_minutes=request.duration_minutes,
        candidate=seed_slot,
        free_busy=view if view is not None else FreeBusyView(universe),
        horizon_start=request.horizon_start,
        now=request.horizon_start,
    )


def session_grid(request: MeetingRequest) -> TimeGrid:
    horizon = TimeSlot(request.horizon_start, request.horizon_end)
    return business_hours_grid(horizon, request.duration_minutes)


def _suggest(session: Session, universe: Universe, ctx: EvalContext) -> list[Suggestion]:
    grid = session_grid(session.request)
    k = session.request.suggestion_count
    if not session.constraints:
        return list(initial_suggestion(grid, session.request.attendees, ctx, k=k))
    return list(diverse_topk(grid, session.constraints, ctx, k=k))


@dataclass
class Reply:
    message: Optional[str]
    suggestions: list[Suggestion]


def open_session(
    session_id: str, request: MeetingRequest, universe: Universe
) -> Session:
    """Validate the request against the universe and seed the first suggestion."""
    for pid in (request.organizer, *request.attendees):
        universe.person_by_id(pid)  # raises UnknownPersonError
    ctx = _eval_context(universe, request)
    session = Session(id=session_id, request=request)
    session.last_suggestions = _suggest(session, universe, ctx)
    lines = _suggestion_lines(session.last_suggestions)
    session.say("assistant", "\n".join(["Here is a starting point.", *lines]))
    return session


def _suggestion_lines(suggestions: Sequence[Suggestion]) -> list[str]:
    return [
        f"Suggestion {i + 1}: {s.slot.start.isoformat()} to {s.slot.end.isoformat()}. {s.explanation}"
        for i, s in enumerate(suggestions)
    ]


def dispatch(
    session: Session,
    actions: Sequence[Action],
    universe: Universe,
    checker: Checker,
    coder: Coder,
) -> Reply:
    """Apply translated actions to the session and refresh suggestions.

    Additions that fail screening or coding are reported back without
    touching the constraint list. A GenerateSuggestion is implied whenever
    the list actually changed.
    """
    for action in actions:
        if isinstance(action, (ChangePriority, DeleteConstraint)):
            if not any(c.id == action.constraint_id for c in session.constraints):
                raise UnknownConstraintError(action.constraint_id)

    messages: list[str] = []
    changed = False
    explicit_suggest = False
    coder_ctx = _display_names(universe, session.request)

    for action in actions:
        if isinstance(action, MessageUser):
            messages.append(action.text)
        elif isinstance(action, GenerateSuggestion):
            explicit_suggest = True
        elif isinstance(action, AddConstraint):
            outcome = _try_add(session, action, checker, coder, coder_ctx)
            if outcome is not None:
                messages.append(outcome)
            else:
                changed = True
        elif isinstance(action, DeleteConstraint):
            session.constraints = [c for c in session.constraints if c.id != action.constraint_id]
            session.constraints = assign_weights(session.constraints)
            changed = True
        elif isinstance(action, ChangePriority):
            moving = next(c for c in session.constraints if c.id == action.constraint_id)
            rest = [c for c in session.constraints if c.id != action.constraint_id]
            rank = max(0, min(action.new_rank, len(rest)))
            rest.insert(rank, moving)
            session.constraints = assign_weights(rest)
            changed = True

    if changed or explicit_suggest:
        ctx = _eval_context(universe, session.request)
        session.last_suggestions = _suggest(session, universe, ctx)
    message = "\n".join(messages) if messages else None
    return Reply(message=message, suggestions=list(session.last_suggestions))


def _try_add(
    session: Session,
    action: AddConstraint,
    checker: Checker,
    coder: Coder,
    coder_ctx: CoderContext,
) -> Optional[str]:
    """Insert a constraint; returns an explanatory message on rejection."""
    verdict = checker.check(action.nl_text)
    if not verdict.supported:
        return f"I cannot schedule around that: {verdict.rationale}."
    try:
        source = coder.code(action.nl_text, coder_ctx)
        expr = parse(source)
    except CoderError:
        return f"I could not turn {action.nl_text!r} into a rule, so I left the plan unchanged."
    cid = session.new_constraint_id()
    stub = PrioritizedConstraint(
        id=cid, rank=0, nl_text=action.nl_text, source=render(expr), expr=expr, weight=1
    )
    if action.rank_hint == "top":
        position = 0
    elif action.rank_hint == "bottom":
        position = len(session.constraints)
    else:
        position = max(0, min(int(action.rank_hint), len(session.constraints)))
    ordered = list(session.constraints)
    ordered.insert(position, stub)
    session.constraints = assign_weights(ordered)
    return None


def handle_message(
    session: Session,
    message: str,
    universe: Universe,
    translator: Translator,
    checker: Checker,
    coder: Coder,
) -> Reply:
    """One full chat turn: record, translate, dispatch, respond."""
    if session.status is not SessionStatus.OPEN:
        raise ClosedSessionError(session.id)
    session.say("user", message)
    try:
        actions = translator.translate(message, session)
    except TranslationError:
        text = "Sorry, I could not process that request. Could you rephrase?"
        session.say("assistant", text)
        return Reply(message=text, suggestions=list(session.last_suggestions))
    reply = dispatch(session, actions, universe, checker, coder)
    lines = [reply.message] if reply.message else []
    lines.extend(_suggestion_lines(reply.suggestions))
    session.say("assistant", "\n".join(lines) if lines else "Nothing to change.")
    return reply


def finalize(session: Session, suggestion_index: int, universe: Universe) -> Universe:
    """Book the chosen suggestion on every attendee's calendar."""
    if session.status is not SessionStatus.OPEN:
        raise ClosedSessionError(session.id)
    if not 0 <= suggestion_index < len(session.last_suggestions):
        raise IndexError(
            f"suggestion index {suggestion_index} out of range 0..{len(session.last_suggestions) - 1}"
        )
    chosen = session.last_suggestions[suggestion_index]
    updated = commit_meeting(universe, session.request.attendees, chosen.slot)
    session.status = SessionStatus.SCHEDULED
    session.say(
        "assistant",
        f"Scheduled {chosen.slot.start.isoformat()} to {chosen.slot.end.isoformat()} for everyone.",
    )
    return updated


# --------------------------------------------------------------------------
# Persistence


def suggestion_to_dict(s: Suggestion) -> dict:
    return {
        "start": s.slot.start.isoformat(),
        "end": s.slot.end.isoformat(),
        "score": s.score,
        "satisfied": list(s.satisfied),
        "unsatisfied": list(s.unsatisfied),
        "attendee_availability": dict(s.attendee_availability),
        "explanation": s.explanation,
    }


def constraint_to_dict(c: PrioritizedConstraint) -> dict:
    return {"id": c.id, "rank": c.rank, "nl_text": c.nl_text, "dsl_source": c.source}


def session_to_dict(session: Session) -> dict:
    return {
        "id": session.id,
        "request": {
            "organizer": session.request.organizer,
            "attendees": list(session.request.attendees),
            "duration_minutes": session.request.duration_minutes,
            "horizon_start": session.request.horizon_start.isoformat(),
            "horizon_end": session.request.horizon_end.isoformat(),
            "suggestion_count": session.request.suggestion_count,
        },
        "constraints": [constraint_to_dict(c) for c in session.constraints],
        "chat": [
            {"speaker": e.speaker, "text": e.text, "timestamp": e.timestamp}
            for e in session.chat
        ],
        "last_suggestions": [suggestion_to_dict(s) for s in session.last_suggestions],
        "status": session.status.value,
    }


def session_from_dict(doc: Mapping) -> Session:
    req = doc["request"]
    request = MeetingRequest(
        organizer=req["organizer"],
        attendees=tuple(req["attendees"]),
        duration_minutes=req["duration_minutes"],
        horizon_start=Instant.from_iso(req["horizon_start"]),
        horizon_end=Instant.from_iso(req["horizon_end"]),
        suggestion_count=req.get("suggestion_count", 1),
    )
    stubs = [
        PrioritizedConstraint(
            id=c["id"],
            rank=i,
            nl_text=c["nl_text"],
            source=c["dsl_source"],
            expr=parse(c["dsl_source"]),
            weight=1,
        )
        for i, c in enumerate(sorted(doc["constraints"], key=lambda c: c["rank"]))
    ]
    suggestions = [
        Suggestion(
            slot=TimeSlot(Instant.from_iso(s["start"]), Instant.from_iso(s["end"])),
            score=s["score"],
            satisfied=tuple(s["satisfied"]),
            unsatisfied=tuple(s["unsatisfied"]),
            attendee_availability=dict(s["attendee_availability"]),
            explanation=s["explanation"],
        )
        for s in doc["last_suggestions"]
    ]
    numbers = [int(c["id"].split("-")[1]) for c in doc["constraints"]]
    session = Session(
        id=doc["id"],
        request=request,
        constraints=assign_weights(stubs),
        chat=[ChatEntry(e["speaker"], e["text"], e["timestamp"]) for e in doc["chat"]],
        last_suggestions=suggestions,
        status=SessionStatus(doc["status"]),
        _next_constraint_number=max(numbers, default=0) + 1,
    )
    return session
