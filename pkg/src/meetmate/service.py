"""HTTP/JSON facade over scheduling sessions.

Routes never touch Session objects directly: every call goes through a
SchedulingEngine, and the terminal REPL drives the very same engine, so both
front ends produce identical persisted state for identical scripts. The
engine owns the single mutable universe; finalizing a session swaps in the
updated snapshot with the booked meeting.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .calendars import FreeBusyView, Person, Universe, UnknownPersonError
from .coder import Coder, RuleBasedCoder
from .session import (
    CapabilityConfig,
    Checker,
    ClosedSessionError,
    MeetingRequest,
    MockTranslator,
    Reply,
    RuleChecker,
    Session,
    Translator,
    UnknownConstraintError,
    constraint_to_dict,
    finalize,
    handle_message,
    open_session,
    suggestion_to_dict,
)
from .solver import EmptyGridError
from .store import SessionStore, UnknownSessionError
from .timegrid import Instant, TimeSlot


@dataclass(frozen=True)
class ServiceConfig:
    universe_path: str
    store_dir: str
    host: str = "127.0.0.1"
    port: int = 8000
    default_k: int = 1
    translator_mode: str = "mock"  # "mock" | "llm"
    capabilities_path: Optional[str] = None
    static_dir: Optional[str] = None

    def __post_init__(self):
        if self.default_k < 1:
            raise ValueError("default_k must be >= 1")
        if self.translator_mode not in ("mock", "llm"):
            raise ValueError(f"translator_mode must be 'mock' or 'llm', got {self.translator_mode!r}")


class SchedulingEngine:
    """Single owner of the universe, the store, and the live session cache."""

    def __init__(
        self,
        universe: Universe,
        store: SessionStore,
        translator: Translator,
        checker: Checker,
        coder: Coder,
        default_k: int = 1,
    ):
        self.universe = universe
        self.store = store
        self.translator = translator
        self.checker = checker
        self.coder = coder
        self.default_k = default_k
        self._live: dict[str, Session] = {}
        self._admin = threading.Lock()

    def open(
        self,
        organizer: str,
        attendees: Sequence[str],
        duration_minutes: int,
        horizon_start: Instant,
        horizon_end: Instant,
        k: Optional[int] = None,
    ) -> Session:
        request = MeetingRequest(
            organizer=organizer,
            attendees=tuple(attendees),
            duration_minutes=duration_minutes,
            horizon_start=horizon_start,
            horizon_end=horizon_end,
            suggestion_count=self.default_k if k is None else k,
        )
        session_id = self.store.next_id()
        with self.store.lock_for(session_id):
            session = open_session(session_id, request, self.universe)
            with self._admin:
                self._live[session_id] = session
            self.store.save(session)
        return session

    def get(self, session_id: str) -> Session:
        with self._admin:
            if session_id in self._live:
                return self._live[session_id]
        session = self.store.load(session_id)
        with self._admin:
            return self._live.setdefault(session_id, session)

    def message(self, session_id: str, text: str) -> tuple[Session, Reply]:
        session = self.get(session_id)
        with self.store.lock_for(session_id):
            reply = handle_message(
                session, text, self.universe, self.translator, self.checker, self.coder
            )
            self.store.save(session)
        return session, reply

    def schedule(self, session_id: str, suggestion_index: int) -> Session:
        session = self.get(session_id)
        with self.store.lock_for(session_id):
            self.universe = finalize(session, suggestion_index, self.universe)
            self.store.save(session)
        return session

    def freebusy(self, person_id: str, window: TimeSlot) -> list[TimeSlot]:
        return FreeBusyView(self.universe).busy_within(person_id, window)

    def people(self) -> Sequence[Person]:
        return self.universe.people


def build_engine(config: ServiceConfig) -> SchedulingEngine:
    universe = Universe.load(config.universe_path)
    store = SessionStore(config.store_dir)
    if config.capabilities_path:
        checker: Checker = RuleChecker(CapabilityConfig.from_json_file(config.capabilities_path))
    else:
        checker = RuleChecker()
    if config.translator_mode == "llm":
        from .llm import LlmChecker, LlmCoder, LlmConfig, LlmTranslator

        llm_config = LlmConfig.from_env()
        translator: Translator = LlmTranslator(llm_config)
        checker = LlmChecker(llm_config)
        coder: Coder = LlmCoder(llm_config)
    else:
        translator = MockTranslator(universe)
        coder = RuleBasedCoder()
    return SchedulingEngine(
        universe, store, translator, checker, coder, default_k=config.default_k
    )


# --------------------------------------------------------------------------
# HTTP layer


class OpenSessionBody(BaseModel):
    organizer: str
    attendees: list[str]
    duration_minutes: int
    horizon_start: str
    horizon_end: str
    k: Optional[int] = None


class MessageBody(BaseModel):
    text: str


class ScheduleBody(BaseModel):
    suggestion_index: int


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message})


def create_app(
    engine: SchedulingEngine, static_dir: Optional[Union[str, Path]] = None
) -> FastAPI:
    app = FastAPI(title="meetmate")

    @app.exception_handler(RequestValidationError)
    async def bad_body(request: Request, exc: RequestValidationError):
        return _error(400, "validation", str(exc.errors()[:1]))

    @app.exception_handler(ValueError)
    async def bad_value(request: Request, exc: ValueError):
        return _error(400, "validation", str(exc))

    @app.exception_handler(EmptyGridError)
    async def empty_grid(request: Request, exc: EmptyGridError):
        return _error(409, "empty_grid", str(exc))

    @app.exception_handler(UnknownPersonError)
    async def unknown_person(request: Request, exc: UnknownPersonError):
        return _error(422, "unknown_person", f"no such person: {exc.args[0]}")

    @app.exception_handler(UnknownSessionError)
    async def unknown_session(request: Request, exc: UnknownSessionError):
        return _error(404, "unknown_session", f"no such session: {exc.args[0]}")

    @app.exception_handler(ClosedSessionError)
    async def closed_session(request: Request, exc: ClosedSessionError):
        return _error(409, "session_closed", f"session {exc.args[0]} is no longer open")

    @app.exception_handler(UnknownConstraintError)
    async def unknown_constraint(request: Request, exc: UnknownConstraintError):
        return _error(400, "unknown_constraint", f"no such constraint: {exc.args[0]}")

    @app.exception_handler(IndexError)
    async def bad_index(request: Request, exc: IndexError):
        return _error(400, "bad_index", str(exc))

    @app.post("/sessions", status_code=201)
    def create_session(body: OpenSessionBody):
        session = engine.open(
            organizer=body.organizer,
            attendees=body.attendees,
            duration_minutes=body.duration_minutes,
            horizon_start=Instant.from_iso(body.horizon_start),
            horizon_end=Instant.from_iso(body.horizon_end),
            k=body.k,
        )
        return {
            "session_id": session.id,
            "suggestions": [suggestion_to_dict(s) for s in session.last_suggestions],
            "constraints": [constraint_to_dict(c) for c in session.constraints],
        }

    @app.post("/sessions/{session_id}/messages")
    def post_message(session_id: str, body: MessageBody):
        session, reply = engine.message(session_id, body.text)
        return {
            "message": reply.message,
            "suggestions": [suggestion_to_dict(s) for s in reply.suggestions],
            "constraints": [constraint_to_dict(c) for c in session.constraints],
        }

    @app.post("/sessions/{session_id}/schedule")
    def post_schedule(session_id: str, body: ScheduleBody):
        session = engine.schedule(session_id, body.suggestion_index)
        return {"status": session.status.value}

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        # persisted form is the source of truth; every mutation saves first
        return engine.store.raw(session_id)

    @app.get("/universe/freebusy")
    def get_freebusy(
        person: str,
        from_: str = Query(alias="from"),
        to: str = Query(),
    ):
        window = TimeSlot(Instant.from_iso(from_), Instant.from_iso(to))
        try:
            busy = engine.freebusy(person, window)
        except UnknownPersonError:
            return _error(404, "unknown_person", f"no such person: {person}")
        return {
            "person": person,
            "busy": [
                {"start": b.start.isoformat(), "end": b.end.isoformat()} for b in busy
            ],
        }

    @app.get("/universe/people")
    def get_people():
        return [
            {"id": p.id, "name": p.name, "role": p.role.value, "team_id": p.team_id}
            for p in engine.people()
        ]

    if static_dir is not None:
        app.mount("/ui", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
