"""Terminal front end driving the same engine as the HTTP service.

Input lines starting with ":" are commands; anything else is a chat message
for the currently open session. Each input line is echoed with a "> " prefix
so a piped script produces a self-contained transcript.
"""

from __future__ import annotations

import sys
from typing import IO, Optional

from .calendars import UnknownPersonError
from .session import ClosedSessionError, Session
from .solver import EmptyGridError
from .service import SchedulingEngine
from .timegrid import Instant

HELP = """commands:
  :open organizer=ID attendees=ID,ID,... duration=MIN from=ISO to=ISO [k=N]
  :schedule N     book the N-th suggestion (1-based)
  :help           show this text
  :quit           leave
any other line is sent to the assistant as a chat message"""

_REQUIRED_OPEN_KEYS = ("organizer", "attendees", "duration", "from", "to")


def _parse_kv(tokens: list[str]) -> dict[str, str]:
    out: dict[str, str] = {}
    for tok in tokens:
        if "=" not in tok:
            raise ValueError(f"expected key=value, got {tok!r}")
        key, value = tok.split("=", 1)
        out[key] = value
    return out


def _open(engine: SchedulingEngine, line: str, out: IO[str]) -> Session:
    kv = _parse_kv(line.split()[1:])
    missing = [k for k in _REQUIRED_OPEN_KEYS if k not in kv]
    if missing:
        raise ValueError(f"missing {', '.join(missing)}")
    session = engine.open(
        organizer=kv["organizer"],
        attendees=tuple(kv["attendees"].split(",")),
        duration_minutes=int(kv["duration"]),
        horizon_start=Instant.from_iso(kv["from"]),
        horizon_end=Instant.from_iso(kv["to"]),
        k=int(kv["k"]) if "k" in kv else None,
    )
    print(f"opened {session.id}", file=out)
    print(session.chat[-1].text, file=out)
    return session


def run_repl(
    engine: SchedulingEngine,
    in_stream: Optional[IO[str]] = None,
    out: Optional[IO[str]] = None,
) -> None:
    in_stream = in_stream if in_stream is not None else sys.stdin
    out = out if out is not None else sys.stdout
    current: Optional[Session] = None
    for raw in in_stream:
        line = raw.strip()
        print(f"> {line}", file=out)
        if not line:
            continue
        try:
            if line == ":quit":
                break
            if line == ":help":
                print(HELP, file=out)
            elif line.split()[0] == ":open":
                current = _open(engine, line, out)
            elif line.split()[0] == ":schedule":
                if current is None:
                    print("error: no open session, use :open first", file=out)
                    continue
                parts = line.split()
                if len(parts) != 2:
                    raise ValueError("usage: :schedule N")
                session = engine.schedule(current.id, int(parts[1]) - 1)
                print(session.chat[-1].text, file=out)
            elif line.startswith(":"):
                print(f"error: unknown command {line.split()[0]}", file=out)
            else:
                if current is None:
                    print("error: no open session, use :open first", file=out)
                    continue
                session, _ = engine.message(current.id, line)
                print(session.chat[-1].text, file=out)
        except (ValueError, IndexError, ClosedSessionError, EmptyGridError, UnknownPersonError) as exc:
            print(f"error: {exc}", file=out)
    print("bye", file=out)
