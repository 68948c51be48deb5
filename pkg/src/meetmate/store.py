"""File-per-session persistence with atomic writes.

Each session lives in one pretty-printed JSON document named after its id.
Writes go through a sibling temp file and `os.replace`, so a crash mid-write
never leaves a truncated session behind. The store also hands out per-session
locks; the service uses them to serialize message handling and finalization
for a given session while leaving unrelated sessions concurrent.
"""

from __future__ import annotations

import json
import os
import re
import threading
from pathlib import Path
from typing import Union

from .session import Session, session_from_dict, session_to_dict


class UnknownSessionError(KeyError):
    """No stored session under that id."""


_MINTED_ID = re.compile(r"s-(\d{6})")
_SAFE_ID = re.compile(r"[A-Za-z0-9][A-Za-z0-9_-]*")


class SessionStore:
    def __init__(self, directory: Union[str, Path]):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._admin = threading.Lock()
        self._locks: dict[str, threading.Lock] = {}
        minted = [
            int(m.group(1))
            for p in self.directory.glob("*.json")
            if (m := _MINTED_ID.fullmatch(p.stem))
        ]
        self._counter = max(minted, default=0)

    def next_id(self) -> str:
        """Fresh id, strictly increasing across restarts of the same directory."""
        with self._admin:
            self._counter += 1
            return f"s-{self._counter:06d}"

    def lock_for(self, session_id: str) -> threading.Lock:
        with self._admin:
            return self._locks.setdefault(session_id, threading.Lock())

    def _path(self, session_id: str) -> Path:
        # ids become file names; refuse anything that could escape the directory
        if not _SAFE_ID.fullmatch(session_id):
            raise ValueError(f"unsafe session id {session_id!r}")
        return self.directory / f"{session_id}.json"

    def save(self, session: Session) -> None:
        path = self._path(session.id)
        tmp = path.with_name(path.name + ".tmp")
        doc = json.dumps(session_to_dict(session), indent=2, sort_keys=True)
        tmp.write_text(doc + "\n", encoding="utf-8")
        os.replace(tmp, path)

    def raw(self, session_id: str) -> dict:
        path = self._path(session_id)
        try:
            text = path.read_text(encoding="utf-8")
        except FileNotFoundError:
            raise UnknownSessionError(session_id) from None
        return json.loads(text)

    def load(self, session_id: str) -> Session:
        return session_from_dict(self.raw(session_id))

    def exists(self, session_id: str) -> bool:
        return self._path(session_id).exists()

    def list_ids(self) -> list[str]:
        return sorted(p.stem for p in self.directory.glob("*.json"))
