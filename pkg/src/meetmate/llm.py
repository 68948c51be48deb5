"""Chat-completion client behind the Translator, Checker and Coder interfaces.

Everything model-facing lives here: prompt templates, the wire transport, and
the parsers that turn completions back into typed actions. Parsed output goes
through exactly the same validation as the offline implementations; nothing
from a model reaches session state unchecked. Tests replay recorded
transcripts through FixtureTransport, so the suite never touches a network.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from string import Template
from typing import Mapping, Optional, Protocol, Sequence, Union

import httpx

from . import dsl
from .coder import CoderContext, CoderError
from .session import (
    Action,
    AddConstraint,
    ChangePriority,
    CheckResult,
    DeleteConstraint,
    GenerateSuggestion,
    MessageUser,
    Session,
    TranslationError,
)


class TransportError(Exception):
    """The completion endpoint failed or returned something unusable."""


@dataclass(frozen=True)
class LlmConfig:
    endpoint: str
    api_key: str = field(default="", repr=False)
    model: str = "gpt-4"
    temperature: float = 0.0
    max_output_tokens: int = 512
    timeout_seconds: float = 30.0
    retries: int = 2

    def __post_init__(self):
        if self.temperature != 0.0:
            raise ValueError("temperature is fixed at 0 for reproducibility")
        if self.retries < 0:
            raise ValueError("retries must be >= 0")

    @classmethod
    def from_env(cls, env: Mapping[str, str] = os.environ) -> "LlmConfig":
        endpoint = env.get("MEETMATE_LLM_ENDPOINT", "")
        if not endpoint:
            raise ValueError("MEETMATE_LLM_ENDPOINT is not set")
        return cls(
            endpoint=endpoint,
            api_key=env.get("MEETMATE_LLM_KEY", ""),
            model=env.get("MEETMATE_LLM_MODEL", "gpt-4"),
        )


Message = Mapping[str, str]


class Transport(Protocol):
    def complete(self, messages: Sequence[Message], config: LlmConfig) -> str: ...


class HttpTransport:
    """POSTs a chat-completion request and returns the first choice's text."""

    def __init__(self, client: Optional[httpx.Client] = None):
        self._client = client

    def complete(self, messages: Sequence[Message], config: LlmConfig) -> str:
        payload = {
            "model": config.model,
            "messages": list(messages),
            "temperature": config.temperature,
            "max_tokens": config.max_output_tokens,
        }
        headers = {}
        if config.api_key:
            headers["Authorization"] = f"Bearer {config.api_key}"
        poster = self._client if self._client is not None else httpx
        try:
            response = poster.post(
                config.endpoint, json=payload, headers=headers, timeout=config.timeout_seconds
            )
            response.raise_for_status()
            return response.json()["choices"][0]["message"]["content"]
        except httpx.HTTPError as exc:
            raise TransportError(f"completion request failed: {exc}") from exc
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise TransportError(f"malformed completion response: {exc}") from exc


class FixtureTransport:
    """Replays recorded completions in order.

    Each turn may pin a fragment expected in the final user message, which
    catches prompts drifting away from what was recorded.
    """

    def __init__(self, turns: Sequence[Mapping[str, str]]):
        self.turns = list(turns)
        self.index = 0

    @classmethod
    def from_file(cls, path) -> "FixtureTransport":
        with open(path, "r", encoding="utf-8") as fh:
            return cls(json.load(fh))

    def complete(self, messages: Sequence[Message], config: LlmConfig) -> str:
        if self.index >= len(self.turns):
            raise TransportError("fixture transcript exhausted")
        turn = self.turns[self.index]
        expected = turn.get("expect_user")
        if expected is not None:
            last_user = next(
                (m["content"] for m in reversed(list(messages)) if m["role"] == "user"), ""
            )
            if expected not in last_user:
                raise TransportError(
                    f"fixture mismatch at turn {self.index}: {expected!r} not in prompt"
                )
        self.index += 1
        return turn["reply"]


# --------------------------------------------------------------------------
# Prompts

MANAGER_TEMPLATE = Template(
    """You are a meeting scheduling assistant managing a list of scheduling constraints.
Rewrite the user's message as actions on that list. Reply with one JSON object
per line, in order, and nothing else:
  {"ACTION": "ADD", "INPUT": {"constraint": <text>, "priority": <1-based position>}}
  {"ACTION": "DELETE", "INPUT": {"constraint_id": <id>}}
  {"ACTION": "CHANGE_PRIORITY", "INPUT": {"constraint_id": <id>, "priority": <1-based position>}}
  {"ACTION": "MESSAGE", "INPUT": {"text": <reply to the user>}}
  {"ACTION": "SUGGEST", "INPUT": {}}

Example:
User: I have to meet before 11am.
{"ACTION": "ADD", "INPUT": {"constraint": "Meeting before 11am", "priority": 1}}

Current constraints:
$constraints

User: $message
"""
)

CHECKER_TEMPLATE = Template(
    """You schedule meetings using only the attendees' calendars and the clock.
Determine if you have the information needed to act on the scheduling
preference below. Reply as JSON: {"response": "yes" or "no", "rationale": <why>}.

Preference: $text
"""
)

CODER_TEMPLATE = Template(
    """Translate the scheduling preference into a single constraint in the
scheduling language, and reply with the constraint only.

The language: comparisons over start.hour, start.minute, start.time, end.hour,
end.minute, end.time and day_index (relops <, <=, ==, !=, >=, >); day in {MON,
TUE, WED, THU, FRI, SAT, SUN}; free("Display Name"); all_free;
gap_before >= 30m; gap_after >= 15m; avoid(12:00-13:00); within_days(3);
on(2024-03-05); combined with and, or, not, parentheses.

Example:
Preference: Meeting before 11am
start.hour < 11

Meeting: $duration minutes, organizer $organizer, attendees $attendees.
Preference: $text
"""
)

REPHRASE_TEMPLATE = Template(
    """Rephrase the user's words as one succinct scheduling constraint, keeping
every name, time, day and number unchanged. Reply with the constraint only.

Text: $text
"""
)


@dataclass(frozen=True)
class PromptBundle:
    manager: Template = MANAGER_TEMPLATE
    checker: Template = CHECKER_TEMPLATE
    coder: Template = CODER_TEMPLATE
    rephrase: Template = REPHRASE_TEMPLATE

    def render_manager(self, session: Session, message: str) -> list[dict]:
        listing = "\n".join(
            f"{c.id} (priority {c.rank + 1}): {c.nl_text}" for c in session.constraints
        ) or "(none)"
        return [
            {
                "role": "user",
                "content": self.manager.substitute(constraints=listing, message=message),
            }
        ]

    def render_checker(self, nl_text: str) -> list[dict]:
        return [{"role": "user", "content": self.checker.substitute(text=nl_text)}]

    def render_coder(self, nl_text: str, context: CoderContext) -> list[dict]:
        return [
            {
                "role": "user",
                "content": self.coder.substitute(
                    text=nl_text,
                    duration=context.duration_minutes,
                    organizer=context.organizer_name,
                    attendees=", ".join(context.attendee_names),
                ),
            }
        ]

    def render_rephrase(self, nl_text: str) -> list[dict]:
        return [{"role": "user", "content": self.rephrase.substitute(text=nl_text)}]


# --------------------------------------------------------------------------
# Output parsing


def _require(condition: bool, why: str) -> None:
    if not condition:
        raise TranslationError(why)


def _rank_hint(priority: object) -> Union[str, int]:
    if priority is None:
        return "top"
    _require(isinstance(priority, int) and priority >= 1, f"bad priority {priority!r}")
    return priority - 1  # the wire format is 1-based


def parse_manager_output(text: str, session: Session) -> list[Action]:
    lines = [line for line in text.splitlines() if line.strip()]
    _require(bool(lines), "empty completion")
    known = {c.id for c in session.constraints}
    actions: list[Action] = []
    for line in lines:
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TranslationError(f"not JSON: {line!r}") from exc
        _require(isinstance(doc, dict) and "ACTION" in doc, f"no ACTION in {line!r}")
        kind = doc["ACTION"]
        payload = doc.get("INPUT") or {}
        _require(isinstance(payload, dict), f"INPUT must be an object in {line!r}")
        if kind == "ADD":
            constraint = payload.get("constraint")
            _require(isinstance(constraint, str) and bool(constraint), "ADD without constraint text")
            actions.append(AddConstraint(constraint, rank_hint=_rank_hint(payload.get("priority"))))
        elif kind == "DELETE":
            cid = payload.get("constraint_id")
            _require(cid in known, f"DELETE of unknown constraint {cid!r}")
            actions.append(DeleteConstraint(cid))
        elif kind == "CHANGE_PRIORITY":
            cid = payload.get("constraint_id")
            _require(cid in known, f"CHANGE_PRIORITY of unknown constraint {cid!r}")
            hint = _rank_hint(payload.get("priority"))
            _require(isinstance(hint, int), "CHANGE_PRIORITY without priority")
            actions.append(ChangePriority(cid, new_rank=hint))
        elif kind == "MESSAGE":
            reply = payload.get("text")
            _require(isinstance(reply, str) and bool(reply), "MESSAGE without text")
            actions.append(MessageUser(reply))
        elif kind == "SUGGEST":
            actions.append(GenerateSuggestion())
        else:
            raise TranslationError(f"unknown action {kind!r}")
    return actions


def parse_checker_output(text: str) -> CheckResult:
    try:
        doc = json.loads(text)
        response = doc["response"].strip().lower()
    except (json.JSONDecodeError, KeyError, AttributeError, TypeError) as exc:
        raise TranslationError(f"unusable checker reply: {text!r}") from exc
    if response not in ("yes", "no"):
        raise TranslationError(f"checker response must be yes/no, got {response!r}")
    return CheckResult(supported=response == "yes", rationale=str(doc.get("rationale", "")))


def _strip_fences(text: str) -> str:
    lines = [ln for ln in text.strip().splitlines() if not ln.strip().startswith("```")]
    return "\n".join(lines).strip()


# --------------------------------------------------------------------------
# Session-facing adapters


class LlmTranslator:
    def __init__(
        self,
        config: LlmConfig,
        transport: Optional[Transport] = None,
        prompts: Optional[PromptBundle] = None,
    ):
        self.config = config
        self.transport = transport if transport is not None else HttpTransport()
        self.prompts = prompts or PromptBundle()

    def translate(self, message: str, session: Session) -> list[Action]:
        prompt = self.prompts.render_manager(session, message)
        last: Optional[TranslationError] = None
        for _ in range(self.config.retries + 1):
            reply = self.transport.complete(prompt, self.config)
            try:
                return parse_manager_output(reply, session)
            except TranslationError as exc:
                last = exc
        raise TranslationError(f"manager output unusable after retries: {last}")


class LlmChecker:
    def __init__(
        self,
        config: LlmConfig,
        transport: Optional[Transport] = None,
        prompts: Optional[PromptBundle] = None,
    ):
        self.config = config
        self.transport = transport if transport is not None else HttpTransport()
        self.prompts = prompts or PromptBundle()

    def check(self, nl_text: str) -> CheckResult:
        prompt = self.prompts.render_checker(nl_text)
        last: Optional[TranslationError] = None
        for _ in range(self.config.retries + 1):
            reply = self.transport.complete(prompt, self.config)
            try:
                return parse_checker_output(reply)
            except TranslationError as exc:
                last = exc
        raise TransportError(f"checker output unusable after retries: {last}")


class LlmCoder:
    """Emits constraint source, validated by the parser before anyone sees it."""

    def __init__(
        self,
        config: LlmConfig,
        transport: Optional[Transport] = None,
        prompts: Optional[PromptBundle] = None,
        rephrase: bool = False,
    ):
        self.config = config
        self.transport = transport if transport is not None else HttpTransport()
        self.prompts = prompts or PromptBundle()
        self.rephrase = rephrase

    def code(self, nl_text: str, context: CoderContext) -> str:
        text = nl_text
        if self.rephrase:
            text = _strip_fences(
                self.transport.complete(self.prompts.render_rephrase(nl_text), self.config)
            )
        prompt = self.prompts.render_coder(text, context)
        last: Optional[dsl.DslError] = None
        for _ in range(self.config.retries + 1):
            source = _strip_fences(self.transport.complete(prompt, self.config))
            try:
                dsl.parse(source)
                return source
            except dsl.DslError as exc:
                last = exc
        raise CoderError(f"model produced no valid constraint for {nl_text!r}: {last}")
