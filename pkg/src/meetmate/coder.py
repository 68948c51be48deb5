"""Deterministic natural-language -> constraint-source translation.

A first-match rule table over common scheduling phrasings: clock bounds
("before 11am", "end by 5pm"), weekday sets ("no meetings on Friday"),
attendance ("Anton should attend"), gaps ("30 minute break before the
meeting"), lunch windows, deadlines ("within the next 3 days") and fixed
dates. Anything outside the table raises CoderError, which surfaces to the
user as "constraint not added" rather than a guess.

Output is built as an AST and printed with the canonical renderer, so whatever
this module returns is guaranteed to parse.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Protocol, Sequence

from . import dsl


class CoderError(Exception):
    """The text did not match any translation rule."""


@dataclass(frozen=True)
class CoderContext:
    organizer_name: str
    attendee_names: tuple[str, ...]
    duration_minutes: int


class Coder(Protocol):
    def code(self, nl_text: str, context: CoderContext) -> str: ...


_DAY_PATTERNS = (
    ("MON", r"mon(?:day)?s?"),
    ("TUE", r"tue(?:s|sday)?s?"),
    ("WED", r"wed(?:nesday)?s?"),
    ("THU", r"thu(?:r|rs|rsday)?s?"),
    ("FRI", r"fri(?:day)?s?"),
    ("SAT", r"sat(?:urday)?s?"),
    ("SUN", r"sun(?:day)?s?"),
)

_NEGATION_CUES = ("no ", "not ", "avoid", "except", "never", "skip", "without", "off")
_EVERYONE_CUES = ("everyone", "everybody", "all attendees", "all invitees", "whole group", "whole team")
_ATTEND_CUES = (
    "attend", "be at", "be there", "join", "come", "present", "available",
    "free", "make it", "there",
)
_GAP_CUES = ("gap", "break", "buffer", "breather")

_TIME = r"(\d{1,2})(?::(\d{2}))?\s*(am|pm)?"
_DATE_RE = re.compile(r"\bon\s+(\d{4}-\d{2}-\d{2})\b")
_WITHIN_RE = re.compile(r"\b(?:within|in|over)\s+(?:the\s+)?next\s+(\d+)\s+days?\b|\bwithin\s+(\d+)\s+days?\b")
_MINUTES_RE = re.compile(r"\b(\d+)[\s-]*min(?:ute)?s?\b")
_BETWEEN_RE = re.compile(r"\bbetween\s+" + _TIME + r"\s+and\s+" + _TIME)
_END_BY_RE = re.compile(
    r"\b(?:end(?:s|ing)?|finish(?:e[sd])?|done|over|wrap(?:ped)? up)\s*(?:by|before|at)\s+" + _TIME
    + r"|\bby\s+" + _TIME
)
_BEFORE_RE = re.compile(r"\b(?:before|no later than|earlier than)\s+" + _TIME)
_AFTER_RE = re.compile(r"\b(?:after|from|starting(?:\s+at)?|at or after)\s+" + _TIME)
_AT_RE = re.compile(r"\b(?:start(?:s|ing)? at|meet at|at)\s+" + _TIME)


def _clock_from(groups: Sequence[Optional[str]]) -> Optional[int]:
    """Minutes of day from a (_TIME) regex match, or None when unparseable."""
    hour_s, minute_s, ampm = groups
    hour = int(hour_s)
    minute = int(minute_s) if minute_s else 0
    if ampm == "pm" and hour < 12:
        hour += 12
    elif ampm == "am" and hour == 12:
        hour = 0
    if hour > 23 or minute > 59:
        return None
    return hour * 60 + minute


class RuleBasedCoder:
    """The in-process fallback coder; deterministic and offline."""

    def code(self, nl_text: str, context: CoderContext) -> str:
        expr = self._translate(nl_text, context)
        return dsl.render(expr)

    def _translate(self, nl_text: str, context: CoderContext) -> dsl.Expr:
        text = nl_text.lower()
        for rule in (
            self._attendance,
            self._weekdays,
            self._fixed_date,
            self._deadline,
            self._gap,
            self._lunch,
            self._window,
            self._clock_bound,
            self._day_part,
        ):
            expr = rule(text, nl_text, context)
            if expr is not None:
                return expr
        raise CoderError(f"no translation rule matches {nl_text!r}")

    def _attendance(self, text, original, context):
        if any(cue in text for cue in _EVERYONE_CUES):
            if any(cue in text for cue in _ATTEND_CUES):
                return dsl.Free(None)
        names = [context.organizer_name, *context.attendee_names]
        mentioned = []
        for name in dict.fromkeys(names):
            if re.search(rf"\b{re.escape(name.lower())}\b", text):
                mentioned.append(name)
        if mentioned and any(cue in text for cue in _ATTEND_CUES):
            parts = tuple(dsl.Free(n) for n in mentioned)
            return parts[0] if len(parts) == 1 else dsl.And(parts)
        return None

    def _weekdays(self, text, original, context):
        days = [day for day, pat in _DAY_PATTERNS if re.search(rf"\b{pat}\b", text)]
        if not days:
            return None
        test = dsl.DayIn(frozenset(days))
        if any(cue in text for cue in _NEGATION_CUES):
            return dsl.Not(test)
        return test

    def _fixed_date(self, text, original, context):
        m = _DATE_RE.search(text)
        if not m:
            return None
        try:
            return dsl.parse(f"on({m.group(1)})")
        except dsl.DslError:
            raise CoderError(f"unusable date in {original!r}") from None

    def _deadline(self, text, original, context):
        if re.search(r"\btoday\b", text):
            return dsl.Compare("day_index", "==", 0)
        if re.search(r"\btomorrow\b", text):
            return dsl.Compare("day_index", "==", 1)
        m = _WITHIN_RE.search(text)
        if m:
            return dsl.WithinDays(int(m.group(1) or m.group(2)))
        return None

    def _gap(self, text, original, context):
        if not any(cue in text for cue in _GAP_CUES):
            return None
        m = _MINUTES_RE.search(text)
        if not m:
            return None
        n = int(m.group(1))
        before = dsl.GapBefore(">=", n)
        after = dsl.GapAfter(">=", n)
        if "between" in text or ("before" in text and "after" in text):
            return dsl.And((before, after))
        if "after" in text:
            return after
        return before

    def _lunch(self, text, original, context):
        if "lunch" not in text:
            return None
        if "before lunch" in text:
            return dsl.Compare("start.time", "<", 12 * 60)
        if "after lunch" in text:
            return dsl.Compare("start.time", ">=", 13 * 60)
        if any(cue in text for cue in (*_NEGATION_CUES, "keep", "outside", "free", "open")):
            return dsl.AvoidWindow(12 * 60, 13 * 60)
        raise CoderError(f"ambiguous lunch preference {original!r}")

    def _window(self, text, original, context):
        m = _BETWEEN_RE.search(text)
        if not m:
            return None
        t1 = _clock_from(m.groups()[0:3])
        t2 = _clock_from(m.groups()[3:6])
        if t1 is None or t2 is None:
            raise CoderError(f"unusable time window in {original!r}")
        lo, hi = sorted((t1, t2))
        return dsl.And(
            (dsl.Compare("start.time", ">=", lo), dsl.Compare("end.time", "<=", hi))
        )

    def _clock_bound(self, text, original, context):
        m = _END_BY_RE.search(text)
        if m:
            groups = m.groups()[0:3] if m.group(1) else m.groups()[3:6]
            t = _clock_from(groups)
            if t is not None:
                return dsl.Compare("end.time", "<=", t)
        m = _BEFORE_RE.search(text)
        if m:
            t = _clock_from(m.groups())
            if t is not None:
                if t % 60 == 0 and m.group(3):  # whole am/pm hour: the hour idiom
                    return dsl.Compare("start.hour", "<", t // 60)
                return dsl.Compare("start.time", "<", t)
        m = _AFTER_RE.search(text)
        if m:
            t = _clock_from(m.groups())
            if t is not None:
                return dsl.Compare("start.time", ">=", t)
        m = _AT_RE.search(text)
        if m:
            t = _clock_from(m.groups())
            if t is not None:
                return dsl.Compare("start.time", "==", t)
        return None

    def _day_part(self, text, original, context):
        negated = any(cue in text for cue in _NEGATION_CUES)
        if "morning" in text:
            if negated:
                return dsl.Compare("start.time", ">=", 12 * 60)
            return dsl.Compare("end.time", "<=", 12 * 60)
        if "afternoon" in text:
            if negated:
                return dsl.Compare("end.time", "<=", 12 * 60)
            return dsl.Compare("start.time", ">=", 12 * 60)
        if "evening" in text:
            if negated:
                return dsl.Compare("end.time", "<=", 17 * 60)
            return dsl.Compare("start.time", ">=", 17 * 60)
        return None
