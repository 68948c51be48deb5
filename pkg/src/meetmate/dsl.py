"""The constraint language scheduling preferences compile into.

A closed boolean language over one candidate meeting time. Atoms:

    compare     start.hour < 11, end.time <= 17:30, day_index == 0
    day test    day in {MON, WED}
    attendance  free("Dana Holt"), all_free
    gaps        gap_before >= 30m, gap_after > 0m     (organizer's calendar)
    window      avoid(12:00-13:00)                    (daily, true when clear)
    deadline    within_days(3)                        (from the horizon start)
    fixed day   on(2024-03-05)

combined with not / and / or (in binding order: not tightest). Keywords are
case-insensitive and whitespace never matters; quoted person names are
case-sensitive. Time-of-day fields compare only against HH:MM literals and
integer fields only against integers; mixing the two is a type error.

parse() -> Expr raises ParseError (source offset + expected summary) or
TypeCheckError. render() prints the canonical form, and parse(render(e))
reproduces e exactly. evaluate() is the scalar reference semantics; the solver
has a vectorized twin that must agree with it pointwise.
"""

from __future__ import annotations

import datetime as _dt
import operator
import re
from dataclasses import dataclass, replace
from typing import Optional

from .calendars import FreeBusyView
from .timegrid import EPOCH, MINUTES_PER_DAY, Instant, TimeSlot, WEEKDAY_NAMES


class DslError(Exception):
    """Base for constraint-language errors."""


class ParseError(DslError):
    def __init__(self, offset: int, message: str, expected: tuple[str, ...] = ()):
        self.offset = offset
        self.expected = expected
        detail = f" (expected {' | '.join(expected)})" if expected else ""
        super().__init__(f"at offset {offset}: {message}{detail}")


class TypeCheckError(DslError):
    def __init__(self, offset: int, message: str):
        self.offset = offset
        super().__init__(f"at offset {offset}: {message}")


# ---------------------------------------------------------------------------
# AST


class Expr:
    """Base class; all nodes are frozen and hashable."""

    __slots__ = ()


@dataclass(frozen=True)
class And(Expr):
    parts: tuple[Expr, ...]

    def __post_init__(self) -> None:
        if len(self.parts) < 2:
            raise ValueError("and needs at least two operands")


@dataclass(frozen=True)
class Or(Expr):
    parts: tuple[Expr, ...]

    def __post_init__(self) -> None:
        if len(self.parts) < 2:
            raise ValueError("or needs at least two operands")


@dataclass(frozen=True)
class Not(Expr):
    operand: Expr


@dataclass(frozen=True)
class Compare(Expr):
    field: str  # one of FIELDS
    op: str  # one of RELOPS
    value: int  # clock literals stored as minutes of day

    def __post_init__(self) -> None:
        if self.field not in FIELDS:
            raise ValueError(f"unknown field {self.field!r}")
        if self.op not in RELOPS:
            raise ValueError(f"unknown operator {self.op!r}")
        if self.field in TIME_FIELDS and not 0 <= self.value < MINUTES_PER_DAY:
            raise ValueError("time-of-day literal out of range")


@dataclass(frozen=True)
class DayIn(Expr):
    days: frozenset[str]  # non-empty subset of WEEKDAY_NAMES

    def __post_init__(self) -> None:
        if not self.days or not self.days <= set(WEEKDAY_NAMES):
            raise ValueError(f"bad weekday set {self.days!r}")


@dataclass(frozen=True)
class Free(Expr):
    person: Optional[str]  # None means all attendees ("all_free")

    def __post_init__(self) -> None:
        if self.person is not None and ('"' in self.person or "\n" in self.person):
            raise ValueError("person name not representable in a quoted literal")


@dataclass(frozen=True)
class GapBefore(Expr):
    op: str
    minutes: int

    def __post_init__(self) -> None:
        if self.op not in RELOPS:
            raise ValueError(f"unknown operator {self.op!r}")
        if self.minutes < 0:
            raise ValueError("gap minutes must be non-negative")


@dataclass(frozen=True)
class GapAfter(Expr):
    op: str
    minutes: int

    def __post_init__(self) -> None:
        if self.op not in RELOPS:
            raise ValueError(f"unknown operator {self.op!r}")
        if self.minutes < 0:
            raise ValueError("gap minutes must be non-negative")


@dataclass(frozen=True)
class AvoidWindow(Expr):
    start: int  # minutes of day, start < end, both within one day
    end: int

    def __post_init__(self) -> None:
        if not 0 <= self.start < self.end < MINUTES_PER_DAY:
            raise ValueError("avoid window must satisfy 0 <= start < end <= 23:59")


@dataclass(frozen=True)
class WithinDays(Expr):
    days: int

    def __post_init__(self) -> None:
        if self.days < 0:
            raise ValueError("day count must be non-negative")


@dataclass(frozen=True)
class OnDate(Expr):
    day_number: int  # calendar days since the epoch


TIME_FIELDS = frozenset({"start.time", "end.time"})
INT_FIELDS = frozenset(
    {"start.hour", "start.minute", "end.hour", "end.minute", "day_index"}
)
FIELDS = TIME_FIELDS | INT_FIELDS
RELOPS = ("<", "<=", ">", ">=", "==", "!=")

_REL_FN = {
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
    "==": operator.eq,
    "!=": operator.ne,
}


# ---------------------------------------------------------------------------
# Lexer

_DATE_RE = re.compile(r"\d{4}-\d{2}-\d{2}(?!\d)")
_CLOCK_RE = re.compile(r"\d{1,2}:\d{2}(?!\d)")
_INT_RE = re.compile(r"\d+")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*(?:\.[A-Za-z_][A-Za-z0-9_]*)*")
_STRING_RE = re.compile(r'"[^"\n]*"')
_OP_RE = re.compile(r"[<>=!]+")

_PUNCT = {"(": "LPAREN", ")": "RPAREN", "{": "LBRACE", "}": "RBRACE", ",": "COMMA", "-": "DASH"}


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    pos: int


def _lex(source: str) -> list[_Token]:
    tokens = []
    i = 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch.isspace():
            i += 1
            continue
        m = _DATE_RE.match(source, i)
        if m:
            tokens.append(_Token("DATE", m.group(), i))
            i = m.end()
            continue
        m = _CLOCK_RE.match(source, i)
        if m:
            tokens.append(_Token("CLOCK", m.group(), i))
            i = m.end()
            continue
        m = _INT_RE.match(source, i)
        if m:
            tokens.append(_Token("INT", m.group(), i))
            i = m.end()
            continue
        m = _IDENT_RE.match(source, i)
        if m:
            tokens.append(_Token("IDENT", m.group(), i))
            i = m.end()
            continue
        m = _STRING_RE.match(source, i)
        if m:
            tokens.append(_Token("STRING", m.group()[1:-1], i))
            i = m.end()
            continue
        m = _OP_RE.match(source, i)
        if m:
            if m.group() not in _REL_FN:
                raise ParseError(i, f"invalid operator {m.group()!r}", RELOPS)
            tokens.append(_Token("OP", m.group(), i))
            i = m.end()
            continue
        if ch == '"':
            raise ParseError(i, "unterminated string")
        if ch in _PUNCT:
            tokens.append(_Token(_PUNCT[ch], ch, i))
            i += 1
            continue
        raise ParseError(i, f"unexpected character {ch!r}")
    tokens.append(_Token("EOF", "", n))
    return tokens


# ---------------------------------------------------------------------------
# Parser

_DAY_LOOKUP = {d.lower(): d for d in WEEKDAY_NAMES}


class _Parser:
    def __init__(self, source: str, tokens: list[_Token]):
        self.source = source
        self.toks = tokens
        self.i = 0

    def peek(self) -> _Token:
        return self.toks[self.i]

    def advance(self) -> _Token:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def keyword(self) -> str:
        """Lowercased text of the current token when it is an identifier."""
        tok = self.peek()
        return tok.text.lower() if tok.kind == "IDENT" else ""

    def expect_keyword(self, word: str) -> _Token:
        if self.keyword() != word:
            tok = self.peek()
            raise ParseError(tok.pos, f"unexpected {tok.text or 'end of input'!r}", (word,))
        return self.advance()

    def expect_kind(self, kind: str, what: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(tok.pos, f"unexpected {tok.text or 'end of input'!r}", (what,))
        return self.advance()

    # expr := and_chain ("or" and_chain)*
    def parse_expr(self) -> Expr:
        parts = [self.parse_and()]
        while self.keyword() == "or":
            self.advance()
            parts.append(self.parse_and())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def parse_and(self) -> Expr:
        parts = [self.parse_not()]
        while self.keyword() == "and":
            self.advance()
            parts.append(self.parse_not())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def parse_not(self) -> Expr:
        if self.keyword() == "not":
            self.advance()
            return Not(self.parse_not())
        return self.parse_atom()

    def parse_atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "LPAREN":
            self.advance()
            inner = self.parse_expr()
            self.expect_kind("RPAREN", "')'")
            return inner
        word = self.keyword()
        if word == "day":
            return self.parse_day_test()
        if word == "free":
            return self.parse_free()
        if word == "all_free":
            self.advance()
            return Free(None)
        if word in ("gap_before", "gap_after"):
            return self.parse_gap(word)
        if word == "avoid":
            return self.parse_avoid()
        if word == "within_days":
            return self.parse_within()
        if word == "on":
            return self.parse_on()
        if tok.kind == "IDENT" and word in FIELDS:
            return self.parse_compare()
        raise ParseError(
            tok.pos,
            f"unexpected {tok.text or 'end of input'!r}",
            ("a field", "day", "free", "all_free", "gap_before", "gap_after",
             "avoid", "within_days", "on", "'('", "not"),
        )

    def parse_compare(self) -> Expr:
        field_tok = self.advance()
        field = field_tok.text.lower()
        op = self.expect_kind("OP", "a comparison operator").text
        lit = self.peek()
        if lit.kind == "CLOCK":
            if field in INT_FIELDS:
                raise TypeCheckError(
                    lit.pos, f"{field} is an integer field; compare it to an integer"
                )
            self.advance()
            return Compare(field, op, self._clock_minutes(lit))
        if lit.kind == "INT":
            if field in TIME_FIELDS:
                raise TypeCheckError(
                    lit.pos, f"{field} is a time-of-day field; compare it to HH:MM"
                )
            self.advance()
            return Compare(field, op, int(lit.text))
        raise ParseError(lit.pos, f"unexpected {lit.text or 'end of input'!r}",
                         ("an integer", "HH:MM"))

    def parse_day_test(self) -> Expr:
        self.advance()  # day
        self.expect_keyword("in")
        self.expect_kind("LBRACE", "'{'")
        days = [self._day_name()]
        while self.peek().kind == "COMMA":
            self.advance()
            days.append(self._day_name())
        self.expect_kind("RBRACE", "'}'")
        return DayIn(frozenset(days))

    def _day_name(self) -> str:
        tok = self.peek()
        name = _DAY_LOOKUP.get(self.keyword())
        if name is None:
            raise ParseError(tok.pos, f"unexpected {tok.text or 'end of input'!r}",
                             WEEKDAY_NAMES)
        self.advance()
        return name

    def parse_free(self) -> Expr:
        self.advance()  # free
        self.expect_kind("LPAREN", "'('")
        name = self.expect_kind("STRING", "a quoted person name").text
        self.expect_kind("RPAREN", "')'")
        return Free(name)

    def parse_gap(self, which: str) -> Expr:
        self.advance()
        op = self.expect_kind("OP", "a comparison operator").text
        minutes = int(self.expect_kind("INT", "a minute count").text)
        suffix = self.peek()
        if suffix.kind != "IDENT" or suffix.text.lower() != "m":
            raise ParseError(suffix.pos,
                             f"unexpected {suffix.text or 'end of input'!r}", ("m",))
        self.advance()
        cls = GapBefore if which == "gap_before" else GapAfter
        return cls(op, minutes)

    def parse_avoid(self) -> Expr:
        self.advance()
        self.expect_kind("LPAREN", "'('")
        first = self.expect_kind("CLOCK", "HH:MM")
        start = self._clock_minutes(first)
        self.expect_kind("DASH", "'-'")
        end = self._clock_minutes(self.expect_kind("CLOCK", "HH:MM"))
        self.expect_kind("RPAREN", "')'")
        if start >= end:
            raise TypeCheckError(first.pos, "avoid window must start before it ends")
        return AvoidWindow(start, end)

    def parse_within(self) -> Expr:
        self.advance()
        self.expect_kind("LPAREN", "'('")
        days = int(self.expect_kind("INT", "a day count").text)
        self.expect_kind("RPAREN", "')'")
        return WithinDays(days)

    def parse_on(self) -> Expr:
        self.advance()
        self.expect_kind("LPAREN", "'('")
        tok = self.expect_kind("DATE", "YYYY-MM-DD")
        try:
            date = _dt.date.fromisoformat(tok.text)
        except ValueError:
            raise ParseError(tok.pos, f"invalid calendar date {tok.text!r}") from None
        self.expect_kind("RPAREN", "')'")
        return OnDate((date - EPOCH.date()).days)

    def _clock_minutes(self, tok: _Token) -> int:
        hh, mm = tok.text.split(":")
        h, m = int(hh), int(mm)
        if h > 23 or m > 59:
            raise ParseError(tok.pos, f"invalid clock time {tok.text!r}")
        return h * 60 + m


def parse(source: str) -> Expr:
    parser = _Parser(source, _lex(source))
    expr = parser.parse_expr()
    trailing = parser.peek()
    if trailing.kind != "EOF":
        raise ParseError(trailing.pos, f"unexpected {trailing.text!r}", ("end of input",))
    return expr


# ---------------------------------------------------------------------------
# Evaluation

@dataclass(frozen=True)
class EvalContext:
    """Everything one candidate is judged against."""

    organizer: str  # person id
    attendees: tuple[str, ...]  # person ids, organizer included
    duration_minutes: int
    candidate: TimeSlot
    free_busy: FreeBusyView
    horizon_start: Instant
    now: Instant

    def __post_init__(self) -> None:
        if self.candidate.duration_minutes != self.duration_minutes:
            raise ValueError("candidate duration differs from request duration")

    def with_candidate(self, slot: TimeSlot) -> "EvalContext":
        return replace(self, candidate=slot)


def _end_minute_of_day(slot: TimeSlot) -> int:
    # a slot ending exactly at midnight reads as 24:00, not 00:00
    m = slot.end.minute_of_day
    return MINUTES_PER_DAY if m == 0 else m


def _field_value(field: str, ctx: EvalContext) -> int:
    c = ctx.candidate
    if field == "start.hour":
        return c.start.hour
    if field == "start.minute":
        return c.start.minute
    if field == "start.time":
        return c.start.minute_of_day
    if field == "end.hour":
        return _end_minute_of_day(c) // 60
    if field == "end.minute":
        return c.end.minute
    if field == "end.time":
        return _end_minute_of_day(c)
    if field == "day_index":
        return c.start.day_number - ctx.horizon_start.day_number
    raise AssertionError(f"unhandled field {field}")


def _window_clear(slot: TimeSlot, ws: int, we: int) -> bool:
    s, e = slot.start.minutes, slot.end.minutes
    if e - s >= MINUTES_PER_DAY:
        return False
    for day in range(s // MINUTES_PER_DAY, (e - 1) // MINUTES_PER_DAY + 1):
        base = day * MINUTES_PER_DAY
        if max(s, base + ws) < min(e, base + we):
            return False
    return True


def evaluate(expr: Expr, ctx: EvalContext) -> bool:
    """Scalar semantics; total except for unresolvable person names."""
    if isinstance(expr, And):
        return all(evaluate(p, ctx) for p in expr.parts)
    if isinstance(expr, Or):
        return any(evaluate(p, ctx) for p in expr.parts)
    if isinstance(expr, Not):
        return not evaluate(expr.operand, ctx)
    if isinstance(expr, Compare):
        return _REL_FN[expr.op](_field_value(expr.field, ctx), expr.value)
    if isinstance(expr, DayIn):
        return ctx.candidate.start.weekday in expr.days
    if isinstance(expr, Free):
        view = ctx.free_busy
        if expr.person is None:
            return all(view.is_free(pid, ctx.candidate) for pid in ctx.attendees)
        return view.is_free(view.id_for_name(expr.person), ctx.candidate)
    if isinstance(expr, GapBefore):
        return _REL_FN[expr.op](
            ctx.free_busy.gap_before(ctx.organizer, ctx.candidate), expr.minutes
        )
    if isinstance(expr, GapAfter):
        return _REL_FN[expr.op](
            ctx.free_busy.gap_after(ctx.organizer, ctx.candidate), expr.minutes
        )
    if isinstance(expr, AvoidWindow):
        return _window_clear(ctx.candidate, expr.start, expr.end)
    if isinstance(expr, WithinDays):
        return ctx.candidate.start.minutes < (
            ctx.horizon_start.minutes + expr.days * MINUTES_PER_DAY
        )
    if isinstance(expr, OnDate):
        return ctx.candidate.start.day_number == expr.day_number
    raise AssertionError(f"unhandled node {type(expr).__name__}")


# ---------------------------------------------------------------------------
# Canonical rendering

def _clock(minutes: int) -> str:
    return f"{minutes // 60:02d}:{minutes % 60:02d}"


def _wrap(child: Expr) -> str:
    text = render(child)
    if isinstance(child, (And, Or, Not)):
        return f"({text})"
    return text


def render(expr: Expr) -> str:
    """Canonical text form; parse(render(e)) == e."""
    if isinstance(expr, And):
        return " and ".join(_wrap(p) for p in expr.parts)
    if isinstance(expr, Or):
        return " or ".join(_wrap(p) for p in expr.parts)
    if isinstance(expr, Not):
        return f"not {_wrap(expr.operand)}"
    if isinstance(expr, Compare):
        if expr.field in TIME_FIELDS:
            return f"{expr.field} {expr.op} {_clock(expr.value)}"
        return f"{expr.field} {expr.op} {expr.value}"
    if isinstance(expr, DayIn):
        ordered = [d for d in WEEKDAY_NAMES if d in expr.days]
        return "day in {" + ", ".join(ordered) + "}"
    if isinstance(expr, Free):
        return "all_free" if expr.person is None else f'free("{expr.person}")'
    if isinstance(expr, GapBefore):
        return f"gap_before {expr.op} {expr.minutes}m"
    if isinstance(expr, GapAfter):
        return f"gap_after {expr.op} {expr.minutes}m"
    if isinstance(expr, AvoidWindow):
        return f"avoid({_clock(expr.start)}-{_clock(expr.end)})"
    if isinstance(expr, WithinDays):
        return f"within_days({expr.days})"
    if isinstance(expr, OnDate):
        date = (EPOCH + _dt.timedelta(days=expr.day_number)).date()
        return f"on({date.isoformat()})"
    raise AssertionError(f"unhandled node {type(expr).__name__}")
