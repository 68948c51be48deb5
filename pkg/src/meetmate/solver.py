"""Priority-weighted scoring, best-time selection, and diverse top-k suggestions.

Constraints are ranked (0 = most important) and weighted 2^(n-1-rank), so a
higher-priority constraint outweighs every lower-priority one combined and the
solver never trades up. Selection is brute force over the candidate grid with
numpy: each constraint compiles to a boolean mask and the argmax set is refined
rank by rank, which keeps the hot path in bool arrays instead of big integers.
Ties break to the earliest start everywhere.

diverse_topk applies the epsilon filter (smallest epsilon admitting at least k
candidates, realized as best minus k-th-best score) and then greedily grows the
result set by max-sum dispersion under the log start-distance.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass, replace
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .calendars import FreeBusyView
from .dsl import (
    And,
    AvoidWindow,
    Compare,
    DayIn,
    EvalContext,
    Expr,
    Free,
    GapAfter,
    GapBefore,
    Not,
    OnDate,
    Or,
    WithinDays,
    evaluate,
)
from .timegrid import MINUTES_PER_DAY, WEEKDAY_NAMES, TimeGrid, TimeSlot
from .timegrid import distance as log_distance

MAX_WEIGHTED_CONSTRAINTS = 62

_REL = {
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
    "==": operator.eq,
    "!=": operator.ne,
}


class TooManyConstraintsError(ValueError):
    """More ranked constraints than fit an unsigned 64-bit score."""


class EmptyGridError(ValueError):
    """No candidate slots to choose from."""


@dataclass(frozen=True)
class PrioritizedConstraint:
    id: str
    rank: int  # 0 = most important
    nl_text: str
    source: str  # DSL text; the persistence form
    expr: Expr
    weight: int


@dataclass(frozen=True)
class Suggestion:
    slot: TimeSlot
    score: int
    satisfied: tuple[str, ...]  # constraint ids, rank order
    unsatisfied: tuple[str, ...]
    attendee_availability: Mapping[str, bool]
    explanation: str


def assign_weights(constraints: Sequence[PrioritizedConstraint]) -> list[PrioritizedConstraint]:
    """Renumber ranks densely by list order and set weight = 2^(n-1-rank)."""
    n = len(constraints)
    if n > MAX_WEIGHTED_CONSTRAINTS:
        raise TooManyConstraintsError(
            f"{n} constraints exceed the {MAX_WEIGHTED_CONSTRAINTS}-constraint limit"
        )
    return [
        replace(c, rank=i, weight=1 << (n - 1 - i)) for i, c in enumerate(constraints)
    ]


def score(slot: TimeSlot, constraints: Sequence[PrioritizedConstraint], ctx: EvalContext) -> int:
    sctx = ctx.with_candidate(slot)
    return sum(c.weight for c in constraints if evaluate(c.expr, sctx))


class GridArrays:
    """Per-slot numpy columns for one grid, with cached availability and gap vectors.

    Rebuilding these is cheap relative to solving; the caches matter because one
    solve touches the same person's calendar once per constraint mentioning them.
    """

    def __init__(self, grid: TimeGrid, view: FreeBusyView):
        n = len(grid.slots)
        self.view = view
        self.duration = grid.duration_minutes
        self.starts = np.fromiter(
            (s.start.minutes for s in grid.slots), dtype=np.int64, count=n
        )
        self.ends = self.starts + grid.duration_minutes
        self.minute_of_day = self.starts % MINUTES_PER_DAY
        self.hour = self.minute_of_day // 60
        self.minute = self.starts % 60
        self.day_number = self.starts // MINUTES_PER_DAY
        self.weekday_idx = self.day_number % 7
        end_mod = self.ends % MINUTES_PER_DAY
        # an end exactly at midnight reads as 24:00 (see the DSL's scalar twin)
        self.end_minute_of_day = np.where(end_mod == 0, MINUTES_PER_DAY, end_mod)
        self.end_hour = self.end_minute_of_day // 60
        self.end_minute = self.ends % 60
        self._free: dict[str, np.ndarray] = {}
        self._gap_before: dict[str, np.ndarray] = {}
        self._gap_after: dict[str, np.ndarray] = {}

    def free_mask(self, person_id: str) -> np.ndarray:
        m = self._free.get(person_id)
        if m is None:
            merged = self.view.merged_intervals(person_id)
            if merged:
                bs = np.fromiter((s for s, _ in merged), np.int64, count=len(merged))
                be = np.fromiter((e for _, e in merged), np.int64, count=len(merged))
                idx = np.searchsorted(bs, self.ends, side="left") - 1
                overlap = (idx >= 0) & (be[np.maximum(idx, 0)] > self.starts)
                m = ~overlap
            else:
                m = np.ones(len(self.starts), dtype=bool)
            self._free[person_id] = m
        return m

    def gap_before(self, person_id: str) -> np.ndarray:
        g = self._gap_before.get(person_id)
        if g is None:
            merged = self.view.merged_intervals(person_id)
            day_base = self.day_number * MINUTES_PER_DAY
            if merged:
                ends = np.fromiter((e for _, e in merged), np.int64, count=len(merged))
                i = np.searchsorted(ends, self.starts, side="right") - 1
                prev_end = ends[np.maximum(i, 0)]
                usable = (i >= 0) & (prev_end > day_base)
                g = np.where(usable, self.starts - prev_end, self.starts - day_base)
            else:
                g = self.starts - day_base
            self._gap_before[person_id] = g
        return g

    def gap_after(self, person_id: str) -> np.ndarray:
        g = self._gap_after.get(person_id)
        if g is None:
            merged = self.view.merged_intervals(person_id)
            day_end = (self.day_number + 1) * MINUTES_PER_DAY
            fallback = np.maximum(0, day_end - self.ends)
            if merged:
                starts = np.fromiter((s for s, _ in merged), np.int64, count=len(merged))
                j = np.searchsorted(starts, self.ends, side="left")
                nxt = starts[np.minimum(j, len(starts) - 1)]
                usable = (j < len(starts)) & (nxt < day_end)
                g = np.where(usable, nxt - self.ends, fallback)
            else:
                g = fallback
            self._gap_after[person_id] = g
        return g


def compile_mask(expr: Expr, arrays: GridArrays, ctx: EvalContext) -> np.ndarray:
    """Vectorized twin of dsl.evaluate; must agree with it pointwise."""
    if isinstance(expr, And):
        out = compile_mask(expr.parts[0], arrays, ctx)
        for p in expr.parts[1:]:
            out = out & compile_mask(p, arrays, ctx)
        return out
    if isinstance(expr, Or):
        out = compile_mask(expr.parts[0], arrays, ctx)
        for p in expr.parts[1:]:
            out = out | compile_mask(p, arrays, ctx)
        return out
    if isinstance(expr, Not):
        return ~compile_mask(expr.operand, arrays, ctx)
    if isinstance(expr, Compare):
        return _REL[expr.op](_column(expr.field, arrays, ctx), expr.value)
    if isinstance(expr, DayIn):
        wanted = np.array([WEEKDAY_NAMES.index(d) for d in expr.days], dtype=np.int64)
        return np.isin(arrays.weekday_idx, wanted)
    if isinstance(expr, Free):
        if expr.person is None:
            out = np.ones(len(arrays.starts), dtype=bool)
            for pid in ctx.attendees:
                out = out & arrays.free_mask(pid)
            return out
        return arrays.free_mask(arrays.view.id_for_name(expr.person))
    if isinstance(expr, GapBefore):
        return _REL[expr.op](arrays.gap_before(ctx.organizer), expr.minutes)
    if isinstance(expr, GapAfter):
        return _REL[expr.op](arrays.gap_after(ctx.organizer), expr.minutes)
    if isinstance(expr, AvoidWindow):
        if arrays.duration >= MINUTES_PER_DAY:
            return np.zeros(len(arrays.starts), dtype=bool)
        base1 = arrays.day_number * MINUTES_PER_DAY
        clash = np.maximum(arrays.starts, base1 + expr.start) < np.minimum(
            arrays.ends, base1 + expr.end
        )
        base2 = ((arrays.ends - 1) // MINUTES_PER_DAY) * MINUTES_PER_DAY
        crosses = base2 > base1
        if crosses.any():
            clash |= crosses & (
                np.maximum(arrays.starts, base2 + expr.start)
                < np.minimum(arrays.ends, base2 + expr.end)
            )
        return ~clash
    if isinstance(expr, WithinDays):
        return arrays.starts < ctx.horizon_start.minutes + expr.days * MINUTES_PER_DAY
    if isinstance(expr, OnDate):
        return arrays.day_number == expr.day_number
    raise AssertionError(f"unhandled node {type(expr).__name__}")


def _column(field: str, arrays: GridArrays, ctx: EvalContext) -> np.ndarray:
    if field == "start.hour":
        return arrays.hour
    if field == "start.minute":
        return arrays.minute
    if field == "start.time":
        return arrays.minute_of_day
    if field == "end.hour":
        return arrays.end_hour
    if field == "end.minute":
        return arrays.end_minute
    if field == "end.time":
        return arrays.end_minute_of_day
    if field == "day_index":
        return arrays.day_number - ctx.horizon_start.day_number
    raise AssertionError(f"unhandled field {field}")


def _explanation(satisfied_texts: Sequence[str], unsatisfied_texts: Sequence[str],
                 had_constraints: bool) -> str:
    if not had_constraints:
        return "This time works for the selected attendees."
    if not unsatisfied_texts:
        return f"This time satisfies: {', '.join(satisfied_texts)}."
    if not satisfied_texts:
        return f"This time does not satisfy: {', '.join(unsatisfied_texts)}."
    return (
        f"This time satisfies: {', '.join(satisfied_texts)}, "
        f"but does not satisfy: {', '.join(unsatisfied_texts)}."
    )


def explain(s: Suggestion, constraints: Sequence[PrioritizedConstraint]) -> str:
    by_id = {c.id: c.nl_text for c in constraints}
    return _explanation(
        [by_id[i] for i in s.satisfied],
        [by_id[i] for i in s.unsatisfied],
        bool(constraints),
    )


def _suggestion_for(
    slot: TimeSlot, constraints: Sequence[PrioritizedConstraint], ctx: EvalContext
) -> Suggestion:
    sctx = ctx.with_candidate(slot)
    ranked = sorted(constraints, key=lambda c: c.rank)
    sat: list[str] = []
    unsat: list[str] = []
    total = 0
    sat_texts: list[str] = []
    unsat_texts: list[str] = []
    for c in ranked:
        if evaluate(c.expr, sctx):
            sat.append(c.id)
            sat_texts.append(c.nl_text)
            total += c.weight
        else:
            unsat.append(c.id)
            unsat_texts.append(c.nl_text)
    availability = {
        pid: ctx.free_busy.is_free(pid, slot) for pid in ctx.attendees
    }
    return Suggestion(
        slot=slot,
        score=total,
        satisfied=tuple(sat),
        unsatisfied=tuple(unsat),
        attendee_availability=availability,
        explanation=_explanation(sat_texts, unsat_texts, bool(constraints)),
    )


def best_time(
    grid: TimeGrid,
    constraints: Sequence[PrioritizedConstraint],
    ctx: EvalContext,
    *,
    arrays: Optional[GridArrays] = None,
) -> Suggestion:
    """Earliest slot of the argmax set under lexicographic-by-rank satisfaction."""
    if not grid.slots:
        raise EmptyGridError("no candidate slots")
    if arrays is None:
        arrays = GridArrays(grid, ctx.free_busy)
    alive = np.ones(len(grid.slots), dtype=bool)
    for c in sorted(constraints, key=lambda c: c.rank):
        keep = alive & compile_mask(c.expr, arrays, ctx)
        if keep.any():
            alive = keep
    idx = int(np.argmax(alive))
    return _suggestion_for(grid.slots[idx], constraints, ctx)


def epsilon_filter(scores: Sequence[int], k: int) -> tuple[list[int], int]:
    """Admitted indices under the smallest epsilon allowing >= k candidates.

    Returns (indices, epsilon). Fewer than k scores admit everything at
    epsilon 0.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    values = list(scores)
    if not values:
        return [], 0
    if len(values) < k:
        return list(range(len(values))), 0
    kth = sorted(values, reverse=True)[k - 1]
    eps = max(values) - kth
    return [i for i, s in enumerate(values) if s >= kth], eps


def _epsilon_keep(scores: np.ndarray, k: int) -> np.ndarray:
    n = len(scores)
    if n < k:
        return np.ones(n, dtype=bool)
    if scores.dtype == object:
        kth = sorted(scores.tolist(), reverse=True)[k - 1]
        return np.array([s >= kth for s in scores.tolist()], dtype=bool)
    kth = np.partition(scores, n - k)[n - k]
    return scores >= kth


def _score_vector(
    arrays: GridArrays, ranked: Sequence[PrioritizedConstraint], ctx: EvalContext
) -> np.ndarray:
    n_slots = len(arrays.starts)
    if len(ranked) <= MAX_WEIGHTED_CONSTRAINTS:
        scores = np.zeros(n_slots, dtype=np.uint64)
        for c in ranked:
            scores[compile_mask(c.expr, arrays, ctx)] += np.uint64(c.weight)
        return scores
    # big-endian packed satisfaction bits: lexicographic bytes order == score order
    cols = []
    for at in range(0, len(ranked), 8):
        byte = np.zeros(n_slots, dtype=np.uint8)
        for bit, c in enumerate(ranked[at : at + 8]):
            byte |= compile_mask(c.expr, arrays, ctx).astype(np.uint8) << (7 - bit)
        cols.append(byte)
    stacked = np.stack(cols, axis=1)
    return np.array([row.tobytes() for row in stacked], dtype=object)


def _select_diverse(
    arrays: GridArrays,
    scores: np.ndarray,
    k: int,
    slots: Sequence[TimeSlot],
    distance_fn: Callable[[TimeSlot, TimeSlot], float],
) -> list[int]:
    keep = _epsilon_keep(scores, k)
    cand = np.flatnonzero(keep)  # ascending, i.e. ordered by start
    limit = min(k, len(cand))
    cscores = scores[cand]
    best = cscores.max() if cscores.dtype != object else max(cscores.tolist())
    first = int(np.argmax(cscores == best))
    cstarts = arrays.starts[cand]
    fast = distance_fn is log_distance

    def dist_to(pivot: int) -> np.ndarray:
        if fast:
            return np.log(np.abs(cstarts - cstarts[pivot]) + 1.0)
        pivot_slot = slots[int(cand[pivot])]
        return np.fromiter(
            (distance_fn(slots[int(i)], pivot_slot) for i in cand),
            dtype=float,
            count=len(cand),
        )

    chosen = [first]
    if limit > 1:
        total = dist_to(first)
        avail = np.ones(len(cand), dtype=bool)
        avail[first] = False
        while len(chosen) < limit:
            j = int(np.argmax(np.where(avail, total, -np.inf)))
            chosen.append(j)
            avail[j] = False
            total = total + dist_to(j)
    return [int(cand[j]) for j in chosen]


def diverse_topk(
    grid: TimeGrid,
    constraints: Sequence[PrioritizedConstraint],
    ctx: EvalContext,
    k: int,
    *,
    distance_fn: Callable[[TimeSlot, TimeSlot], float] = log_distance,
    arrays: Optional[GridArrays] = None,
) -> list[Suggestion]:
    """min(k, |F|) suggestions: earliest best scorer, then greedy max dispersion."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not grid.slots:
        raise EmptyGridError("no candidate slots")
    if arrays is None:
        arrays = GridArrays(grid, ctx.free_busy)
    ranked = sorted(constraints, key=lambda c: c.rank)
    scores = _score_vector(arrays, ranked, ctx)
    picks = _select_diverse(arrays, scores, k, grid.slots, distance_fn)
    return [_suggestion_for(grid.slots[i], constraints, ctx) for i in picks]


def initial_suggestion(
    grid: TimeGrid,
    attendees: Sequence[str],
    ctx: EvalContext,
    k: int = 1,
    *,
    distance_fn: Callable[[TimeSlot, TimeSlot], float] = log_distance,
    arrays: Optional[GridArrays] = None,
) -> list[Suggestion]:
    """Suggestions maximizing attendee availability (free-count scoring).

    Selection is diverse_topk over one synthetic free(p) constraint per attendee
    at equal weight 1; the returned suggestions carry the availability count as
    the score and an empty satisfied/unsatisfied split, since no user constraint
    exists yet.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not grid.slots:
        raise EmptyGridError("no candidate slots")
    if arrays is None:
        arrays = GridArrays(grid, ctx.free_busy)
    counts = np.zeros(len(grid.slots), dtype=np.uint64)
    for pid in attendees:
        counts += arrays.free_mask(pid).astype(np.uint64)
    picks = _select_diverse(arrays, counts, k, grid.slots, distance_fn)
    out = []
    for i in picks:
        slot = grid.slots[i]
        availability = {pid: arrays.view.is_free(pid, slot) for pid in attendees}
        out.append(
            Suggestion(
                slot=slot,
                score=int(counts[i]),
                satisfied=(),
                unsatisfied=(),
                attendee_availability=availability,
                explanation=_explanation((), (), False),
            )
        )
    return out
