import math
import random
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from meetmate import dsl, solver
from meetmate.calendars import BusyInterval, Person, Role, Universe
from meetmate.dsl import EvalContext
from meetmate.solver import (
    EmptyGridError,
    GridArrays,
    PrioritizedConstraint,
    TooManyConstraintsError,
    assign_weights,
    best_time,
    compile_mask,
    diverse_topk,
    epsilon_filter,
    explain,
    initial_suggestion,
    score,
)
from meetmate.timegrid import TimeGrid, TimeSlot, enumerate_candidates

from conftest import small_universe
from dslgen import random_expr


def constraints_from(*sources):
    raw = [
        PrioritizedConstraint(f"c{i}", i, f"pref {i}", src, dsl.parse(src), 0)
        for i, src in enumerate(sources)
    ]
    return assign_weights(raw)


def ctx_for(universe, grid, duration=30, attendees=("p2", "p1", "p3"), organizer="p2"):
    return EvalContext(
        organizer=organizer,
        attendees=tuple(attendees),
        duration_minutes=duration,
        candidate=grid.slots[0],
        free_busy=universe.free_busy(),
        horizon_start=grid.horizon.start,
        now=grid.horizon.start,
    )


# --- weights and score ------------------------------------------------------

def test_three_constraints_weigh_4_2_1():
    cs = constraints_from("start.hour < 11", "all_free", "gap_before >= 0m")
    assert [c.weight for c in cs] == [4, 2, 1]
    assert [c.rank for c in cs] == [0, 1, 2]


def test_single_constraint_weighs_one():
    assert [c.weight for c in constraints_from("all_free")] == [1]


def test_empty_list_stays_empty():
    assert assign_weights([]) == []


def test_assign_weights_renumbers_sparse_ranks():
    raw = [
        PrioritizedConstraint("a", 7, "x", "all_free", dsl.parse("all_free"), 0),
        PrioritizedConstraint("b", 9, "y", "all_free", dsl.parse("all_free"), 0),
    ]
    assert [c.rank for c in assign_weights(raw)] == [0, 1]


def test_too_many_constraints_rejected():
    raw = [
        PrioritizedConstraint(f"c{i}", i, "x", "all_free", dsl.parse("all_free"), 0)
        for i in range(63)
    ]
    with pytest.raises(TooManyConstraintsError):
        assign_weights(raw)


@pytest.mark.parametrize("n", range(1, 8))
def test_weights_give_lexicographic_dominance(n):
    weights = [1 << (n - 1 - r) for r in range(n)]
    for u in product((0, 1), repeat=n):
        su = sum(w * b for w, b in zip(weights, u))
        for v in product((0, 1), repeat=n):
            sv = sum(w * b for w, b in zip(weights, v))
            assert (su > sv) == (u > v)


def test_score_is_weighted_satisfaction_sum():
    uni = small_universe()
    grid = enumerate_candidates(TimeSlot.of(0, 1440), 30)
    ctx = ctx_for(uni, grid)
    # on a 09:00 slot: hour<11 true (w4), day MON true (w2), day TUE false (w1)
    cs = constraints_from("start.hour < 11", "day in {MON}", "day in {TUE}")
    slot = TimeSlot.of(9 * 60, 9 * 60 + 30)
    assert score(slot, cs, ctx) == 6
    all_true = constraints_from("start.hour >= 0", "day_index >= 0", "gap_after >= 0m")
    assert score(slot, all_true, ctx) == 2**3 - 1
    assert score(slot, constraints_from("day in {TUE}"), ctx) == 0


# --- best_time --------------------------------------------------------------

def test_best_time_prefers_earliest_satisfying_slot():
    uni = Universe(("t1",), (Person("p1", "Ava", Role.MEMBER, "t1"),), ())
    grid = enumerate_candidates(TimeSlot.of(9 * 60, 17 * 60), 30)
    ctx = ctx_for(uni, grid, attendees=("p1",), organizer="p1")
    got = best_time(grid, constraints_from("start.hour < 11"), ctx)
    assert got.slot.start.minutes == 9 * 60
    assert got.satisfied == ("c0",)


def test_best_time_with_no_constraints_is_earliest_slot():
    uni = small_universe()
    grid = enumerate_candidates(TimeSlot.of(600, 900), 30)
    got = best_time(grid, [], ctx_for(uni, grid))
    assert got.slot == grid.slots[0]
    assert got.score == 0
    assert got.explanation == "This time works for the selected attendees."


def test_best_time_falls_back_when_top_rank_is_unsatisfiable():
    uni = small_universe()
    grid = enumerate_candidates(TimeSlot.of(0, 1440), 30)
    ctx = ctx_for(uni, grid)
    cs = constraints_from("start.hour < 0", "start.time >= 13:00")
    got = best_time(grid, cs, ctx)
    assert got.slot.start.minutes == 13 * 60
    assert got.satisfied == ("c1",)
    assert got.unsatisfied == ("c0",)


def test_best_time_on_empty_grid_raises():
    uni = small_universe()
    grid = enumerate_candidates(TimeSlot.of(0, 20), 30)
    full = enumerate_candidates(TimeSlot.of(0, 1440), 30)
    with pytest.raises(EmptyGridError):
        best_time(grid, [], ctx_for(uni, full))


# --- epsilon + diversity ----------------------------------------------------

def test_epsilon_filter_example():
    indices, eps = epsilon_filter([5, 5, 3, 2], k=3)
    assert indices == [0, 1, 2]
    assert eps == 2


def test_epsilon_filter_admits_all_when_grid_smaller_than_k():
    indices, eps = epsilon_filter([3, 1], k=5)
    assert indices == [0, 1]
    assert eps == 0


def _sparse_grid(starts, duration=30):
    slots = tuple(TimeSlot.of(s, s + duration) for s in starts)
    return TimeGrid(slots, TimeSlot.of(0, max(starts) + duration), duration)


def test_greedy_picks_far_offset_among_equal_scores():
    uni = small_universe()
    grid = _sparse_grid([0, 15, 30, 1440])
    got = diverse_topk(grid, [], ctx_for(uni, grid), k=2)
    assert [s.slot.start.minutes for s in got] == [0, 1440]


def test_diverse_topk_orders_by_selection_not_time():
    # scores [5, 5, 3, 2] over four consecutive days
    uni = small_universe()
    grid = _sparse_grid([0, 1440, 2880, 4320])
    ctx = ctx_for(uni, grid)
    cs = constraints_from("day_index <= 1", "day_index >= 2", "day_index <= 2")
    slot_scores = [score(s, cs, ctx) for s in grid.slots]
    assert slot_scores == [5, 5, 3, 2]
    got = diverse_topk(grid, cs, ctx, k=3)
    # r1: earliest best scorer; r2: the admitted slot farthest from it
    assert [s.slot.start.minutes for s in got] == [0, 2880, 1440]
    assert epsilon_filter(slot_scores, 3)[1] == 2


def test_k1_degenerates_to_best_time():
    uni = small_universe()
    grid = enumerate_candidates(TimeSlot.of(0, 2 * 1440), 30)
    ctx = ctx_for(uni, grid)
    cs = constraints_from("start.hour >= 12", "day in {TUE}")
    assert diverse_topk(grid, cs, ctx, k=1)[0] == best_time(grid, cs, ctx)


def test_diverse_topk_rejects_bad_k():
    uni = small_universe()
    grid = enumerate_candidates(TimeSlot.of(0, 1440), 30)
    with pytest.raises(ValueError):
        diverse_topk(grid, [], ctx_for(uni, grid), k=0)


def _log10_distance(a, b):
    return math.log10(abs(a.start.minutes - b.start.minutes) + 1)


@given(seed=st.integers(0, 10**6))
@settings(max_examples=30)
def test_log_base_swap_keeps_selection(seed):
    rng = random.Random(seed)
    uni, grid, cs, ctx = _random_instance(rng)
    base_e = diverse_topk(grid, cs, ctx, k=3)
    base_10 = diverse_topk(grid, cs, ctx, k=3, distance_fn=_log10_distance)
    assert [s.slot for s in base_e] == [s.slot for s in base_10]


# --- random-instance oracle -------------------------------------------------

def _random_instance(rng, max_constraints=8):
    people = (
        Person("p1", "Anton", Role.MEMBER, "t1"),
        Person("p2", "Bella", Role.MANAGER, "t1"),
        Person("p3", "Chen", Role.MEMBER, "t1"),
        Person("p4", "Dana Holt", Role.MEMBER, "t1"),
    )
    busy = []
    for pid in ("p1", "p2", "p3", "p4"):
        for _ in range(rng.randint(0, 6)):
            day = rng.randrange(0, 4)
            start = day * 1440 + rng.randrange(0, 1380)
            busy.append(BusyInterval(pid, TimeSlot.of(start, start + rng.randint(15, 90))))
    uni = Universe(("t1",), people, tuple(busy))
    duration = rng.choice((30, 60))
    h_start = rng.randrange(0, 3 * 1440)
    horizon = TimeSlot.of(h_start, h_start + duration + rng.randint(15, 2 * 1440))
    grid = enumerate_candidates(horizon, duration)
    exprs = [random_expr(rng, 2) for _ in range(rng.randint(0, max_constraints))]
    cs = assign_weights(
        [
            PrioritizedConstraint(f"c{i}", i, f"pref {i}", dsl.render(e), e, 0)
            for i, e in enumerate(exprs)
        ]
    )
    ctx = EvalContext(
        organizer="p2",
        attendees=("p2", "p1", "p3"),
        duration_minutes=duration,
        candidate=grid.slots[0],
        free_busy=uni.free_busy(),
        horizon_start=horizon.start,
        now=horizon.start,
    )
    return uni, grid, cs, ctx


def _exhaustive_best(grid, cs, ctx):
    best_slot, best_score = None, -1
    for slot in grid.slots:
        s = score(slot, cs, ctx)
        if s > best_score:
            best_slot, best_score = slot, s
    return best_slot, best_score


@given(seed=st.integers(0, 10**9))
@settings(max_examples=60)
def test_best_time_matches_exhaustive_argmax(seed):
    rng = random.Random(seed)
    uni, grid, cs, ctx = _random_instance(rng)
    got = best_time(grid, cs, ctx)
    want_slot, want_score = _exhaustive_best(grid, cs, ctx)
    assert got.slot == want_slot
    assert got.score == want_score


@given(seed=st.integers(0, 10**9))
@settings(max_examples=30)
def test_suggestions_stay_within_epsilon_of_best(seed):
    rng = random.Random(seed)
    uni, grid, cs, ctx = _random_instance(rng)
    k = rng.randint(1, 4)
    slot_scores = [score(s, cs, ctx) for s in grid.slots]
    _, eps = epsilon_filter(slot_scores, k)
    for suggestion in diverse_topk(grid, cs, ctx, k):
        assert suggestion.score >= max(slot_scores) - eps


@given(seed=st.integers(0, 10**9))
@settings(max_examples=20)
def test_diverse_topk_is_deterministic(seed):
    rng = random.Random(seed)
    uni, grid, cs, ctx = _random_instance(rng)
    assert diverse_topk(grid, cs, ctx, 3) == diverse_topk(grid, cs, ctx, 3)


@given(seed=st.integers(0, 10**9))
@settings(max_examples=60)
def test_masks_agree_with_scalar_evaluation(seed):
    rng = random.Random(seed)
    uni, grid, cs, ctx = _random_instance(rng, max_constraints=3)
    arrays = GridArrays(grid, ctx.free_busy)
    e = random_expr(rng, 2)
    mask = compile_mask(e, arrays, ctx)
    for i, slot in enumerate(grid.slots):
        assert bool(mask[i]) == dsl.evaluate(e, ctx.with_candidate(slot))


# --- initial suggestions ----------------------------------------------------

def test_initial_suggestion_prefers_earliest_when_everyone_free():
    uni = Universe(
        ("t1",),
        (
            Person("p1", "Ava", Role.MEMBER, "t1"),
            Person("p2", "Bo", Role.MEMBER, "t1"),
        ),
        (),
    )
    grid = enumerate_candidates(TimeSlot.of(600, 900), 30)
    ctx = ctx_for(uni, grid, attendees=("p1", "p2"), organizer="p1")
    got = initial_suggestion(grid, ("p1", "p2"), ctx, k=1)
    assert got[0].slot == grid.slots[0]
    assert got[0].score == 2
    assert got[0].attendee_availability == {"p1": True, "p2": True}


def test_initial_suggestion_finds_the_unique_fully_free_slot():
    # p1 busy everywhere except 12:00-12:30
    blocks = [(600, 720), (750, 900)]
    uni = Universe(
        ("t1",),
        (
            Person("p1", "Ava", Role.MEMBER, "t1"),
            Person("p2", "Bo", Role.MEMBER, "t1"),
        ),
        tuple(BusyInterval("p1", TimeSlot.of(s, e)) for s, e in blocks),
    )
    grid = enumerate_candidates(TimeSlot.of(600, 900), 30)
    ctx = ctx_for(uni, grid, attendees=("p1", "p2"), organizer="p1")
    got = initial_suggestion(grid, ("p1", "p2"), ctx, k=1)
    assert got[0].slot == TimeSlot.of(720, 750)
    assert got[0].score == 2


def test_initial_suggestion_k3_returns_distinct_starts():
    uni = small_universe()
    grid = enumerate_candidates(TimeSlot.of(0, 2 * 1440), 30)
    ctx = ctx_for(uni, grid)
    got = initial_suggestion(grid, ("p2", "p1", "p3"), ctx, k=3)
    starts = [s.slot.start.minutes for s in got]
    assert len(set(starts)) == 3
    assert all(s.satisfied == () and s.unsatisfied == () for s in got)


# --- explanations -----------------------------------------------------------

def test_explanation_mixed_satisfaction():
    uni = small_universe()
    grid = enumerate_candidates(TimeSlot.of(0, 1440), 30)
    ctx = ctx_for(uni, grid)
    raw = [
        PrioritizedConstraint("a", 0, "Meeting before 11am", "start.hour < 11",
                              dsl.parse("start.hour < 11"), 0),
        PrioritizedConstraint("b", 1, "Anton can attend", 'free("Anton")',
                              dsl.parse('free("Anton")'), 0),
    ]
    cs = assign_weights(raw)
    # 09:00 slot: before 11am but Anton is busy
    got = best_time(_sparse_grid([9 * 60]), cs, ctx)
    assert got.explanation == (
        "This time satisfies: Meeting before 11am, "
        "but does not satisfy: Anton can attend."
    )
    assert explain(got, cs) == got.explanation


def test_explanation_all_satisfied_has_no_but_clause():
    uni = small_universe()
    ctx = ctx_for(uni, enumerate_candidates(TimeSlot.of(0, 1440), 30))
    cs = constraints_from("start.hour < 11")
    got = best_time(_sparse_grid([8 * 60]), cs, ctx)
    assert got.explanation == "This time satisfies: pref 0."
    assert "but" not in got.explanation


def test_explanation_none_satisfied():
    uni = small_universe()
    ctx = ctx_for(uni, enumerate_candidates(TimeSlot.of(0, 1440), 30))
    cs = constraints_from("start.hour < 8")
    got = best_time(_sparse_grid([9 * 60]), cs, ctx)
    assert got.explanation == "This time does not satisfy: pref 0."
