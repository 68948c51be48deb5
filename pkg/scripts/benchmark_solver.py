"""Single-threaded solver benchmark at full scale.

Builds a dense candidate grid and a constraint list drawn from the bundled
preference corpus (placeholders filled with varied weekdays, times, names,
and deadlines), then times one best_time call. The default sizes match the
headline claim checked by the release gate: 100k slots x 10k constraints in
under ten seconds.

Usage: python3 scripts/benchmark_solver.py [--slots N] [--constraints N]
"""

import argparse
import time

from meetmate import dsl
from meetmate.dsl import EvalContext
from meetmate.evalharness import load_templates
from meetmate.solver import GridArrays, PrioritizedConstraint, best_time
from meetmate.timegrid import WEEKDAY_NAMES, Instant, TimeSlot, enumerate_candidates
from meetmate.universe_gen import GenParams, generate_universe

SLOTS_PER_DAY = (1440 - 30) // 15 + 1  # 30-minute slots on the 15-minute grid


def corpus_constraints(count: int, names: list[str]) -> list[PrioritizedConstraint]:
    supported = [t for t in load_templates() if t.supported]
    out = []
    for i in range(count):
        template = supported[i % len(supported)]
        source = (
            template.reference_dsl
            .replace("[WEEKDAY]", WEEKDAY_NAMES[(i // len(supported)) % 5])
            .replace("[TIME]", f"{8 + i % 10:02d}:00")
            .replace("[ATTENDEE]", names[i % len(names)])
            .replace("[N_DAYS]", str(1 + i % 14))
        )
        out.append(
            PrioritizedConstraint(
                id=f"c-{i + 1}", rank=i, nl_text=source, source=source,
                expr=dsl.parse(source), weight=1,
            )
        )
    return out


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--slots", type=int, default=100_000)
    parser.add_argument("--constraints", type=int, default=10_000)
    parser.add_argument("--seed", type=int, default=11)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    universe = generate_universe(GenParams(seed=args.seed))
    days = -(-args.slots // SLOTS_PER_DAY)
    grid = enumerate_candidates(TimeSlot.of(0, days * 1440), 30)
    names = [p.name for p in universe.people]
    constraints = corpus_constraints(args.constraints, names)
    ctx = EvalContext(
        organizer=universe.people[0].id,
        attendees=tuple(p.id for p in universe.people[:4]),
        duration_minutes=30,
        candidate=grid.slots[0],
        free_busy=universe.free_busy(),
        horizon_start=Instant(0),
        now=Instant(0),
    )
    print(f"grid: {len(grid.slots)} slots over {days} days; {len(constraints)} constraints")

    for run in range(1, args.repeats + 1):
        t0 = time.perf_counter()
        arrays = GridArrays(grid, ctx.free_busy)
        t1 = time.perf_counter()
        suggestion = best_time(grid, constraints, ctx, arrays=arrays)
        t2 = time.perf_counter()
        print(
            f"run {run}: arrays {t1 - t0:6.2f} s   solve {t2 - t1:6.2f} s   "
            f"total {t2 - t0:6.2f} s   best {suggestion.slot.start.isoformat()}"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
