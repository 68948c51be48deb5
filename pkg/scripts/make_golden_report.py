"""Regenerate the committed evaluation report.

Runs the offline configuration (phrase-list checker, reference coder) over a
seeded universe and instance set, so the output is byte-stable. The committed
copy under reports/ documents what the shipped corpus and rule checker score;
re-run this after touching the corpus, the checker defaults, or the metric
renderer, and commit the diff.

Usage: python3 scripts/make_golden_report.py [--out PATH]
"""

import argparse
from pathlib import Path

from meetmate.evalharness import ReferenceCoder, load_templates, render_report, run_eval
from meetmate.session import RuleChecker
from meetmate.universe_gen import GenParams, generate_instances, generate_universe

DEFAULT_OUT = Path(__file__).resolve().parent.parent / "reports" / "golden_eval.txt"


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, default=DEFAULT_OUT)
    parser.add_argument("--universe-seed", type=int, default=42)
    parser.add_argument("--instances-seed", type=int, default=42)
    parser.add_argument("--eval-seed", type=int, default=7)
    args = parser.parse_args()

    universe = generate_universe(GenParams(seed=args.universe_seed))
    instances = generate_instances(universe, seed=args.instances_seed, n=75)
    report = run_eval(
        load_templates(),
        instances,
        universe,
        RuleChecker(),
        ReferenceCoder(),
        seed=args.eval_seed,
        checker_name="rules",
        coder_name="reference",
    )
    text = render_report(report)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(text, encoding="utf-8")
    print(text, end="")
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
