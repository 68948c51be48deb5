"""Command-line entry points.

Verbs: gen-universe and gen-instances (synthetic data), solve (one-shot
request plus constraint file), eval (corpus metrics report), serve (HTTP
service), repl (terminal loop). The solve constraint file is a JSON array of
{"dsl": source, "nl_text"?: label} objects ordered from highest priority down.
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path
from typing import Optional, Sequence

from .calendars import Universe
from .dsl import parse
from .evalharness import NlCoderAdapter, ReferenceCoder, load_templates, render_report, run_eval
from .repl import run_repl
from .service import ServiceConfig, build_engine, create_app
from .session import MeetingRequest, RuleChecker, _eval_context, _suggestion_lines, session_grid
from .solver import PrioritizedConstraint, assign_weights, diverse_topk, initial_suggestion
from .timegrid import Instant
from .universe_gen import GenParams, dump_instances, generate_instances, generate_universe, load_instances


def _cmd_gen_universe(args) -> int:
    params = GenParams(
        seed=args.seed,
        n_people=args.people,
        n_teams=args.teams,
        horizon_days=args.horizon_days,
    )
    universe = generate_universe(params)
    universe.dump(args.out)
    print(f"wrote {args.out}: {len(universe.people)} people, {len(universe.busy)} busy intervals")
    return 0


def _cmd_gen_instances(args) -> int:
    universe = Universe.load(args.universe)
    instances = generate_instances(universe, seed=args.seed, n=args.n)
    dump_instances(instances, args.out)
    print(f"wrote {args.out}: {len(instances)} instances")
    return 0


def _cmd_solve(args) -> int:
    universe = Universe.load(args.universe)
    request = MeetingRequest(
        organizer=args.organizer,
        attendees=tuple(args.attendees.split(",")),
        duration_minutes=args.duration,
        horizon_start=Instant.from_iso(args.start),
        horizon_end=Instant.from_iso(args.end),
        suggestion_count=args.k,
    )
    for pid in request.attendees:
        universe.person_by_id(pid)
    grid = session_grid(request)
    ctx = _eval_context(universe, request)
    if args.constraints:
        entries = json.loads(Path(args.constraints).read_text(encoding="utf-8"))
        stubs = [
            PrioritizedConstraint(
                id=f"c-{i + 1}",
                rank=i,
                nl_text=entry.get("nl_text", entry["dsl"]),
                source=entry["dsl"],
                expr=parse(entry["dsl"]),
                weight=1,
            )
            for i, entry in enumerate(entries)
        ]
        suggestions = diverse_topk(grid, assign_weights(stubs), ctx, k=args.k)
    else:
        suggestions = initial_suggestion(grid, request.attendees, ctx, k=args.k)
    for line in _suggestion_lines(suggestions):
        print(line)
    return 0


def _cmd_eval(args) -> int:
    templates = load_templates(args.corpus)
    universe = Universe.load(args.universe)
    instances = load_instances(args.instances)
    if args.checker == "rules":
        checker = RuleChecker()
    else:
        from .llm import LlmChecker, LlmConfig

        checker = LlmChecker(LlmConfig.from_env())
    if args.coder == "reference":
        coder = ReferenceCoder()
    else:
        from .llm import LlmCoder, LlmConfig

        coder = NlCoderAdapter(LlmCoder(LlmConfig.from_env()))
    report = run_eval(
        templates,
        instances,
        universe,
        checker,
        coder,
        seed=args.seed,
        checker_name=args.checker,
        coder_name=args.coder,
    )
    text = render_report(report)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    print(text, end="")
    return 0


def _service_config(args) -> ServiceConfig:
    return ServiceConfig(
        universe_path=args.universe,
        store_dir=args.store,
        host=getattr(args, "host", "127.0.0.1"),
        port=getattr(args, "port", 8000),
        default_k=args.k,
        translator_mode=args.translator,
        capabilities_path=args.capabilities,
        static_dir=getattr(args, "static", None),
    )


def _cmd_serve(args) -> int:
    import uvicorn

    config = _service_config(args)
    engine = build_engine(config)
    app = create_app(engine, static_dir=config.static_dir)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
    return 0


def _cmd_repl(args) -> int:
    engine = build_engine(_service_config(args))
    run_repl(engine)
    return 0


def _add_engine_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--universe", required=True, help="universe JSON file")
    p.add_argument("--store", required=True, help="session store directory")
    p.add_argument("--k", type=int, default=1, help="default suggestion count")
    p.add_argument("--translator", choices=("mock", "llm"), default="mock")
    p.add_argument("--capabilities", default=None, help="capability config JSON")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="meetmate")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-universe", help="generate a synthetic organization")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--people", type=int, default=32)
    p.add_argument("--teams", type=int, default=4)
    p.add_argument("--horizon-days", type=int, default=10)
    p.set_defaults(func=_cmd_gen_universe)

    p = sub.add_parser("gen-instances", help="sample meeting requests from a universe")
    p.add_argument("--universe", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n", type=int, default=75)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_instances)

    p = sub.add_parser("solve", help="one-shot suggestions for a request")
    p.add_argument("--universe", required=True)
    p.add_argument("--organizer", required=True)
    p.add_argument("--attendees", required=True, help="comma-separated person ids")
    p.add_argument("--duration", type=int, required=True)
    p.add_argument("--start", required=True, help="horizon start, ISO minutes")
    p.add_argument("--end", required=True, help="horizon end, ISO minutes")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--constraints", default=None, help="JSON constraint file")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("eval", help="score a checker and coder on the corpus")
    p.add_argument("--corpus", default=None, help="templates JSONL (default: bundled)")
    p.add_argument("--universe", required=True)
    p.add_argument("--instances", required=True)
    p.add_argument("--coder", choices=("reference", "llm"), default="reference")
    p.add_argument("--checker", choices=("rules", "llm"), default="rules")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("serve", help="run the HTTP service")
    _add_engine_flags(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--static", default=None, help="directory to mount at /ui")
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("repl", help="interactive terminal session")
    _add_engine_flags(p)
    p.set_defaults(func=_cmd_repl)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
