"""Template-driven evaluation of the capability checker and the NL coder.

The bundled corpus holds preference templates in seven diary categories, each
marked supported or not; supported ones carry a reference constraint in the
scheduling language. Templates are in-filled against generated meeting
instances (three samples each), then two datasets fall out:

- screening: does the checker's supported/unsupported verdict match the label?
- code generation: does the coder's constraint classify candidate slots the
  same way the reference does, pointwise over two grids (a fixed 50-day
  "general" grid and the instance's own "example" horizon)?

Precision/recall are micro-averaged across records; raw confusion counts are
reported so anything else can be recomputed.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from importlib import resources
from typing import Optional, Protocol, Sequence

import numpy as np

from . import dsl
from .calendars import FreeBusyView, Universe
from .coder import Coder, CoderContext, CoderError
from .session import Checker
from .solver import GridArrays, compile_mask
from .timegrid import (
    MINUTES_PER_DAY,
    WEEKDAY_NAMES,
    Instant,
    TimeGrid,
    TimeSlot,
    business_hours_grid,
)
from .universe_gen import MeetingInstance

CATEGORIES = (
    "Temporal",
    "ExistingCalendar",
    "ExternalInformation",
    "Relational",
    "Attendance",
    "Duration",
    "Facility",
)
PLACEHOLDERS = ("WEEKDAY", "TIME", "ATTENDEE", "DURATION_MIN", "N_DAYS")
GENERAL_GRID_DAYS = 50

_WEEKDAY_NL = ("Monday", "Tuesday", "Wednesday", "Thursday", "Friday")


class CorpusError(Exception):
    pass


class InfillError(Exception):
    pass


@dataclass(frozen=True)
class PreferenceTemplate:
    id: str
    category: str
    supported: bool
    text: str
    reference_dsl: Optional[str] = None

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise CorpusError(f"{self.id}: unknown category {self.category!r}")
        if self.supported != (self.reference_dsl is not None):
            raise CorpusError(f"{self.id}: reference_dsl must be present iff supported")
        for source in filter(None, (self.text, self.reference_dsl)):
            for name in re.findall(r"\[([A-Z_]+)\]", source):
                if name not in PLACEHOLDERS:
                    raise CorpusError(f"{self.id}: unknown placeholder [{name}]")


@dataclass(frozen=True)
class EvalRecord:
    id: str
    template_id: str
    category: str
    nl_text: str
    instance_id: str
    supported: bool
    reference_source: Optional[str] = None
    reference_expr: Optional[dsl.Expr] = None


def load_templates(path=None) -> list[PreferenceTemplate]:
    """Read the JSONL corpus; defaults to the bundled one."""
    if path is None:
        raw = resources.files("meetmate").joinpath("data/templates.jsonl").read_text()
    else:
        with open(path, "r", encoding="utf-8") as fh:
            raw = fh.read()
    templates = []
    for line in raw.splitlines():
        if line.strip():
            doc = json.loads(line)
            templates.append(
                PreferenceTemplate(
                    id=doc["id"],
                    category=doc["category"],
                    supported=doc["supported"],
                    text=doc["text"],
                    reference_dsl=doc.get("reference_dsl"),
                )
            )
    ids = [t.id for t in templates]
    if len(set(ids)) != len(ids):
        raise CorpusError("duplicate template ids")
    return templates


# --------------------------------------------------------------------------
# In-fill


def _time_nl(hour: int) -> str:
    if hour == 12:
        return "12pm"
    return f"{hour}am" if hour < 12 else f"{hour - 12}pm"


def infill(
    template: PreferenceTemplate,
    instance: MeetingInstance,
    universe: Universe,
    seed: int,
) -> list[EvalRecord]:
    """Three concrete records: placeholders drawn uniformly, meeting-specific
    ones ([ATTENDEE], [DURATION_MIN]) taken from the instance."""
    rng = random.Random(seed)
    horizon_days = instance.horizon.duration_minutes // MINUTES_PER_DAY
    attendee_names = [universe.person_by_id(a).name for a in instance.attendees]
    records = []
    for j in range(3):
        fills: dict[str, tuple[str, str]] = {}  # placeholder -> (nl, dsl)
        needed = set(re.findall(r"\[([A-Z_]+)\]", template.text))
        if template.reference_dsl:
            needed |= set(re.findall(r"\[([A-Z_]+)\]", template.reference_dsl))
        for name in sorted(needed):
            if name == "WEEKDAY":
                idx = rng.randrange(5)
                fills[name] = (_WEEKDAY_NL[idx], WEEKDAY_NAMES[idx])
            elif name == "TIME":
                hour = rng.randrange(8, 18)
                fills[name] = (_time_nl(hour), f"{hour:02d}:00")
            elif name == "ATTENDEE":
                chosen = rng.choice(attendee_names)
                fills[name] = (chosen, chosen)
            elif name == "N_DAYS":
                n = rng.randrange(1, horizon_days + 1)
                fills[name] = (str(n), str(n))
            elif name == "DURATION_MIN":
                fills[name] = (str(instance.duration_minutes),) * 2
            else:
                raise InfillError(f"{template.id}: cannot fill [{name}]")

        nl_text = template.text
        ref_source = template.reference_dsl
        for name, (nl_value, dsl_value) in fills.items():
            nl_text = nl_text.replace(f"[{name}]", nl_value)
            if ref_source is not None:
                ref_source = ref_source.replace(f"[{name}]", dsl_value)
        records.append(
            EvalRecord(
                id=f"{template.id}-{instance.id}-{j}",
                template_id=template.id,
                category=template.category,
                nl_text=nl_text,
                instance_id=instance.id,
                supported=template.supported,
                reference_source=ref_source,
                reference_expr=dsl.parse(ref_source) if ref_source is not None else None,
            )
        )
    return records


def build_records(
    templates: Sequence[PreferenceTemplate],
    instances: Sequence[MeetingInstance],
    universe: Universe,
    seed: int,
) -> list[EvalRecord]:
    rng = random.Random(seed)
    records = []
    for template in templates:
        instance = rng.choice(instances)
        records.extend(infill(template, instance, universe, rng.randrange(2**32)))
    return records


# --------------------------------------------------------------------------
# Screening metric


def eval_safeguard(checker: Checker, records: Sequence[EvalRecord]) -> tuple[int, int]:
    """(correct, total) over every record, supported and not."""
    correct = sum(
        checker.check(r.nl_text).supported == r.supported for r in records
    )
    return correct, len(records)


# --------------------------------------------------------------------------
# Code generation metrics


class RecordCoder(Protocol):
    def code_record(
        self, record: EvalRecord, instance: MeetingInstance, universe: Universe
    ) -> str: ...


class ReferenceCoder:
    """Replays the reference source; locks the metric plumbing at 1.0."""

    def code_record(self, record, instance, universe):
        return record.reference_source


class SwappedComparisonCoder:
    """Reference source with every comparison direction flipped; a known-bad
    coder for exercising the metrics."""

    def code_record(self, record, instance, universe):
        return re.sub(
            r"<=|>=|<|>",
            lambda m: {"<=": ">=", ">=": "<=", "<": ">", ">": "<"}[m.group(0)],
            record.reference_source,
        )


class NlCoderAdapter:
    """Runs a conversational coder over the record's natural-language text."""

    def __init__(self, coder: Coder):
        self.coder = coder

    def code_record(self, record, instance, universe):
        ctx = CoderContext(
            organizer_name=universe.person_by_id(instance.organizer).name,
            attendee_names=tuple(
                universe.person_by_id(a).name for a in instance.attendees
            ),
            duration_minutes=instance.duration_minutes,
        )
        return self.coder.code(record.nl_text, ctx)


@dataclass
class Confusion:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    def add(self, predicted: np.ndarray, actual: np.ndarray) -> None:
        self.tp += int(np.count_nonzero(predicted & actual))
        self.fp += int(np.count_nonzero(predicted & ~actual))
        self.fn += int(np.count_nonzero(~predicted & actual))

    def precision(self) -> Optional[float]:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else None

    def recall(self) -> Optional[float]:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else None


@dataclass
class CodegenResult:
    compiled: int
    total: int
    general: Confusion
    example: Confusion


def general_grid(duration_minutes: int) -> TimeGrid:
    horizon = TimeSlot(Instant(0), Instant(GENERAL_GRID_DAYS * MINUTES_PER_DAY))
    return business_hours_grid(horizon, duration_minutes)


def _instance_context(
    instance: MeetingInstance, view: FreeBusyView, horizon_start: Instant
) -> dsl.EvalContext:
    seed_slot = TimeSlot(
        horizon_start, horizon_start.plus(instance.duration_minutes)
    )
    return dsl.EvalContext(
        organizer=instance.organizer,
        attendees=instance.attendees,
        duration_minutes=instance.duration_minutes,
        candidate=seed_slot,
        free_busy=view,
        horizon_start=horizon_start,
        now=horizon_start,
    )


def eval_codegen(
    coder: RecordCoder,
    records: Sequence[EvalRecord],
    instances: Sequence[MeetingInstance],
    universe: Universe,
) -> CodegenResult:
    """Compile every supported record and score it pointwise on both grids."""
    by_id = {m.id: m for m in instances}
    view = FreeBusyView(universe)
    supported = [r for r in records if r.supported]
    result = CodegenResult(compiled=0, total=len(supported), general=Confusion(), example=Confusion())
    general_arrays: dict[int, GridArrays] = {}
    for record in supported:
        instance = by_id[record.instance_id]
        try:
            source = coder.code_record(record, instance, universe)
            expr = dsl.parse(source)
        except (CoderError, dsl.DslError):
            continue
        result.compiled += 1

        duration = instance.duration_minutes
        if duration not in general_arrays:
            general_arrays[duration] = GridArrays(general_grid(duration), view)
        example_arrays = GridArrays(
            business_hours_grid(instance.horizon, duration), view
        )
        for arrays, horizon_start, cell in (
            (general_arrays[duration], Instant(0), result.general),
            (example_arrays, instance.horizon.start, result.example),
        ):
            ctx = _instance_context(instance, view, horizon_start)
            predicted = compile_mask(expr, arrays, ctx)
            actual = compile_mask(record.reference_expr, arrays, ctx)
            cell.add(predicted, actual)
    return result


# --------------------------------------------------------------------------
# Report


@dataclass
class MetricsReport:
    safeguard_correct: int
    safeguard_total: int
    compiled: int
    codegen_total: int
    general: Confusion
    example: Confusion
    checker_name: str = ""
    coder_name: str = ""

    def safeguard_accuracy(self) -> Optional[float]:
        return self.safeguard_correct / self.safeguard_total if self.safeguard_total else None

    def compilation(self) -> Optional[float]:
        return self.compiled / self.codegen_total if self.codegen_total else None


def _pct(numerator: int, denominator: int) -> str:
    if denominator == 0:
        return "n/a"
    value = Decimal(numerator) * 100 / Decimal(denominator)
    return f"{value.quantize(Decimal('0.1'), rounding=ROUND_HALF_UP)}%"


def render_report(report: MetricsReport) -> str:
    g, e = report.general, report.example
    cells = [
        _pct(report.safeguard_correct, report.safeguard_total),
        _pct(report.compiled, report.codegen_total),
        _pct(g.tp, g.tp + g.fp),
        _pct(g.tp, g.tp + g.fn),
        _pct(e.tp, e.tp + e.fp),
        _pct(e.tp, e.tp + e.fn),
    ]
    header = ["screening", "compile", "P(general)", "R(general)", "P(example)", "R(example)"]
    width = 11
    lines = [
        f"scheduling eval (general grid: weekdays 08:00-18:00 over {GENERAL_GRID_DAYS} days)",
        f"checker: {report.checker_name or 'unspecified'}   coder: {report.coder_name or 'unspecified'}",
        "",
        "".join(h.rjust(width) for h in header),
        "".join(c.rjust(width) for c in cells),
        "",
        f"screening: {report.safeguard_correct}/{report.safeguard_total} correct",
        f"compiled:  {report.compiled}/{report.codegen_total} records",
        f"general:   tp={g.tp} fp={g.fp} fn={g.fn}",
        f"example:   tp={e.tp} fp={e.fp} fn={e.fn}",
    ]
    return "\n".join(lines) + "\n"


def run_eval(
    templates: Sequence[PreferenceTemplate],
    instances: Sequence[MeetingInstance],
    universe: Universe,
    checker: Checker,
    coder: RecordCoder,
    seed: int,
    checker_name: str = "",
    coder_name: str = "",
) -> MetricsReport:
    records = build_records(templates, instances, universe, seed)
    correct, total = eval_safeguard(checker, records)
    codegen = eval_codegen(coder, records, instances, universe)
    return MetricsReport(
        safeguard_correct=correct,
        safeguard_total=total,
        compiled=codegen.compiled,
        codegen_total=codegen.total,
        general=codegen.general,
        example=codegen.example,
        checker_name=checker_name,
        coder_name=coder_name,
    )
