"""Experiment driver: workload generation, scheme/load/deadline sweeps,
metrics aggregation and CSV export.

The CSV contract (column names and order) is frozen; downstream plotting
relies on it.  Per-seed rows are followed by one aggregate row per
(scheme, load, deadline) cell group whose numeric fields are means across
seeds and whose seed column reads "agg".
"""

from __future__ import annotations

import csv
import json
import logging
import random
import statistics
from dataclasses import dataclass, field
from pathlib import Path

from .engine import Engine, HorizonExceeded, SimResult
from .model import Level, Outcome, RawRequest
from .scenario import Scenario, WorkloadSpec

LOG = logging.getLogger("cncsim")

CSV_COLUMNS = [
    "scheme",
    "load",
    "deadline_s",
    "seed",
    "submitted",
    "completed",
    "rejected",
    "missed",
    "success_ratio",
    "mean_cost_completed",
    "mean_cost_fig5_convention",
]


@dataclass(frozen=True)
class SweepSpec:
    deadlines: tuple[float, ...]
    load_levels: dict[str, float]  # name -> background burst rate per second
    schemes: tuple[str, ...]
    seeds: tuple[int, ...]

    def validate(self) -> list[str]:
        errors = []
        if not self.deadlines:
            errors.append("sweep: empty deadline list")
        if not self.load_levels:
            errors.append("sweep: no load levels")
        if not self.schemes:
            errors.append("sweep: no schemes")
        if not self.seeds:
            errors.append("sweep: no seeds")
        if len(set(self.seeds)) != len(self.seeds):
            errors.append("sweep: seeds must be distinct")
        if any(d <= 0 for d in self.deadlines):
            errors.append("sweep: deadlines must be positive")
        return errors


def load_sweep(source: str | Path | dict) -> SweepSpec:
    if isinstance(source, (str, Path)):
        with open(source) as fh:
            doc = json.load(fh)
    else:
        doc = source
    return SweepSpec(
        deadlines=tuple(float(d) for d in doc["deadlines"]),
        load_levels={str(k): float(v["rate_per_s"]) for k, v in doc["load_levels"].items()},
        schemes=tuple(str(s) for s in doc["schemes"]),
        seeds=tuple(int(s) for s in doc["seeds"]),
    )


def generate_workload(spec: WorkloadSpec, seed: int) -> list[RawRequest]:
    """Seeded Poisson request stream over the spec's arrival window."""
    rng = random.Random(seed)
    requests: list[RawRequest] = []
    if spec.rate_per_s <= 0:
        return requests
    t = spec.start_s + rng.expovariate(spec.rate_per_s)
    rid = 0
    while t < spec.end_s:
        requests.append(
            RawRequest(
                id=rid,
                level=spec.level,
                ingress=rng.choice(list(spec.ingress)),
                submit_time_s=t,
                task_count=rng.randint(spec.task_count_min, spec.task_count_max),
                service=spec.service,
                deadline_s=spec.deadline_s,
            )
        )
        rid += 1
        t += rng.expovariate(spec.rate_per_s)
    return requests


def materialize(scenario: Scenario, seed: int, deadline_s: float | None = None) -> Scenario:
    """Resolve the scenario's workload spec into explicit requests.

    deadline_s, when given, applies to the generated (not the explicitly
    listed) requests; explicit requests keep their own deadlines.
    """
    requests = list(scenario.requests)
    if scenario.workload is not None:
        spec = scenario.workload
        if deadline_s is not None and spec.level is Level.PERFORMANCE:
            spec = WorkloadSpec(
                service=spec.service,
                rate_per_s=spec.rate_per_s,
                start_s=spec.start_s,
                end_s=spec.end_s,
                ingress=spec.ingress,
                task_count_min=spec.task_count_min,
                task_count_max=spec.task_count_max,
                level=spec.level,
                deadline_s=deadline_s,
            )
        base = max((r.id for r in requests), default=-1) + 1
        for raw in generate_workload(spec, seed):
            requests.append(
                RawRequest(
                    id=base + raw.id,
                    level=raw.level,
                    ingress=raw.ingress,
                    submit_time_s=raw.submit_time_s,
                    task_count=raw.task_count,
                    service=raw.service,
                    deadline_s=raw.deadline_s,
                )
            )
    return scenario.with_overrides(requests=requests, workload=None, rng_seed=seed)


@dataclass
class CellMetrics:
    scheme: str
    load: str
    deadline_s: float
    seed: int
    submitted: int
    completed: int
    rejected: int
    missed: int
    success_ratio: float
    mean_cost_completed: float
    mean_cost_fig5_convention: float

    def row(self) -> dict:
        return {
            "scheme": self.scheme,
            "load": self.load,
            "deadline_s": repr(self.deadline_s),
            "seed": str(self.seed),
            "submitted": str(self.submitted),
            "completed": str(self.completed),
            "rejected": str(self.rejected),
            "missed": str(self.missed),
            "success_ratio": repr(self.success_ratio),
            "mean_cost_completed": repr(self.mean_cost_completed),
            "mean_cost_fig5_convention": repr(self.mean_cost_fig5_convention),
        }


@dataclass
class SweepOutput:
    cells: list[CellMetrics] = field(default_factory=list)
    results: dict[tuple, SimResult] = field(default_factory=dict)

    def aggregate(self, scheme: str, load: str, deadline_s: float) -> CellMetrics | None:
        group = [
            c
            for c in self.cells
            if c.scheme == scheme and c.load == load and c.deadline_s == deadline_s
        ]
        if not group:
            return None
        return CellMetrics(
            scheme=scheme,
            load=load,
            deadline_s=deadline_s,
            seed=-1,
            submitted=statistics.mean(c.submitted for c in group),
            completed=statistics.mean(c.completed for c in group),
            rejected=statistics.mean(c.rejected for c in group),
            missed=statistics.mean(c.missed for c in group),
            success_ratio=statistics.mean(c.success_ratio for c in group),
            mean_cost_completed=statistics.mean(c.mean_cost_completed for c in group),
            mean_cost_fig5_convention=statistics.mean(
                c.mean_cost_fig5_convention for c in group
            ),
        )


def metrics_from_result(
    result: SimResult, scheme: str, load: str, deadline_s: float, seed: int
) -> CellMetrics:
    submitted = len(result.states)
    by_outcome = {
        Outcome.COMPLETED: 0,
        Outcome.REJECTED_INFEASIBLE: 0,
        Outcome.DEADLINE_MISSED: 0,
    }
    for bill in result.bills:
        by_outcome[bill.outcome] += 1
    completed_costs = [b.cost for b in result.bills if b.outcome is Outcome.COMPLETED]
    total_cost = sum(b.cost for b in result.bills)
    return CellMetrics(
        scheme=scheme,
        load=load,
        deadline_s=deadline_s,
        seed=seed,
        submitted=submitted,
        completed=by_outcome[Outcome.COMPLETED],
        rejected=by_outcome[Outcome.REJECTED_INFEASIBLE],
        missed=by_outcome[Outcome.DEADLINE_MISSED],
        success_ratio=(by_outcome[Outcome.COMPLETED] / submitted) if submitted else 0.0,
        mean_cost_completed=(
            sum(completed_costs) / len(completed_costs) if completed_costs else 0.0
        ),
        mean_cost_fig5_convention=(total_cost / submitted) if submitted else 0.0,
    )


def run_cell(
    scenario: Scenario,
    scheme: str,
    load: str,
    rate_per_s: float,
    deadline_s: float,
    seed: int,
    keep_result: bool = False,
) -> tuple[CellMetrics | None, SimResult | None]:
    cell = materialize(scenario, seed, deadline_s=deadline_s)
    if cell.background is not None:
        background = cell.background.__class__(
            endpoints=cell.background.endpoints,
            burst_bytes=cell.background.burst_bytes,
            rate_per_s=rate_per_s,
            bidirectional=cell.background.bidirectional,
        )
        cell = cell.with_overrides(background=background)
    cell = cell.with_overrides(scheme=scheme)
    try:
        result = Engine(cell).run()
    except HorizonExceeded as exc:
        LOG.warning(
            "cell aborted (scheme=%s load=%s deadline=%s seed=%s): %s",
            scheme, load, deadline_s, seed, exc,
        )
        return None, None
    metrics = metrics_from_result(result, scheme, load, deadline_s, seed)
    return metrics, (result if keep_result else None)


def run_sweep(scenario: Scenario, sweep: SweepSpec, keep_results: bool = False) -> SweepOutput:
    errors = sweep.validate()
    if errors:
        raise ValueError("; ".join(errors))
    out = SweepOutput()
    for scheme in sweep.schemes:
        for load in sorted(sweep.load_levels):
            rate = sweep.load_levels[load]
            for deadline in sweep.deadlines:
                for seed in sweep.seeds:
                    metrics, result = run_cell(
                        scenario, scheme, load, rate, deadline, seed,
                        keep_result=keep_results,
                    )
                    if metrics is None:
                        continue
                    out.cells.append(metrics)
                    if keep_results:
                        out.results[(scheme, load, deadline, seed)] = result
    return out


def write_csv(out: SweepOutput, path: str | Path) -> None:
    """Per-seed rows plus an aggregate row (seed column "agg") per cell group."""
    groups: list[tuple[str, str, float]] = []
    for cell in out.cells:
        key = (cell.scheme, cell.load, cell.deadline_s)
        if key not in groups:
            groups.append(key)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for key in groups:
            members = [
                c
                for c in out.cells
                if (c.scheme, c.load, c.deadline_s) == key
            ]
            for cell in members:
                writer.writerow(cell.row())
            agg = out.aggregate(*key)
            row = agg.row()
            row["seed"] = "agg"
            row["submitted"] = repr(agg.submitted)
            row["completed"] = repr(agg.completed)
            row["rejected"] = repr(agg.rejected)
            row["missed"] = repr(agg.missed)
            writer.writerow(row)
