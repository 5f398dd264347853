"""Materialize plan assignments into task-set packets and merge results."""

from __future__ import annotations

from dataclasses import dataclass

from .model import CnodeId, RegularizedRequest, RouterId, RoutingPlan, ServiceDescriptor
from .regularizer import TaskResult


class InfeasiblePlan(ValueError):
    """split() called on a plan with an infeasible verdict."""


class DuplicateRange(ValueError):
    """Result fragments with overlapping task index ranges."""


class GapDetected(ValueError):
    """Finalized a merge while task indices are still missing."""


@dataclass(frozen=True)
class TaskSetPacket:
    """One assignment's worth of tasks headed to its compute node."""

    request: int
    assignment_index: int
    start: int
    stop: int
    cnode: CnodeId
    size_bytes: int
    forward_path: tuple[RouterId, ...]
    return_path: tuple[RouterId, ...]

    @property
    def task_count(self) -> int:
        return self.stop - self.start


@dataclass(frozen=True)
class ResultFragment:
    """A completed assignment's results, travelling back to the ingress."""

    request: int
    assignment_index: int
    start: int
    stop: int
    results: tuple[TaskResult, ...]


def split(
    request: RegularizedRequest, plan: RoutingPlan, service: ServiceDescriptor
) -> list[TaskSetPacket]:
    """One packet per assignment; sizes follow per-task input bytes."""
    if not plan.feasible:
        raise InfeasiblePlan(f"request {request.id}")
    packets = []
    for index, assignment in enumerate(plan.assignments):
        packets.append(
            TaskSetPacket(
                request=request.id,
                assignment_index=index,
                start=assignment.start,
                stop=assignment.stop,
                cnode=assignment.cnode,
                size_bytes=(assignment.stop - assignment.start)
                * service.input_bytes_per_task,
                forward_path=assignment.forward_path,
                return_path=assignment.return_path,
            )
        )
    return packets


def merge(fragments: list[ResultFragment], task_count: int) -> list[TaskResult]:
    """Reassemble results in original task order, whatever the arrival order."""
    claimed = [False] * task_count
    for frag in fragments:
        for i in range(frag.start, frag.stop):
            if claimed[i]:
                raise DuplicateRange(f"task {i} covered twice")
            claimed[i] = True
    if not all(claimed):
        missing = [i for i, c in enumerate(claimed) if not c]
        raise GapDetected(f"missing task indices {missing}")
    ordered = sorted(fragments, key=lambda f: f.start)
    out: list[TaskResult] = []
    for frag in ordered:
        out.extend(frag.results)
    return out
