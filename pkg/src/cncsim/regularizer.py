"""Request regularization and restoration.

All three request levels reduce to the same (functional requirement,
deadline) form before planning; restoration maps merged results back to a
level-appropriate client response.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import Level, RawRequest, RegularizedRequest, Outcome, Topology
from .scenario import DEFAULT_DEADLINE_S


class MissingDeadline(ValueError):
    """Performance-level request without a deadline."""


class MissingSpec(ValueError):
    """Resource-level request without a resource spec."""


class UnknownResourceClass(ValueError):
    """No pseudo-service matches the requested resource class."""


class IncompleteResult(ValueError):
    """A merged result does not cover every task index."""


@dataclass(frozen=True)
class TaskResult:
    task_index: int
    payload_bytes: int


@dataclass(frozen=True)
class ClientResponse:
    request: int
    level: Level
    payload: tuple[TaskResult, ...]
    completed_at_s: float
    outcome: Outcome


def regularize(
    raw: RawRequest,
    topology: Topology,
    default_deadline_s: float = DEFAULT_DEADLINE_S,
) -> RegularizedRequest:
    """Map a raw request of any convergence level to the unified form."""
    if raw.level is Level.PERFORMANCE:
        if raw.deadline_s is None:
            raise MissingDeadline(f"request {raw.id}")
        service = raw.service
        deadline = raw.deadline_s
    elif raw.level is Level.FUNCTION:
        service = raw.service
        deadline = raw.deadline_s if raw.deadline_s is not None else default_deadline_s
    else:  # Level.RESOURCE
        if raw.resources is None:
            raise MissingSpec(f"request {raw.id}")
        service = _resolve_resource_class(raw, topology)
        deadline = raw.usage_duration_s
    if service is None:
        raise ValueError(f"request {raw.id}: no functional requirement")
    return RegularizedRequest(
        id=raw.id,
        functional_requirement=service,
        deadline_s=float(deadline),
        task_count=raw.task_count,
        ingress=raw.ingress,
        submit_time_s=raw.submit_time_s,
    )


def restore(
    results: list[TaskResult],
    raw: RawRequest,
    completed_at_s: float,
    outcome: Outcome = Outcome.COMPLETED,
) -> ClientResponse:
    """Wrap merged task results into the client-facing response.

    Results must cover exactly the indices [0, task_count); order in the
    response follows the original task index order.
    """
    by_index = {r.task_index: r for r in results}
    missing = [i for i in range(raw.task_count) if i not in by_index]
    if missing:
        raise IncompleteResult(f"request {raw.id}: missing task indices {missing}")
    ordered = tuple(by_index[i] for i in range(raw.task_count))
    return ClientResponse(
        request=raw.id,
        level=raw.level,
        payload=ordered,
        completed_at_s=completed_at_s,
        outcome=outcome,
    )


def _resolve_resource_class(raw: RawRequest, topology: Topology) -> int:
    for svc in sorted(topology.services.values(), key=lambda s: s.id):
        if svc.resource_class is not None and svc.resource_class == raw.resources:
            return svc.id
    raise UnknownResourceClass(f"request {raw.id}: {raw.resources}")
