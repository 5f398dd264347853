"""Metering of executed work and bill generation."""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import BillRecord, CnodeId, Outcome, RequestId, Topology


@dataclass
class ExecutionRecord:
    """What actually ran for one request, filled in by the event engine."""

    request: RequestId
    outcome: Outcome
    # (cnode, work_wu) per assignment, in assignment order.
    executed: list[tuple[CnodeId, float]] = field(default_factory=list)


def meter(record: ExecutionRecord) -> list[float]:
    """Work-units drained from compute backlogs per assignment."""
    return [work for _, work in record.executed]


def price(record: ExecutionRecord, topology: Topology) -> BillRecord:
    """Bill at each executing tier's unit price; rejected requests bill zero."""
    metered = meter(record)
    cost = sum(
        work * topology.tier_of(cnode).price_per_wu
        for (cnode, _), work in zip(record.executed, metered)
    )
    return BillRecord(
        request=record.request,
        metered_wu=sum(metered),
        cost=cost,
        outcome=record.outcome,
    )
