"""Core domain types shared by every part of the simulator.

Identifiers are plain non-negative integers; their natural order is used
for deterministic tie-breaking everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

RouterId = int
LinkId = int
CnodeId = int
ServiceId = int
RequestId = int

# Tier names in increasing rate/price order.
TIER_ORDER = ("weak", "medium", "strong")

DEFAULT_TIERS = {
    "weak": {"rate_wups": 1.0, "price_per_wu": 1.0},
    "medium": {"rate_wups": 2.0, "price_per_wu": 3.0},
    "strong": {"rate_wups": 4.0, "price_per_wu": 9.0},
}


class Level(str, Enum):
    RESOURCE = "resource"
    FUNCTION = "function"
    PERFORMANCE = "performance"


class Verdict(str, Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"


class Outcome(str, Enum):
    COMPLETED = "completed"
    REJECTED_INFEASIBLE = "rejected_infeasible"
    DEADLINE_MISSED = "deadline_missed"


@dataclass(frozen=True)
class Tier:
    """A compute efficiency class: execution rate and unit price."""

    name: str
    rate_wups: float
    price_per_wu: float


@dataclass(frozen=True)
class Link:
    """Bidirectional link between two routers.

    Queue occupancy is time-varying engine state, tracked per direction
    (see engine.LinkQueue); this record holds the static parameters.
    """

    id: LinkId
    a: RouterId
    b: RouterId
    bandwidth_bps: float
    prop_delay_s: float


@dataclass(frozen=True)
class ServiceDescriptor:
    """Per-task traffic and work parameters of a deployable service.

    resource_class marks a pseudo-service standing in for raw-resource
    requests (cpu/gpu/memory asks); None for ordinary services.
    """

    id: ServiceId
    input_bytes_per_task: int
    output_bytes_per_task: int
    work_wu_per_task: float
    resource_class: dict | None = None


@dataclass(frozen=True)
class Cnode:
    """A computation node attached to a router.

    deployments maps service id -> replica count.  initial_backlog_wu
    seeds the engine's per-service work queues at t=0.
    """

    id: CnodeId
    attached_router: RouterId
    tier: str
    deployments: dict[ServiceId, int] = field(default_factory=dict)
    initial_backlog_wu: dict[ServiceId, float] = field(default_factory=dict)


@dataclass(frozen=True)
class RawRequest:
    """A client request as submitted, before regularization."""

    id: RequestId
    level: Level
    ingress: RouterId
    submit_time_s: float
    task_count: int
    service: ServiceId | None = None
    resources: dict | None = None
    deadline_s: float | None = None
    usage_duration_s: float | None = None


@dataclass(frozen=True)
class RegularizedRequest:
    """Unified (functional requirement, deadline) form of a request."""

    id: RequestId
    functional_requirement: ServiceId
    deadline_s: float
    task_count: int
    ingress: RouterId
    submit_time_s: float


@dataclass(frozen=True)
class Assignment:
    """One task-set placement: contiguous index range and its routes."""

    start: int
    stop: int
    cnode: CnodeId
    forward_path: tuple[RouterId, ...]
    return_path: tuple[RouterId, ...]


@dataclass(frozen=True)
class RoutingPlan:
    assignments: tuple[Assignment, ...]
    predicted_response_s: float
    predicted_cost: float
    verdict: Verdict

    @property
    def feasible(self) -> bool:
        return self.verdict is Verdict.FEASIBLE


INFEASIBLE_PLAN = RoutingPlan(
    assignments=(),
    predicted_response_s=float("inf"),
    predicted_cost=0.0,
    verdict=Verdict.INFEASIBLE,
)


@dataclass(frozen=True)
class BillRecord:
    request: RequestId
    metered_wu: float
    cost: float
    outcome: Outcome


@dataclass
class Topology:
    """Static network and compute layout of a scenario."""

    routers: list[RouterId]
    links: list[Link]
    cnodes: dict[CnodeId, Cnode]
    tiers: dict[str, Tier]
    services: dict[ServiceId, ServiceDescriptor]

    def __post_init__(self) -> None:
        self._adjacency: dict[RouterId, list[tuple[RouterId, Link]]] = {
            r: [] for r in self.routers
        }
        self._by_pair: dict[tuple[RouterId, RouterId], Link] = {}
        for link in self.links:
            if link.a in self._adjacency and link.b in self._adjacency:
                self._adjacency[link.a].append((link.b, link))
                self._adjacency[link.b].append((link.a, link))
                self._by_pair[(link.a, link.b)] = link
                self._by_pair[(link.b, link.a)] = link
        for neigh in self._adjacency.values():
            neigh.sort(key=lambda pair: pair[0])

    def neighbors(self, router: RouterId) -> list[tuple[RouterId, Link]]:
        return self._adjacency[router]

    def link_between(self, a: RouterId, b: RouterId) -> Link | None:
        return self._by_pair.get((a, b))

    def cnodes_at(self, router: RouterId) -> list[Cnode]:
        return sorted(
            (c for c in self.cnodes.values() if c.attached_router == router),
            key=lambda c: c.id,
        )

    def tier_of(self, cnode: CnodeId) -> Tier:
        return self.tiers[self.cnodes[cnode].tier]


def validate_topology(topo: Topology) -> list[str]:
    """Check structural invariants; returns one diagnostic per violation."""
    errors: list[str] = []
    if not topo.routers:
        errors.append("no routers defined")
    if len(set(topo.routers)) != len(topo.routers):
        errors.append("duplicate router ids")

    router_set = set(topo.routers)
    seen_pairs: set[tuple[RouterId, RouterId]] = set()
    seen_link_ids: set[LinkId] = set()
    for link in topo.links:
        if link.id in seen_link_ids:
            errors.append(f"duplicate link id {link.id}")
        seen_link_ids.add(link.id)
        if link.a not in router_set or link.b not in router_set:
            errors.append(f"link {link.id} references unknown router")
            continue
        if link.a == link.b:
            errors.append(f"link {link.id} is a self-loop")
        pair = (min(link.a, link.b), max(link.a, link.b))
        if pair in seen_pairs:
            errors.append(f"parallel link between routers {pair[0]} and {pair[1]}")
        seen_pairs.add(pair)
        if link.bandwidth_bps <= 0:
            errors.append(f"link {link.id}: non-positive bandwidth")
        if link.prop_delay_s < 0:
            errors.append(f"link {link.id}: negative propagation delay")

    if topo.routers and not errors_block_connectivity(errors):
        if not _connected(topo):
            errors.append("router graph is disconnected")

    for cnode in sorted(topo.cnodes.values(), key=lambda c: c.id):
        if cnode.attached_router not in router_set:
            errors.append(f"cnode {cnode.id} attaches to unknown router {cnode.attached_router}")
        if cnode.tier not in topo.tiers:
            errors.append(f"cnode {cnode.id} uses unknown tier '{cnode.tier}'")
        for service, replicas in cnode.deployments.items():
            if service not in topo.services:
                errors.append(f"cnode {cnode.id} deploys unknown service {service}")
            if replicas < 1:
                errors.append(f"cnode {cnode.id}: replica count must be >= 1")
        for service, backlog in cnode.initial_backlog_wu.items():
            if backlog < 0:
                errors.append(f"cnode {cnode.id}: negative backlog for service {service}")
            if service not in cnode.deployments:
                errors.append(
                    f"cnode {cnode.id}: backlog for service {service} it does not deploy"
                )

    errors.extend(_tier_errors(topo.tiers))

    for svc in sorted(topo.services.values(), key=lambda s: s.id):
        if svc.input_bytes_per_task <= 0 or svc.output_bytes_per_task <= 0:
            errors.append(f"service {svc.id}: byte sizes must be positive")
        if svc.work_wu_per_task <= 0:
            errors.append(f"service {svc.id}: work per task must be positive")

    return errors


def errors_block_connectivity(errors: list[str]) -> bool:
    # Skip the reachability sweep when links already reference bad routers.
    return any("unknown router" in e for e in errors)


def _connected(topo: Topology) -> bool:
    start = topo.routers[0]
    seen = {start}
    stack = [start]
    while stack:
        node = stack.pop()
        for neigh, _ in topo.neighbors(node):
            if neigh not in seen:
                seen.add(neigh)
                stack.append(neigh)
    return len(seen) == len(topo.routers)


def _tier_errors(tiers: dict[str, Tier]) -> list[str]:
    errors = []
    for name in TIER_ORDER:
        if name not in tiers:
            errors.append(f"missing tier '{name}'")
    if errors:
        return errors
    for name, tier in tiers.items():
        if tier.rate_wups <= 0 or tier.price_per_wu <= 0:
            errors.append(f"tier '{name}': rate and price must be positive")
    for lo, hi in zip(TIER_ORDER, TIER_ORDER[1:]):
        if tiers[lo].rate_wups >= tiers[hi].rate_wups:
            errors.append(f"tier rates not strictly increasing ({lo} vs {hi})")
        if tiers[lo].price_per_wu >= tiers[hi].price_per_wu:
            errors.append(f"tier prices not strictly increasing ({lo} vs {hi})")
    return errors
