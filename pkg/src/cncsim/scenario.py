"""Scenario file loading and validation.

A scenario is a single JSON document with sections `routers`, `links`,
`cnodes`, `tiers`, `services`, `requests`, `background_load`, `workload`
and `rng_seed` plus engine/planner knobs.  The full schema is documented
in the repository README.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from .model import (
    DEFAULT_TIERS,
    Cnode,
    Level,
    Link,
    RawRequest,
    ServiceDescriptor,
    Tier,
    Topology,
    validate_topology,
)

DEFAULT_CNC_PERIOD_S = 0.1
DEFAULT_CNC_PACKET_BYTES = 1500
DEFAULT_DEADLINE_S = 86_400.0
DEFAULT_SPLIT_K = 3


class ScenarioError(ValueError):
    """Raised when a scenario file cannot be parsed or is invalid."""


@dataclass(frozen=True)
class BackgroundSpec:
    """Poisson bulk-byte bursts injected onto specific directed links.

    endpoints lists (a, b) router pairs; bidirectional loads both
    directions of each listed link.
    """

    endpoints: tuple[tuple[int, int], ...]
    burst_bytes: int
    rate_per_s: float
    bidirectional: bool = True


@dataclass(frozen=True)
class WorkloadSpec:
    """Seeded request-stream generator parameters (see harness)."""

    service: int
    rate_per_s: float
    start_s: float
    end_s: float
    ingress: tuple[int, ...]
    task_count_min: int = 1
    task_count_max: int = 4
    level: Level = Level.PERFORMANCE
    deadline_s: float | None = None


@dataclass
class Scenario:
    topology: Topology
    requests: list[RawRequest] = field(default_factory=list)
    workload: WorkloadSpec | None = None
    background: BackgroundSpec | None = None
    rng_seed: int = 0
    horizon_s: float = 1000.0
    cnc_period_s: float | None = DEFAULT_CNC_PERIOD_S
    cnc_packet_bytes: int = DEFAULT_CNC_PACKET_BYTES
    default_deadline_s: float = DEFAULT_DEADLINE_S
    scheme: str = "cnc"
    split_k: int = DEFAULT_SPLIT_K
    fresh_views: bool = False

    def with_overrides(self, **kwargs) -> "Scenario":
        return replace(self, **kwargs)


def load_scenario(source: str | Path | dict) -> Scenario:
    """Build a Scenario from a JSON file path or an already-parsed dict."""
    if isinstance(source, (str, Path)):
        with open(source) as fh:
            doc = json.load(fh)
    else:
        doc = source
    try:
        return _parse(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"malformed scenario: {exc}") from exc


def validate_scenario(sc: Scenario) -> list[str]:
    """Topology invariants plus request-level checks."""
    errors = validate_topology(sc.topology)
    seen_ids: set[int] = set()
    for raw in sc.requests:
        tag = f"request {raw.id}"
        if raw.id in seen_ids:
            errors.append(f"{tag}: duplicate id")
        seen_ids.add(raw.id)
        if raw.ingress not in set(sc.topology.routers):
            errors.append(f"{tag}: unknown ingress router {raw.ingress}")
        if raw.task_count < 1:
            errors.append(f"{tag}: task_count must be >= 1")
        if raw.submit_time_s < 0:
            errors.append(f"{tag}: negative submit time")
        if raw.level in (Level.FUNCTION, Level.PERFORMANCE):
            if raw.service is None or raw.service not in sc.topology.services:
                errors.append(f"{tag}: unknown service {raw.service}")
        if raw.level is Level.PERFORMANCE and (raw.deadline_s is None or raw.deadline_s <= 0):
            errors.append(f"{tag}: performance request needs a positive deadline")
        if raw.level is Level.RESOURCE:
            if raw.usage_duration_s is None or raw.usage_duration_s <= 0:
                errors.append(f"{tag}: resource request needs a positive usage duration")
    if sc.workload is not None:
        w = sc.workload
        if w.service not in sc.topology.services:
            errors.append(f"workload: unknown service {w.service}")
        if any(r not in set(sc.topology.routers) for r in w.ingress):
            errors.append("workload: unknown ingress router")
        if w.rate_per_s < 0 or w.end_s < w.start_s:
            errors.append("workload: bad rate or time window")
        if not (1 <= w.task_count_min <= w.task_count_max):
            errors.append("workload: bad task count range")
    if sc.background is not None:
        for a, b in sc.background.endpoints:
            if sc.topology.link_between(a, b) is None:
                errors.append(f"background_load: no link between routers {a} and {b}")
        if sc.background.burst_bytes <= 0 or sc.background.rate_per_s < 0:
            errors.append("background_load: bad burst size or rate")
    if sc.cnc_period_s is not None and sc.cnc_period_s <= 0:
        errors.append("cnc_period_s must be positive (or null to disable)")
    if sc.split_k < 1:
        errors.append("split_k must be >= 1")
    return errors


def _parse(doc: dict) -> Scenario:
    tiers = {}
    for name, params in {**DEFAULT_TIERS, **doc.get("tiers", {})}.items():
        tiers[name] = Tier(
            name=name,
            rate_wups=float(params["rate_wups"]),
            price_per_wu=float(params["price_per_wu"]),
        )

    links = [
        Link(
            id=int(entry.get("id", i)),
            a=int(entry["a"]),
            b=int(entry["b"]),
            bandwidth_bps=float(entry.get("bandwidth_bps", 1e9)),
            prop_delay_s=float(entry.get("prop_delay_s", 0.0)),
        )
        for i, entry in enumerate(doc.get("links", []))
    ]

    services = {}
    for entry in doc.get("services", []):
        svc = ServiceDescriptor(
            id=int(entry["id"]),
            input_bytes_per_task=int(entry["input_bytes_per_task"]),
            output_bytes_per_task=int(entry["output_bytes_per_task"]),
            work_wu_per_task=float(entry["work_wu_per_task"]),
            resource_class=entry.get("resource_class"),
        )
        services[svc.id] = svc

    cnodes = {}
    for entry in doc.get("cnodes", []):
        cn = Cnode(
            id=int(entry["id"]),
            attached_router=int(entry["router"]),
            tier=str(entry["tier"]),
            deployments={int(k): int(v) for k, v in entry.get("deployments", {}).items()},
            initial_backlog_wu={
                int(k): float(v) for k, v in entry.get("backlog_wu", {}).items()
            },
        )
        cnodes[cn.id] = cn

    topology = Topology(
        routers=[int(r) for r in doc.get("routers", [])],
        links=links,
        cnodes=cnodes,
        tiers=tiers,
        services=services,
    )

    requests = [_parse_request(entry) for entry in doc.get("requests", [])]

    workload = None
    if "workload" in doc:
        w = doc["workload"]
        workload = WorkloadSpec(
            service=int(w["service"]),
            rate_per_s=float(w["rate_per_s"]),
            start_s=float(w.get("start_s", 0.0)),
            end_s=float(w["end_s"]),
            ingress=tuple(int(r) for r in w["ingress"]),
            task_count_min=int(w.get("task_count_min", 1)),
            task_count_max=int(w.get("task_count_max", 4)),
            level=Level(w.get("level", "performance")),
            deadline_s=float(w["deadline_s"]) if "deadline_s" in w else None,
        )

    background = None
    if "background_load" in doc:
        b = doc["background_load"]
        background = BackgroundSpec(
            endpoints=tuple((int(a), int(bb)) for a, bb in b["links"]),
            burst_bytes=int(b["burst_bytes"]),
            rate_per_s=float(b["rate_per_s"]),
            bidirectional=bool(b.get("bidirectional", True)),
        )

    period = doc.get("cnc_period_s", DEFAULT_CNC_PERIOD_S)
    return Scenario(
        topology=topology,
        requests=requests,
        workload=workload,
        background=background,
        rng_seed=int(doc.get("rng_seed", 0)),
        horizon_s=float(doc.get("horizon_s", 1000.0)),
        cnc_period_s=None if period is None else float(period),
        cnc_packet_bytes=int(doc.get("cnc_packet_bytes", DEFAULT_CNC_PACKET_BYTES)),
        default_deadline_s=float(doc.get("default_deadline_s", DEFAULT_DEADLINE_S)),
        scheme=str(doc.get("scheme", "cnc")),
        split_k=int(doc.get("split_k", DEFAULT_SPLIT_K)),
        fresh_views=bool(doc.get("fresh_views", False)),
    )


def _parse_request(entry: dict) -> RawRequest:
    level = Level(entry["level"])
    return RawRequest(
        id=int(entry["id"]),
        level=level,
        ingress=int(entry["ingress"]),
        submit_time_s=float(entry.get("submit_time_s", 0.0)),
        task_count=int(entry.get("task_count", 1)),
        service=int(entry["service"]) if entry.get("service") is not None else None,
        resources=entry.get("resources"),
        deadline_s=float(entry["deadline_s"]) if entry.get("deadline_s") is not None else None,
        usage_duration_s=(
            float(entry["usage_duration_s"])
            if entry.get("usage_duration_s") is not None
            else None
        ),
    )
