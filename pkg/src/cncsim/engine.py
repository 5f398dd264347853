"""Deterministic discrete-event simulation kernel.

Virtual clock plus a (fire_time, insertion_seq)-ordered event heap drive
store-and-forward packet transmission over per-direction FIFO link queues
and aggregate-rate FIFO execution at compute nodes.  Identical scenarios
(including the seed) replay bit-identically.
"""

from __future__ import annotations

import heapq
import itertools
import random
from dataclasses import dataclass, field
from enum import Enum

from .model import (
    CnodeId,
    Link,
    Outcome,
    RawRequest,
    RegularizedRequest,
    RequestId,
    RouterId,
    RoutingPlan,
    ServiceId,
)
from . import planner as planner_mod
from . import statesync
from .planner import NoSuchService, NonAdjacentHop, PlannerConfig, ServiceNotDeployed
from .regularizer import ClientResponse, TaskResult, regularize, restore
from .scenario import Scenario, ScenarioError, validate_scenario
from .splitter import ResultFragment, TaskSetPacket, merge, split
from .trading import ExecutionRecord, price


class HorizonExceeded(RuntimeError):
    """The virtual-time horizon was hit with requests still unresolved."""


class PacketKind(str, Enum):
    CNC = "cnc"
    REQUEST = "request"
    RESULT = "result"
    BACKGROUND = "background"


@dataclass
class Packet:
    kind: PacketKind
    size_bytes: int
    path: tuple[RouterId, ...]
    payload: object
    tag: str
    hop: int = 0

    @property
    def at_final_hop(self) -> bool:
        return self.hop >= len(self.path) - 1


@dataclass(frozen=True, order=True)
class SimEvent:
    """Events fire in (fire_time_s, seq) lexicographic order."""

    fire_time_s: float
    seq: int
    kind: str = field(compare=False)
    payload: object = field(compare=False)


@dataclass
class LinkQueue:
    """One direction of a link: bytes committed but not yet across."""

    link: Link
    src: RouterId
    queued_bytes: int = 0


def link_transfer_time(size_bytes: int, lq: LinkQueue) -> float:
    """Propagation plus serialization of everything ahead of and including us."""
    return lq.link.prop_delay_s + (lq.queued_bytes + size_bytes) * 8.0 / lq.link.bandwidth_bps


@dataclass
class RequestState:
    raw: RawRequest
    reg: RegularizedRequest | None = None
    plan: RoutingPlan | None = None
    outcome: Outcome | None = None
    reject_reason: str | None = None
    executed: dict[int, tuple[CnodeId, float]] = field(default_factory=dict)
    fragments: list[ResultFragment] = field(default_factory=list)
    completed_at_s: float | None = None
    response: ClientResponse | None = None

    @property
    def resolved(self) -> bool:
        return self.outcome is not None

    def response_time_s(self) -> float | None:
        if self.completed_at_s is None:
            return None
        return self.completed_at_s - self.raw.submit_time_s


@dataclass
class Counters:
    events: int = 0
    enqueued_bytes: dict = field(default_factory=dict)
    dequeued_bytes: dict = field(default_factory=dict)
    bytes_by_kind: dict = field(default_factory=dict)
    admitted_wu: dict = field(default_factory=dict)
    completed_request_wu: dict = field(default_factory=dict)
    flood_forwards: dict = field(default_factory=dict)


@dataclass
class SimResult:
    bills: list
    states: dict[RequestId, RequestState]
    counters: Counters
    end_time_s: float

    def state(self, request: RequestId) -> RequestState:
        return self.states[request]


PLAN_FUNCTIONS = {
    "cnc": planner_mod.plan,
    "computing_first": planner_mod.plan_computing_first,
}


class Engine:
    def __init__(
        self,
        scenario: Scenario,
        trace_sink=None,
        stop_when_quiescent: bool = True,
    ):
        errors = validate_scenario(scenario)
        if errors:
            raise ScenarioError("; ".join(errors))
        if scenario.scheme not in PLAN_FUNCTIONS:
            raise ScenarioError(f"unknown scheme '{scenario.scheme}'")
        self.sc = scenario
        self.topo = scenario.topology
        self.plan_fn = PLAN_FUNCTIONS[scenario.scheme]
        self.planner_config = PlannerConfig(split_k=scenario.split_k)
        self.trace_sink = trace_sink
        self.stop_when_quiescent = stop_when_quiescent

        self.now = 0.0
        self._heap: list[SimEvent] = []
        self._seq = itertools.count()

        self.queues: dict[tuple[int, RouterId], LinkQueue] = {}
        for link in self.topo.links:
            self.queues[(link.id, link.a)] = LinkQueue(link=link, src=link.a)
            self.queues[(link.id, link.b)] = LinkQueue(link=link, src=link.b)

        # (cnode, service) -> virtual time when the FIFO drains empty.
        self._drain: dict[tuple[CnodeId, ServiceId], float] = {}
        for cnode in self.topo.cnodes.values():
            for service, backlog in cnode.initial_backlog_wu.items():
                rate = self._effective_rate(cnode.id, service)
                self._drain[(cnode.id, service)] = backlog / rate

        self.views: dict[RouterId, statesync.GlobalView] = {
            r: statesync.GlobalView(self.topo) for r in self.topo.routers
        }
        self._perceive_seq: dict[RouterId, int] = {r: 0 for r in self.topo.routers}

        self.states: dict[RequestId, RequestState] = {}
        self.bills: list = []
        self.counters = Counters()

        for raw in sorted(scenario.requests, key=lambda r: (r.submit_time_s, r.id)):
            self.states[raw.id] = RequestState(raw=raw)
            self.schedule(raw.submit_time_s, "request_submit", raw)

        if scenario.cnc_period_s is not None:
            for router in sorted(self.topo.routers):
                self.schedule(0.0, "cnc_broadcast_tick", (router, 0))

        if scenario.background is not None:
            self._schedule_background()

    # ------------------------------------------------------------------
    # scheduling and the main loop

    def schedule(self, when: float, kind: str, payload) -> SimEvent:
        event = SimEvent(fire_time_s=when, seq=next(self._seq), kind=kind, payload=payload)
        heapq.heappush(self._heap, event)
        return event

    def run(self) -> SimResult:
        handlers = {
            "request_submit": self._on_submit,
            "packet_arrival": self._on_arrival,
            "execution_complete": self._on_execution_complete,
            "cnc_broadcast_tick": self._on_tick,
            "background_burst": self._on_burst,
        }
        total = len(self.states)
        while self._heap:
            event = heapq.heappop(self._heap)
            if event.fire_time_s > self.sc.horizon_s:
                if any(not s.resolved for s in self.states.values()):
                    raise HorizonExceeded(
                        f"event at t={event.fire_time_s:.6f} beyond horizon "
                        f"{self.sc.horizon_s} with unresolved requests"
                    )
                break
            self.now = event.fire_time_s
            self.counters.events += 1
            self._trace(event)
            handlers[event.kind](event.payload)
            if (
                self.stop_when_quiescent
                and total > 0
                and all(s.resolved for s in self.states.values())
            ):
                break
        return SimResult(
            bills=list(self.bills),
            states=self.states,
            counters=self.counters,
            end_time_s=self.now,
        )

    # ------------------------------------------------------------------
    # forwarding plane

    def transmit(self, packet: Packet, from_router: RouterId) -> SimEvent:
        """Send a packet along its source-routed path; returns the first event."""
        if packet.path[packet.hop] != from_router:
            raise ValueError(
                f"packet {packet.tag} path starts at {packet.path[packet.hop]}, "
                f"not {from_router}"
            )
        for u, v in zip(packet.path, packet.path[1:]):
            if self.topo.link_between(u, v) is None:
                raise NonAdjacentHop((u, v))
        return self._start_hop(packet)

    def _start_hop(self, packet: Packet) -> SimEvent:
        if packet.at_final_hop:
            # Zero remaining hops: deliver locally at the current time.
            return self.schedule(self.now, "packet_arrival", packet)
        u = packet.path[packet.hop]
        v = packet.path[packet.hop + 1]
        link = self.topo.link_between(u, v)
        if link is None:
            raise NonAdjacentHop((u, v))
        lq = self.queues[(link.id, u)]
        dt = link_transfer_time(packet.size_bytes, lq)
        lq.queued_bytes += packet.size_bytes
        key = (link.id, u)
        self.counters.enqueued_bytes[key] = (
            self.counters.enqueued_bytes.get(key, 0) + packet.size_bytes
        )
        kind_key = packet.kind.value
        self.counters.bytes_by_kind[kind_key] = (
            self.counters.bytes_by_kind.get(kind_key, 0) + packet.size_bytes
        )
        return self.schedule(self.now + dt, "packet_arrival", packet)

    def _on_arrival(self, packet: Packet) -> None:
        if not packet.at_final_hop:
            u = packet.path[packet.hop]
            v = packet.path[packet.hop + 1]
            link = self.topo.link_between(u, v)
            lq = self.queues[(link.id, u)]
            lq.queued_bytes -= packet.size_bytes
            assert lq.queued_bytes >= 0, "link queue went negative"
            key = (link.id, u)
            self.counters.dequeued_bytes[key] = (
                self.counters.dequeued_bytes.get(key, 0) + packet.size_bytes
            )
            packet.hop += 1
        router = packet.path[packet.hop]
        if packet.at_final_hop:
            self._deliver(packet, router)
        else:
            self._start_hop(packet)

    def _deliver(self, packet: Packet, router: RouterId) -> None:
        if packet.kind is PacketKind.CNC:
            self._accept_cnc(packet, router)
        elif packet.kind is PacketKind.REQUEST:
            self._admit_execution(packet.payload)
        elif packet.kind is PacketKind.RESULT:
            self._accept_fragment(packet.payload)
        # Background bulk just evaporates at the far end of its link.

    # ------------------------------------------------------------------
    # request lifecycle

    def _on_submit(self, raw: RawRequest) -> None:
        state = self.states[raw.id]
        state.reg = regularize(raw, self.topo, self.sc.default_deadline_s)
        view = self._planning_view(raw.ingress)
        try:
            plan = self.plan_fn(view, state.reg, self.planner_config)
        except NoSuchService:
            state.plan = None
            self._reject(state, "no_known_host")
            return
        state.plan = plan
        if not plan.feasible:
            self._reject(state, "no_feasible_schedule")
            return
        service = self.topo.services[state.reg.functional_requirement]
        for tsp in split(state.reg, plan, service):
            packet = Packet(
                kind=PacketKind.REQUEST,
                size_bytes=tsp.size_bytes,
                path=tsp.forward_path,
                payload=tsp,
                tag=f"req:{raw.id}:{tsp.assignment_index}",
            )
            self.transmit(packet, raw.ingress)

    def _reject(self, state: RequestState, reason: str) -> None:
        state.outcome = Outcome.REJECTED_INFEASIBLE
        state.reject_reason = reason
        record = ExecutionRecord(
            request=state.raw.id, outcome=Outcome.REJECTED_INFEASIBLE, executed=[]
        )
        self.bills.append(price(record, self.topo))

    def _admit_execution(self, tsp: TaskSetPacket) -> None:
        state = self.states[tsp.request]
        service = self.topo.services[state.reg.functional_requirement]
        cnode = self.topo.cnodes[tsp.cnode]
        if service.id not in cnode.deployments:
            raise ServiceNotDeployed((tsp.cnode, service.id))
        work = tsp.task_count * service.work_wu_per_task
        self.execute(tsp.cnode, service.id, work, payload=tsp)
        key = tsp.cnode
        self.counters.admitted_wu[key] = self.counters.admitted_wu.get(key, 0.0) + work

    def execute(
        self, cnode: CnodeId, service: ServiceId, work_wu: float, payload=None
    ) -> SimEvent:
        """Append work to the node's per-service FIFO; returns the completion event."""
        if service not in self.topo.cnodes[cnode].deployments:
            raise ServiceNotDeployed((cnode, service))
        rate = self._effective_rate(cnode, service)
        key = (cnode, service)
        start = max(self.now, self._drain.get(key, 0.0))
        done = start + work_wu / rate
        self._drain[key] = done
        return self.schedule(done, "execution_complete", (cnode, service, work_wu, payload))

    def _on_execution_complete(self, payload) -> None:
        cnode, service, work_wu, tsp = payload
        self.counters.completed_request_wu[cnode] = (
            self.counters.completed_request_wu.get(cnode, 0.0) + work_wu
        )
        if tsp is None:
            return
        state = self.states[tsp.request]
        state.executed[tsp.assignment_index] = (cnode, work_wu)
        svc = self.topo.services[state.reg.functional_requirement]
        fragment = ResultFragment(
            request=tsp.request,
            assignment_index=tsp.assignment_index,
            start=tsp.start,
            stop=tsp.stop,
            results=tuple(
                TaskResult(task_index=i, payload_bytes=svc.output_bytes_per_task)
                for i in range(tsp.start, tsp.stop)
            ),
        )
        packet = Packet(
            kind=PacketKind.RESULT,
            size_bytes=tsp.task_count * svc.output_bytes_per_task,
            path=tsp.return_path,
            payload=fragment,
            tag=f"res:{tsp.request}:{tsp.assignment_index}",
        )
        self.transmit(packet, tsp.return_path[0])

    def _accept_fragment(self, fragment: ResultFragment) -> None:
        state = self.states[fragment.request]
        state.fragments.append(fragment)
        if len(state.fragments) < len(state.plan.assignments):
            return
        merged = merge(state.fragments, state.reg.task_count)
        state.completed_at_s = self.now
        on_time = (self.now - state.raw.submit_time_s) <= state.reg.deadline_s
        state.outcome = Outcome.COMPLETED if on_time else Outcome.DEADLINE_MISSED
        state.response = restore(merged, state.raw, self.now, state.outcome)
        record = ExecutionRecord(
            request=state.raw.id,
            outcome=state.outcome,
            executed=[state.executed[i] for i in sorted(state.executed)],
        )
        self.bills.append(price(record, self.topo))

    # ------------------------------------------------------------------
    # management/control plane: perception and flooding

    def perceive(self, router: RouterId) -> statesync.CncStatePacket:
        self._perceive_seq[router] += 1
        return statesync.make_state_packet(
            self.topo,
            router,
            seq=self._perceive_seq[router],
            now=self.now,
            queued_bytes_of=lambda lid, src: self.queues[(lid, src)].queued_bytes,
            backlog_of=self._backlog_at,
        )

    def _backlog_at(self, cnode: CnodeId, service: ServiceId) -> float:
        drain = self._drain.get((cnode, service), 0.0)
        remaining = max(0.0, drain - self.now)
        return remaining * self._effective_rate(cnode, service)

    def _effective_rate(self, cnode: CnodeId, service: ServiceId) -> float:
        cn = self.topo.cnodes[cnode]
        return self.topo.tiers[cn.tier].rate_wups * cn.deployments.get(service, 1)

    def _on_tick(self, payload: tuple[RouterId, int]) -> None:
        router, k = payload
        packet = self.perceive(router)
        self.views[router].apply(packet)
        self._flood(packet, router, arrived_from=None)
        # Multiply rather than accumulate so tick times carry no float drift.
        nxt = (k + 1) * self.sc.cnc_period_s
        if nxt < self.sc.horizon_s:
            self.schedule(nxt, "cnc_broadcast_tick", (router, k + 1))

    def _accept_cnc(self, packet: Packet, router: RouterId) -> None:
        state_packet: statesync.CncStatePacket = packet.payload
        changed = self.views[router].apply(state_packet)
        if changed:
            arrived_from = packet.path[packet.hop - 1] if packet.hop > 0 else None
            self._flood(state_packet, router, arrived_from)

    def _flood(self, state_packet, router: RouterId, arrived_from: RouterId | None) -> None:
        key = (state_packet.origin, state_packet.seq)
        self.counters.flood_forwards[key] = self.counters.flood_forwards.get(key, 0) + 1
        for neigh, _link in self.topo.neighbors(router):
            if neigh == arrived_from:
                continue
            copy = Packet(
                kind=PacketKind.CNC,
                size_bytes=self.sc.cnc_packet_bytes,
                path=(router, neigh),
                payload=state_packet,
                tag=f"cnc:{state_packet.origin}:{state_packet.seq}",
            )
            self._start_hop(copy)

    def _planning_view(self, router: RouterId) -> statesync.GlobalView:
        if self.sc.fresh_views:
            return statesync.fresh_view(
                self.topo,
                self.now,
                queued_bytes_of=lambda lid, src: self.queues[(lid, src)].queued_bytes,
                backlog_of=self._backlog_at,
            )
        return self.views[router]

    # ------------------------------------------------------------------
    # background load

    def _schedule_background(self) -> None:
        bg = self.sc.background
        directions: list[tuple[RouterId, RouterId]] = []
        for a, b in bg.endpoints:
            directions.append((a, b))
            if bg.bidirectional:
                directions.append((b, a))
        for index, (src, dst) in enumerate(sorted(directions)):
            link = self.topo.link_between(src, dst)
            rng = random.Random(self.sc.rng_seed * 1_000_003 + link.id * 17 + index)
            if bg.rate_per_s <= 0:
                continue
            t = rng.expovariate(bg.rate_per_s)
            n = 0
            while t < self.sc.horizon_s:
                self.schedule(t, "background_burst", (src, dst, n))
                t += rng.expovariate(bg.rate_per_s)
                n += 1

    def _on_burst(self, payload) -> None:
        src, dst, n = payload
        packet = Packet(
            kind=PacketKind.BACKGROUND,
            size_bytes=self.sc.background.burst_bytes,
            path=(src, dst),
            payload=None,
            tag=f"bg:{src}-{dst}:{n}",
        )
        self._start_hop(packet)

    # ------------------------------------------------------------------

    def _trace(self, event: SimEvent) -> None:
        if self.trace_sink is None:
            return
        detail = ""
        payload = event.payload
        if event.kind == "request_submit":
            detail = f"request={payload.id} ingress={payload.ingress}"
        elif event.kind == "packet_arrival":
            detail = f"router={payload.path[min(payload.hop + 1, len(payload.path) - 1)]} packet={payload.tag}"
        elif event.kind == "execution_complete":
            cnode, service, work, tsp = payload
            req = tsp.request if tsp is not None else -1
            detail = f"cnode={cnode} service={service} work={work!r} request={req}"
        elif event.kind == "cnc_broadcast_tick":
            detail = f"router={payload[0]}"
        elif event.kind == "background_burst":
            detail = f"src={payload[0]} dst={payload[1]} n={payload[2]}"
        self.trace_sink(f"{event.fire_time_s:.9f} {event.kind} {detail}")


def run(scenario: Scenario, trace_sink=None, stop_when_quiescent: bool = True) -> SimResult:
    """Convenience wrapper: build an engine and run the scenario to completion."""
    return Engine(
        scenario, trace_sink=trace_sink, stop_when_quiescent=stop_when_quiescent
    ).run()
