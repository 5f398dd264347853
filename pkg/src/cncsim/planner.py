"""Target-node selection and route planning.

Two schemes share one skeleton:

* ``plan`` weighs links by their believed queue occupancy, so transmission
  estimates react to congestion, and searches least-latency paths.
* ``plan_computing_first`` is the baseline: minimum-hop paths, transmission
  guessed from bandwidth and propagation alone, queues ignored.

Both enumerate the candidate compute nodes hosting the requested service,
keep those whose predicted end-to-end response meets the deadline, and
pick the cheapest (ties: smaller response, then smaller node id).  When no
single node suffices, tasks are partitioned across the cheapest nodes
proportionally to their effective rates.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .model import (
    Assignment,
    CnodeId,
    INFEASIBLE_PLAN,
    RegularizedRequest,
    RouterId,
    RoutingPlan,
    ServiceId,
    Verdict,
)
from .statesync import GlobalView


class NonAdjacentHop(ValueError):
    """Path contains consecutive routers with no link between them."""


class Unreachable(ValueError):
    """No path exists between the requested routers."""


class UnknownCnode(LookupError):
    """The view holds no report for the compute node."""


class ServiceNotDeployed(LookupError):
    """The compute node does not host the requested service."""


class NoSuchService(LookupError):
    """No known compute node hosts the functional requirement at all."""


@dataclass(frozen=True)
class PlannerConfig:
    split_k: int = 3


@dataclass(frozen=True)
class CandidateSchedule:
    """Response-time decomposition for one (cnode, path pair) candidate."""

    cnode: CnodeId
    forward_path: tuple[RouterId, ...]
    return_path: tuple[RouterId, ...]
    predicted_wait_s: float
    predicted_exec_s: float
    predicted_fwd_s: float
    predicted_ret_s: float
    cost: float

    @property
    def response_s(self) -> float:
        return (
            self.predicted_fwd_s
            + self.predicted_wait_s
            + self.predicted_exec_s
            + self.predicted_ret_s
        )


def estimate_execution(
    view: GlobalView, cnode: CnodeId, service: ServiceId, work_wu: float
) -> tuple[float, float]:
    """Predicted (queue wait, execution) seconds from the view's backlog."""
    report = view.cnode_report(cnode)
    if report is None:
        raise UnknownCnode(cnode)
    replicas = report.deployments.get(service, 0)
    if replicas < 1:
        raise ServiceNotDeployed((cnode, service))
    rate = view.topology.tier_of(cnode).rate_wups * replicas
    backlog = report.backlog_wu.get(service, 0.0)
    return backlog / rate, work_wu / rate


def estimate_path(view: GlobalView, path: tuple[RouterId, ...], payload_bytes: int) -> float:
    """Store-and-forward traversal time under the view's congestion map."""
    total = 0.0
    for u, v in zip(path, path[1:]):
        link = view.topology.link_between(u, v)
        if link is None:
            raise NonAdjacentHop((u, v))
        total += link.prop_delay_s + (
            (view.queued_bytes(u, v) + payload_bytes) * 8.0 / link.bandwidth_bps
        )
    return total


def rough_path_time(view: GlobalView, path: tuple[RouterId, ...], payload_bytes: int) -> float:
    """Baseline transmission guess: serialization plus propagation, no queues."""
    total = 0.0
    for u, v in zip(path, path[1:]):
        link = view.topology.link_between(u, v)
        if link is None:
            raise NonAdjacentHop((u, v))
        total += link.prop_delay_s + payload_bytes * 8.0 / link.bandwidth_bps
    return total


def shortest_latency_path(
    view: GlobalView, src: RouterId, dst: RouterId, payload_bytes: int
) -> tuple[RouterId, ...]:
    """Least predicted-latency simple path; ties by hop count then router ids."""
    return _dijkstra(
        view,
        src,
        dst,
        lambda u, v, link: link.prop_delay_s
        + (view.queued_bytes(u, v) + payload_bytes) * 8.0 / link.bandwidth_bps,
    )


def min_hop_path(view: GlobalView, src: RouterId, dst: RouterId) -> tuple[RouterId, ...]:
    """Fewest-hops path; ties by lexicographically smallest router sequence."""
    return _dijkstra(view, src, dst, lambda u, v, link: 1.0)


def _dijkstra(view, src, dst, weight) -> tuple[RouterId, ...]:
    topo = view.topology
    if src not in topo._adjacency or dst not in topo._adjacency:
        raise Unreachable((src, dst))
    if src == dst:
        return (src,)
    # Keys order by (latency, hops, router sequence); appending a hop
    # strictly grows (latency, hops), so the first pop per node is final
    # and carries the lexicographically smallest tied path.
    heap: list[tuple[float, int, tuple[RouterId, ...]]] = [(0.0, 0, (src,))]
    done: set[RouterId] = set()
    while heap:
        dist, hops, path = heapq.heappop(heap)
        node = path[-1]
        if node == dst:
            return path
        if node in done:
            continue
        done.add(node)
        for neigh, link in topo.neighbors(node):
            if neigh in done:
                continue
            heapq.heappush(heap, (dist + weight(node, neigh, link), hops + 1, path + (neigh,)))
    raise Unreachable((src, dst))


def plan(
    view: GlobalView, request: RegularizedRequest, config: PlannerConfig = PlannerConfig()
) -> RoutingPlan:
    """Congestion-aware cost-minimal routing plan (or an infeasibility verdict)."""
    return _plan(view, request, config, shortest_latency_path, estimate_path)


def plan_computing_first(
    view: GlobalView, request: RegularizedRequest, config: PlannerConfig = PlannerConfig()
) -> RoutingPlan:
    """Baseline plan: minimum-hop routes and queue-blind transmission estimates."""
    return _plan(
        view,
        request,
        config,
        lambda v, s, d, payload: min_hop_path(v, s, d),
        rough_path_time,
    )


def _plan(view, request, config, path_fn, time_fn) -> RoutingPlan:
    service = view.topology.services[request.functional_requirement]
    hosts = view.cnodes_hosting(service.id)
    if not hosts:
        raise NoSuchService(service.id)

    total_work = request.task_count * service.work_wu_per_task
    candidates = []
    for cnode_id, _replicas, _backlog in hosts:
        cand = _evaluate(
            view, request, service, cnode_id, request.task_count, path_fn, time_fn
        )
        if cand is not None:
            candidates.append(cand)

    feasible = [c for c in candidates if c.response_s <= request.deadline_s]
    if feasible:
        best = min(feasible, key=lambda c: (c.cost, c.response_s, c.cnode))
        assignment = Assignment(
            start=0,
            stop=request.task_count,
            cnode=best.cnode,
            forward_path=best.forward_path,
            return_path=best.return_path,
        )
        return RoutingPlan(
            assignments=(assignment,),
            predicted_response_s=best.response_s,
            predicted_cost=total_work * view.topology.tier_of(best.cnode).price_per_wu,
            verdict=Verdict.FEASIBLE,
        )

    split = _split_plan(view, request, service, candidates, config, path_fn, time_fn)
    if split is not None:
        return split
    return INFEASIBLE_PLAN


def _evaluate(view, request, service, cnode_id, tasks, path_fn, time_fn):
    """Single-candidate schedule for a task subset, or None if unreachable."""
    topo = view.topology
    attach = topo.cnodes[cnode_id].attached_router
    work = tasks * service.work_wu_per_task
    try:
        wait, exec_s = estimate_execution(view, cnode_id, service.id, work)
        fwd = path_fn(view, request.ingress, attach, tasks * service.input_bytes_per_task)
        ret = path_fn(view, attach, request.ingress, tasks * service.output_bytes_per_task)
    except (Unreachable, ServiceNotDeployed, UnknownCnode):
        return None
    return CandidateSchedule(
        cnode=cnode_id,
        forward_path=fwd,
        return_path=ret,
        predicted_wait_s=wait,
        predicted_exec_s=exec_s,
        predicted_fwd_s=time_fn(view, fwd, tasks * service.input_bytes_per_task),
        predicted_ret_s=time_fn(view, ret, tasks * service.output_bytes_per_task),
        cost=work * topo.tier_of(cnode_id).price_per_wu,
    )


def _split_plan(view, request, service, candidates, config, path_fn, time_fn):
    """Partition tasks across the cheapest candidates, rates-proportionally.

    Tries every prefix size 2..split_k of the price-sorted candidate list
    and keeps the cheapest feasible partition.
    """
    if config.split_k < 2 or len(candidates) < 2:
        return None
    by_price = sorted(
        candidates,
        key=lambda c: (view.topology.tier_of(c.cnode).price_per_wu, c.cnode),
    )
    best = None
    for k in range(2, min(config.split_k, len(by_price)) + 1):
        chosen = by_price[:k]
        shares = _proportional_shares(view, service.id, request.task_count, chosen)
        parts = []
        start = 0
        ok = True
        cost = 0.0
        response = 0.0
        for cand, tasks in zip(chosen, shares):
            if tasks == 0:
                continue
            part = _evaluate(view, request, service, cand.cnode, tasks, path_fn, time_fn)
            if part is None or part.response_s > request.deadline_s:
                ok = False
                break
            parts.append((start, start + tasks, part))
            start += tasks
            cost += part.cost
            response = max(response, part.response_s)
        if not ok or not parts:
            continue
        if best is None or (cost, response, len(parts)) < (best[0], best[1], len(best[2])):
            best = (cost, response, parts)
    if best is None:
        return None
    cost, response, parts = best
    assignments = tuple(
        Assignment(
            start=start,
            stop=stop,
            cnode=part.cnode,
            forward_path=part.forward_path,
            return_path=part.return_path,
        )
        for start, stop, part in parts
    )
    return RoutingPlan(
        assignments=assignments,
        predicted_response_s=response,
        predicted_cost=cost,
        verdict=Verdict.FEASIBLE,
    )


def _proportional_shares(view, service_id, task_count, chosen) -> list[int]:
    """Largest-remainder split of task_count proportional to effective rates."""
    rates = []
    for cand in chosen:
        report = view.cnode_report(cand.cnode)
        replicas = report.deployments.get(service_id, 1)
        rates.append(view.topology.tier_of(cand.cnode).rate_wups * replicas)
    total_rate = sum(rates)
    ideal = [task_count * r / total_rate for r in rates]
    shares = [int(x) for x in ideal]
    remainder = task_count - sum(shares)
    order = sorted(
        range(len(chosen)),
        key=lambda i: (-(ideal[i] - shares[i]), chosen[i].cnode),
    )
    for i in order[:remainder]:
        shares[i] += 1
    return shares
