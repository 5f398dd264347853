"""Shared builders for small topologies and synthetic global views."""

from __future__ import annotations

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from cncsim.model import Cnode, Link, ServiceDescriptor, Tier, Topology
from cncsim.scenario import Scenario
from cncsim.statesync import GlobalView, make_state_packet

DEFAULT_TIERS = {
    "weak": Tier("weak", 1.0, 1.0),
    "medium": Tier("medium", 2.0, 3.0),
    "strong": Tier("strong", 4.0, 9.0),
}


def make_topology(
    routers,
    edges,
    cnodes=(),
    services=(),
    bandwidth_bps=1e9,
    prop_delay_s=0.0,
    tiers=None,
):
    """edges: (a, b) or (a, b, bandwidth, prop); cnodes: Cnode instances."""
    links = []
    for i, edge in enumerate(edges):
        if len(edge) == 2:
            a, b = edge
            bw, prop = bandwidth_bps, prop_delay_s
        else:
            a, b, bw, prop = edge
        links.append(Link(id=i, a=a, b=b, bandwidth_bps=bw, prop_delay_s=prop))
    return Topology(
        routers=list(routers),
        links=links,
        cnodes={c.id: c for c in cnodes},
        tiers=dict(tiers or DEFAULT_TIERS),
        services={s.id: s for s in services},
    )


def simple_service(sid=0, input_bytes=125_000_000, output_bytes=1_000_000, work=8.0):
    return ServiceDescriptor(
        id=sid,
        input_bytes_per_task=input_bytes,
        output_bytes_per_task=output_bytes,
        work_wu_per_task=work,
    )


def make_scenario(topo, requests=(), cnc_period_s=None, fresh_views=True, **knobs) -> Scenario:
    """Unit-test scenario: flooding off and oracle-fresh views by default."""
    return Scenario(
        topology=topo,
        requests=list(requests),
        cnc_period_s=cnc_period_s,
        fresh_views=fresh_views,
        **knobs,
    )


def build_view(topo, queued=None, backlog=None, now=0.0) -> GlobalView:
    """Synthetic fully-populated view.

    queued: {(src, dst): bytes} per directed link; backlog: {(cnode, service): wu}.
    """
    queued = queued or {}
    backlog = backlog or {}

    def queued_of(link_id, src):
        link = next(l for l in topo.links if l.id == link_id)
        dst = link.b if link.a == src else link.a
        return queued.get((src, dst), 0)

    def backlog_of(cnode, service):
        return backlog.get((cnode, service), 0.0)

    view = GlobalView(topo)
    for router in sorted(topo.routers):
        view.apply(
            make_state_packet(topo, router, seq=1, now=now,
                              queued_bytes_of=queued_of, backlog_of=backlog_of)
        )
    return view


def random_view_and_request(rng):
    """Random small planning instance: view, request, and its raw ingredients."""
    from cncsim.model import RegularizedRequest

    MB = 1_000_000
    n_routers = rng.randint(2, 5)
    routers = list(range(n_routers))
    edges = [(i, i + 1) for i in range(n_routers - 1)]
    extra = [(a, b) for a in routers for b in routers if b > a + 1]
    rng.shuffle(extra)
    edges += extra[: rng.randint(0, min(2, len(extra)))]
    tier_names = ["weak", "medium", "strong"]
    n_cnodes = rng.randint(1, 4)
    cnodes = [
        Cnode(
            id=i,
            attached_router=rng.choice(routers),
            tier=rng.choice(tier_names),
            deployments={0: rng.randint(1, 2)} if rng.random() < 0.9 else {},
        )
        for i in range(n_cnodes)
    ]
    svc = simple_service(
        input_bytes=rng.randrange(MB, 40 * MB),
        output_bytes=rng.randrange(10_000, 2 * MB),
        work=rng.choice([1.0, 2.0, 4.0]),
    )
    topo = make_topology(routers=routers, edges=edges, cnodes=cnodes, services=[svc],
                         prop_delay_s=rng.choice([0.0, 0.001]))
    queued = {}
    for link in topo.links:
        for src, dst in [(link.a, link.b), (link.b, link.a)]:
            if rng.random() < 0.5:
                queued[(src, dst)] = rng.randrange(0, 200 * MB)
    backlog = {
        (c.id, 0): rng.choice([0.0, 2.0, 8.0, 32.0])
        for c in cnodes
        if 0 in c.deployments
    }
    view = build_view(topo, queued=queued, backlog=backlog)
    request = RegularizedRequest(
        id=0, functional_requirement=0,
        deadline_s=rng.choice([0.5, 1.0, 2.0, 5.0, 15.0, 60.0]),
        task_count=rng.randint(1, 5),
        ingress=rng.choice(routers), submit_time_s=0.0,
    )
    deployments = {c.id: c.deployments[0] for c in cnodes if 0 in c.deployments}
    return view, request, queued, backlog, deployments, svc
