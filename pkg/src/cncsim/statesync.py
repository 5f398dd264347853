"""Per-router global-view maintenance from flooded status packets.

Each router periodically snapshots its adjacent link queues and attached
compute nodes into a CncStatePacket and floods it.  Views apply packets
with per-origin last-writer-wins ordering, so the final view depends only
on the highest sequence number seen per origin.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import CnodeId, LinkId, RouterId, ServiceId, Topology


class UnknownOrigin(KeyError):
    """staleness() asked about an origin the view has never heard from."""


@dataclass(frozen=True)
class CnodeReport:
    deployments: dict[ServiceId, int]
    backlog_wu: dict[ServiceId, float]


@dataclass(frozen=True)
class CncStatePacket:
    """One router's local status snapshot.

    link_reports holds the queue occupancy of this router's *outgoing*
    direction for each adjacent link; cnode_reports covers the compute
    nodes attached to this router.
    """

    origin: RouterId
    seq: int
    sampled_at_s: float
    link_reports: dict[LinkId, float]
    cnode_reports: dict[CnodeId, CnodeReport]


class GlobalView:
    """A router's possibly stale picture of the whole system."""

    def __init__(self, topology: Topology):
        self.topology = topology
        self.entries: dict[RouterId, CncStatePacket] = {}

    def apply(self, packet: CncStatePacket) -> bool:
        """Store the packet if newer than the held one; returns True on change."""
        current = self.entries.get(packet.origin)
        if current is not None and packet.seq <= current.seq:
            return False
        self.entries[packet.origin] = packet
        return True

    def staleness(self, origin: RouterId, now: float) -> float:
        entry = self.entries.get(origin)
        if entry is None:
            raise UnknownOrigin(origin)
        return now - entry.sampled_at_s

    def queued_bytes(self, src: RouterId, dst: RouterId) -> float:
        """Believed queue occupancy of the directed link src -> dst (0 if unseen)."""
        entry = self.entries.get(src)
        if entry is None:
            return 0.0
        link = self.topology.link_between(src, dst)
        if link is None:
            return 0.0
        return entry.link_reports.get(link.id, 0.0)

    def cnode_report(self, cnode: CnodeId) -> CnodeReport | None:
        attach = self.topology.cnodes[cnode].attached_router
        entry = self.entries.get(attach)
        if entry is None:
            return None
        return entry.cnode_reports.get(cnode)

    def cnodes_hosting(self, service: ServiceId) -> list[tuple[CnodeId, int, float]]:
        """Known (cnode, replicas, backlog_wu) hosts of a service, by cnode id."""
        hosts = []
        for entry in self.entries.values():
            for cnode_id, report in entry.cnode_reports.items():
                replicas = report.deployments.get(service, 0)
                if replicas >= 1:
                    hosts.append((cnode_id, replicas, report.backlog_wu.get(service, 0.0)))
        hosts.sort(key=lambda item: item[0])
        return hosts

    def congestion_map(self) -> dict[tuple[RouterId, RouterId], float]:
        """Directed (src, dst) -> believed queued bytes over all reports."""
        out: dict[tuple[RouterId, RouterId], float] = {}
        for origin in sorted(self.entries):
            entry = self.entries[origin]
            for link_id, queued in sorted(entry.link_reports.items()):
                link = next(l for l in self.topology.links if l.id == link_id)
                dst = link.b if link.a == origin else link.a
                out[(origin, dst)] = queued
        return out


def make_state_packet(
    topology: Topology,
    origin: RouterId,
    seq: int,
    now: float,
    queued_bytes_of,
    backlog_of,
) -> CncStatePacket:
    """Snapshot the origin's adjacent links and attached cnodes.

    queued_bytes_of(link_id, src_router) and backlog_of(cnode_id, service_id)
    read live engine state.
    """
    link_reports = {}
    for _, link in topology.neighbors(origin):
        link_reports[link.id] = queued_bytes_of(link.id, origin)
    cnode_reports = {}
    for cnode in topology.cnodes_at(origin):
        backlogs = {
            service: backlog_of(cnode.id, service) for service in sorted(cnode.deployments)
        }
        cnode_reports[cnode.id] = CnodeReport(
            deployments=dict(cnode.deployments), backlog_wu=backlogs
        )
    return CncStatePacket(
        origin=origin,
        seq=seq,
        sampled_at_s=now,
        link_reports=link_reports,
        cnode_reports=cnode_reports,
    )


def fresh_view(topology: Topology, now: float, queued_bytes_of, backlog_of) -> GlobalView:
    """An oracle view sampled from live state for every router at once."""
    view = GlobalView(topology)
    for router in sorted(topology.routers):
        view.apply(
            make_state_packet(topology, router, seq=1, now=now,
                              queued_bytes_of=queued_bytes_of, backlog_of=backlog_of)
        )
    return view
