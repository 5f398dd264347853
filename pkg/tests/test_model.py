from cncsim.model import Cnode, Tier, validate_topology

from conftest import DEFAULT_TIERS, make_topology, simple_service


def test_single_router_with_cnode_is_valid():
    topo = make_topology(
        routers=[0],
        edges=[],
        cnodes=[Cnode(id=0, attached_router=0, tier="weak", deployments={0: 1})],
        services=[simple_service()],
    )
    assert validate_topology(topo) == []


def test_two_routers_without_link_is_disconnected():
    topo = make_topology(routers=[0, 1], edges=[])
    errors = validate_topology(topo)
    assert any("disconnected" in e for e in errors)


def test_zero_bandwidth_link_rejected():
    topo = make_topology(routers=[0, 1], edges=[(0, 1, 0.0, 0.001)])
    errors = validate_topology(topo)
    assert any("non-positive bandwidth" in e for e in errors)


def test_dangling_cnode_attachment_rejected():
    topo = make_topology(
        routers=[0],
        edges=[],
        cnodes=[Cnode(id=0, attached_router=7, tier="weak")],
    )
    errors = validate_topology(topo)
    assert any("unknown router" in e for e in errors)


def test_non_monotone_tiers_rejected():
    tiers = dict(DEFAULT_TIERS)
    tiers["medium"] = Tier("medium", 5.0, 3.0)  # faster than strong
    topo = make_topology(routers=[0], edges=[], tiers=tiers)
    errors = validate_topology(topo)
    assert any("rates not strictly increasing" in e for e in errors)

    tiers = dict(DEFAULT_TIERS)
    tiers["strong"] = Tier("strong", 4.0, 0.5)  # cheaper than weak
    topo = make_topology(routers=[0], edges=[], tiers=tiers)
    errors = validate_topology(topo)
    assert any("prices not strictly increasing" in e for e in errors)


def test_parallel_links_rejected():
    topo = make_topology(routers=[0, 1], edges=[(0, 1), (1, 0)])
    errors = validate_topology(topo)
    assert any("parallel link" in e for e in errors)


def test_backlog_for_undeployed_service_rejected():
    topo = make_topology(
        routers=[0],
        edges=[],
        cnodes=[Cnode(id=0, attached_router=0, tier="weak",
                      deployments={}, initial_backlog_wu={0: 4.0})],
        services=[simple_service()],
    )
    errors = validate_topology(topo)
    assert any("does not deploy" in e for e in errors)


def test_identifier_order_is_stable():
    topo = make_topology(
        routers=[2, 0, 1],
        edges=[(0, 1), (1, 2)],
        cnodes=[
            Cnode(id=5, attached_router=1, tier="weak"),
            Cnode(id=3, attached_router=1, tier="strong"),
        ],
    )
    assert [c.id for c in topo.cnodes_at(1)] == [3, 5]
    assert [n for n, _ in topo.neighbors(1)] == [0, 2]
