import math

import pytest

from cncsim.harness import (
    SweepSpec,
    generate_workload,
    load_sweep,
    materialize,
    run_sweep,
    write_csv,
)
from cncsim.model import Cnode, Level, RawRequest
from cncsim.scenario import Scenario, WorkloadSpec

from conftest import make_topology, simple_service

MB = 1_000_000


def workload_spec(rate, start=0.0, end=40.0):
    return WorkloadSpec(
        service=0, rate_per_s=rate, start_s=start, end_s=end,
        ingress=(0, 1), task_count_min=1, task_count_max=4,
    )


def test_zero_rate_gives_empty_stream():
    assert generate_workload(workload_spec(0.0), seed=1) == []


def test_same_seed_reproduces_stream():
    a = generate_workload(workload_spec(2.0), seed=42)
    b = generate_workload(workload_spec(2.0), seed=42)
    assert a == b
    c = generate_workload(workload_spec(2.0), seed=43)
    assert a != c


def test_poisson_count_within_three_sigma():
    # lambda*T = 5 * 40 = 200 expected arrivals; tolerance 3 * sqrt(200).
    requests = generate_workload(workload_spec(5.0), seed=123)
    expected = 5.0 * 40.0
    assert abs(len(requests) - expected) <= 3 * math.sqrt(expected)
    assert all(0.0 <= r.submit_time_s < 40.0 for r in requests)
    assert all(1 <= r.task_count <= 4 for r in requests)
    assert all(r.ingress in (0, 1) for r in requests)


def sweep_scenario():
    svc = simple_service(input_bytes=8 * MB, output_bytes=100_000, work=2.0)
    topo = make_topology(
        routers=[0, 1, 2],
        edges=[(0, 1), (1, 2)],
        prop_delay_s=0.001,
        cnodes=[
            Cnode(id=0, attached_router=2, tier="strong", deployments={0: 1}),
            Cnode(id=1, attached_router=2, tier="weak", deployments={0: 1}),
        ],
        services=[svc],
    )
    return Scenario(
        topology=topo,
        workload=WorkloadSpec(
            service=0, rate_per_s=0.4, start_s=0.5, end_s=10.5,
            ingress=(0,), task_count_min=1, task_count_max=2,
        ),
        horizon_s=200.0,
        cnc_period_s=None,
        fresh_views=True,
    )


def sweep_spec(deadlines, seeds=(1,)):
    return SweepSpec(
        deadlines=tuple(deadlines),
        load_levels={"light": 0.0},
        schemes=("cnc",),
        seeds=tuple(seeds),
    )


def test_trivially_satisfiable_cell_has_full_success():
    out = run_sweep(sweep_scenario(), sweep_spec([100.0]))
    assert len(out.cells) == 1
    cell = out.cells[0]
    assert cell.submitted > 0
    assert cell.success_ratio == 1.0
    assert cell.rejected == 0


def test_impossible_deadline_rejects_everything_at_zero_cost():
    out = run_sweep(sweep_scenario(), sweep_spec([0.05]))
    cell = out.cells[0]
    assert cell.success_ratio == 0.0
    assert cell.rejected == cell.submitted
    assert cell.mean_cost_fig5_convention == 0.0
    assert cell.mean_cost_completed == 0.0


def test_two_seeds_produce_rows_and_aggregate(tmp_path):
    out = run_sweep(sweep_scenario(), sweep_spec([100.0], seeds=(1, 2)))
    path = tmp_path / "results.csv"
    write_csv(out, path)
    lines = path.read_text().strip().splitlines()
    header = lines[0].split(",")
    assert header == [
        "scheme", "load", "deadline_s", "seed", "submitted", "completed",
        "rejected", "missed", "success_ratio", "mean_cost_completed",
        "mean_cost_fig5_convention",
    ]
    seeds = [line.split(",")[3] for line in lines[1:]]
    assert seeds == ["1", "2", "agg"]
    agg = out.aggregate("cnc", "light", 100.0)
    per_seed = [c for c in out.cells]
    assert agg.mean_cost_fig5_convention == pytest.approx(
        sum(c.mean_cost_fig5_convention for c in per_seed) / 2
    )


def test_sweep_csv_is_byte_identical_across_runs(tmp_path):
    spec = sweep_spec([5.0, 100.0], seeds=(1, 2))
    paths = []
    for name in ("a.csv", "b.csv"):
        out = run_sweep(sweep_scenario(), spec)
        path = tmp_path / name
        write_csv(out, path)
        paths.append(path.read_bytes())
    assert paths[0] == paths[1]


def test_materialize_applies_deadline_to_generated_requests_only():
    explicit = RawRequest(
        id=0, level=Level.PERFORMANCE, ingress=0, submit_time_s=0.1,
        task_count=1, service=0, deadline_s=77.0,
    )
    sc = sweep_scenario().with_overrides(requests=[explicit])
    cell = materialize(sc, seed=3, deadline_s=12.0)
    assert cell.requests[0].deadline_s == 77.0
    generated = cell.requests[1:]
    assert generated
    assert all(r.deadline_s == 12.0 for r in generated)
    ids = [r.id for r in cell.requests]
    assert len(set(ids)) == len(ids)


def test_engine_error_cell_is_skipped_not_fatal():
    sc = sweep_scenario().with_overrides(horizon_s=0.2)
    out = run_sweep(sc, sweep_spec([100.0]))
    assert out.cells == []


def test_sweep_validation_rejects_duplicate_seeds():
    spec = SweepSpec(deadlines=(1.0,), load_levels={"l": 0.0},
                     schemes=("cnc",), seeds=(1, 1))
    with pytest.raises(ValueError):
        run_sweep(sweep_scenario(), spec)


def test_monotone_success_for_non_overlapping_requests():
    # Spaced arrivals cannot interfere in flight, so each request's outcome
    # flips from miss to completion at most once as the deadline loosens.
    svc = simple_service(input_bytes=8 * MB, output_bytes=100_000, work=2.0)
    topo = make_topology(
        routers=[0, 1],
        edges=[(0, 1)],
        prop_delay_s=0.001,
        cnodes=[
            Cnode(id=0, attached_router=1, tier="strong", deployments={0: 1}),
            Cnode(id=1, attached_router=1, tier="weak", deployments={0: 1}),
        ],
        services=[svc],
    )
    requests = [
        RawRequest(id=i, level=Level.PERFORMANCE, ingress=0,
                   submit_time_s=20.0 * i + 0.5, task_count=1 + i % 3,
                   service=0, deadline_s=1.0)
        for i in range(5)
    ]
    sc = Scenario(topology=topo, requests=requests, horizon_s=400.0,
                  cnc_period_s=None, fresh_views=True)
    ratios = []
    for deadline in [0.4, 1.1, 2.2, 4.4, 9.0, 14.0]:
        reqs = [
            RawRequest(id=r.id, level=r.level, ingress=r.ingress,
                       submit_time_s=r.submit_time_s, task_count=r.task_count,
                       service=r.service, deadline_s=deadline)
            for r in requests
        ]
        out = run_sweep(
            sc.with_overrides(requests=reqs),
            sweep_spec([deadline]),
        )
        ratios.append(out.cells[0].success_ratio)
    assert ratios == sorted(ratios)
