import itertools
import random

import pytest

from cncsim.model import (
    Assignment,
    INFEASIBLE_PLAN,
    RegularizedRequest,
    RoutingPlan,
    Verdict,
)
from cncsim.regularizer import TaskResult
from cncsim.splitter import (
    DuplicateRange,
    GapDetected,
    InfeasiblePlan,
    ResultFragment,
    merge,
    split,
)

from conftest import simple_service

SERVICE = simple_service(input_bytes=1000, output_bytes=10, work=2.0)


def reg(task_count):
    return RegularizedRequest(
        id=0, functional_requirement=0, deadline_s=100.0,
        task_count=task_count, ingress=0, submit_time_s=0.0,
    )


def feasible_plan(ranges):
    assignments = tuple(
        Assignment(start=a, stop=b, cnode=i, forward_path=(0, 1), return_path=(1, 0))
        for i, (a, b) in enumerate(ranges)
    )
    return RoutingPlan(
        assignments=assignments, predicted_response_s=1.0,
        predicted_cost=1.0, verdict=Verdict.FEASIBLE,
    )


def test_split_single_assignment():
    packets = split(reg(4), feasible_plan([(0, 4)]), SERVICE)
    assert len(packets) == 1
    assert (packets[0].start, packets[0].stop) == (0, 4)
    assert packets[0].size_bytes == 4 * 1000


def test_split_three_one():
    packets = split(reg(4), feasible_plan([(0, 3), (3, 4)]), SERVICE)
    assert [(p.start, p.stop) for p in packets] == [(0, 3), (3, 4)]
    assert [p.size_bytes for p in packets] == [3000, 1000]


def test_split_ranges_tile_task_indices():
    packets = split(reg(7), feasible_plan([(0, 2), (2, 5), (5, 7)]), SERVICE)
    covered = sorted(i for p in packets for i in range(p.start, p.stop))
    assert covered == list(range(7))


def test_split_rejects_infeasible_plan():
    with pytest.raises(InfeasiblePlan):
        split(reg(4), INFEASIBLE_PLAN, SERVICE)


def fragment(start, stop):
    return ResultFragment(
        request=0, assignment_index=start, start=start, stop=stop,
        results=tuple(TaskResult(task_index=i, payload_bytes=10) for i in range(start, stop)),
    )


def test_merge_orders_out_of_order_fragments():
    merged = merge([fragment(3, 4), fragment(0, 3)], task_count=4)
    assert [r.task_index for r in merged] == [0, 1, 2, 3]


def test_merge_single_fragment_identity():
    merged = merge([fragment(0, 2)], task_count=2)
    assert [r.task_index for r in merged] == [0, 1]


def test_merge_identical_across_all_arrival_orders():
    fragments = [fragment(0, 2), fragment(2, 3), fragment(3, 6), fragment(6, 7), fragment(7, 9)]
    expected = merge(list(fragments), task_count=9)
    for order in itertools.permutations(fragments):
        assert merge(list(order), task_count=9) == expected


def test_merge_detects_duplicate_range():
    with pytest.raises(DuplicateRange):
        merge([fragment(0, 3), fragment(2, 4)], task_count=4)


def test_merge_detects_gap_only_at_finalize():
    with pytest.raises(GapDetected):
        merge([fragment(0, 2), fragment(3, 4)], task_count=4)


def test_merge_of_split_is_identity_for_random_partitions():
    rng = random.Random(7)
    for _ in range(50):
        n = rng.randint(1, 12)
        cuts = sorted(rng.sample(range(1, n), k=rng.randint(0, min(3, n - 1))))
        bounds = [0] + cuts + [n]
        ranges = list(zip(bounds, bounds[1:]))
        packets = split(reg(n), feasible_plan(ranges), SERVICE)
        assert sum(p.size_bytes for p in packets) == n * SERVICE.input_bytes_per_task
        fragments = [
            ResultFragment(
                request=0, assignment_index=p.assignment_index,
                start=p.start, stop=p.stop,
                results=tuple(
                    TaskResult(task_index=i, payload_bytes=SERVICE.output_bytes_per_task)
                    for i in range(p.start, p.stop)
                ),
            )
            for p in packets
        ]
        rng.shuffle(fragments)
        merged = merge(fragments, task_count=n)
        assert [r.task_index for r in merged] == list(range(n))
        assert sum(r.payload_bytes for r in merged) == n * SERVICE.output_bytes_per_task
