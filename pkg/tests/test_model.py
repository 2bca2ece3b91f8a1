import math
import random

import numpy as np
import pytest

from lastmile import (
    DurationRealization,
    InputError,
    Instance,
    Route,
    Solution,
    assemble_solution,
    evaluate_route,
    evaluate_solution,
)

from conftest import WIDE, make_instance


def test_route_pure_cumulative_sums():
    inst = make_instance(2, {(0, 1): 10.0, (1, 2): 5.0})
    ev = evaluate_route(inst, Route(0, (1, 2)))
    assert ev.latency == [10.0, 15.0]
    assert ev.objective == 25.0
    assert ev.idle == [0.0, 0.0]
    assert ev.feasible


def test_route_waiting_forced_by_window_start():
    inst = make_instance(2, {(0, 1): 10.0, (1, 2): 5.0}, windows={2: (20.0, WIDE)})
    ev = evaluate_route(inst, Route(0, (1, 2)))
    assert ev.latency == [10.0, 20.0]
    assert ev.idle == [0.0, 5.0]
    assert ev.feasible


def test_route_window_violation():
    inst = make_instance(2, {(0, 1): 10.0, (1, 2): 5.0}, windows={2: (0.0, 12.0)})
    ev = evaluate_route(inst, Route(0, (1, 2)))
    assert not ev.feasible
    assert ev.window_violations == [(2, 15.0, 12.0)]


def test_route_unknown_customer_and_vehicle():
    inst = make_instance(2, {(0, 1): 1.0})
    with pytest.raises(InputError):
        evaluate_route(inst, Route(0, (1, 7)))
    with pytest.raises(InputError):
        evaluate_route(inst, Route(3, (1,)))


def test_empty_route_vacuously_feasible():
    inst = make_instance(2, {(0, 1): 1.0})
    ev = evaluate_route(inst, Route(0, ()))
    assert ev.latency == [] and ev.feasible


def test_service_time_delays_departure_not_start():
    inst = make_instance(
        2, {(0, 1): 10.0, (1, 2): 5.0}, service={1: 7.0}
    )
    ev = evaluate_route(inst, Route(0, (1, 2)))
    assert ev.latency == [10.0, 22.0]  # depart 1 at 17, arrive 2 at 22


def test_solution_parallel_single_customers():
    inst = make_instance(2, {(0, 1): 7.0, (0, 2): 7.0}, fleet=(1, 1))
    sol, report = assemble_solution(inst, [(0, [1]), (1, [2])])
    assert report.objective == 14.0
    assert report.feasible
    assert sol.objective == 14.0


def test_solution_unserved_reported():
    inst = make_instance(2, {(0, 1): 7.0, (0, 2): 7.0}, fleet=(1, 1))
    _, report = assemble_solution(inst, [(0, [1])])
    assert report.unserved == {2}
    assert not report.feasible


def test_solution_capacity_violation_flagged():
    inst = make_instance(3, {(0, 1): 1.0, (1, 2): 1.0, (2, 3): 1.0}, fleet=(2,))
    _, report = assemble_solution(inst, [(0, [1, 2, 3])])
    assert report.capacity_violations == [0]
    assert not report.feasible


def test_solution_duplicates_reported():
    inst = make_instance(2, {(0, 1): 1.0, (0, 2): 1.0}, fleet=(2, 2))
    probe = Solution(routes=(Route(0, (1, 2)), Route(1, (2,))), latency={}, idle={}, objective=0.0)
    report = evaluate_solution(inst, probe)
    assert report.duplicated == {2}
    assert not report.feasible


def test_objective_additivity():
    rng = random.Random(7)
    for _ in range(20):
        n = rng.randint(2, 6)
        arcs = {(i, j): rng.uniform(1, 20) for i in range(n + 1) for j in range(n + 1) if i != j}
        inst = make_instance(n, arcs, fleet=(n, n))
        customers = list(range(1, n + 1))
        rng.shuffle(customers)
        cut = rng.randint(0, n)
        routes = [(0, customers[:cut]), (1, customers[cut:])]
        _, report = assemble_solution(inst, routes)
        per_route = sum(
            evaluate_route(inst, Route(k, tuple(stops))).objective
            for k, stops in routes
            if stops
        )
        assert math.isclose(report.objective, per_route, rel_tol=0, abs_tol=1e-9)


def test_earliest_start_dominates_random_feasible_schedules():
    rng = random.Random(3)
    inst = make_instance(
        4,
        {(i, j): 3.0 + ((i * 7 + j * 3) % 5) for i in range(5) for j in range(5) if i != j},
        windows={1: (5.0, 400.0), 2: (0.0, 400.0), 3: (20.0, 400.0), 4: (0.0, 400.0)},
        fleet=(4,),
    )
    route = Route(0, (2, 1, 4, 3))
    ev = evaluate_route(inst, route)
    d = inst.durations
    for _ in range(200):
        # Any window-feasible schedule of the same order: earliest start
        # plus arbitrary nonnegative slack, rejected if a deadline breaks.
        t = 0.0
        prev = 0
        sched = []
        ok = True
        for stop in route.stops:
            arr = t + d[prev, stop]
            start = max(arr, inst.windows[stop, 0]) + rng.uniform(0, 30)
            if start > inst.windows[stop, 1]:
                ok = False
                break
            sched.append(start)
            t = start
            prev = stop
        if not ok:
            continue
        for mine, other in zip(ev.latency, sched):
            assert mine <= other + 1e-9


def test_latency_monotone_in_durations():
    rng = random.Random(11)
    base = {(i, j): rng.uniform(1, 10) for i in range(4) for j in range(4) if i != j}
    inst = make_instance(3, base, fleet=(3,))
    route = Route(0, (1, 2, 3))
    before = evaluate_route(inst, route).latency
    bumped = np.array(inst.durations)
    bumped[1, 2] += 5.0  # arc used by the route
    after = evaluate_route(inst, route, bumped).latency
    assert all(b >= a - 1e-12 for a, b in zip(before, after))
    assert after[1] >= before[1] + 5.0 - 1e-9


def test_instance_invariants_rejected():
    d = np.zeros((3, 3))
    w = np.array([[0.0, 0.0], [5.0, 1.0]])  # start > end
    with pytest.raises(InputError):
        Instance(n=1, durations=d, epsilon=0.0, windows=w, fleet=(1,))
    w_ok = np.array([[0.0, 0.0], [0.0, 5.0]])
    bad = d.copy()
    bad[0, 2] = 3.0  # dummy column must stay zero
    with pytest.raises(InputError):
        Instance(n=1, durations=bad, epsilon=0.0, windows=w_ok, fleet=(1,))
    with pytest.raises(InputError):
        Instance(n=1, durations=d, epsilon=-1.0, windows=w_ok, fleet=(1,))
    with pytest.raises(InputError):
        Instance(n=1, durations=d, epsilon=0.0, windows=w_ok, fleet=())


def test_realization_must_stay_in_box():
    inst = make_instance(1, {(0, 1): 10.0}, epsilon=2.0)
    ok = np.array(inst.durations)
    ok[0, 1] = 12.0
    DurationRealization.from_matrix(inst, ok)
    bad = np.array(inst.durations)
    bad[0, 1] = 13.0
    with pytest.raises(InputError):
        DurationRealization.from_matrix(inst, bad)
    neg = np.array(inst.durations)
    neg[1, 0] = -0.5
    with pytest.raises(InputError):
        DurationRealization.from_matrix(inst, neg)


def test_worst_case_keeps_dummy_arcs_zero():
    inst = make_instance(2, {(0, 1): 1.0}, epsilon=4.0)
    wc = inst.worst_case_durations()
    assert np.all(wc[:, inst.terminal] == 0.0)
    assert wc[0, 1] == 5.0
