"""Fast feasible solutions: cheapest-latency-increase insertion followed by
local search (relocate, inter-route swap, intra-route 2-opt), restarted from
seed-shuffled insertion orders.

The cumulative objective makes every latency downstream of an edit change,
so move deltas are computed by rescheduling the affected routes instead of
by a constant-time edge formula: correctness over cleverness.  Only strict
improvements of the total latency are accepted, and every accepted move
keeps window and capacity feasibility.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .model import Instance, Solution, assemble_solution

__all__ = ["InsertionError", "solve_heuristic"]


class InsertionError(RuntimeError):
    """No feasible insertion exists for some customer (tight windows).

    Carries the best partial packing seen for diagnostics: `routes` is a
    list of per-vehicle stop lists and `unplaced` the customers left over.
    """

    def __init__(self, routes, unplaced):
        super().__init__(
            f"no feasible insertion for customers {sorted(unplaced)}"
        )
        self.routes = routes
        self.unplaced = sorted(unplaced)


def _route_cost(stops, d, svc, win) -> float | None:
    """Total latency of one route, or None if a window is missed."""
    t = 0.0
    prev = 0
    total = 0.0
    for s_ in stops:
        arr = t + d[prev][s_]
        w0, w1 = win[s_]
        start = arr if arr > w0 else w0
        if start > w1 + 1e-9:
            return None
        total += start
        t = start + svc[s_]
        prev = s_
    return total


def _insert_all(order, caps, d, svc, win):
    """Sequential cheapest insertion; returns (routes, cost per route) or
    raises nothing -- unplaced customers are returned for diagnostics."""
    routes = [[] for _ in caps]
    costs = [0.0 for _ in caps]
    unplaced = []
    for cust in order:
        best = None  # (delta, k, pos, new_cost)
        for k, stops in enumerate(routes):
            if len(stops) >= caps[k]:
                continue
            for pos in range(len(stops) + 1):
                cand = stops[:pos] + [cust] + stops[pos:]
                cost = _route_cost(cand, d, svc, win)
                if cost is None:
                    continue
                delta = cost - costs[k]
                if best is None or delta < best[0] - 1e-12:
                    best = (delta, k, pos, cost)
        if best is None:
            unplaced.append(cust)
            continue
        _, k, pos, cost = best
        routes[k].insert(pos, cust)
        costs[k] = cost
    return routes, costs, unplaced


def _local_search(routes, costs, caps, d, svc, win, max_passes=400):
    """First-improvement passes over relocate, swap and 2-opt until no move
    improves the total latency (or the pass cap is hit)."""
    for _ in range(max_passes):
        improved = False

        # relocate: move one customer to any position of any route
        for k1 in range(len(routes)):
            for p1 in range(len(routes[k1])):
                cust = routes[k1][p1]
                removed = routes[k1][:p1] + routes[k1][p1 + 1 :]
                removed_cost = _route_cost(removed, d, svc, win)
                if removed_cost is None:
                    continue
                done = False
                for k2 in range(len(routes)):
                    base = removed if k2 == k1 else routes[k2]
                    if k2 != k1 and len(base) >= caps[k2]:
                        continue
                    for p2 in range(len(base) + 1):
                        if k2 == k1 and p2 == p1:
                            continue
                        cand = base[:p2] + [cust] + base[p2:]
                        cost = _route_cost(cand, d, svc, win)
                        if cost is None:
                            continue
                        if k2 == k1:
                            delta = cost - costs[k1]
                        else:
                            delta = (removed_cost - costs[k1]) + (cost - costs[k2])
                        if delta < -1e-9:
                            if k2 == k1:
                                routes[k1] = cand
                                costs[k1] = cost
                            else:
                                routes[k1] = removed
                                costs[k1] = removed_cost
                                routes[k2] = cand
                                costs[k2] = cost
                            improved = done = True
                            break
                    if done:
                        break
                if done:
                    break
            if improved:
                break
        if improved:
            continue

        # inter-route swap: exchange two customers between routes
        done = False
        for k1 in range(len(routes)):
            for k2 in range(k1 + 1, len(routes)):
                for p1 in range(len(routes[k1])):
                    for p2 in range(len(routes[k2])):
                        r1 = list(routes[k1])
                        r2 = list(routes[k2])
                        r1[p1], r2[p2] = r2[p2], r1[p1]
                        c1 = _route_cost(r1, d, svc, win)
                        c2 = _route_cost(r2, d, svc, win)
                        if c1 is None or c2 is None:
                            continue
                        if c1 + c2 < costs[k1] + costs[k2] - 1e-9:
                            routes[k1], routes[k2] = r1, r2
                            costs[k1], costs[k2] = c1, c2
                            done = True
                            break
                    if done:
                        break
                if done:
                    break
            if done:
                break
        if done:
            continue

        # intra-route 2-opt: reverse a segment
        done = False
        for k in range(len(routes)):
            stops = routes[k]
            for a in range(len(stops) - 1):
                for b in range(a + 1, len(stops)):
                    cand = stops[:a] + stops[a : b + 1][::-1] + stops[b + 1 :]
                    cost = _route_cost(cand, d, svc, win)
                    if cost is not None and cost < costs[k] - 1e-9:
                        routes[k] = cand
                        costs[k] = cost
                        done = True
                        break
                if done:
                    break
            if done:
                break
        if not done:
            break
    return routes, costs


def solve_heuristic(
    instance: Instance,
    robust: bool = False,
    seed: int = 0,
    iteration_budget: int = 200,
) -> Solution:
    """Best solution over `iteration_budget // 10` restarts (at least one).

    The first restart inserts customers ordered by window start (then by
    depot distance); later restarts use seed-shuffled orders.  Raises
    InsertionError when no restart can place every customer.
    """
    d = (instance.worst_case_durations() if robust else instance.durations).tolist()
    svc = instance.service_times().tolist()
    win = instance.windows.tolist()
    caps = instance.fleet
    if instance.n == 0:
        sol, _ = assemble_solution(instance, [])
        return sol
    if sum(caps) < instance.n:
        raise InsertionError([[] for _ in caps], list(instance.customers))

    rng = random.Random(seed)
    restarts = max(1, iteration_budget // 10)
    base_order = sorted(instance.customers, key=lambda c: (win[c][0], d[0][c], c))

    best_routes = None
    best_obj = math.inf
    diag_routes, diag_unplaced = None, None
    for r in range(restarts):
        order = list(base_order)
        if r > 0:
            rng.shuffle(order)
        routes, costs, unplaced = _insert_all(order, caps, d, svc, win)
        if unplaced:
            if diag_unplaced is None or len(unplaced) < len(diag_unplaced):
                diag_routes, diag_unplaced = routes, unplaced
            continue
        routes, costs = _local_search(routes, costs, caps, d, svc, win)
        total = sum(costs)
        if total < best_obj - 1e-9:
            best_obj = total
            best_routes = [list(s) for s in routes]

    if best_routes is None:
        raise InsertionError(diag_routes or [[] for _ in caps], diag_unplaced or [])
    sol, report = assemble_solution(
        instance,
        [(k, stops) for k, stops in enumerate(best_routes) if stops],
        instance.worst_case_durations() if robust else None,
    )
    return sol
