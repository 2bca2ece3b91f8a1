"""Exact solving: best-first branch and bound over the binary arc variables,
plus an independent brute-force route-enumeration oracle for small inputs.

Node bounds take the max of two independently valid lower bounds:

* the LP relaxation of the arc model (solved with the HiGHS kernel via
  scipy), strengthened with one static row per customer j,
  ``l_j >= sum_(k,i) (lb_i + e_ij) x[k,i,j]``, where lb_i is a precomputed
  lower bound on the latency of node i in any feasible plan.  Exactly one
  incoming arc of j is selected at any integer point, and along that arc
  l_j >= l_i + e_ij >= lb_i + e_ij, so the row holds at every integer point
  and the strengthened LP remains a relaxation of the integer problem.
* an arc-independent earliest-arrival fixpoint: lb_i is the least solution
  of lb_i = max(s_i, min over allowed predecessors h of lb_h + e_hi).  By
  induction over route positions every feasible schedule satisfies
  l_i >= lb_i, so summing over customers bounds the objective from below.
  This is the fallback bound when the LP kernel fails at a node and is
  also used to prune cheaply before paying for an LP solve.

Branching picks the most fractional arc variable (ties to the smallest
(k, i, j)); fixing an arc to one propagates the degree-one implications of
the assignment and flow equalities, which shrinks the tree substantially.
The search is single-threaded, so results are deterministic for a fixed
instance by construction.
"""

from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .milp import MilpModel, effective_durations
from .model import InputError, Instance, Solution, assemble_solution

__all__ = ["ExactResult", "BruteForceResult", "solve_exact", "solve_bruteforce"]

OPT_TOL = 1e-7  # gap below which a node cannot improve the incumbent
INT_TOL = 1e-6

BRUTE_FORCE_LIMIT = 9


@dataclass
class ExactResult:
    status: str  # optimal | feasible | infeasible | timeout
    solution: Solution | None
    objective: float | None
    lower_bound: float
    nodes: int
    runtime: float

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


@dataclass
class BruteForceResult:
    status: str  # optimal | infeasible
    solution: Solution | None
    objective: float | None


# ---------------------------------------------------------------------------
# earliest-arrival fixpoint bound
# ---------------------------------------------------------------------------


def _arrival_bound(
    n: int,
    e: list[list[float]],
    starts: list[float],
    blocked: set[tuple[int, int]] | None = None,
    forced_pred: dict[int, int] | None = None,
) -> list[float] | None:
    """Least fixpoint of lb_i = max(s_i, min over allowed h of lb_h + e_hi).

    Returns per-node latency lower bounds (index 0 = depot) or None when
    some customer has no allowed predecessor left.
    """
    blocked = blocked or set()
    forced_pred = forced_pred or {}
    lb = [0.0] + [starts[i] for i in range(1, n + 1)]
    preds: list[list[int]] = [[]]
    for j in range(1, n + 1):
        if j in forced_pred:
            preds.append([forced_pred[j]])
        else:
            allowed = [h for h in range(n + 1) if h != j and (h, j) not in blocked]
            if not allowed:
                return None
            preds.append(allowed)
    for _ in range(n + 1):
        changed = False
        for j in range(1, n + 1):
            best = min(lb[h] + e[h][j] for h in preds[j])
            v = best if best > starts[j] else starts[j]
            if v > lb[j] + 1e-12:
                lb[j] = v
                changed = True
        if not changed:
            break
    return lb


# ---------------------------------------------------------------------------
# branch and bound
# ---------------------------------------------------------------------------


class _SearchSpace:
    """Static LP data shared by every node of one solve."""

    def __init__(self, model: MilpModel):
        inst = model.instance
        self.model = model
        self.inst = inst
        self.n = inst.n
        self.m = inst.num_vehicles
        self.N = inst.n + 2
        self.e = effective_durations(inst, model.robust)
        self.e_list = self.e.tolist()
        self.starts = inst.windows[:, 0].tolist()
        self.root_lb = _arrival_bound(self.n, self.e_list, self.starts)

        rows_eq, rhs_eq, rows_ub, rhs_ub = [], [], [], []
        for row in model.rows:
            idx = list(row.coeffs)
            val = [row.coeffs[i] for i in idx]
            if row.sense == "==":
                rows_eq.append((idx, val))
                rhs_eq.append(row.rhs)
            elif row.sense == "<=":
                rows_ub.append((idx, val))
                rhs_ub.append(row.rhs)
            else:
                rows_ub.append((idx, [-v for v in val]))
                rhs_ub.append(-row.rhs)
        # Static strengthening rows (see module docstring):
        # -l_j + sum (lb_i + e_ij) x[k,i,j] <= 0 for every customer j.
        if self.root_lb is not None:
            for j in range(1, self.n + 1):
                idx = [int(model.l_index[j])]
                val = [-1.0]
                for k in range(self.m):
                    for i in range(self.n + 1):
                        if i == j:
                            continue
                        idx.append(int(model.x_index[k, i, j]))
                        val.append(self.root_lb[i] + self.e[i, j])
                rows_ub.append((idx, val))
                rhs_ub.append(0.0)

        nv = model.num_vars
        self.A_eq = self._build(rows_eq, nv)
        self.b_eq = np.array(rhs_eq)
        self.A_ub = self._build(rows_ub, nv)
        self.b_ub = np.array(rhs_ub)
        self.c = model.objective

        self.base_bounds = np.column_stack([model.lower, model.upper]).astype(float)
        # Arcs into the depot and out of the terminal are forced to zero by
        # the aggregate flow rows; an unused vehicle simply selects no arcs,
        # so the depot->terminal shortcut may be dropped as well.
        for k in range(self.m):
            for i in range(self.N):
                for j in range(self.N):
                    if i == j:
                        continue
                    if j == 0 or i == self.N - 1 or (i == 0 and j == self.N - 1):
                        self.base_bounds[model.x_index[k, i, j], 1] = 0.0
        # Equal-capacity vehicles are interchangeable: order them by their
        # lowest-indexed customer, so customer j rides on some vehicle < j.
        # This drops symmetric relabelings only, never an objective value.
        if self.m > 1 and len(set(inst.fleet)) == 1:
            for k in range(1, self.m):
                for j in range(1, min(k, self.n) + 1):
                    for i in range(self.N):
                        if i != j:
                            self.base_bounds[model.x_index[k, i, j], 1] = 0.0
                            self.base_bounds[model.x_index[k, j, i], 1] = 0.0

    @staticmethod
    def _build(rows, nv):
        data, ri, ci = [], [], []
        for r, (idx, val) in enumerate(rows):
            ri.extend([r] * len(idx))
            ci.extend(idx)
            data.extend(val)
        return sp.csr_matrix((data, (ri, ci)), shape=(len(rows), nv))

    def solve_lp(self, bounds: np.ndarray) -> tuple[str, float | None, np.ndarray | None]:
        res = linprog(
            self.c,
            A_ub=self.A_ub,
            b_ub=self.b_ub,
            A_eq=self.A_eq,
            b_eq=self.b_eq,
            bounds=bounds,
            method="highs",
        )
        if res.status == 2:
            return "infeasible", None, None
        if not res.success:
            return "fail", None, None
        return "ok", float(res.fun), res.x

    def arc_of(self, var_idx: int) -> tuple[int, int, int]:
        """Inverse of the x variable numbering: index -> (k, i, j)."""
        per_vehicle = self.N * (self.N - 1)
        k, rem = divmod(var_idx, per_vehicle)
        i, jj = divmod(rem, self.N - 1)
        j = jj if jj < i else jj + 1
        return k, i, j


def _implied_zeros(space: _SearchSpace, k: int, i: int, j: int) -> list[int]:
    """Arc variables forced to zero once x[k,i,j] is fixed to one."""
    n, m, N = space.n, space.m, space.N
    xi = space.model.x_index
    out = []
    for k2 in range(m):  # one vehicle per arc
        if k2 != k:
            out.append(int(xi[k2, i, j]))
    if 1 <= i <= n:  # customers leave exactly once (any vehicle)
        for k2 in range(m):
            for j2 in range(N):
                if j2 != i and j2 != j:
                    out.append(int(xi[k2, i, j2]))
    if 1 <= j <= n:  # customers are entered exactly once (any vehicle)
        for k2 in range(m):
            for i2 in range(N):
                if i2 != j and i2 != i:
                    out.append(int(xi[k2, i2, j]))
    if i == 0:  # at most one depot departure per vehicle
        for j2 in range(1, N):
            if j2 != j:
                out.append(int(xi[k, 0, j2]))
    if j == N - 1:  # at most one terminal arrival per vehicle
        for i2 in range(N - 1):
            if i2 != i:
                out.append(int(xi[k, i2, N - 1]))
    if 1 <= i <= n and 1 <= j <= n and space.e[i, j] + space.e[j, i] > 1e-12:
        for k2 in range(m):  # a 2-cycle cannot satisfy both precedence rows
            out.append(int(xi[k2, j, i]))
    return out


def _node_bound_views(space: _SearchSpace, fixes: dict[int, int]):
    """Blocked-arc / forced-predecessor views of a fix set, or None on an
    internally inconsistent set (two predecessors forced on one customer)."""
    blocked_count: dict[tuple[int, int], int] = {}
    forced_pred: dict[int, int] = {}
    for idx, val in fixes.items():
        _, i, j = space.arc_of(idx)
        if val == 0:
            blocked_count[(i, j)] = blocked_count.get((i, j), 0) + 1
        elif 1 <= j <= space.n:
            if forced_pred.get(j, i) != i:
                return None
            forced_pred[j] = i
    blocked = {arc for arc, c in blocked_count.items() if c >= space.m}
    return blocked, forced_pred


def _comb_bound(space: _SearchSpace, fixes: dict[int, int]) -> float | None:
    """Arrival-fixpoint objective bound under a fix set; None = infeasible."""
    views = _node_bound_views(space, fixes)
    if views is None:
        return None
    node_lb = _arrival_bound(space.n, space.e_list, space.starts, *views)
    if node_lb is None:
        return None
    windows = space.inst.windows
    if any(node_lb[j] > windows[j, 1] + 1e-9 for j in range(1, space.n + 1)):
        return None  # some customer can no longer meet its deadline
    return sum(node_lb[1:])


def _decode_routes(space: _SearchSpace, xvals: np.ndarray):
    """Integer arc values -> per-vehicle stop lists, or None when the arcs
    are not a set of depot->terminal walks covering every customer (possible
    only through zero-duration cycles, which are not vehicle plans)."""
    n, N = space.n, space.N
    routes = []
    served = 0
    for k in range(space.m):
        succ: dict[int, int] = {}
        count = 0
        for i in range(N):
            for j in range(N):
                if i == j:
                    continue
                if xvals[space.model.x_index[k, i, j]] > 0.5:
                    if i in succ:
                        return None
                    succ[i] = j
                    count += 1
        stops: list[int] = []
        if 0 in succ:
            node = succ[0]
            steps = 1
            while node != N - 1:
                stops.append(node)
                if node not in succ or steps > N:
                    return None
                node = succ[node]
                steps += 1
        walk_arcs = len(stops) + 1 if 0 in succ else 0
        if walk_arcs != count:
            return None
        served += len(stops)
        routes.append((k, stops))
    if served != n:
        return None
    return routes


def solve_exact(
    model: MilpModel,
    time_limit: float | None = None,
    warm_start: bool = True,
    max_nodes: int | None = None,
) -> ExactResult:
    """Solve the arc model to proven optimality with best-first branch and
    bound.  On hitting the time limit the best incumbent and the proven
    lower bound are returned (status ``feasible``, or ``timeout`` when no
    incumbent exists)."""
    t0 = time.perf_counter()
    inst = model.instance
    if inst.n == 0:
        sol, _ = assemble_solution(inst, [])
        return ExactResult("optimal", sol, 0.0, 0.0, 0, time.perf_counter() - t0)

    space = _SearchSpace(model)
    if space.root_lb is None:
        return ExactResult("infeasible", None, None, math.inf, 0, time.perf_counter() - t0)

    incumbent: Solution | None = None
    incumbent_obj = math.inf
    if warm_start:
        from .heuristic import InsertionError, solve_heuristic

        try:
            seed_sol = solve_heuristic(inst, robust=model.robust, seed=0, iteration_budget=60)
            incumbent, incumbent_obj = seed_sol, seed_sol.objective
        except InsertionError:
            pass

    durations = inst.worst_case_durations() if model.robust else inst.durations

    heap: list[tuple[float, int, dict[int, int]]] = []
    counter = itertools.count()
    heapq.heappush(heap, (-math.inf, next(counter), {}))
    nodes = 0
    lower_bound = -math.inf
    hit_limit = False

    while heap:
        priority, _, fixes = heapq.heappop(heap)
        lower_bound = max(lower_bound, priority)
        if incumbent_obj - lower_bound <= OPT_TOL:
            lower_bound = incumbent_obj
            break
        if time_limit is not None and time.perf_counter() - t0 > time_limit:
            hit_limit = True
            break
        if max_nodes is not None and nodes >= max_nodes:
            hit_limit = True
            break
        nodes += 1

        comb_bound = _comb_bound(space, fixes)
        if comb_bound is None or comb_bound >= incumbent_obj - OPT_TOL:
            continue

        bounds = space.base_bounds.copy()
        for idx, val in fixes.items():
            bounds[idx, 0] = bounds[idx, 1] = float(val)
        status, lp_obj, xsol = space.solve_lp(bounds)
        if status == "infeasible":
            continue
        if status == "fail":
            bound, xvals = comb_bound, None
        else:
            bound = max(lp_obj, comb_bound)
            xvals = xsol[: model.num_x]
        if bound >= incumbent_obj - OPT_TOL:
            continue

        branch_idx = -1
        if xvals is not None:
            frac = np.abs(xvals - np.round(xvals))
            cand = np.nonzero(frac > INT_TOL)[0]
            if cand.size:
                # most fractional; argmin keeps the smallest (k,i,j) on ties
                branch_idx = int(cand[np.argmin(np.abs(xvals[cand] - 0.5))])
        else:
            for idx in range(model.num_x):
                if idx not in fixes and space.base_bounds[idx, 1] > 0.5:
                    branch_idx = idx
                    break

        if branch_idx < 0:
            routes = _decode_routes(space, xvals)
            if routes is None:
                continue  # degenerate zero-duration cycle; not a vehicle plan
            sol, report = assemble_solution(inst, routes, durations)
            if report.feasible and report.objective < incumbent_obj - 1e-9:
                incumbent, incumbent_obj = sol, report.objective
            continue

        k, i, j = space.arc_of(branch_idx)
        for val in (1, 0):
            child = dict(fixes)
            child[branch_idx] = val
            ok = True
            if val == 1:
                for z in _implied_zeros(space, k, i, j):
                    if z == branch_idx:
                        continue
                    if child.get(z, 0) == 1:
                        ok = False
                        break
                    child[z] = 0
            if not ok:
                continue
            child_comb = _comb_bound(space, child)
            if child_comb is None or child_comb >= incumbent_obj - OPT_TOL:
                continue
            heapq.heappush(heap, (max(bound, child_comb), next(counter), child))

    runtime = time.perf_counter() - t0
    if hit_limit:
        if incumbent is not None:
            return ExactResult("feasible", incumbent, incumbent_obj, lower_bound, nodes, runtime)
        return ExactResult("timeout", None, None, lower_bound, nodes, runtime)
    if incumbent is None:
        return ExactResult("infeasible", None, None, math.inf, nodes, runtime)
    return ExactResult("optimal", incumbent, incumbent_obj, incumbent_obj, nodes, runtime)


# ---------------------------------------------------------------------------
# brute force oracle
# ---------------------------------------------------------------------------


def solve_bruteforce(instance: Instance, robust: bool = False) -> BruteForceResult:
    """Enumerate every capacity-respecting assignment of customers to
    vehicles and every visiting order per vehicle, evaluate each with
    earliest-start semantics, and return the best feasible plan.  Ties are
    broken lexicographically by the per-vehicle route encoding.

    Refuses instances with more than 9 customers: the enumeration is
    factorial and exists as a verification oracle, not a solver.  Vehicles
    are independent under the cumulative objective, so each group is
    sequenced optimally on its own.
    """
    n, m = instance.n, instance.num_vehicles
    if n > BRUTE_FORCE_LIMIT:
        raise InputError(f"brute force limited to n <= {BRUTE_FORCE_LIMIT} (got {n})")
    d = (instance.worst_case_durations() if robust else instance.durations).tolist()
    svc = instance.service_times().tolist()
    win = instance.windows.tolist()
    caps = instance.fleet

    if n == 0:
        sol, _ = assemble_solution(instance, [])
        return BruteForceResult("optimal", sol, 0.0)

    def schedule(stops) -> float | None:
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

    best_obj = math.inf
    best_enc: tuple | None = None
    customers = list(range(1, n + 1))
    for assign in itertools.product(range(m), repeat=n):
        groups: list[list[int]] = [[] for _ in range(m)]
        over = False
        for c, k in zip(customers, assign):
            groups[k].append(c)
            if len(groups[k]) > caps[k]:
                over = True
                break
        if over:
            continue
        total = 0.0
        routes: list[tuple[int, ...]] = []
        feasible = True
        for k in range(m):
            if not groups[k]:
                routes.append(())
                continue
            best_route_obj = math.inf
            best_route: tuple[int, ...] | None = None
            for perm in itertools.permutations(groups[k]):
                obj = schedule(perm)
                if obj is not None and obj < best_route_obj - 1e-12:
                    best_route_obj = obj
                    best_route = perm
            if best_route is None:
                feasible = False
                break
            total += best_route_obj
            routes.append(best_route)
        if not feasible:
            continue
        enc = tuple(routes)
        if total < best_obj - 1e-12 or (
            abs(total - best_obj) <= 1e-12 and (best_enc is None or enc < best_enc)
        ):
            best_obj = total
            best_enc = enc

    if best_enc is None:
        return BruteForceResult("infeasible", None, None)
    sol, report = assemble_solution(
        instance,
        [(k, stops) for k, stops in enumerate(best_enc) if stops],
        instance.worst_case_durations() if robust else None,
    )
    return BruteForceResult("optimal", sol, report.objective)
