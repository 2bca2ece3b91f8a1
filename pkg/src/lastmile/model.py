"""Core domain types and route evaluation for robust cumulative capacitated
vehicle routing with time windows.

Node convention: 0 is the depot, 1..n are customers, n+1 is a dummy terminal
reached over zero-duration arcs, so the trip back to base never enters the
objective.  The latency of a customer is the time elapsed from depot
departure until its service starts; the objective sums latencies over all
customers.  Waiting (idle) time before a window opens is allowed and is not
part of the objective.

All types are immutable after construction and evaluation is pure, so
instances and solutions can be shared freely across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "InputError",
    "Instance",
    "DurationRealization",
    "Route",
    "Solution",
    "RouteEvaluation",
    "SolutionReport",
    "evaluate_route",
    "evaluate_solution",
    "assemble_solution",
]

# Tolerance used for window feasibility checks (floating-point slack only).
FEAS_TOL = 1e-9


class InputError(ValueError):
    """Malformed domain input: unknown node ids, bad shapes, bad files."""


def _locked(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Instance:
    """A complete routing problem datum.

    `durations` holds nominal travel seconds for every ordered pair on the
    augmented node set {0, 1..n, n+1}; the column of the dummy terminal is
    identically zero.  `windows[i]` is the (earliest, latest) service start
    for customer i; row 0 is a placeholder and never read.  `fleet` lists
    per-vehicle capacities in *package counts* (one package per customer),
    so any demand column parsed from benchmark files is irrelevant here.
    `service[i]` seconds are spent at customer i after service starts and
    before departure (zero unless the source file supplies them).
    """

    n: int
    durations: np.ndarray  # (n+2, n+2) seconds
    epsilon: float
    windows: np.ndarray  # (n+1, 2) seconds; row 0 unused
    fleet: tuple[int, ...]
    coords: np.ndarray | None = None  # (n+1, 2) meters; row 0 = depot
    service: np.ndarray | None = None  # (n+1,) seconds; row 0 = depot

    def __post_init__(self):
        n = self.n
        if n < 0:
            raise InputError("customer count must be nonnegative")
        d = np.asarray(self.durations, dtype=float)
        if d.shape != (n + 2, n + 2):
            raise InputError(f"durations must be ({n + 2},{n + 2}), got {d.shape}")
        if np.any(d < -FEAS_TOL) or not np.all(np.isfinite(d)):
            raise InputError("durations must be finite and nonnegative")
        if np.any(np.abs(d[:, n + 1]) > FEAS_TOL):
            raise InputError("arcs into the dummy terminal must have zero duration")
        w = np.asarray(self.windows, dtype=float)
        if w.shape != (n + 1, 2):
            raise InputError(f"windows must be ({n + 1},2), got {w.shape}")
        if n and np.any(w[1:, 0] > w[1:, 1] + FEAS_TOL):
            raise InputError("every window must satisfy start <= end")
        if self.epsilon < 0:
            raise InputError("epsilon must be nonnegative")
        if not self.fleet or any(int(c) <= 0 or int(c) != c for c in self.fleet):
            raise InputError("fleet capacities must be positive integers")
        object.__setattr__(self, "durations", _locked(d))
        object.__setattr__(self, "windows", _locked(w))
        object.__setattr__(self, "fleet", tuple(int(c) for c in self.fleet))
        if self.coords is not None:
            c = np.asarray(self.coords, dtype=float)
            if c.shape != (n + 1, 2):
                raise InputError(f"coords must be ({n + 1},2), got {c.shape}")
            object.__setattr__(self, "coords", _locked(c))
        if self.service is not None:
            s = np.asarray(self.service, dtype=float)
            if s.shape != (n + 1,):
                raise InputError(f"service must be ({n + 1},), got {s.shape}")
            if np.any(s < 0):
                raise InputError("service times must be nonnegative")
            object.__setattr__(self, "service", _locked(s))

    # -- derived views -------------------------------------------------

    @property
    def depot(self) -> int:
        return 0

    @property
    def terminal(self) -> int:
        return self.n + 1

    @property
    def num_vehicles(self) -> int:
        return len(self.fleet)

    @property
    def customers(self) -> range:
        return range(1, self.n + 1)

    def service_times(self) -> np.ndarray:
        if self.service is not None:
            return self.service
        return np.zeros(self.n + 1)

    def worst_case_durations(self) -> np.ndarray:
        """Nominal durations pushed to the top of the uncertainty box.

        Dummy-terminal arcs are structural (identically zero) and are not
        perturbed.
        """
        d = self.durations + self.epsilon
        d[:, self.terminal] = 0.0
        np.fill_diagonal(d, 0.0)
        return d

    def best_case_durations(self) -> np.ndarray:
        d = np.clip(self.durations - self.epsilon, 0.0, None)
        d[:, self.terminal] = 0.0
        return d

    def __eq__(self, other) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented
        same_opt = lambda a, b: (a is None) == (b is None) and (
            a is None or np.array_equal(a, b)
        )
        return (
            self.n == other.n
            and self.epsilon == other.epsilon
            and self.fleet == other.fleet
            and np.array_equal(self.durations, other.durations)
            and np.array_equal(self.windows, other.windows)
            and same_opt(self.coords, other.coords)
            and same_opt(self.service, other.service)
        )


@dataclass(frozen=True)
class DurationRealization:
    """One concrete draw of the travel-time matrix from the box set."""

    durations: np.ndarray

    @classmethod
    def from_matrix(cls, instance: Instance, matrix: np.ndarray) -> "DurationRealization":
        m = np.asarray(matrix, dtype=float)
        if m.shape != instance.durations.shape:
            raise InputError("realization shape mismatch")
        if np.any(m < -FEAS_TOL):
            raise InputError("realized durations must be nonnegative")
        if np.any(np.abs(m - instance.durations) > instance.epsilon + 1e-9):
            raise InputError("realization leaves the uncertainty box")
        if np.any(np.abs(m[:, instance.terminal]) > FEAS_TOL):
            raise InputError("dummy-terminal arcs must stay at zero")
        obj = cls.__new__(cls)
        object.__setattr__(obj, "durations", _locked(m))
        return obj


@dataclass(frozen=True)
class Route:
    """Ordered customer visits of one vehicle (depot/terminal implicit)."""

    vehicle: int
    stops: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "stops", tuple(int(s) for s in self.stops))


@dataclass(frozen=True)
class Solution:
    """Routes plus the latency schedule they induce."""

    routes: tuple[Route, ...]
    latency: dict[int, float]  # customer -> service start seconds
    idle: dict[int, float]  # customer -> pre-window wait seconds
    objective: float


@dataclass
class RouteEvaluation:
    """Earliest-start schedule of a single route under fixed durations."""

    route: Route
    latency: list[float]
    idle: list[float]
    arrival: list[float]
    window_violations: list[tuple[int, float, float]]  # (stop, start, latest)
    capacity_ok: bool

    @property
    def feasible(self) -> bool:
        return self.capacity_ok and not self.window_violations

    @property
    def objective(self) -> float:
        return float(sum(self.latency))


@dataclass
class SolutionReport:
    """Aggregate feasibility report; violations are reported, never thrown."""

    objective: float
    latency: dict[int, float]
    idle: dict[int, float]
    unserved: set[int]
    duplicated: set[int]
    capacity_violations: list[int]  # vehicles over their package count
    window_violations: list[tuple[int, float, float]]
    route_evaluations: list[RouteEvaluation]

    @property
    def feasible(self) -> bool:
        return not (
            self.unserved
            or self.duplicated
            or self.capacity_violations
            or self.window_violations
        )


def _duration_matrix(instance: Instance, durations) -> np.ndarray:
    if durations is None:
        return instance.durations
    if isinstance(durations, DurationRealization):
        return durations.durations
    return np.asarray(durations, dtype=float)


def evaluate_route(instance: Instance, route: Route, durations=None) -> RouteEvaluation:
    """Earliest-start schedule of `route`: l_j = max(s_j, departure_i + d_ij).

    `durations` may be None (nominal), a DurationRealization, or a raw
    matrix.  Unknown node ids raise InputError; an empty route yields an
    empty, vacuously feasible evaluation.
    """
    d = _duration_matrix(instance, durations)
    svc = instance.service_times()
    w = instance.windows
    if not 0 <= route.vehicle < instance.num_vehicles:
        raise InputError(f"unknown vehicle index {route.vehicle}")
    latency: list[float] = []
    idle: list[float] = []
    arrival: list[float] = []
    violations: list[tuple[int, float, float]] = []
    t = 0.0
    prev = 0
    for stop in route.stops:
        if not 1 <= stop <= instance.n:
            raise InputError(f"unknown customer id {stop}")
        arr = t + d[prev, stop]
        start = max(arr, w[stop, 0])
        latency.append(start)
        idle.append(start - arr)
        arrival.append(arr)
        if start > w[stop, 1] + FEAS_TOL:
            violations.append((stop, start, float(w[stop, 1])))
        t = start + svc[stop]
        prev = stop
    capacity_ok = len(route.stops) <= instance.fleet[route.vehicle]
    return RouteEvaluation(route, latency, idle, arrival, violations, capacity_ok)


def evaluate_solution(instance: Instance, solution: Solution, durations=None) -> SolutionReport:
    """Evaluate all routes and aggregate objective plus every violation."""
    counts: dict[int, int] = {}
    for r in solution.routes:
        for s in r.stops:
            counts[s] = counts.get(s, 0) + 1
    unserved = {c for c in instance.customers if counts.get(c, 0) == 0}
    duplicated = {c for c, k in counts.items() if k > 1}

    latency: dict[int, float] = {}
    idle: dict[int, float] = {}
    capacity_violations: list[int] = []
    window_violations: list[tuple[int, float, float]] = []
    evals: list[RouteEvaluation] = []
    for r in solution.routes:
        ev = evaluate_route(instance, r, durations)
        evals.append(ev)
        if not ev.capacity_ok:
            capacity_violations.append(r.vehicle)
        window_violations.extend(ev.window_violations)
        for stop, l, i in zip(r.stops, ev.latency, ev.idle):
            latency.setdefault(stop, l)
            idle.setdefault(stop, i)
    objective = float(sum(latency.values()))
    return SolutionReport(
        objective=objective,
        latency=latency,
        idle=idle,
        unserved=unserved,
        duplicated=duplicated,
        capacity_violations=sorted(capacity_violations),
        window_violations=window_violations,
        route_evaluations=evals,
    )


def assemble_solution(
    instance: Instance, routes, durations=None
) -> tuple[Solution, SolutionReport]:
    """Build a Solution (with its schedule) from bare route stop lists.

    `routes` is an iterable of Route or (vehicle, stops) pairs.  Empty
    routes are dropped.
    """
    rs = []
    for r in routes:
        if not isinstance(r, Route):
            r = Route(vehicle=r[0], stops=tuple(r[1]))
        if r.stops:
            rs.append(r)
    rs = tuple(sorted(rs, key=lambda r: r.vehicle))
    probe = Solution(routes=rs, latency={}, idle={}, objective=math.nan)
    report = evaluate_solution(instance, probe, durations)
    sol = Solution(
        routes=rs,
        latency=dict(report.latency),
        idle=dict(report.idle),
        objective=report.objective,
    )
    return sol, report
