"""Instance ingestion, generation and persistence.

Supports three sources:
  * Solomon-layout benchmark text (``id x y demand ready due service`` rows),
  * a seeded random generator used by the scaling experiments,
  * a self-describing native text format with exact float round-trips.

Distance-to-time convention is 1:1 for parsed benchmarks (one distance unit
equals one second) and distances are kept at full float precision, since the
cumulative objective amplifies rounding drift.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .model import InputError, Instance, Route, Solution

__all__ = [
    "FormatError",
    "parse_solomon",
    "parse_solomon_file",
    "generate_random",
    "pentagon_field_instance",
    "capacity_rule",
    "save_instance",
    "load_instance",
    "dumps_instance",
    "loads_instance",
    "save_solution",
    "load_solution",
    "dumps_solution",
    "loads_solution",
]

INSTANCE_HEADER = "lastmile-instance v1"
SOLUTION_HEADER = "lastmile-solution v1"

# Latest service start used when a customer has no real deadline.
OPEN_END = 1e6


class FormatError(InputError):
    """File does not conform to the expected schema/version."""


def _euclid_matrix(coords: np.ndarray) -> np.ndarray:
    """Full-precision pairwise distances, padded with the zero dummy column."""
    n = coords.shape[0] - 1
    diff = coords[:, None, :] - coords[None, :, :]
    core = np.sqrt((diff**2).sum(axis=2))
    d = np.zeros((n + 2, n + 2))
    d[: n + 1, : n + 1] = core
    return d


# ---------------------------------------------------------------------------
# Solomon benchmark layout
# ---------------------------------------------------------------------------


def parse_solomon(
    text: str,
    fleet_size: int | None = None,
    capacity: int | None = None,
    epsilon: float = 0.0,
) -> Instance:
    """Parse Solomon-layout text into an Instance.

    The first all-numeric line with two fields is taken as the vehicle
    header (count, capacity); every following line with seven numeric
    fields is a node row ``id x y demand ready due service``.  Node id 0 is
    the depot.  `fleet_size`/`capacity` override the header (capacities
    here are package counts, one package per customer, so the demand
    column only participates in format validation).
    """
    header: tuple[int, int] | None = None
    rows: dict[int, tuple[float, ...]] = {}
    row_line: dict[int, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        try:
            values = [float(f) for f in fields]
        except ValueError:
            continue  # title / section caption line
        if len(values) == 2 and header is None and not rows:
            header = (int(values[0]), int(values[1]))
            continue
        if len(values) == 7:
            nid = int(values[0])
            if nid != values[0]:
                raise FormatError(f"line {lineno}: non-integer node id")
            if nid in rows:
                raise FormatError(f"line {lineno}: duplicate node id {nid}")
            x, y, demand, ready, due, service = values[1:]
            if demand < 0:
                raise FormatError(f"line {lineno}: negative demand")
            if due < ready:
                raise FormatError(f"line {lineno}: due date {due} before ready time {ready}")
            if service < 0:
                raise FormatError(f"line {lineno}: negative service time")
            rows[nid] = (x, y, ready, due, service)
            row_line[nid] = lineno
            continue
        if len(values) in (1,) and values[0] in (999.0, -1.0):
            break  # conventional terminator in some distributions
        raise FormatError(f"line {lineno}: malformed row ({len(values)} numeric fields)")

    if 0 not in rows:
        raise FormatError("missing depot row (node id 0)")
    n = len(rows) - 1
    expected = set(range(n + 1))
    if set(rows) != expected:
        missing = sorted(expected - set(rows))[:3]
        raise FormatError(f"node ids must be contiguous 0..{n}; missing {missing}")

    coords = np.array([[rows[i][0], rows[i][1]] for i in range(n + 1)])
    windows = np.zeros((n + 1, 2))
    service = np.zeros(n + 1)
    for i in range(1, n + 1):
        windows[i] = (rows[i][2], rows[i][3])
        service[i] = rows[i][4]
    # Depot ready/due describe the planning horizon; routes end at the free
    # dummy terminal here, so they impose nothing and are dropped.
    size = fleet_size if fleet_size is not None else (header[0] if header else 1)
    cap = capacity if capacity is not None else (header[1] if header else max(n, 1))
    if size < 1 or cap < 1:
        raise FormatError("fleet size and capacity must be positive")
    return Instance(
        n=n,
        durations=_euclid_matrix(coords),
        epsilon=epsilon,
        windows=windows,
        fleet=(cap,) * size,
        coords=coords,
        service=service,
    )


def parse_solomon_file(path, **kwargs) -> Instance:
    return parse_solomon(Path(path).read_text(), **kwargs)


# ---------------------------------------------------------------------------
# Random instances
# ---------------------------------------------------------------------------


def capacity_rule(n: int, num_vehicles: int) -> int:
    """Per-vehicle package capacity ceil(2n/m) used by the fleet sweep."""
    return math.ceil(2 * n / num_vehicles)


def generate_random(
    n: int,
    num_vehicles: int,
    seed: int,
    epsilon: float = 0.0,
    side: float = 100.0,
    window_width: tuple[float, float] = (60.0, 240.0),
    max_attempts: int = 60,
) -> Instance:
    """Seeded random instance: uniform coordinates on a square, Euclidean
    durations, capacities ceil(2n/m) for every vehicle, and windows wide
    enough that the instance stays feasible at the top of the uncertainty
    box (verified with the insertion heuristic, resampling on failure).
    """
    if n < 1 or num_vehicles < 1:
        raise InputError("need n >= 1 and num_vehicles >= 1")
    from .heuristic import InsertionError, solve_heuristic

    cap = capacity_rule(n, num_vehicles)
    slack = side * n / num_vehicles / 2.0
    for attempt in range(max_attempts):
        rng = np.random.default_rng([seed, n, num_vehicles, attempt])
        coords = rng.uniform(0.0, side, size=(n + 1, 2))
        d = _euclid_matrix(coords)
        windows = np.zeros((n + 1, 2))
        for i in range(1, n + 1):
            d0 = d[0, i]
            start = d0 * rng.uniform(0.8, 1.2) + rng.uniform(0.0, slack)
            width = rng.uniform(*window_width)
            windows[i] = (start, start + width)
        instance = Instance(
            n=n,
            durations=d,
            epsilon=epsilon,
            windows=windows,
            fleet=(cap,) * num_vehicles,
            coords=coords,
        )
        try:
            solve_heuristic(instance, robust=True, seed=seed, iteration_budget=40)
        except InsertionError:
            continue
        return instance
    # Give up on tight windows: fall back to an always-feasible wide band.
    rng = np.random.default_rng([seed, n, num_vehicles, max_attempts])
    coords = rng.uniform(0.0, side, size=(n + 1, 2))
    windows = np.zeros((n + 1, 2))
    windows[1:, 1] = OPEN_END
    return Instance(
        n=n,
        durations=_euclid_matrix(coords),
        epsilon=epsilon,
        windows=windows,
        fleet=(cap,) * num_vehicles,
        coords=coords,
    )


def pentagon_field_instance(epsilon: float = 5.0, speed: float = 1.2) -> Instance:
    """Five delivery nodes on the corners of a parking-lot loop around the
    depot, durations derived from geometry at the given cruise speed.  A
    topological reconstruction of the single-courier field layout; windows
    are left open.
    """
    radius = 60.0
    pts = [(0.0, 0.0)]
    for i in range(5):
        a = 2 * math.pi * i / 5 + math.pi / 2
        pts.append((radius * math.cos(a), radius * math.sin(a)))
    coords = np.array(pts)
    d = _euclid_matrix(coords) / speed
    windows = np.zeros((6, 2))
    windows[1:, 1] = OPEN_END
    return Instance(
        n=5, durations=d, epsilon=epsilon, windows=windows, fleet=(5,), coords=coords
    )


# ---------------------------------------------------------------------------
# Native persistence (exact round-trip)
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def dumps_instance(instance: Instance) -> str:
    out = [INSTANCE_HEADER]
    out.append(f"n {instance.n}")
    out.append(f"epsilon {_fmt(instance.epsilon)}")
    out.append("fleet " + " ".join(str(c) for c in instance.fleet))
    if instance.coords is not None:
        for i, (x, y) in enumerate(instance.coords):
            out.append(f"coord {i} {_fmt(x)} {_fmt(y)}")
    for i in instance.customers:
        s, f = instance.windows[i]
        out.append(f"window {i} {_fmt(s)} {_fmt(f)}")
    if instance.service is not None:
        for i in range(instance.n + 1):
            out.append(f"service {i} {_fmt(instance.service[i])}")
    out.append("durations")
    for row in instance.durations:
        out.append(" ".join(_fmt(v) for v in row))
    return "\n".join(out) + "\n"


def loads_instance(text: str) -> Instance:
    lines = [l.rstrip() for l in text.splitlines() if not l.lstrip().startswith("#")]
    if not lines or lines[0].strip() != INSTANCE_HEADER:
        raise FormatError(f"expected header '{INSTANCE_HEADER}'")
    n = None
    epsilon = 0.0
    fleet: tuple[int, ...] = ()
    coords: dict[int, tuple[float, float]] = {}
    windows: dict[int, tuple[float, float]] = {}
    service: dict[int, float] = {}
    rows: list[list[float]] = []
    in_matrix = False
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        if in_matrix:
            try:
                rows.append([float(v) for v in line.split()])
            except ValueError as e:
                raise FormatError(f"line {lineno}: bad matrix row: {e}") from None
            continue
        key, *rest = line.split()
        try:
            if key == "n":
                n = int(rest[0])
            elif key == "epsilon":
                epsilon = float(rest[0])
            elif key == "fleet":
                fleet = tuple(int(v) for v in rest)
            elif key == "coord":
                coords[int(rest[0])] = (float(rest[1]), float(rest[2]))
            elif key == "window":
                windows[int(rest[0])] = (float(rest[1]), float(rest[2]))
            elif key == "service":
                service[int(rest[0])] = float(rest[1])
            elif key == "durations":
                in_matrix = True
            else:
                raise FormatError(f"line {lineno}: unknown key '{key}'")
        except (IndexError, ValueError) as e:
            raise FormatError(f"line {lineno}: {e}") from None
    if n is None or not fleet:
        raise FormatError("missing n/fleet fields")
    if len(rows) != n + 2 or any(len(r) != n + 2 for r in rows):
        raise FormatError("durations matrix truncated or misshapen")
    w = np.zeros((n + 1, 2))
    for i in range(1, n + 1):
        if i not in windows:
            raise FormatError(f"missing window for customer {i}")
        w[i] = windows[i]
    c = None
    if coords:
        if set(coords) != set(range(n + 1)):
            raise FormatError("coords must cover nodes 0..n")
        c = np.array([coords[i] for i in range(n + 1)])
    s = None
    if service:
        s = np.zeros(n + 1)
        for i, v in service.items():
            if not 0 <= i <= n:
                raise FormatError(f"service row for unknown node {i}")
            s[i] = v
    return Instance(
        n=n,
        durations=np.array(rows),
        epsilon=epsilon,
        windows=w,
        fleet=fleet,
        coords=c,
        service=s,
    )


def save_instance(instance: Instance, path) -> None:
    Path(path).write_text(dumps_instance(instance))


def load_instance(path) -> Instance:
    return loads_instance(Path(path).read_text())


def dumps_solution(solution: Solution) -> str:
    out = [SOLUTION_HEADER]
    out.append(f"objective {_fmt(solution.objective)}")
    for r in solution.routes:
        out.append(f"route {r.vehicle} " + " ".join(str(s) for s in r.stops))
    for c in sorted(solution.latency):
        out.append(f"latency {c} {_fmt(solution.latency[c])}")
    for c in sorted(solution.idle):
        out.append(f"idle {c} {_fmt(solution.idle[c])}")
    return "\n".join(out) + "\n"


def loads_solution(text: str) -> Solution:
    lines = [l.strip() for l in text.splitlines() if l.strip() and not l.lstrip().startswith("#")]
    if not lines or lines[0] != SOLUTION_HEADER:
        raise FormatError(f"expected header '{SOLUTION_HEADER}'")
    objective = None
    routes: list[Route] = []
    latency: dict[int, float] = {}
    idle: dict[int, float] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        key, *rest = line.split()
        try:
            if key == "objective":
                objective = float(rest[0])
            elif key == "route":
                routes.append(Route(vehicle=int(rest[0]), stops=tuple(int(v) for v in rest[1:])))
            elif key == "latency":
                latency[int(rest[0])] = float(rest[1])
            elif key == "idle":
                idle[int(rest[0])] = float(rest[1])
            else:
                raise FormatError(f"line {lineno}: unknown key '{key}'")
        except (IndexError, ValueError) as e:
            raise FormatError(f"line {lineno}: {e}") from None
    if objective is None:
        raise FormatError("missing objective")
    return Solution(routes=tuple(routes), latency=latency, idle=idle, objective=objective)


def save_solution(solution: Solution, path) -> None:
    Path(path).write_text(dumps_solution(solution))


def load_solution(path) -> Solution:
    return loads_solution(Path(path).read_text())
