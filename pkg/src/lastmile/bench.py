"""Fleet-size scaling sweep: solve seeded random instances for a range of
fleet sizes, record per-run results, and render runtime/objective figures
next to the CSV.

Records are flushed as runs complete so an interrupted sweep leaves a
usable partial CSV; re-running with the same flags skips finished
(instance, fleet) pairs and the final file is rewritten in canonical
order.  Runs are independent, so workers never affect results, only wall
time.
"""

from __future__ import annotations

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .exact import solve_exact
from .heuristic import InsertionError, solve_heuristic
from .instances import generate_random
from .milp import build_model

__all__ = ["BenchRecord", "run_sweep", "read_records", "sweep_figures"]

CSV_COLUMNS = ["instance_id", "n", "fleet_size", "solver", "status", "objective", "runtime"]


@dataclass
class BenchRecord:
    instance_id: str
    n: int
    fleet_size: int
    solver: str  # exact | heuristic
    status: str  # optimal | feasible | infeasible | timeout
    objective: float | None
    runtime: float

    def row(self) -> list:
        obj = "" if self.objective is None else f"{self.objective:.6f}"
        return [self.instance_id, self.n, self.fleet_size, self.solver, self.status, obj, f"{self.runtime:.4f}"]


def _run_one(args) -> list[BenchRecord]:
    n, fleet_size, index, seed, epsilon, time_limit, robust = args
    instance_id = f"rand-n{n}-s{seed}-{index:03d}"
    instance = generate_random(n, fleet_size, seed=seed * 1000 + index, epsilon=epsilon)
    records = []

    import time as _time

    t0 = _time.perf_counter()
    try:
        heur = solve_heuristic(instance, robust=robust, seed=0, iteration_budget=100)
        records.append(
            BenchRecord(instance_id, n, fleet_size, "heuristic", "feasible", heur.objective, _time.perf_counter() - t0)
        )
    except InsertionError:
        records.append(
            BenchRecord(instance_id, n, fleet_size, "heuristic", "infeasible", None, _time.perf_counter() - t0)
        )

    model = build_model(instance, robust=robust)
    result = solve_exact(model, time_limit=time_limit)
    status = result.status
    if status == "feasible":
        status = "timeout"  # limit hit with an incumbent in hand
    records.append(
        BenchRecord(instance_id, n, fleet_size, "exact", status, result.objective, result.runtime)
    )
    return records


def read_records(path) -> list[BenchRecord]:
    records = []
    with open(path) as fh:
        rows = [r for r in fh if not r.startswith("#")]
    for row in csv.DictReader(rows):
        records.append(
            BenchRecord(
                row["instance_id"],
                int(row["n"]),
                int(row["fleet_size"]),
                row["solver"],
                row["status"],
                float(row["objective"]) if row["objective"] else None,
                float(row["runtime"]),
            )
        )
    return records


def _write_csv(path, records: list[BenchRecord], header_note: str) -> None:
    with open(path, "w", newline="") as fh:
        if header_note:
            fh.write(f"# {header_note}\n")
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for rec in records:
            writer.writerow(rec.row())


def run_sweep(
    n: int = 11,
    fleets: tuple[int, ...] = (2, 4, 6, 8, 10),
    instances_per_point: int = 10,
    seed: int = 0,
    time_limit: float = 120.0,
    epsilon: float = 0.0,
    robust: bool = False,
    jobs: int | None = None,
    out_dir="bench-out",
    header_note: str = "",
) -> list[BenchRecord]:
    """Run the sweep (resuming from any existing CSV), canonicalize record
    order, and render the figures.  Returns all records."""
    if time_limit <= 0:
        raise ValueError("time_limit must be positive")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "bench_records.csv"

    done: set[tuple[str, int, str]] = set()
    records: list[BenchRecord] = []
    if csv_path.exists():
        records = read_records(csv_path)
        done = {(r.instance_id, r.fleet_size, r.solver) for r in records}

    tasks = []
    for fleet_size in fleets:
        for index in range(instances_per_point):
            instance_id = f"rand-n{n}-s{seed}-{index:03d}"
            if (instance_id, fleet_size, "exact") in done:
                continue
            tasks.append((n, fleet_size, index, seed, epsilon, time_limit, robust))

    if tasks:
        jobs = jobs or os.cpu_count() or 1
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                for batch in pool.map(_run_one, tasks):
                    records.extend(batch)
                    _write_csv(csv_path, records, header_note)  # flush progress
        else:
            for task in tasks:
                records.extend(_run_one(task))
                _write_csv(csv_path, records, header_note)

    records.sort(key=lambda r: (r.fleet_size, r.instance_id, r.solver))
    _write_csv(csv_path, records, header_note)
    sweep_figures(records, out)
    return records


def _median(values: list[float]) -> float:
    vs = sorted(values)
    mid = len(vs) // 2
    return vs[mid] if len(vs) % 2 else 0.5 * (vs[mid - 1] + vs[mid])


def sweep_figures(records: list[BenchRecord], out_dir) -> list[Path]:
    from .plotting import save_series_plot

    out = Path(out_dir)
    fleets = sorted({r.fleet_size for r in records})
    runtime_series: dict[str, list[float]] = {}
    objective_series: dict[str, list[float]] = {}
    for solver in ("exact", "heuristic"):
        runtimes, objectives = [], []
        for K in fleets:
            sub = [r for r in records if r.fleet_size == K and r.solver == solver]
            if not sub:
                continue
            runtimes.append(_median([r.runtime for r in sub]))
            objs = [r.objective for r in sub if r.objective is not None]
            objectives.append(sum(objs) / len(objs) if objs else float("nan"))
        if runtimes:
            runtime_series[solver] = runtimes
            objective_series[solver] = objectives
    paths = [
        save_series_plot(fleets, runtime_series, "fleet size", "median runtime [s]", out / "runtime_vs_fleet.png"),
        save_series_plot(fleets, objective_series, "fleet size", "mean objective [s]", out / "objective_vs_fleet.png"),
    ]
    return paths
