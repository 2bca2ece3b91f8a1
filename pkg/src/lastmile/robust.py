"""Everything about the travel-time uncertainty box: worst-case evaluation,
Monte-Carlo sampling and empirical robustness reports for a solution.

Latencies are monotone nondecreasing in durations, so feasibility at the
top of the box (every arc at nominal + epsilon) implies feasibility for
every realization inside the box; the worst-case check therefore needs a
single evaluation.  Arc perturbations are sampled independently (the box
set imposes no correlation structure) and negative draws are clamped to
zero to stay in the nonnegative orthant.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import (
    DurationRealization,
    Instance,
    Solution,
    SolutionReport,
    evaluate_solution,
)

__all__ = [
    "UncertaintySampler",
    "WorstCaseReport",
    "MonteCarloReport",
    "worst_case_check",
    "monte_carlo_report",
    "write_monte_carlo_csv",
]


@dataclass
class UncertaintySampler:
    """Draws travel-time matrices from the box around an instance's nominal
    durations: uniform on [-epsilon, +epsilon] per arc by default, or a
    fixed scenario list cycled by sample index."""

    epsilon: float
    scenarios: list[np.ndarray] | None = None

    def sample(self, instance: Instance, rng: np.random.Generator, index: int = 0) -> DurationRealization:
        if self.scenarios:
            return DurationRealization.from_matrix(
                instance, self.scenarios[index % len(self.scenarios)]
            )
        shape = instance.durations.shape
        noise = rng.uniform(-self.epsilon, self.epsilon, size=shape)
        m = np.clip(instance.durations + noise, 0.0, None)
        m[:, instance.terminal] = 0.0
        np.fill_diagonal(m, 0.0)
        return DurationRealization.from_matrix(instance, m)


@dataclass
class WorstCaseReport:
    feasible: bool
    objective: float
    report: SolutionReport


@dataclass
class MonteCarloReport:
    samples: int
    feasible_fraction: float
    objective_min: float
    objective_mean: float
    objective_max: float
    rows: list[tuple[int, bool, float]] = field(repr=False, default_factory=list)


def worst_case_check(instance: Instance, solution: Solution) -> WorstCaseReport:
    """Evaluate the solution with every arc at nominal + epsilon."""
    report = evaluate_solution(instance, solution, instance.worst_case_durations())
    return WorstCaseReport(report.feasible, report.objective, report)


def monte_carlo_report(
    instance: Instance,
    solution: Solution,
    samples: int,
    seed: int = 0,
    sampler: UncertaintySampler | None = None,
) -> MonteCarloReport:
    """Evaluate the solution under `samples` independent box draws.

    Each sample gets its own RNG stream derived from `seed`, so reports are
    reproducible and individual samples could be drawn in parallel without
    changing the result.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    sampler = sampler or UncertaintySampler(epsilon=instance.epsilon)
    streams = np.random.SeedSequence(seed).spawn(samples)
    rows: list[tuple[int, bool, float]] = []
    objectives = np.empty(samples)
    feasible_count = 0
    for i, ss in enumerate(streams):
        realization = sampler.sample(instance, np.random.default_rng(ss), i)
        rep = evaluate_solution(instance, solution, realization)
        rows.append((i, rep.feasible, rep.objective))
        objectives[i] = rep.objective
        feasible_count += rep.feasible
    return MonteCarloReport(
        samples=samples,
        feasible_fraction=feasible_count / samples,
        objective_min=float(objectives.min()),
        objective_mean=float(objectives.mean()),
        objective_max=float(objectives.max()),
        rows=rows,
    )


def write_monte_carlo_csv(report: MonteCarloReport, path, header_note: str = "") -> None:
    with open(path, "w", newline="") as fh:
        if header_note:
            fh.write(f"# {header_note}\n")
        writer = csv.writer(fh)
        writer.writerow(["sample_id", "feasible", "objective"])
        for sid, feasible, obj in report.rows:
            writer.writerow([sid, int(feasible), f"{obj:.9f}"])
