"""Solver-agnostic mixed-integer linear model of the routing problem.

Variables are the binary arc selections x[k,i,j] (vehicle k drives i -> j)
over the augmented node set plus one continuous latency l[i] per node.  Rows
implement, in order: customer assignment, per-vehicle flow conservation,
per-vehicle depot-out / terminal-in trip limits, the two aggregate
dummy-flow equalities, package-count capacities, and the big-M precedence
rows that order latencies along selected arcs (doubling as subtour
elimination).  Window limits and the fixed depot latency are variable
bounds.

The robust counterpart substitutes the worst box realization d+epsilon into
every precedence row.  Latencies are monotone nondecreasing in durations,
so a schedule feasible at the top of the box is feasible for every
realization inside it; that single substitution therefore yields the exact
robust model (property-tested in the uncertainty module's suite).

Per-node service times, when present, are folded into the precedence
durations (service happens between the service start l[i] and departure),
which keeps the model consistent with the route evaluator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import Instance

__all__ = ["LinearRow", "MilpModel", "build_model", "expected_row_census", "to_lp_text", "effective_durations"]


@dataclass
class LinearRow:
    name: str
    coeffs: dict[int, float]  # variable index -> coefficient
    sense: str  # "<=", ">=", "=="
    rhs: float


@dataclass
class MilpModel:
    instance: Instance
    robust: bool
    var_names: list[str]
    objective: np.ndarray
    rows: list[LinearRow]
    lower: np.ndarray
    upper: np.ndarray
    is_binary: np.ndarray
    big_m: float
    num_x: int
    x_index: np.ndarray  # (m, N, N) -> variable index, -1 on the diagonal
    l_index: np.ndarray  # (N,) -> variable index

    @property
    def num_vars(self) -> int:
        return len(self.var_names)

    def row_census(self) -> dict[str, int]:
        census: dict[str, int] = {}
        for row in self.rows:
            kind = row.name.split("[", 1)[0]
            census[kind] = census.get(kind, 0) + 1
        return census


def effective_durations(instance: Instance, robust: bool) -> np.ndarray:
    """Arc durations as seen by precedence rows: nominal (plus epsilon when
    robust) plus the tail node's service time; terminal arcs stay at zero."""
    d = instance.worst_case_durations() if robust else instance.durations.copy()
    svc = instance.service_times()
    d[1 : instance.n + 1, :] += svc[1:, None]
    d[:, instance.terminal] = 0.0
    np.fill_diagonal(d, 0.0)
    return d


def expected_row_census(n: int, m: int) -> dict[str, int]:
    """Row counts implied by (n, m); tests compare against built models."""
    return {
        "assign": n,
        "flow": n * m,
        "depot_out": m,
        "terminal_in": m,
        "no_terminal_out": 1,
        "no_depot_in": 1,
        "capacity": m,
        "prec": m * n * (n - 1),
        "prec_depot": m * n,
        "prec_terminal": m * n,
    }


def build_model(instance: Instance, robust: bool = False) -> MilpModel:
    n = instance.n
    m = instance.num_vehicles
    N = n + 2
    depot, term = 0, n + 1
    e = effective_durations(instance, robust)

    x_index = -np.ones((m, N, N), dtype=int)
    var_names: list[str] = []
    idx = 0
    for k in range(m):
        for i in range(N):
            for j in range(N):
                if i == j:
                    continue
                x_index[k, i, j] = idx
                var_names.append(f"x_{k}_{i}_{j}")
                idx += 1
    num_x = idx
    l_index = np.arange(N) + num_x
    var_names.extend(f"l_{i}" for i in range(N))
    num_vars = num_x + N

    lower = np.zeros(num_vars)
    upper = np.ones(num_vars)
    is_binary = np.zeros(num_vars, dtype=bool)
    is_binary[:num_x] = True
    # Latency bounds: depot fixed at zero, customers inside their windows,
    # terminal free above zero.
    upper[l_index[depot]] = 0.0
    for i in range(1, n + 1):
        lower[l_index[i]] = instance.windows[i, 0]
        upper[l_index[i]] = instance.windows[i, 1]
    upper[l_index[term]] = np.inf

    objective = np.zeros(num_vars)
    for i in range(1, n + 1):
        objective[l_index[i]] = 1.0

    rows: list[LinearRow] = []
    customers = range(1, n + 1)

    for i in customers:
        coeffs = {int(x_index[k, i, j]): 1.0 for k in range(m) for j in range(N) if j != i}
        rows.append(LinearRow(f"assign[{i}]", coeffs, "==", 1.0))

    for k in range(m):
        for i in customers:
            coeffs: dict[int, float] = {}
            for j in range(N):
                if j == i:
                    continue
                coeffs[int(x_index[k, j, i])] = coeffs.get(int(x_index[k, j, i]), 0.0) + 1.0
                coeffs[int(x_index[k, i, j])] = coeffs.get(int(x_index[k, i, j]), 0.0) - 1.0
            rows.append(LinearRow(f"flow[{k},{i}]", coeffs, "==", 0.0))

    for k in range(m):
        coeffs = {int(x_index[k, depot, j]): 1.0 for j in customers}
        rows.append(LinearRow(f"depot_out[{k}]", coeffs, "<=", 1.0))
    for k in range(m):
        coeffs = {int(x_index[k, i, term]): 1.0 for i in customers}
        rows.append(LinearRow(f"terminal_in[{k}]", coeffs, "<=", 1.0))

    coeffs = {int(x_index[k, term, j]): 1.0 for k in range(m) for j in range(N) if j != term}
    rows.append(LinearRow("no_terminal_out", coeffs, "==", 0.0))
    coeffs = {int(x_index[k, i, depot]): 1.0 for k in range(m) for i in range(N) if i != depot}
    rows.append(LinearRow("no_depot_in", coeffs, "==", 0.0))

    # Capacity counts packages, i.e. arcs whose head is a customer.
    for k in range(m):
        coeffs = {
            int(x_index[k, i, j]): 1.0 for j in customers for i in range(N) if i != j
        }
        rows.append(LinearRow(f"capacity[{k}]", coeffs, "<=", float(instance.fleet[k])))

    # Precedence: l_i - l_j + M x <= M - e_ij, with M tightened per row.
    big_m = 0.0

    def prec_row(name: str, k: int, i: int, j: int, M: float):
        nonlocal big_m
        big_m = max(big_m, M)
        coeffs = {int(x_index[k, i, j]): M}
        li, lj = int(l_index[i]), int(l_index[j])
        coeffs[li] = coeffs.get(li, 0.0) + 1.0
        coeffs[lj] = coeffs.get(lj, 0.0) - 1.0
        rows.append(LinearRow(name, coeffs, "<=", M - e[i, j]))

    for k in range(m):
        for i in customers:
            for j in customers:
                if i == j:
                    continue
                prec_row(f"prec[{k},{i},{j}]", k, i, j, instance.windows[i, 1] + e[i, j])
    for k in range(m):
        for j in customers:
            prec_row(f"prec_depot[{k},{j}]", k, depot, j, e[depot, j])
    for k in range(m):
        for i in customers:
            prec_row(f"prec_terminal[{k},{i}]", k, i, term, instance.windows[i, 1])

    return MilpModel(
        instance=instance,
        robust=robust,
        var_names=var_names,
        objective=objective,
        rows=rows,
        lower=lower,
        upper=upper,
        is_binary=is_binary,
        big_m=big_m,
        num_x=num_x,
        x_index=x_index,
        l_index=l_index,
    )


def to_lp_text(model: MilpModel) -> str:
    """Render the model in the standard LP text format for cross-checking
    with any external MILP solver."""

    def term(coef: float, name: str) -> str:
        sign = "-" if coef < 0 else "+"
        return f"{sign} {abs(coef):.17g} {name}"

    lines = ["Minimize", " obj: " + " ".join(
        term(c, model.var_names[i]) for i, c in enumerate(model.objective) if c
    ).lstrip("+ ")]
    lines.append("Subject To")
    sense_map = {"<=": "<=", ">=": ">=", "==": "="}
    for row in model.rows:
        body = " ".join(term(c, model.var_names[i]) for i, c in sorted(row.coeffs.items()) if c)
        body = body.lstrip("+ ") or "0 " + model.var_names[0]
        lines.append(f" {row.name.replace('[', '_').replace(']', '').replace(',', '_')}: "
                     f"{body} {sense_map[row.sense]} {row.rhs:.17g}")
    lines.append("Bounds")
    for i, name in enumerate(model.var_names):
        if model.is_binary[i]:
            continue
        lo, hi = model.lower[i], model.upper[i]
        hi_txt = "+inf" if np.isinf(hi) else f"{hi:.17g}"
        lines.append(f" {lo:.17g} <= {name} <= {hi_txt}")
    lines.append("Binaries")
    binaries = [model.var_names[i] for i in range(model.num_vars) if model.is_binary[i]]
    for start in range(0, len(binaries), 8):
        lines.append(" " + " ".join(binaries[start : start + 8]))
    lines.append("End")
    return "\n".join(lines) + "\n"
