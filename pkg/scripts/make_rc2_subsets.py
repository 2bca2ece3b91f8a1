#!/usr/bin/env python3
"""Regenerate the bundled RC2-derived benchmark subsets (data/rc2/).

The five files mirror the Potvin-Bengio subsets of the Solomon RC2 set in
name, customer count and layout (Solomon text format, wide RC2-style
windows, mixed clustered/random geometry around the classic (40, 50)
depot).  They are seeded reconstructions, not copies of the published
files: this repo is built offline and never fetches benchmarks.  Every
instance is checked to admit a window- and capacity-feasible plan for a
fleet of 6 vehicles with 10 packages each before it is written.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from lastmile.heuristic import solve_heuristic
from lastmile.instances import parse_solomon

SUBSETS = {
    # name -> (customer count, seed)
    "rc_202.1": (33, 2021),
    "rc_203.1": (19, 2031),
    "rc_204.3": (24, 2043),
    "rc_205.1": (14, 2051),
    "rc_207.4": (6, 2074),
}

HORIZON = 960.0
DEPOT = (40.0, 50.0)
CLUSTERS = [(25.0, 85.0), (85.0, 75.0), (65.0, 20.0), (15.0, 30.0)]


def make_rows(n: int, seed: int) -> list[tuple]:
    rng = np.random.default_rng(seed)
    rows = [(0, DEPOT[0], DEPOT[1], 0, 0, int(HORIZON), 0)]
    for i in range(1, n + 1):
        if rng.random() < 0.5:  # RC geometry: half clustered, half random
            cx, cy = CLUSTERS[rng.integers(len(CLUSTERS))]
            x = float(np.clip(rng.normal(cx, 6.0), 0, 100))
            y = float(np.clip(rng.normal(cy, 6.0), 0, 100))
        else:
            x = float(rng.uniform(0, 100))
            y = float(rng.uniform(0, 100))
        demand = int(rng.integers(1, 5)) * 10
        service = 10
        d0 = float(np.hypot(x - DEPOT[0], y - DEPOT[1]))
        if rng.random() < 0.25:
            ready, due = 0, int(HORIZON)
        else:
            width = float(rng.uniform(120, 300))
            lo = d0
            hi = HORIZON - width - service
            center = float(rng.uniform(lo + width / 2, max(lo + width / 2 + 1, hi)))
            ready = int(round(center - width / 2))
            due = int(round(center + width / 2))
        rows.append((i, round(x, 1), round(y, 1), demand, ready, due, service))
    return rows


def render(name: str, rows) -> str:
    out = [name.upper(), "", "VEHICLE", "NUMBER     CAPACITY", "  25         1000", "", "CUSTOMER"]
    out.append("CUST NO.  XCOORD.   YCOORD.    DEMAND   READY TIME   DUE DATE   SERVICE TIME")
    out.append("")
    for r in rows:
        out.append("  {:>4}  {:>9} {:>9} {:>9} {:>11} {:>10} {:>13}".format(*r))
    return "\n".join(out) + "\n"


def main() -> int:
    out_dir = Path(__file__).resolve().parents[1] / "data" / "rc2"
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, (n, seed) in sorted(SUBSETS.items()):
        for attempt in range(50):
            rows = make_rows(n, seed + attempt * 100000)
            text = render(name, rows)
            instance = parse_solomon(text, fleet_size=6, capacity=10)
            try:
                sol = solve_heuristic(instance, seed=0, iteration_budget=120)
            except Exception:
                continue
            path = out_dir / f"{name}.txt"
            path.write_text(text)
            print(f"{path}  n={n}  objective={sol.objective:.1f}  (attempt {attempt})")
            break
        else:
            print(f"FAILED to build a feasible {name}", file=sys.stderr)
            return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
