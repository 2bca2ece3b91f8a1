"""Command-line entry point.

Subcommands: solve, oracle, simulate, gen-instance, parse, roughness,
classify, bench.  Every command is reproducible from its flags and seed
alone; the flags are echoed as a header comment into whatever files the
command writes.  Exit codes: 0 success, 2 infeasible, 3 time limit hit
with an incumbent, 4 input error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import bench as bench_mod
from . import instances as inst_mod
from .exact import solve_bruteforce, solve_exact
from .heuristic import InsertionError, solve_heuristic
from .milp import build_model, to_lp_text
from .model import InputError
from .robust import monte_carlo_report, worst_case_check, write_monte_carlo_csv

EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_TIMEOUT = 3
EXIT_INPUT = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits 2; input errors are 4
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _flags_note(args: argparse.Namespace) -> str:
    skip = {"func", "command"}
    parts = [f"{k}={v}" for k, v in sorted(vars(args).items()) if k not in skip and v is not None]
    return f"lastmile {args.command} " + " ".join(parts)


def _print_solution(sol, status: str, note: str) -> None:
    print(f"# {note}")
    print(f"status {status}")
    if sol is not None:
        print(f"objective {sol.objective:.6f}")
        for r in sol.routes:
            print(f"route {r.vehicle}: " + " ".join(str(s) for s in r.stops))


def cmd_solve(args) -> int:
    instance = inst_mod.load_instance(args.instance)
    note = _flags_note(args)
    if args.solver == "heuristic":
        try:
            sol = solve_heuristic(instance, robust=args.robust, seed=args.seed, iteration_budget=args.budget)
        except InsertionError as e:
            print(f"infeasible: {e}", file=sys.stderr)
            return EXIT_INFEASIBLE
        status = "feasible"
    else:
        model = build_model(instance, robust=args.robust)
        if args.export_lp:
            Path(args.export_lp).write_text(to_lp_text(model))
        result = solve_exact(model, time_limit=args.time_limit)
        if result.status == "infeasible":
            print("infeasible", file=sys.stderr)
            return EXIT_INFEASIBLE
        if result.status == "timeout":
            print(f"time limit hit with no incumbent (bound {result.lower_bound:.6f})", file=sys.stderr)
            return EXIT_TIMEOUT
        sol, status = result.solution, result.status
        print(f"# nodes {result.nodes} bound {result.lower_bound:.6f} runtime {result.runtime:.3f}s")
    _print_solution(sol, status, note)
    if args.output:
        Path(args.output).write_text(f"# {note}\n" + inst_mod.dumps_solution(sol))
    if args.solver == "exact" and status == "feasible":
        return EXIT_TIMEOUT
    return EXIT_OK


def cmd_oracle(args) -> int:
    instance = inst_mod.load_instance(args.instance)
    result = solve_bruteforce(instance, robust=args.robust)
    if result.status == "infeasible":
        print("infeasible", file=sys.stderr)
        return EXIT_INFEASIBLE
    _print_solution(result.solution, "optimal", _flags_note(args))
    if args.output:
        Path(args.output).write_text(f"# {_flags_note(args)}\n" + inst_mod.dumps_solution(result.solution))
    return EXIT_OK


def cmd_gen_instance(args) -> int:
    instance = inst_mod.generate_random(args.n, args.vehicles, seed=args.seed, epsilon=args.epsilon)
    Path(args.output).write_text(f"# {_flags_note(args)}\n" + inst_mod.dumps_instance(instance))
    print(f"wrote {args.output} (n={instance.n}, m={instance.num_vehicles}, c={instance.fleet[0]})")
    return EXIT_OK


def cmd_parse(args) -> int:
    instance = inst_mod.parse_solomon_file(
        args.solomon, fleet_size=args.vehicles, capacity=args.capacity, epsilon=args.epsilon
    )
    inst_mod.save_instance(instance, args.output)
    print(f"# {_flags_note(args)}")
    print(f"parsed n={instance.n} customers; fleet {len(instance.fleet)} x {instance.fleet[0]}")
    print(f"wrote {args.output}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    from . import simulator as sim_mod
    from .pedestrians import load_scenario
    from .plotting import save_latency_plot, save_vibration_plot

    instance = inst_mod.load_instance(args.instance)
    solution = inst_mod.load_solution(args.solution)
    overrides = dict(
        nominal_speed=args.speed,
        epsilon=args.epsilon,
        seed=args.seed,
        kappa=args.kappa,
        vmm_enabled=None if args.no_vmm is None else not args.no_vmm,
        stop_on_red=args.stop_on_red or None,
    )
    config = sim_mod.load_config(args.config, **overrides) if args.config else sim_mod.parse_config("", **overrides)
    if args.profile:
        config.roughness_profiles = sim_mod.load_profiles(args.profile)
    if args.scenario:
        config.scenario = load_scenario(args.scenario)
    report = sim_mod.simulate(instance, solution, config)
    note = _flags_note(args)
    out = Path(args.out_dir)
    sim_mod.write_report_files(report, out, header_note=note)
    save_vibration_plot(report.vibration, report.vibration_total, out / "vibration.png")
    save_latency_plot(report.latency, report.idle, out / "latency.png")
    print(f"# {note}")
    print(f"objective {report.objective:.6f}")
    print(f"window_violations {len(report.window_violations)}")
    print(f"vibration_total {report.vibration_total:.6f}")
    print(f"reports in {out}")
    return EXIT_OK


def cmd_robustness(args) -> int:
    instance = inst_mod.load_instance(args.instance)
    solution = inst_mod.load_solution(args.solution)
    wc = worst_case_check(instance, solution)
    mc = monte_carlo_report(instance, solution, samples=args.samples, seed=args.seed)
    note = _flags_note(args)
    if args.output:
        write_monte_carlo_csv(mc, args.output, header_note=note)
    print(f"# {note}")
    print(f"worst_case_feasible {int(wc.feasible)}")
    print(f"worst_case_objective {wc.objective:.6f}")
    print(f"feasible_fraction {mc.feasible_fraction:.4f}")
    print(f"objective_range {mc.objective_min:.6f} {mc.objective_mean:.6f} {mc.objective_max:.6f}")
    return EXIT_OK if wc.feasible else EXIT_INFEASIBLE


def cmd_roughness(args) -> int:
    from . import roughness as rough_mod
    from .plotting import save_grid_heatmap

    cloud = rough_mod.load_cloud(args.cloud)
    try:
        plane, inliers = rough_mod.fit_plane_ransac(
            cloud, iterations=args.iterations, inlier_threshold=args.inlier_threshold, seed=args.seed
        )
    except rough_mod.FitError as e:
        print(f"fit error: {e}", file=sys.stderr)
        return EXIT_INPUT
    grid = rough_mod.roughness_grid(cloud, plane, cell_size=args.cell_size)
    beta, score, unknown = rough_mod.speed_factor(grid, lookahead=args.lookahead)
    note = _flags_note(args)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rough_mod.write_grid_csv(grid, out / "grid.csv", header_note=note)
    save_grid_heatmap(grid, out / "grid.png")
    print(f"# {note}")
    nx, ny, nz = plane.normal
    print(f"plane_normal {nx:.6f} {ny:.6f} {nz:.6f}")
    print(f"plane_offset {plane.offset:.6f}")
    print(f"inliers {len(inliers)}/{len(cloud)}")
    print(f"beta {beta}")
    print(f"lookahead_score {'unknown' if unknown else f'{score:.4f}'}")
    print(f"reports in {out}")
    return EXIT_OK


def cmd_classify(args) -> int:
    from .pedestrians import load_scenario, run_scenario, write_events_csv

    scenario = load_scenario(args.scenario)
    labels, events = run_scenario(scenario, proximity_threshold=args.proximity)
    note = _flags_note(args)
    if args.output:
        write_events_csv(labels, events, args.output, header_note=note)
    print(f"# {note}")
    for t, tid, label in labels:
        print(f"{t:.3f} ped{tid} {label}")
    print(f"vocalizer_events {len(events)}")
    return EXIT_OK


def cmd_bench(args) -> int:
    fleets = tuple(int(v) for v in args.fleets.split(","))
    records = bench_mod.run_sweep(
        n=args.n,
        fleets=fleets,
        instances_per_point=args.instances_per_point,
        seed=args.seed,
        time_limit=args.time_limit,
        epsilon=args.epsilon,
        robust=args.robust,
        jobs=args.jobs,
        out_dir=args.out_dir,
        header_note=_flags_note(args),
    )
    print(f"# {_flags_note(args)}")
    print(f"records {len(records)} -> {Path(args.out_dir) / 'bench_records.csv'}")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="lastmile", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[], help="solve an instance (exact or heuristic)")
    p.add_argument("instance")
    p.add_argument("--solver", choices=["exact", "heuristic"], default="exact")
    p.add_argument("--robust", action="store_true", help="plan against the top of the uncertainty box")
    p.add_argument("--time-limit", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=200, help="heuristic iteration budget")
    p.add_argument("--export-lp", default=None, help="also write the model in LP text format")
    p.add_argument("-o", "--output", default=None, help="write the solution file here")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="brute-force optimum for small instances (n <= 9)")
    p.add_argument("instance")
    p.add_argument("--robust", action="store_true")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("gen-instance", help="generate a seeded random instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--vehicles", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen_instance)

    p = sub.add_parser("parse", help="convert a Solomon-layout file to the native format")
    p.add_argument("solomon")
    p.add_argument("--vehicles", type=int, default=None)
    p.add_argument("--capacity", type=int, default=None)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("simulate", help="replay a solution under disturbances")
    p.add_argument("instance")
    p.add_argument("solution")
    p.add_argument("--config", default=None, help="key=value config file")
    p.add_argument("--profile", default=None, help="per-arc roughness profile file")
    p.add_argument("--scenario", default=None, help="pedestrian scenario file")
    p.add_argument("--speed", type=float, default=None)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--no-vmm", action="store_const", const=True, default=None)
    p.add_argument("--stop-on-red", action="store_true")
    p.add_argument("--out-dir", default="sim-out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("robustness", help="worst-case check plus Monte-Carlo report")
    p.add_argument("instance")
    p.add_argument("solution")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", default=None, help="CSV of per-sample results")
    p.set_defaults(func=cmd_robustness)

    p = sub.add_parser("roughness", help="cloud -> ground plane, grid and speed factor")
    p.add_argument("cloud")
    p.add_argument("--iterations", type=int, default=200)
    p.add_argument("--inlier-threshold", type=float, default=0.03)
    p.add_argument("--cell-size", type=float, default=1.0)
    p.add_argument("--lookahead", type=float, default=2.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default="roughness-out")
    p.set_defaults(func=cmd_roughness)

    p = sub.add_parser("classify", help="label a pedestrian scenario and log vocalizer events")
    p.add_argument("scenario")
    p.add_argument("--proximity", type=float, default=0.5)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("bench", help="fleet-size scaling sweep (CSV + figures)")
    p.add_argument("--n", type=int, default=11)
    p.add_argument("--fleets", default="2,4,6,8,10")
    p.add_argument("--instances-per-point", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--time-limit", type=float, default=120.0)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--robust", action="store_true")
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--out-dir", default="bench-out")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except FileNotFoundError as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
