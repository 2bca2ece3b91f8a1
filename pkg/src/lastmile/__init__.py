"""Robust cumulative capacitated VRPTW toolkit: exact and heuristic
solvers, uncertainty analysis, surface-roughness speed modulation,
pedestrian intent classification, and a disturbance-aware fleet replay."""

from .exact import BruteForceResult, ExactResult, solve_bruteforce, solve_exact
from .heuristic import InsertionError, solve_heuristic
from .instances import (
    FormatError,
    generate_random,
    load_instance,
    load_solution,
    parse_solomon,
    parse_solomon_file,
    pentagon_field_instance,
    save_instance,
    save_solution,
)
from .milp import MilpModel, build_model, to_lp_text
from .model import (
    DurationRealization,
    InputError,
    Instance,
    Route,
    Solution,
    assemble_solution,
    evaluate_route,
    evaluate_solution,
)
from .robust import UncertaintySampler, monte_carlo_report, worst_case_check

__version__ = "0.1.0"
