"""Discrete-event replay of a solved plan under realistic disturbances.

Vehicles traverse their routes at a configurable cruise speed; every arc
time is perturbed inside the travel-time box, optional per-arc roughness
profiles engage the speed-modulation module (surface class -> beta), and an
optional pedestrian scenario contributes vocalizer events and, when
stop-on-red is enabled, driving pauses while a red label is active.

Arc timing: an arc with nominal time T at cruise speed v spans T*v meters.
A roughness profile lists (length_m, roughness_m) segments along the arc
(the remainder is smooth); each segment is driven at v*beta, so the
realized driving time is ``T + sum(len/(v*beta) - len/v) + draw`` with the
draw uniform on [-epsilon, +epsilon].  With modulation off and a zero draw
this reduces to T exactly, which keeps the replay consistent with the route
evaluator.

The vibration proxy is kappa * (v*beta)^2 * roughness per segment,
aggregated per meter driven.  It is the minimal model in which throttling
(beta < 1) reduces the recorded magnitude; the observed ~40% drop under a
0.75 throttle is a calibration target of that model, not a law.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import Instance, InputError, Solution
from .pedestrians import Scenario, run_scenario
from .roughness import beta_for_score

__all__ = [
    "ConfigError",
    "SimConfig",
    "ArcTraversal",
    "SimReport",
    "simulate",
    "estimate_nominals",
    "parse_profiles",
    "load_profiles",
    "parse_config",
    "load_config",
    "write_report_files",
]


class ConfigError(InputError):
    """Simulation configuration references unknown arcs or bad values."""


@dataclass
class SimConfig:
    nominal_speed: float = 1.2  # m/s cruise speed
    epsilon: float = 0.0  # seconds, per-arc disturbance half-width
    seed: int = 0
    kappa: float = 1.0  # vibration proxy coefficient
    vmm_enabled: bool = True
    stop_on_red: bool = False
    roughness_profiles: dict[tuple[int, int], tuple[tuple[float, float], ...]] = field(
        default_factory=dict
    )
    scenario: Scenario | None = None

    def __post_init__(self):
        if self.nominal_speed <= 0:
            raise ConfigError("nominal_speed must be positive")
        if self.epsilon < 0:
            raise ConfigError("epsilon must be nonnegative")


@dataclass
class ArcTraversal:
    vehicle: int
    tail: int
    head: int
    depart: float
    arrive: float
    nominal: float
    modulated: float  # driving time after speed modulation, before the draw
    perturbation: float
    paused: float  # stop-on-red waiting folded into the traversal


@dataclass
class SimReport:
    latency: dict[int, float]
    idle: dict[int, float]
    objective: float
    window_violations: list[tuple[int, float, float]]
    arcs: list[ArcTraversal]
    vibration: list[tuple[float, float]]  # (time, magnitude)
    vibration_total: float  # magnitude integrated over meters driven
    labels: list[tuple[float, int, str]]
    vocalizer: list[tuple[float, int, str]]


def _red_intervals(labels, horizon: float) -> list[tuple[float, float]]:
    """Merged time intervals during which any track is labeled red.  A red
    label holds until the track's next label, or to the horizon when it is
    the final one."""
    per_track: dict[int, list[tuple[float, str]]] = {}
    for t, tid, label in labels:
        per_track.setdefault(tid, []).append((t, label))
    raw: list[tuple[float, float]] = []
    for rows in per_track.values():
        for i, (t, label) in enumerate(rows):
            if label != "red":
                continue
            end = rows[i + 1][0] if i + 1 < len(rows) else horizon
            if end > t:
                raw.append((t, end))
    raw.sort()
    merged: list[tuple[float, float]] = []
    for a, b in raw:
        if merged and a <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], b))
        else:
            merged.append((a, b))
    return merged


def _advance(start: float, duration: float, reds: list[tuple[float, float]]) -> float:
    """End time of `duration` seconds of driving begun at `start`, pausing
    for every overlapped red interval."""
    t = start
    remaining = duration
    for a, b in reds:
        if b <= t:
            continue
        if a >= t + remaining:
            break
        if a > t:
            remaining -= a - t
            t = a
        t = b
    return t + remaining


def simulate(instance: Instance, solution: Solution, config: SimConfig) -> SimReport:
    """Replay `solution` under `config`.  Window violations are reported,
    not raised: infeasible plans are still simulated."""
    v = config.nominal_speed
    svc = instance.service_times()
    for (i, j) in config.roughness_profiles:
        if not (0 <= i <= instance.n and 1 <= j <= instance.n) or i == j:
            raise ConfigError(f"roughness profile references unknown arc ({i},{j})")

    labels: list[tuple[float, int, str]] = []
    events: list[tuple[float, int, str]] = []
    reds: list[tuple[float, float]] = []
    if config.scenario is not None:
        labels, events = run_scenario(config.scenario)
        if config.stop_on_red:
            horizon = float(config.scenario.path.times[-1])
            reds = _red_intervals(labels, horizon)

    rng = np.random.default_rng(config.seed)
    latency: dict[int, float] = {}
    idle: dict[int, float] = {}
    violations: list[tuple[int, float, float]] = []
    arcs: list[ArcTraversal] = []
    vibration: list[tuple[float, float]] = []
    vibration_total = 0.0

    for route in solution.routes:
        t = 0.0
        prev = 0
        for stop in route.stops:
            if not 1 <= stop <= instance.n:
                raise ConfigError(f"solution visits unknown customer {stop}")
            nominal = float(instance.durations[prev, stop])
            length = nominal * v
            profile = config.roughness_profiles.get((prev, stop), ())
            used = sum(seg[0] for seg in profile)
            if used > length + 1e-6:
                raise ConfigError(
                    f"profile for arc ({prev},{stop}) covers {used:.2f} m "
                    f"of a {length:.2f} m arc"
                )
            modulated = nominal
            clock = t
            for seg_len, rough in profile:
                beta = beta_for_score(rough) if config.vmm_enabled else 1.0
                seg_time = seg_len / (v * beta)
                modulated += seg_time - seg_len / v
                speed = v * beta
                magnitude = config.kappa * speed * speed * rough
                vibration.append((clock, magnitude))
                vibration_total += magnitude * seg_len
                clock = _advance(clock, seg_time, reds)
            draw = float(rng.uniform(-config.epsilon, config.epsilon)) if config.epsilon > 0 else 0.0
            drive = max(0.0, modulated + draw)
            arrive = _advance(t, drive, reds)
            start = max(arrive, float(instance.windows[stop, 0]))
            latency[stop] = start
            idle[stop] = start - arrive
            if start > instance.windows[stop, 1] + 1e-9:
                violations.append((stop, start, float(instance.windows[stop, 1])))
            arcs.append(
                ArcTraversal(
                    vehicle=route.vehicle,
                    tail=prev,
                    head=stop,
                    depart=t,
                    arrive=arrive,
                    nominal=nominal,
                    modulated=modulated,
                    perturbation=draw,
                    paused=arrive - t - drive,
                )
            )
            t = start + svc[stop]
            prev = stop

    return SimReport(
        latency=latency,
        idle=idle,
        objective=float(sum(latency.values())),
        window_violations=violations,
        arcs=arcs,
        vibration=sorted(vibration),
        vibration_total=vibration_total,
        labels=labels,
        vocalizer=events,
    )


def estimate_nominals(instance: Instance, config: SimConfig, repetitions: int = 10) -> np.ndarray:
    """Produce a nominal-duration matrix the way a field calibration would:
    drive every arc `repetitions` times with disturbance noise and average.
    Requires instance coordinates."""
    if instance.coords is None:
        raise ConfigError("estimate_nominals needs instance coordinates")
    if repetitions < 1:
        raise ConfigError("repetitions must be >= 1")
    v = config.nominal_speed
    n = instance.n
    out = np.zeros((n + 2, n + 2))
    for i in range(n + 1):
        for j in range(n + 1):
            if i == j:
                continue
            dist = float(np.hypot(*(instance.coords[i] - instance.coords[j])))
            base = dist / v
            rng = np.random.default_rng([config.seed, repetitions, i, j])
            if config.epsilon > 0:
                samples = np.clip(
                    base + rng.uniform(-config.epsilon, config.epsilon, size=repetitions),
                    0.0,
                    None,
                )
                out[i, j] = float(samples.mean())
            else:
                out[i, j] = base
    return out


# ---------------------------------------------------------------------------
# config and profile files
# ---------------------------------------------------------------------------

_BOOL_KEYS = {"vmm_enabled", "stop_on_red"}
_FLOAT_KEYS = {"nominal_speed", "epsilon", "kappa"}


def parse_config(text: str, **overrides) -> SimConfig:
    """Flat ``key=value`` lines mirroring the CLI flags."""
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key in _FLOAT_KEYS:
            values[key] = float(val)
        elif key == "seed":
            values[key] = int(val)
        elif key in _BOOL_KEYS:
            values[key] = val.lower() in ("1", "true", "yes", "on")
        else:
            raise ConfigError(f"line {lineno}: unknown key '{key}'")
    values.update({k: v for k, v in overrides.items() if v is not None})
    return SimConfig(**values)


def load_config(path, **overrides) -> SimConfig:
    return parse_config(Path(path).read_text(), **overrides)


def parse_profiles(text: str) -> dict[tuple[int, int], tuple[tuple[float, float], ...]]:
    """Per-arc roughness profiles: ``arc <i> <j> len:rough [len:rough ...]``."""
    profiles: dict[tuple[int, int], tuple[tuple[float, float], ...]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] != "arc" or len(parts) < 4:
            raise ConfigError(f"line {lineno}: expected 'arc i j len:rough ...'")
        try:
            i, j = int(parts[1]), int(parts[2])
            segs = []
            for tok in parts[3:]:
                length, _, rough = tok.partition(":")
                segs.append((float(length), float(rough)))
        except ValueError:
            raise ConfigError(f"line {lineno}: bad profile segment") from None
        profiles[(i, j)] = tuple(segs)
    return profiles


def load_profiles(path) -> dict[tuple[int, int], tuple[tuple[float, float], ...]]:
    return parse_profiles(Path(path).read_text())


def write_report_files(report: SimReport, out_dir, header_note: str = "") -> list[Path]:
    """Emit the delimited report set: per-customer schedule, arc traversals,
    vibration trace and vocalizer log, plus a short summary."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    path = out / "report.csv"
    with open(path, "w", newline="") as fh:
        if header_note:
            fh.write(f"# {header_note}\n")
        w = csv.writer(fh)
        w.writerow(["customer", "latency", "idle", "window_violated"])
        violated = {c for c, _, _ in report.window_violations}
        for c in sorted(report.latency):
            w.writerow([c, f"{report.latency[c]:.6f}", f"{report.idle[c]:.6f}", int(c in violated)])
    written.append(path)

    path = out / "arcs.csv"
    with open(path, "w", newline="") as fh:
        if header_note:
            fh.write(f"# {header_note}\n")
        w = csv.writer(fh)
        w.writerow(["vehicle", "tail", "head", "depart", "arrive", "nominal", "modulated", "perturbation", "paused"])
        for a in report.arcs:
            w.writerow(
                [a.vehicle, a.tail, a.head]
                + [f"{v:.6f}" for v in (a.depart, a.arrive, a.nominal, a.modulated, a.perturbation, a.paused)]
            )
    written.append(path)

    path = out / "vibration.csv"
    with open(path, "w", newline="") as fh:
        if header_note:
            fh.write(f"# {header_note}\n")
        w = csv.writer(fh)
        w.writerow(["time", "magnitude"])
        for t, m in report.vibration:
            w.writerow([f"{t:.6f}", f"{m:.9f}"])
    written.append(path)

    path = out / "events.csv"
    with open(path, "w", newline="") as fh:
        if header_note:
            fh.write(f"# {header_note}\n")
        w = csv.writer(fh)
        w.writerow(["time", "track_id", "class", "event"])
        fired = {(t, tid) for t, tid, _ in report.vocalizer}
        for t, tid, label in report.labels:
            w.writerow([f"{t:.3f}", tid, label, "vocalize" if (t, tid) in fired else ""])
    written.append(path)

    path = out / "summary.txt"
    lines = [
        header_note and f"# {header_note}",
        f"objective {report.objective:.6f}",
        f"customers {len(report.latency)}",
        f"total_idle {sum(report.idle.values()):.6f}",
        f"window_violations {len(report.window_violations)}",
        f"vibration_total {report.vibration_total:.6f}",
        f"vocalizer_events {len(report.vocalizer)}",
    ]
    path.write_text("\n".join(l for l in lines if l) + "\n")
    written.append(path)
    return written
