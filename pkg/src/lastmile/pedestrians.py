"""Pedestrian intent classification and vocalizer events.

Tracks accumulate timestamped positions in the vehicle-local frame; the
last 8 observations feed a pluggable trajectory predictor that emits 12
future positions at the observation period (the default predictor is a
constant-velocity extrapolation).  Labels:

* red   -- current distance to the vehicle below the proximity threshold,
* blue  -- some predicted pedestrian position comes within the collision
           radius of the vehicle's planned position at the matching time,
* green -- otherwise.

Precedence is red > blue > green.  Standing pedestrians (near-zero speed)
get a widened blue radius: a still observation history carries little
intent information, so the test cone is broadened.  The vocalizer reacts
to transitions into blue or red only; nothing repeats while a class
persists and green transitions stay silent.

An interaction ends once the pedestrian is more than 20 m from the vehicle;
the scenario runner stops classifying such tracks.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import InputError

__all__ = [
    "OBS_WINDOW",
    "PRED_STEPS",
    "INTERACTION_RADIUS",
    "PedestrianTrack",
    "VehiclePath",
    "Prediction",
    "ConstantVelocityPredictor",
    "predict",
    "classify",
    "vocalizer_events",
    "Scenario",
    "parse_scenario",
    "load_scenario",
    "dumps_scenario",
    "run_scenario",
    "write_events_csv",
]

OBS_WINDOW = 8
PRED_STEPS = 12
INTERACTION_RADIUS = 20.0  # meters

DEFAULT_PROXIMITY = 0.5  # meters; red threshold
DEFAULT_COLLISION_RADIUS = 1.0  # meters around the planned path point
STANDING_SPEED = 0.1  # m/s below which a pedestrian counts as standing
STANDING_SCALE = 2.0  # blue-radius widening for standing pedestrians


@dataclass
class PedestrianTrack:
    """Observed positions of one pedestrian plus label history."""

    track_id: int
    observations: list[tuple[float, float, float]] = field(default_factory=list)  # (t, x, y)
    label_history: list[tuple[float, str]] = field(default_factory=list)

    def add_observation(self, t: float, x: float, y: float) -> None:
        if self.observations and t <= self.observations[-1][0]:
            raise InputError(f"track {self.track_id}: observation times must increase")
        self.observations.append((t, x, y))

    def window(self) -> tuple[np.ndarray, float, bool]:
        """Last OBS_WINDOW positions (padded by repeating the oldest when
        shorter), the sampling period, and a low-confidence flag."""
        obs = self.observations[-OBS_WINDOW:]
        low_confidence = len(obs) < OBS_WINDOW
        times = [o[0] for o in obs]
        if len(obs) >= 2:
            period = (times[-1] - times[0]) / (len(obs) - 1)
        else:
            period = 0.0
        pts = [(o[1], o[2]) for o in obs]
        while len(pts) < OBS_WINDOW:
            pts.insert(0, pts[0])
        return np.array(pts), period, low_confidence


@dataclass
class VehiclePath:
    """Planned vehicle trajectory as a timestamped polyline."""

    times: np.ndarray
    points: np.ndarray  # (T, 2)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        p = np.asarray(self.points, dtype=float)
        if t.ndim != 1 or p.shape != (len(t), 2):
            raise InputError("path needs matching times and (T,2) points")
        if len(t) == 0 or np.any(np.diff(t) <= 0):
            raise InputError("path timestamps must be strictly increasing")
        self.times = t
        self.points = p

    def position_at(self, t: float) -> np.ndarray:
        x = np.interp(t, self.times, self.points[:, 0])
        y = np.interp(t, self.times, self.points[:, 1])
        return np.array([x, y])


@dataclass
class Prediction:
    points: np.ndarray  # (PRED_STEPS, 2)
    times: np.ndarray  # (PRED_STEPS,)
    speed: float  # mean recent speed, m/s
    low_confidence: bool


class ConstantVelocityPredictor:
    """Straight-line extrapolation of the mean recent velocity.  Any model
    with this 8-in/12-out signature can stand in."""

    def predict(self, window: np.ndarray, period: float) -> np.ndarray:
        if period <= 0:
            return np.repeat(window[-1:], PRED_STEPS, axis=0)
        velocity = (window[-1] - window[0]) / ((len(window) - 1) * period)
        steps = np.arange(1, PRED_STEPS + 1)[:, None]
        return window[-1] + steps * velocity * period


def predict(track: PedestrianTrack, predictor=None) -> Prediction | None:
    """12 future positions at the observation period, or None when fewer
    than 2 observations exist (classification then falls back to the
    distance-only rule)."""
    if len(track.observations) < 2:
        return None
    predictor = predictor or ConstantVelocityPredictor()
    window, period, low_confidence = track.window()
    points = np.asarray(predictor.predict(window, period), dtype=float)
    if points.shape != (PRED_STEPS, 2):
        raise InputError(f"predictor must return ({PRED_STEPS}, 2) positions")
    t_now = track.observations[-1][0]
    times = t_now + np.arange(1, PRED_STEPS + 1) * period
    speed = float(np.linalg.norm(window[-1] - window[0]) / ((len(window) - 1) * period)) if period > 0 else 0.0
    return Prediction(points, times, speed, low_confidence)


def classify(
    track: PedestrianTrack,
    path: VehiclePath,
    proximity_threshold: float = DEFAULT_PROXIMITY,
    horizon: float | None = None,
    collision_radius: float = DEFAULT_COLLISION_RADIUS,
    predictor=None,
    standing_speed: float = STANDING_SPEED,
    standing_scale: float = STANDING_SCALE,
) -> str:
    """Label the track given the vehicle's planned path.  Assumes the
    caller only asks about pedestrians inside the interaction radius."""
    if not track.observations:
        raise InputError("cannot classify a track with no observations")
    t_now, px, py = track.observations[-1]
    ped = np.array([px, py])
    vehicle = path.position_at(t_now)
    if float(np.linalg.norm(ped - vehicle)) < proximity_threshold:
        return "red"
    pred = predict(track, predictor)
    if pred is None:
        return "green"
    radius = collision_radius * (standing_scale if pred.speed < standing_speed else 1.0)
    for point, t in zip(pred.points, pred.times):
        if horizon is not None and t - t_now > horizon + 1e-9:
            break
        if float(np.linalg.norm(point - path.position_at(t))) < radius:
            return "blue"
    return "green"


def vocalizer_events(labels) -> list[tuple[float, int, str]]:
    """Audio events from a label stream of (time, track_id, label) rows:
    one event per transition into blue or red, none while a class persists,
    none for green."""
    prev: dict[int, str] = {}
    events: list[tuple[float, int, str]] = []
    for t, track_id, label in labels:
        if label in ("blue", "red") and prev.get(track_id) != label:
            events.append((t, track_id, label))
        prev[track_id] = label
    return events


# ---------------------------------------------------------------------------
# scenario files
# ---------------------------------------------------------------------------


@dataclass
class Scenario:
    """Scripted vehicle path plus per-timestep pedestrian positions."""

    path: VehiclePath
    tracks: dict[int, list[tuple[float, float, float]]]


def parse_scenario(text: str) -> Scenario:
    """Whitespace-separated scenario text: a ``vehicle`` section with
    ``t x y`` waypoint rows, then one ``ped <id>`` section per pedestrian
    with ``t x y`` observation rows."""
    path_rows: list[tuple[float, float, float]] = []
    tracks: dict[int, list[tuple[float, float, float]]] = {}
    current: list | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "vehicle":
            current = path_rows
            continue
        if parts[0] == "ped":
            try:
                tid = int(parts[1])
            except (IndexError, ValueError):
                raise InputError(f"line {lineno}: expected 'ped <id>'") from None
            current = tracks.setdefault(tid, [])
            continue
        if current is None:
            raise InputError(f"line {lineno}: data before any section header")
        try:
            t, x, y = (float(v) for v in parts)
        except ValueError:
            raise InputError(f"line {lineno}: expected 't x y'") from None
        current.append((t, x, y))
    if not path_rows:
        raise InputError("scenario has no vehicle path")
    times = np.array([r[0] for r in path_rows])
    points = np.array([[r[1], r[2]] for r in path_rows])
    return Scenario(VehiclePath(times, points), tracks)


def load_scenario(path) -> Scenario:
    return parse_scenario(Path(path).read_text())


def dumps_scenario(scenario: Scenario) -> str:
    out = ["vehicle"]
    for t, (x, y) in zip(scenario.path.times, scenario.path.points):
        out.append(f"{t!r} {x!r} {y!r}")
    for tid in sorted(scenario.tracks):
        out.append(f"ped {tid}")
        for t, x, y in scenario.tracks[tid]:
            out.append(f"{t!r} {x!r} {y!r}")
    return "\n".join(out) + "\n"


def run_scenario(
    scenario: Scenario,
    proximity_threshold: float = DEFAULT_PROXIMITY,
    collision_radius: float = DEFAULT_COLLISION_RADIUS,
    predictor=None,
) -> tuple[list[tuple[float, int, str]], list[tuple[float, int, str]]]:
    """Replay a scenario: feed observations in time order, classify each
    track at each of its observation times while it stays inside the
    interaction radius, and derive vocalizer events.  Returns (labels,
    events) as (time, track_id, label) rows sorted by time."""
    tracks = {tid: PedestrianTrack(tid) for tid in scenario.tracks}
    stream: list[tuple[float, int, float, float]] = []
    for tid, rows in scenario.tracks.items():
        for t, x, y in rows:
            stream.append((t, tid, x, y))
    stream.sort(key=lambda r: (r[0], r[1]))
    labels: list[tuple[float, int, str]] = []
    for t, tid, x, y in stream:
        track = tracks[tid]
        track.add_observation(t, x, y)
        vehicle = scenario.path.position_at(t)
        if float(np.hypot(x - vehicle[0], y - vehicle[1])) > INTERACTION_RADIUS:
            continue  # interaction over (or not started)
        label = classify(
            track,
            scenario.path,
            proximity_threshold=proximity_threshold,
            collision_radius=collision_radius,
            predictor=predictor,
        )
        track.label_history.append((t, label))
        labels.append((t, tid, label))
    return labels, vocalizer_events(labels)


def write_events_csv(labels, events, path, header_note: str = "") -> None:
    """CSV log with one row per classification; the event column marks the
    rows where the vocalizer fired."""
    fired = {(t, tid) for t, tid, _ in events}
    with open(path, "w", newline="") as fh:
        if header_note:
            fh.write(f"# {header_note}\n")
        writer = csv.writer(fh)
        writer.writerow(["time", "track_id", "class", "event"])
        for t, tid, label in labels:
            writer.writerow([f"{t:.3f}", tid, label, "vocalize" if (t, tid) in fired else ""])
