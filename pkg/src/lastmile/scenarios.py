"""Scripted pedestrian interaction scenarios.

Five short interactions against a vehicle driving straight at 1 m/s, each
evaluated at three phases (after initial detection, halfway through, just
before the pedestrian leaves).  They cover the qualitative cases the
classifier must handle: walking away, stopping on the path and being
approached, standing groups off-path, a close encounter that resolves, and
an aborted crossing.  Observations are sampled every 0.5 s.
"""

from __future__ import annotations

import numpy as np

from .pedestrians import Scenario, VehiclePath

__all__ = ["interaction_suite"]

DT = 0.5


def _path(duration: float = 30.0) -> VehiclePath:
    return VehiclePath(np.array([0.0, duration]), np.array([[0.0, 0.0], [duration, 0.0]]))


def _times(t0: float, t1: float) -> list[float]:
    steps = int(round((t1 - t0) / DT))
    return [t0 + k * DT for k in range(steps + 1)]


def walking_away() -> tuple[Scenario, tuple[float, float, float]]:
    """Pedestrian 15 m out, walking further away: green throughout."""
    obs = [(t, 8.0, 15.0 + 0.8 * t) for t in _times(0.0, 6.0)]
    return Scenario(_path(), {1: obs}), (1.0, 3.5, 6.0)


def stops_on_path() -> tuple[Scenario, tuple[float, float, float]]:
    """Pedestrian walks in from the side, stops on the vehicle's path and
    is approached: green, then blue (standing on the path), then red."""
    obs = [(t, 14.0, max(0.2, 6.0 - t)) for t in _times(0.0, 14.0)]
    return Scenario(_path(), {1: obs}), (1.0, 9.5, 14.0)


def standing_group() -> tuple[Scenario, tuple[float, float, float]]:
    """Two detected pedestrians standing well off the path: green."""
    obs_a = [(t, 5.0, 12.0) for t in _times(0.0, 10.0)]
    obs_b = [(t, 6.0, 13.0) for t in _times(0.0, 10.0)]
    return Scenario(_path(), {1: obs_a, 2: obs_b}), (0.5, 5.0, 10.0)


def _close_encounter_pos(t: float) -> tuple[float, float]:
    if t <= 1.0:
        return 0.9, 0.15
    if t <= 4.0:
        return 0.9 + 1.4 * (t - 1.0), 0.15 + 0.05 * (t - 1.0)
    return 5.1 + 0.3 * (t - 4.0), 0.3 + 1.5 * (t - 4.0)


def close_encounter() -> tuple[Scenario, tuple[float, float, float]]:
    """Pedestrian appears right next to the vehicle (red), walks ahead
    along the path (blue: the planned path still catches up), then veers
    off sideways (green)."""
    obs = [(t, *_close_encounter_pos(t)) for t in _times(0.5, 7.0)]
    return Scenario(_path(), {1: obs}), (0.5, 3.0, 7.0)


def aborted_crossing() -> tuple[Scenario, tuple[float, float, float]]:
    """Two pedestrians head for the path timed to meet the vehicle, then
    stop short of it: green, blue, green."""

    def pos(t: float, x: float, y0: float) -> tuple[float, float]:
        return x, min(y0 + 0.6 * t, y0 + 0.6 * 6.5)

    obs_a = [(t, *pos(t, 10.0, -6.0)) for t in _times(0.0, 11.0)]
    obs_b = [(t, *pos(t, 11.0, -6.2)) for t in _times(0.0, 11.0)]
    return Scenario(_path(), {1: obs_a, 2: obs_b}), (1.0, 5.0, 11.0)


def interaction_suite() -> list[tuple[str, Scenario, tuple[float, float, float]]]:
    """All five scripted interactions with their phase evaluation times."""
    return [
        ("walking_away", *walking_away()),
        ("stops_on_path", *stops_on_path()),
        ("standing_group", *standing_group()),
        ("close_encounter", *close_encounter()),
        ("aborted_crossing", *aborted_crossing()),
    ]
