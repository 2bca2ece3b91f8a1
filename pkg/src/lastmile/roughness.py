"""Driving-surface roughness from synthetic LiDAR clouds: RANSAC ground
plane, a 1m x 1m roughness grid, threshold classes and the speed factor.

Roughness of a cell is the mean absolute perpendicular distance of its
points to the fitted ground plane.  Class thresholds are half-open with the
boundary assigned upward: [0, 0.05) m smooth, [0.05, 0.20) m moderate,
0.20 m and above rough.  The speed factor maps the class of the averaged
score over the sampled look-ahead cells to beta = 1.0 / 0.75 / 0.5.

Coordinates are meters in the vehicle frame, x forward.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import InputError

__all__ = [
    "FitError",
    "Plane",
    "RoughnessGrid",
    "GridCell",
    "SMOOTH_MAX",
    "MODERATE_MAX",
    "BETA_BY_CLASS",
    "classify_score",
    "beta_for_score",
    "fit_plane_ransac",
    "roughness_grid",
    "speed_factor",
    "synth_cloud",
    "load_cloud",
    "save_cloud",
    "write_grid_csv",
]

SMOOTH_MAX = 0.05  # meters
MODERATE_MAX = 0.20  # meters

BETA_BY_CLASS = {"smooth": 1.0, "moderate": 0.75, "rough": 0.5}

DEFAULT_ITERATIONS = 200
DEFAULT_INLIER_THRESHOLD = 0.03  # meters


class FitError(RuntimeError):
    """Plane fitting failed (fewer than 3 points or a degenerate cloud)."""


def classify_score(mean_distance: float) -> str:
    if mean_distance < SMOOTH_MAX:
        return "smooth"
    if mean_distance < MODERATE_MAX:
        return "moderate"
    return "rough"


def beta_for_score(mean_distance: float) -> float:
    return BETA_BY_CLASS[classify_score(mean_distance)]


@dataclass(frozen=True)
class Plane:
    """Plane {p : normal . p = offset} with a unit normal, oriented so the
    z component is positive."""

    normal: tuple[float, float, float]
    offset: float

    def distances(self, points: np.ndarray) -> np.ndarray:
        return points @ np.asarray(self.normal) - self.offset

    def angle_to(self, direction) -> float:
        """Angle in degrees between the plane normal and a direction."""
        d = np.asarray(direction, dtype=float)
        d = d / np.linalg.norm(d)
        c = float(np.clip(np.dot(self.normal, d), -1.0, 1.0))
        return math.degrees(math.acos(c))


@dataclass
class GridCell:
    mean_distance: float
    sample_count: int
    label: str  # smooth | moderate | rough | unknown


@dataclass
class RoughnessGrid:
    """Cells keyed by (row, col) = (floor(x / cell), floor(y / cell))."""

    cell_size: float
    cells: dict[tuple[int, int], GridCell]

    def cell_at(self, x: float, y: float) -> GridCell | None:
        key = (math.floor(x / self.cell_size), math.floor(y / self.cell_size))
        return self.cells.get(key)


def _plane_from_points(p0, p1, p2) -> Plane | None:
    normal = np.cross(p1 - p0, p2 - p0)
    norm = np.linalg.norm(normal)
    if norm < 1e-12:
        return None
    normal = normal / norm
    if normal[2] < 0:
        normal = -normal
    if abs(normal[2]) < 1e-12:
        return None  # vertical plane cannot be the ground
    return Plane(tuple(normal), float(normal @ p0))


def _least_squares_plane(points: np.ndarray) -> Plane | None:
    centroid = points.mean(axis=0)
    _, s, vt = np.linalg.svd(points - centroid, full_matrices=False)
    if len(s) < 3 or s[1] < 1e-12:
        return None  # collinear: plane direction is ambiguous
    normal = vt[-1]
    if normal[2] < 0:
        normal = -normal
    if abs(normal[2]) < 1e-12:
        return None
    return Plane(tuple(normal), float(normal @ centroid))


def fit_plane_ransac(
    points: np.ndarray,
    iterations: int = DEFAULT_ITERATIONS,
    inlier_threshold: float = DEFAULT_INLIER_THRESHOLD,
    seed: int = 0,
) -> tuple[Plane, np.ndarray]:
    """RANSAC ground-plane fit: sample 3-point hypotheses, keep the one with
    the most inliers, then refine it by least squares on its inliers (kept
    only if the refinement does not lose inliers).  Deterministic for a
    fixed seed.  Returns the plane and the inlier index array."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise InputError("point cloud must be (N, 3)")
    if not np.all(np.isfinite(pts)):
        raise InputError("point cloud must be finite")
    if len(pts) < 3:
        raise FitError("need at least 3 points to fit a plane")

    rng = np.random.default_rng(seed)
    best_plane: Plane | None = None
    best_count = -1
    best_mask: np.ndarray | None = None
    for _ in range(iterations):
        i0, i1, i2 = rng.choice(len(pts), size=3, replace=False)
        plane = _plane_from_points(pts[i0], pts[i1], pts[i2])
        if plane is None:
            continue
        mask = np.abs(plane.distances(pts)) <= inlier_threshold
        count = int(mask.sum())
        if count > best_count:
            best_plane, best_count, best_mask = plane, count, mask
    if best_plane is None:
        raise FitError("degenerate cloud: no valid plane hypothesis found")

    refined = _least_squares_plane(pts[best_mask])
    if refined is not None:
        mask = np.abs(refined.distances(pts)) <= inlier_threshold
        if int(mask.sum()) >= best_count:
            return refined, np.nonzero(mask)[0]
    return best_plane, np.nonzero(best_mask)[0]


def roughness_grid(points: np.ndarray, plane: Plane, cell_size: float = 1.0) -> RoughnessGrid:
    """Mean absolute point-to-plane distance per cell over the cloud's XY
    bounding box; cells inside the box without samples are explicit
    ``unknown`` entries."""
    pts = np.asarray(points, dtype=float)
    cells: dict[tuple[int, int], GridCell] = {}
    if len(pts) == 0:
        return RoughnessGrid(cell_size, cells)
    dist = np.abs(plane.distances(pts))
    rows = np.floor(pts[:, 0] / cell_size).astype(int)
    cols = np.floor(pts[:, 1] / cell_size).astype(int)
    sums: dict[tuple[int, int], float] = {}
    counts: dict[tuple[int, int], int] = {}
    for r, c, v in zip(rows, cols, dist):
        key = (int(r), int(c))
        sums[key] = sums.get(key, 0.0) + float(v)
        counts[key] = counts.get(key, 0) + 1
    for r in range(rows.min(), rows.max() + 1):
        for c in range(cols.min(), cols.max() + 1):
            key = (r, c)
            if key in counts:
                mean = sums[key] / counts[key]
                cells[key] = GridCell(mean, counts[key], classify_score(mean))
            else:
                cells[key] = GridCell(0.0, 0, "unknown")
    return RoughnessGrid(cell_size, cells)


def speed_factor(
    grid: RoughnessGrid,
    lookahead: float = 2.0,
    depth: float = 1.0,
    track_halfwidth: float = 1.0,
) -> tuple[float, float | None, bool]:
    """Speed multiplier from the cells `lookahead` meters directly ahead in
    the wheel direction.  Returns (beta, averaged score, unknown_terrain):
    with no sampled cell in the region, beta is 1.0 and the flag is set."""
    lo_row = math.floor(lookahead / grid.cell_size)
    hi_row = math.ceil((lookahead + depth) / grid.cell_size)
    lo_col = math.floor(-track_halfwidth / grid.cell_size)
    hi_col = math.ceil(track_halfwidth / grid.cell_size)
    scores = []
    for (r, c), cell in grid.cells.items():
        if lo_row <= r < hi_row and lo_col <= c < hi_col and cell.sample_count > 0:
            scores.append(cell.mean_distance)
    if not scores:
        return 1.0, None, True
    avg = float(sum(scores) / len(scores))
    return beta_for_score(avg), avg, False


def synth_cloud(
    profile,
    density: float = 200.0,
    seed: int = 0,
    width: float = 1.0,
    start_x: float = 0.0,
) -> np.ndarray:
    """Synthetic ground-return cloud along the x axis.

    `profile` is a list of (length_m, target_mean_distance) segments; each
    segment emits `density` points per square meter with y in [0, width)
    and z uniform on [-2t, 2t] so the expected absolute plane distance (to
    z = 0) equals the target t.  A zero-density profile region produces no
    points, which shows up as unknown grid cells.
    """
    if density < 0:
        raise InputError("density must be nonnegative")
    rng = np.random.default_rng(seed)
    chunks = []
    x0 = start_x
    for length, target in profile:
        if length < 0 or target < 0:
            raise InputError("profile segments need nonnegative length and score")
        count = int(round(density * length * width))
        if count > 0:
            xs = rng.uniform(x0, x0 + length, size=count)
            ys = rng.uniform(0.0, width, size=count)
            if target > 0:
                zs = rng.uniform(-2.0 * target, 2.0 * target, size=count)
            else:
                zs = np.zeros(count)
            chunks.append(np.column_stack([xs, ys, zs]))
        x0 += length
    if not chunks:
        return np.empty((0, 3))
    return np.vstack(chunks)


def load_cloud(path) -> np.ndarray:
    """Whitespace-separated ``x y z`` rows; '#' comments allowed."""
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise InputError(f"{path}: line {lineno}: expected 'x y z'")
        try:
            rows.append([float(v) for v in parts])
        except ValueError:
            raise InputError(f"{path}: line {lineno}: non-numeric coordinate") from None
    return np.array(rows) if rows else np.empty((0, 3))


def save_cloud(points: np.ndarray, path) -> None:
    with open(path, "w") as fh:
        for x, y, z in np.asarray(points, dtype=float):
            fh.write(f"{x!r} {y!r} {z!r}\n")


def write_grid_csv(grid: RoughnessGrid, path, header_note: str = "") -> None:
    with open(path, "w", newline="") as fh:
        if header_note:
            fh.write(f"# {header_note}\n")
        writer = csv.writer(fh)
        writer.writerow(["row", "col", "mean_distance", "class"])
        for (r, c) in sorted(grid.cells):
            cell = grid.cells[(r, c)]
            writer.writerow([r, c, f"{cell.mean_distance:.6f}", cell.label])
