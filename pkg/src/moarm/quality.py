"""Quality indicators: IGD, exact 3-D hypervolume, reference-front handling."""

from __future__ import annotations

import bisect
import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .dataset import TransactionDatabase
from .errors import EmptySolutionSet, InputError, PointBelowReference
from .pareto import as_objectives, nondominated_mask
from .variation import VariationParams

HV_REFERENCE = (-0.01, -0.01, -0.01)
RATIO_MODES = ("ratio-of-means", "mean-of-ratios")


@dataclass(frozen=True)
class FrontApproximation:
    """Reference front (maximization) with per-objective normalization bounds."""

    points: np.ndarray
    provenance: str
    lower: np.ndarray
    upper: np.ndarray

    @classmethod
    def from_points(cls, points, provenance: str = "big-run-approx") -> FrontApproximation:
        pts = as_objectives(points)
        if len(pts) == 0:
            raise EmptySolutionSet("reference front is empty")
        if not np.all(np.isfinite(pts)):
            raise InputError("reference front has non-finite values")
        pts = np.unique(pts[nondominated_mask(pts)], axis=0)
        return cls(pts, provenance, pts.min(axis=0), pts.max(axis=0))

    @property
    def degenerate(self) -> np.ndarray:
        return self.upper <= self.lower

    def normalize(self, points) -> np.ndarray:
        """Affine map of each objective onto [0, 1] by the front's bounds; degenerate axes map to 0.5."""
        pts = as_objectives(points)
        span = np.where(self.degenerate, 1.0, self.upper - self.lower)
        out = (pts - self.lower) / span
        out[:, self.degenerate] = 0.5
        return out

    def __len__(self) -> int:
        return len(self.points)


def igd(solutions, reference) -> float:
    """Mean distance from each reference point to its nearest solution."""
    a = as_objectives(solutions)
    z = as_objectives(reference)
    if len(a) == 0:
        raise EmptySolutionSet("solution set is empty")
    if len(z) == 0:
        raise EmptySolutionSet("reference set is empty")
    d = np.linalg.norm(z[:, None, :] - a[None, :, :], axis=2)
    return float(d.min(axis=1).mean())


def _area_2d(stair: list[tuple[float, float]], rx: float, ry: float) -> float:
    # stair: x ascending, y strictly descending
    area = 0.0
    prev_y = ry
    for x, y in reversed(stair):
        area += (x - rx) * (y - prev_y)
        prev_y = y
    return area


def _insert(stair: list[tuple[float, float]], xs: list[float], x: float, y: float) -> None:
    """Insert (x, y) into a maximization staircase, dropping dominated steps."""
    k = bisect.bisect_left(xs, x)
    # a step with x' >= x and y' >= y dominates the new point
    if k < len(stair) and stair[k][1] >= y:
        return
    lo = k
    while lo > 0 and stair[lo - 1][1] <= y:
        lo -= 1
    hi = k
    if hi < len(stair) and stair[hi][0] == x:
        hi += 1
    del stair[lo:hi]
    del xs[lo:hi]
    stair.insert(lo, (x, y))
    xs.insert(lo, x)


def hypervolume_3d(points, ref: Sequence[float] = (0.0, 0.0, 0.0)) -> float:
    """Exact volume dominated by ``points`` above ``ref`` (maximization).

    Sweeps the third objective downward, keeping a 2-D staircase of the
    points seen so far and adding one slab per distinct third-objective level.
    """
    pts = as_objectives(points)
    ref = np.asarray(ref, dtype=float)
    if len(pts) == 0:
        return 0.0
    if np.any(pts < ref):
        raise PointBelowReference("every point must weakly dominate the reference point")
    order = np.argsort(-pts[:, 2], kind="stable")
    pts = pts[order]
    stair: list[tuple[float, float]] = []
    xs: list[float] = []
    volume = 0.0
    rx, ry, rz = (float(v) for v in ref)
    for k in range(len(pts)):
        x, y, z = (float(v) for v in pts[k])
        _insert(stair, xs, x, y)
        z_next = float(pts[k + 1, 2]) if k + 1 < len(pts) else rz
        if z_next < z:
            volume += _area_2d(stair, rx, ry) * (z - z_next)
    return volume


def normalized_igd(solutions, front: FrontApproximation) -> float:
    return igd(front.normalize(solutions), front.normalize(front.points))


def normalized_hypervolume(solutions, front: FrontApproximation) -> tuple[float, int]:
    """HV in the front's normalized box; returns (hv, number of clamped points)."""
    pts = front.normalize(solutions)
    outside = int(np.any((pts < 0) | (pts > 1), axis=1).sum())
    return hypervolume_3d(np.clip(pts, 0.0, 1.0), HV_REFERENCE), outside


def hv_igd_ratio(runs: Iterable[tuple[float, float]], mode: str = "ratio-of-means") -> float:
    runs = list(runs)
    if not runs:
        raise InputError("at least one run is required")
    if mode == "ratio-of-means":
        hv = sum(h for h, _ in runs) / len(runs)
        ig = sum(i for _, i in runs) / len(runs)
        return math.inf if ig == 0 else hv / ig
    if mode == "mean-of-ratios":
        ratios = [math.inf if i == 0 else h / i for h, i in runs]
        return sum(ratios) / len(ratios)
    raise InputError(f"unknown ratio mode {mode!r}; expected one of {RATIO_MODES}")


def format_ratio(value: float) -> str:
    return "inf" if math.isinf(value) else f"{value:.4f}"


def approximate_true_front(
    db: TransactionDatabase,
    variant: str,
    seed: int,
    pop_size: int = 500,
    generations: int = 500,
    init_strategy: str = "random",
) -> FrontApproximation:
    """Cumulative non-dominated archive of a large NSGA-III run."""
    from .nsga3 import Nsga3Params, divisions_for, run_nsga3

    params = Nsga3Params(
        pop_size=pop_size,
        generations=generations,
        divisions=divisions_for(pop_size),
        variation=VariationParams(0.9, 0.1, init_strategy),
        seed=seed,
    )
    out = run_nsga3(db, variant, params)
    return FrontApproximation.from_points(out.archive.objectives, "big-run-approx")


def write_front(path: str | Path, points) -> None:
    pts = as_objectives(points)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["o1", "o2", "o3"])
        for row in pts:
            writer.writerow([repr(float(v)) for v in row])


def read_front(path: str | Path) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["o1", "o2", "o3"]:
            raise InputError(f"{path}: expected header o1,o2,o3, got {header}")
        rows = [[float(v) for v in row] for row in reader if row]
    return np.array(rows, dtype=float).reshape(-1, 3)
