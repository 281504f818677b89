"""NSGA-III: reference-point based survivor selection and the generational loop."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from typing import Callable

import numpy as np

from .dataset import TransactionDatabase
from .errors import InputError, InvalidDivisions, SelectionOverdraw
from .pareto import ParetoArchive, as_objectives, fast_nondominated_sort, front_ranks, nondominated_mask
from .rules import Rule, RuleEvaluator
from .variation import VariationParams, dedup, distinct_pair, initial_population, make_child

log = logging.getLogger(__name__)

ASF_EPS = 1e-6


@dataclass(frozen=True)
class ReferencePointSet:
    points: np.ndarray
    divisions: int

    def __len__(self) -> int:
        return len(self.points)


def das_dennis(divisions: int, n_obj: int = 3) -> ReferencePointSet:
    """Simplex-lattice points with coordinates in multiples of 1/divisions, lexicographic order."""
    if divisions < 1:
        raise InvalidDivisions(f"divisions must be >= 1, got {divisions}")
    rows = []
    # stars and bars: positions of n_obj - 1 bars among divisions + n_obj - 1 slots
    for bars in combinations(range(divisions + n_obj - 1), n_obj - 1):
        edges = (-1,) + bars + (divisions + n_obj - 1,)
        rows.append([edges[k + 1] - edges[k] - 1 for k in range(n_obj)])
    pts = np.array(sorted(rows), dtype=float) / divisions
    assert len(pts) == comb(divisions + n_obj - 1, n_obj - 1)
    return ReferencePointSet(pts, divisions)


def divisions_for(n_points: int, n_obj: int = 3) -> int:
    """Smallest division count giving at least ``n_points`` lattice points."""
    p = 1
    while comb(p + n_obj - 1, n_obj - 1) < n_points:
        p += 1
    return p


def normalize(costs: np.ndarray) -> np.ndarray:
    """Normalize minimization costs: ideal shift, ASF extremes, hyperplane intercepts.

    Intercepts fall back to the per-axis maximum when the extreme-point system
    is singular or yields non-positive intercepts, and are never allowed to be
    smaller than the observed per-axis range, so results stay within [0, 1].
    """
    ideal = costs.min(axis=0)
    shifted = costs - ideal
    m = costs.shape[1]
    worst = shifted.max(axis=0)
    weights = np.full((m, m), ASF_EPS) + np.eye(m) * (1 - ASF_EPS)
    asf = np.max(shifted[None, :, :] / weights[:, None, :], axis=2)
    extremes = shifted[np.argmin(asf, axis=1)]
    try:
        plane = np.linalg.solve(extremes, np.ones(m))
        intercepts = 1.0 / plane
        if not np.all(np.isfinite(intercepts)) or np.any(intercepts <= 1e-10):
            raise np.linalg.LinAlgError
    except np.linalg.LinAlgError:
        intercepts = worst.copy()
    intercepts = np.maximum(intercepts, worst)
    intercepts[intercepts <= 1e-12] = 1.0
    return shifted / intercepts


def associate(normed: np.ndarray, refs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Nearest reference line (origin through each ref point) and perpendicular distance."""
    unit = refs / np.linalg.norm(refs, axis=1, keepdims=True)
    proj = normed @ unit.T
    sq = np.sum(normed**2, axis=1, keepdims=True) - proj**2
    dist = np.sqrt(np.clip(sq, 0.0, None))
    nearest = np.argmin(dist, axis=1)
    return nearest, dist[np.arange(len(normed)), nearest]


def nsga3_select(objs, refs: ReferencePointSet, n: int, rng: np.random.Generator) -> np.ndarray:
    """Indices of ``n`` survivors from ``objs`` (maximization)."""
    objs = as_objectives(objs)
    if n > len(objs):
        raise SelectionOverdraw(f"cannot select {n} from {len(objs)}")
    return _select(objs, fast_nondominated_sort(objs), refs, n, rng)


def _select(objs, fronts, refs, n, rng) -> np.ndarray:
    chosen: list[int] = []
    last: list[int] = []
    for front in fronts:
        if len(chosen) + len(front) <= n:
            chosen.extend(front)
            if len(chosen) == n:
                return np.array(chosen, dtype=int)
        else:
            last = front
            break
    k = n - len(chosen)
    members = np.array(chosen + last, dtype=int)
    normed = normalize(-objs[members])
    line, dist = associate(normed, refs.points)
    n_acc = len(chosen)
    niche = np.bincount(line[:n_acc], minlength=len(refs))
    cand_line = line[n_acc:]
    cand_dist = dist[n_acc:]
    available = np.ones(len(last), dtype=bool)
    open_lines = np.zeros(len(refs), dtype=bool)
    open_lines[np.unique(cand_line)] = True
    picked = []
    while len(picked) < k:
        lines = np.flatnonzero(open_lines)
        low = niche[lines].min()
        lines = lines[niche[lines] == low]
        j = int(lines[rng.integers(len(lines))])
        pool = np.flatnonzero(available & (cand_line == j))
        if pool.size == 0:
            open_lines[j] = False
            continue
        if niche[j] == 0:
            best = cand_dist[pool].min()
            pool = pool[cand_dist[pool] == best]
        pick = int(pool[rng.integers(len(pool))])
        picked.append(last[pick])
        available[pick] = False
        niche[j] += 1
        if not np.any(available & (cand_line == j)):
            open_lines[j] = False
    return np.array(chosen + picked, dtype=int)


@dataclass(frozen=True)
class Nsga3Params:
    pop_size: int = 50
    generations: int = 200
    divisions: int = 12
    variation: VariationParams = field(default_factory=VariationParams)
    seed: int = 0
    track_archive: bool = True

    def __post_init__(self):
        if self.pop_size < 2:
            raise InputError("pop_size must be at least 2")
        if self.generations < 0:
            raise InputError("generations must be non-negative")


@dataclass
class RunOutput:
    """Result of one optimizer run.

    ``rules``/``objectives`` hold the emitted non-dominated set; ``archive``
    is the cumulative non-dominated archive; ``history`` has the population
    objectives after initialization and after every generation.
    """

    rules: list[Rule]
    objectives: np.ndarray
    archive: ParetoArchive
    history: list[np.ndarray]
    evaluations: int


def _tournament(ranks: np.ndarray, rng: np.random.Generator) -> int:
    a, b = distinct_pair(rng, len(ranks))
    if ranks[a] != ranks[b]:
        return a if ranks[a] < ranks[b] else b
    return a if rng.random() < 0.5 else b


GenerationCallback = Callable[[int, list, np.ndarray], None]


def run_nsga3(
    db: TransactionDatabase,
    variant: str,
    params: Nsga3Params = Nsga3Params(),
    callback: GenerationCallback | None = None,
) -> RunOutput:
    """Evolve rules with NSGA-III; return the first front of the final population.

    ``callback(generation, rules, objectives)`` sees the initial population as
    generation -1 and every selected population afterwards.
    """
    rng = np.random.default_rng(params.seed)
    evaluator = RuleEvaluator(db, variant)
    refs = das_dennis(params.divisions)
    var = params.variation
    n = params.pop_size

    pop = initial_population(db, n, var, rng)
    objs = evaluator.objective_matrix(pop)
    archive = ParetoArchive()
    if params.track_archive:
        archive.update(pop, objs)
    history = [objs.copy()]
    if callback:
        callback(-1, pop, objs)

    ranks = front_ranks(fast_nondominated_sort(objs), n)
    for gen in range(params.generations):
        children: list[Rule] = []
        while len(children) < n:
            a = pop[_tournament(ranks, rng)]
            b = pop[_tournament(ranks, rng)]
            children.extend(make_child(a, b, db, var, rng))
        union = dedup(pop + children[:n], db, rng, var.init_strategy, var.retries)
        union_objs = evaluator.objective_matrix(union)
        fronts = fast_nondominated_sort(union_objs)
        keep = _select(union_objs, fronts, refs, n, rng)
        # survivor ranks within the union equal their ranks among survivors
        ranks = front_ranks(fronts, len(union))[keep]
        pop = [union[i] for i in keep]
        objs = union_objs[keep]
        if params.track_archive:
            archive.update(pop, objs)
        history.append(objs.copy())
        if callback:
            callback(gen, pop, objs)

    mask = nondominated_mask(objs)
    rules = [r for r, k in zip(pop, mask) if k]
    log.debug("nsga3 finished: %d rules, %d evaluations", len(rules), evaluator.evaluations)
    return RunOutput(rules, objs[mask], archive, history, evaluator.evaluations)
