"""MOEA/D with penalty-based boundary intersection (PBI) decomposition."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import TransactionDatabase
from .errors import DegenerateWeight, InputError, NeighborhoodOverdraw
from .nsga3 import RunOutput, das_dennis
from .pareto import ParetoArchive, nondominated_mask
from .rules import Rule, RuleEvaluator
from .variation import VariationParams, crossover, distinct_pair, fresh_rule, initial_population, mutate, repair


def pbi_scalar(f, weight, ideal, theta: float = 5.0) -> float:
    """PBI value ``d1 + theta * d2`` of cost vector ``f`` (minimization)."""
    f = np.asarray(f, dtype=float)
    weight = np.asarray(weight, dtype=float)
    norm = np.linalg.norm(weight)
    if norm == 0:
        raise DegenerateWeight("weight vector is zero")
    diff = f - np.asarray(ideal, dtype=float)
    unit = weight / norm
    d1 = abs(float(diff @ unit))
    d2 = float(np.linalg.norm(diff - d1 * unit))
    return d1 + theta * d2


def pbi_many(costs: np.ndarray, weights: np.ndarray, ideal: np.ndarray, theta: float) -> np.ndarray:
    """Row-wise PBI of ``costs[k]`` under ``weights[k]``."""
    norms = np.sqrt((weights * weights).sum(axis=1, keepdims=True))
    if np.any(norms == 0):
        raise DegenerateWeight("weight vector is zero")
    unit = weights / norms
    diff = costs - ideal
    d1 = np.abs((diff * unit).sum(axis=1))
    off = diff - d1[:, None] * unit
    return d1 + theta * np.sqrt((off * off).sum(axis=1))


def tchebycheff_many(costs: np.ndarray, weights: np.ndarray, ideal: np.ndarray, theta: float) -> np.ndarray:
    return np.max(np.maximum(weights, 1e-6) * np.abs(costs - ideal), axis=1)


SCALARIZERS = {"pbi": pbi_many, "tchebycheff": tchebycheff_many}


def neighborhoods(weights: np.ndarray, t: int) -> np.ndarray:
    """Indices of the ``t`` nearest weight vectors (Euclidean) for each weight, self first."""
    if t > len(weights):
        raise NeighborhoodOverdraw(f"neighborhood size {t} exceeds {len(weights)} weights")
    if t < 2:
        raise InputError("neighborhood size must be at least 2")
    dist = np.linalg.norm(weights[:, None, :] - weights[None, :, :], axis=2)
    return np.argsort(dist, axis=1, kind="stable")[:, :t]


@dataclass(frozen=True)
class MoeadParams:
    divisions: int = 8
    neighbors: int = 20
    generations: int = 200
    theta: float = 5.0
    variation: VariationParams = field(default_factory=VariationParams)
    seed: int = 0
    decomposition: str = "pbi"
    dedup_working_set: bool = False
    track_archive: bool = True

    def __post_init__(self):
        if self.theta < 0:
            raise InputError("theta must be non-negative")
        if self.generations < 0:
            raise InputError("generations must be non-negative")
        if self.decomposition not in SCALARIZERS:
            raise InputError(f"unknown decomposition {self.decomposition!r}")


@dataclass
class MoeadTrace:
    """Ideal point after every update, every (generation, i, j, g_new, g_old) replacement,
    and every rule that entered the population (initial members first)."""

    ideal: list[np.ndarray] = field(default_factory=list)
    replacements: list[tuple[int, int, int, float, float]] = field(default_factory=list)
    admitted: list[Rule] = field(default_factory=list)


ORIGIN = np.zeros(3)


def _scale(worst: np.ndarray, ideal: np.ndarray) -> np.ndarray:
    span = worst - ideal
    span[span <= 1e-12] = 1.0
    return span


def run_moead(
    db: TransactionDatabase,
    variant: str,
    params: MoeadParams = MoeadParams(),
    trace: MoeadTrace | None = None,
) -> RunOutput:
    """Evolve one rule per weight vector; return the non-dominated final solutions.

    Costs are negated objectives, shifted by the ideal point and scaled by the
    current population's range before PBI so that lift does not swamp the
    bounded objectives.
    """
    rng = np.random.default_rng(params.seed)
    evaluator = RuleEvaluator(db, variant)
    weights = das_dennis(params.divisions).points
    hood = neighborhoods(weights, params.neighbors)
    hood_weights = [np.vstack([weights[js], weights[js]]) for js in hood]
    scalar = SCALARIZERS[params.decomposition]
    var = params.variation
    n = len(weights)

    pop = initial_population(db, n, var, rng)
    costs = -evaluator.objective_matrix(pop)
    ideal = costs.min(axis=0)
    archive = ParetoArchive()
    if params.track_archive:
        archive.update(pop, -costs)
    if trace is not None:
        trace.ideal.append(-ideal)
        trace.admitted.extend(pop)
    history = [-costs]

    for gen in range(params.generations):
        for i in range(n):
            b, c = distinct_pair(rng, len(hood[i]))
            b, c = hood[i][b], hood[i][c]
            child = crossover(pop[b], pop[c], var.crossover_prob, rng)[0]
            child = mutate(child, var.mutation_prob, rng, var.mutation_mode)
            child = repair(child, db, rng, var.init_strategy, var.retries)
            if params.dedup_working_set:
                present = set(pop)
                for _ in range(var.retries):
                    if child not in present:
                        break
                    child = fresh_rule(db, var.init_strategy, rng, var.retries)
            cost = -np.asarray(evaluator.objectives(child))
            ideal = np.minimum(ideal, cost)
            if trace is not None:
                trace.ideal.append(-ideal)
            js = hood[i]
            span = _scale(np.maximum(costs.max(axis=0), cost), ideal)
            t = len(js)
            stacked = np.empty((2 * t, 3))
            stacked[:t] = (cost - ideal) / span
            stacked[t:] = (costs[js] - ideal) / span
            g = scalar(stacked, hood_weights[i], ORIGIN, params.theta)
            g_new, g_old = g[:t], g[t:]
            admitted = False
            for j, gn, go in zip(js, g_new, g_old):
                if gn <= go:
                    pop[j] = child
                    costs[j] = cost
                    if trace is not None:
                        trace.replacements.append((gen, i, int(j), float(gn), float(go)))
                        admitted = True
            if admitted:
                trace.admitted.append(child)
        if params.track_archive:
            archive.update(pop, -costs)
        history.append(-costs)

    objs = -costs
    seen = set()
    rules, rows = [], []
    for k in np.flatnonzero(nondominated_mask(objs)):
        if pop[k] not in seen:
            seen.add(pop[k])
            rules.append(pop[k])
            rows.append(objs[k])
    return RunOutput(rules, np.array(rows).reshape(-1, 3), archive, history, evaluator.evaluations)
