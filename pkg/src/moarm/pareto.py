"""Dominance helpers shared by the optimizers and indicators.

All public functions take objective matrices in maximization orientation.
"""

from __future__ import annotations

import numpy as np

from .errors import NaNObjective


def as_objectives(objs) -> np.ndarray:
    arr = np.asarray(objs, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 3) if arr.size else arr.reshape(0, 3)
    if np.isnan(arr).any():
        raise NaNObjective("dominance is undefined for NaN objectives")
    return arr


def dominates(a, b) -> bool:
    a = np.asarray(a)
    b = np.asarray(b)
    return bool(np.all(a >= b) and np.any(a > b))


def domination_matrix(objs: np.ndarray) -> np.ndarray:
    """``D[i, j]`` is True when row ``i`` dominates row ``j``."""
    ge = np.all(objs[:, None, :] >= objs[None, :, :], axis=2)
    gt = np.any(objs[:, None, :] > objs[None, :, :], axis=2)
    return ge & gt


def nondominated_mask(objs) -> np.ndarray:
    objs = as_objectives(objs)
    if len(objs) == 0:
        return np.zeros(0, dtype=bool)
    return ~domination_matrix(objs).any(axis=0)


def fast_nondominated_sort(objs) -> list[list[int]]:
    """Partition row indices into successive non-dominated fronts."""
    objs = as_objectives(objs)
    n = len(objs)
    if n == 0:
        return []
    dom = domination_matrix(objs)
    counts = dom.sum(axis=0)
    assigned = np.zeros(n, dtype=bool)
    fronts = []
    current = np.flatnonzero(counts == 0)
    while current.size:
        fronts.append(current.tolist())
        assigned[current] = True
        counts = counts - dom[current].sum(axis=0)
        current = np.flatnonzero((counts == 0) & ~assigned)
    return fronts


def front_ranks(fronts: list[list[int]], n: int) -> np.ndarray:
    ranks = np.empty(n, dtype=int)
    for r, front in enumerate(fronts):
        ranks[front] = r
    return ranks


class ParetoArchive:
    """Cumulative non-dominated set of distinct rules seen during a run."""

    def __init__(self):
        self.rules: list = []
        self.objectives = np.zeros((0, 3))
        self._keys: set = set()

    def __len__(self) -> int:
        return len(self.rules)

    def update(self, rules, objs) -> None:
        objs = as_objectives(objs)
        new = [k for k, r in enumerate(rules) if r not in self._keys]
        if not new:
            return
        cand_rules = self.rules + [rules[k] for k in new]
        cand = np.vstack([self.objectives, objs[new]])
        keep = nondominated_mask(cand)
        self.rules = [r for r, k in zip(cand_rules, keep) if k]
        self.objectives = cand[keep]
        # rules once dominated stay dominated, so remember every rule offered
        self._keys.update(rules[k] for k in new)
