"""Brute-force ground truth for small instances.

Counting here scans transactions row by row and shares no code with the
bitset path in :mod:`moarm.rules`, so agreement between the two is evidence.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterator

import numpy as np

from .dataset import TransactionDatabase
from .errors import InputError, InstanceTooLarge, InvalidRule, UndefinedConfidence
from .rules import ABSENT, ANTECEDENT, CONSEQUENT, Rule, RuleMetrics, objective_vector

MAX_UNCAPPED_ITEMS = 20


@dataclass(frozen=True)
class ExactFront:
    rules: list[Rule]
    objectives: np.ndarray
    variant: str


def structural_rules(n_items: int, max_antecedent: int | None = None) -> Iterator[Rule]:
    """Every rule with one consequent and 1..cap antecedent items, support ignored."""
    cap = n_items - 1 if max_antecedent is None else min(max_antecedent, n_items - 1)
    for c in range(n_items):
        others = [i for i in range(n_items) if i != c]
        for size in range(1, cap + 1):
            for ante in combinations(others, size):
                genes = [ABSENT] * n_items
                for i in ante:
                    genes[i] = ANTECEDENT
                genes[c] = CONSEQUENT
                yield Rule(tuple(genes))


def _scan(rule: Rule, db: TransactionDatabase) -> tuple[int, int, int]:
    ante = {i for i, g in enumerate(rule.genes) if g == ANTECEDENT}
    cons = [i for i, g in enumerate(rule.genes) if g == CONSEQUENT]
    if len(rule.genes) != db.n_items or len(cons) != 1 or not ante:
        raise InvalidRule("rule is structurally invalid for this database")
    c = cons[0]
    n_a = n_b = n_ab = 0
    for row in db.rows:
        has_a = all(i in row for i in ante)
        has_b = c in row
        n_a += has_a
        n_b += has_b
        n_ab += has_a and has_b
    return n_a, n_b, n_ab


def naive_evaluate(rule: Rule, db: TransactionDatabase) -> RuleMetrics:
    n_a, n_b, n_ab = _scan(rule, db)
    if n_a == 0:
        raise UndefinedConfidence("antecedent never occurs")
    if n_ab == 0:
        raise InvalidRule("rule has zero support")
    n = db.n_transactions
    support = Fraction(n_ab, n)
    confidence = Fraction(n_ab, n_a)
    lift = confidence / Fraction(n_b, n)
    interest = confidence * Fraction(n_ab, n_b) * (1 - support)
    return RuleMetrics(float(support), float(confidence), float(lift), float(interest))


def enumerate_rules(db: TransactionDatabase, max_antecedent: int | None = None) -> Iterator[Rule]:
    """Every structurally valid rule with positive support."""
    if max_antecedent is None and db.n_items > MAX_UNCAPPED_ITEMS:
        raise InstanceTooLarge(
            f"{db.n_items} items is too many to enumerate without an antecedent cap"
        )
    if max_antecedent is not None and max_antecedent < 1:
        raise InputError("max_antecedent must be at least 1")
    for rule in structural_rules(db.n_items, max_antecedent):
        if _scan(rule, db)[2] > 0:
            yield rule


def _pareto_filter(objs: np.ndarray) -> list[int]:
    """Indices of non-dominated rows.

    Rows are visited in descending lexicographic order, so any dominator of a
    row is visited before it, and by transitivity some kept row dominates it.
    """
    order = np.lexsort(objs.T[::-1])[::-1]
    kept: list[int] = []
    front = np.zeros((0, objs.shape[1]))
    for i in order:
        x = objs[i]
        if len(front) and np.any(np.all(front >= x, axis=1) & np.any(front > x, axis=1)):
            continue
        kept.append(int(i))
        front = np.vstack([front, x])
    return sorted(kept)


def exact_pareto_front(
    db: TransactionDatabase, variant: str, max_antecedent: int | None = None
) -> ExactFront:
    rules = list(enumerate_rules(db, max_antecedent))
    objs = np.array([objective_vector(naive_evaluate(r, db), variant) for r in rules]).reshape(-1, 3)
    keep = _pareto_filter(objs)
    return ExactFront([rules[k] for k in keep], objs[keep], variant)
