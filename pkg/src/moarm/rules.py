"""Rule chromosomes, their bit encoding, metrics and objective projections.

A rule over ``M`` items is a ternary gene vector: ``0`` puts the item in the
antecedent, ``1`` in the consequent, ``2`` leaves it out.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from operator import and_
from typing import Sequence

import numpy as np

from .dataset import TransactionDatabase
from .errors import InputError, InvalidRule, MalformedEncoding, UndefinedConfidence

ANTECEDENT = 0
CONSEQUENT = 1
ABSENT = 2
SYMBOLS = (ANTECEDENT, CONSEQUENT, ABSENT)

VARIANTS = ("v1", "v2")
OBJECTIVE_NAMES = {
    "v1": ("support", "confidence", "lift"),
    "v2": ("confidence", "lift", "interestingness"),
}

_TO_BITS = {ANTECEDENT: "11", CONSEQUENT: "10", ABSENT: "00"}
_FROM_BITS = {"11": ANTECEDENT, "10": CONSEQUENT, "00": ABSENT, "01": ABSENT}


@dataclass(frozen=True)
class Rule:
    """Michigan-style rule; value-equal iff the gene vectors are equal."""

    genes: tuple[int, ...]

    def __post_init__(self):
        if not isinstance(self.genes, tuple):
            object.__setattr__(self, "genes", tuple(int(g) for g in self.genes))

    def __len__(self) -> int:
        return len(self.genes)

    @property
    def antecedent(self) -> tuple[int, ...]:
        return tuple(i for i, g in enumerate(self.genes) if g == ANTECEDENT)

    @property
    def consequent(self) -> tuple[int, ...]:
        return tuple(i for i, g in enumerate(self.genes) if g == CONSEQUENT)

    def is_valid(self) -> bool:
        """Structural validity: one consequent item and a non-empty antecedent."""
        return self.genes.count(CONSEQUENT) == 1 and ANTECEDENT in self.genes

    @classmethod
    def from_items(cls, antecedent: Sequence[int], consequent: int, n_items: int) -> Rule:
        genes = [ABSENT] * n_items
        for i in antecedent:
            genes[i] = ANTECEDENT
        if genes[consequent] == ANTECEDENT:
            raise InvalidRule("consequent item also appears in the antecedent")
        genes[consequent] = CONSEQUENT
        return cls(tuple(genes))


@dataclass(frozen=True)
class RuleMetrics:
    support: float
    confidence: float
    lift: float
    interestingness: float


def encode_bits(rule: Rule) -> str:
    return "".join(_TO_BITS[g] for g in rule.genes)


def decode_bits(bits: str) -> Rule:
    if len(bits) % 2:
        raise MalformedEncoding(f"bit string length {len(bits)} is odd")
    try:
        return Rule(tuple(_FROM_BITS[bits[k : k + 2]] for k in range(0, len(bits), 2)))
    except KeyError as exc:
        raise MalformedEncoding(f"non-binary symbol in {bits!r}") from exc


def rule_counts(rule: Rule, db: TransactionDatabase) -> tuple[int, int, int]:
    """(count(A), count(B), count(A u B)) via bitset intersection."""
    if len(rule.genes) != db.n_items:
        raise InvalidRule(f"rule has {len(rule.genes)} genes, database has {db.n_items} items")
    if not rule.is_valid():
        raise InvalidRule("rule needs exactly one consequent item and at least one antecedent item")
    cols = db.columns
    a_mask = reduce(and_, (cols[i] for i, g in enumerate(rule.genes) if g == ANTECEDENT))
    b_mask = cols[rule.genes.index(CONSEQUENT)]
    return a_mask.bit_count(), b_mask.bit_count(), (a_mask & b_mask).bit_count()


def metrics_from_counts(count_a: int, count_b: int, count_ab: int, n: int) -> RuleMetrics:
    """Metrics from integer counts.

    Each value is a single int/int true division, which Python rounds
    correctly, so any two code paths with the same counts agree bit for bit.
    """
    if count_a == 0:
        raise UndefinedConfidence("antecedent never occurs")
    if count_ab == 0:
        raise InvalidRule("rule has zero support")
    return RuleMetrics(
        support=count_ab / n,
        confidence=count_ab / count_a,
        lift=(count_ab * n) / (count_a * count_b),
        interestingness=(count_ab * count_ab * (n - count_ab)) / (count_a * count_b * n),
    )


def evaluate_rule(rule: Rule, db: TransactionDatabase) -> RuleMetrics:
    a, b, ab = rule_counts(rule, db)
    return metrics_from_counts(a, b, ab, db.n_transactions)


def objective_vector(metrics: RuleMetrics, variant: str) -> tuple[float, float, float]:
    """Three maximized objectives for ``variant`` ("v1" or "v2")."""
    if variant == "v1":
        return (metrics.support, metrics.confidence, metrics.lift)
    if variant == "v2":
        return (metrics.confidence, metrics.lift, metrics.interestingness)
    raise InputError(f"unknown variant {variant!r}; expected one of {VARIANTS}")


def rule_to_json(rule: Rule, metrics: RuleMetrics, item_names: Sequence[str]) -> dict:
    return {
        "antecedent": sorted(item_names[i] for i in rule.antecedent),
        "consequent": sorted(item_names[i] for i in rule.consequent),
        "support": metrics.support,
        "confidence": metrics.confidence,
        "lift": metrics.lift,
        "interestingness": metrics.interestingness,
    }


class RuleEvaluator:
    """Memoizing evaluator bound to one database and objective variant.

    ``evaluations`` counts cache misses, i.e. distinct rules actually scored.
    """

    def __init__(self, db: TransactionDatabase, variant: str):
        if variant not in VARIANTS:
            raise InputError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
        self.db = db
        self.variant = variant
        self.evaluations = 0
        self._cache: dict[tuple[int, ...], tuple[RuleMetrics, tuple[float, float, float]]] = {}

    def _lookup(self, rule: Rule):
        hit = self._cache.get(rule.genes)
        if hit is None:
            metrics = evaluate_rule(rule, self.db)
            hit = (metrics, objective_vector(metrics, self.variant))
            self._cache[rule.genes] = hit
            self.evaluations += 1
        return hit

    def metrics(self, rule: Rule) -> RuleMetrics:
        return self._lookup(rule)[0]

    def objectives(self, rule: Rule) -> tuple[float, float, float]:
        return self._lookup(rule)[1]

    def objective_matrix(self, rules: Sequence[Rule]) -> np.ndarray:
        return np.array([self._lookup(r)[1] for r in rules], dtype=float).reshape(len(rules), 3)
