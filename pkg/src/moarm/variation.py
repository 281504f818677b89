"""Initialization, crossover, mutation, repair and duplicate elimination."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataset import TransactionDatabase
from .errors import (
    GeneLengthMismatch,
    InputError,
    PopulationTooLargeForRuleSpace,
    RepairExhausted,
    SeedingImpossible,
    TooFewItems,
)
from .rules import ABSENT, ANTECEDENT, CONSEQUENT, Rule

INIT_STRATEGIES = ("random", "seeded", "auto")
MUTATION_MODES = ("per-gene", "per-individual")
DEFAULT_RETRIES = 1000
SPARSE_DENSITY = 0.1


@dataclass(frozen=True)
class VariationParams:
    crossover_prob: float = 0.9
    mutation_prob: float = 0.1
    init_strategy: str = "random"
    mutation_mode: str = "per-gene"
    retries: int = DEFAULT_RETRIES

    def __post_init__(self):
        for name in ("crossover_prob", "mutation_prob"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise InputError(f"{name} must lie in [0, 1], got {value}")
        if self.init_strategy not in ("random", "seeded"):
            raise InputError(f"init_strategy must be 'random' or 'seeded', got {self.init_strategy!r}")
        if self.mutation_mode not in MUTATION_MODES:
            raise InputError(f"mutation_mode must be one of {MUTATION_MODES}")
        if self.retries < 1:
            raise InputError("retries must be positive")


def resolve_init_strategy(db: TransactionDatabase, strategy: str) -> str:
    """Map ``auto`` to ``seeded`` for sparse databases and ``random`` otherwise."""
    if strategy == "auto":
        return "seeded" if db.mean_density() < SPARSE_DENSITY else "random"
    if strategy not in INIT_STRATEGIES:
        raise InputError(f"unknown init strategy {strategy!r}; expected one of {INIT_STRATEGIES}")
    return strategy


def rule_space_size(n_items: int) -> int:
    """Number of structurally valid rules over ``n_items`` items."""
    return n_items * (2 ** (n_items - 1) - 1) if n_items >= 2 else 0


def has_support(rule: Rule, db: TransactionDatabase) -> bool:
    return _genes_supported(rule.genes, db.columns, db.all_mask)


def _genes_supported(genes, cols, mask: int) -> bool:
    for i, g in enumerate(genes):
        if g != ABSENT:
            mask &= cols[i]
            if not mask:
                return False
    return True


def _choice(rng: np.random.Generator, seq: Sequence[int]) -> int:
    return seq[int(rng.integers(len(seq)))]


def distinct_pair(rng: np.random.Generator, n: int) -> tuple[int, int]:
    """Two distinct uniform indices in [0, n)."""
    a = int(rng.integers(n))
    b = int(rng.integers(n - 1))
    return a, b + (b >= a)


def structural_repair(genes: Sequence[int], rng: np.random.Generator) -> Rule:
    """Force exactly one consequent item and at least one antecedent item."""
    genes = list(genes)
    m = len(genes)
    if m < 2:
        raise TooFewItems("a rule needs at least two items")
    if genes.count(CONSEQUENT) == 1 and ANTECEDENT in genes:
        return Rule(tuple(genes))
    cons = [i for i, g in enumerate(genes) if g == CONSEQUENT]
    while len(cons) > 1:
        i = cons.pop(int(rng.integers(len(cons))))
        genes[i] = ANTECEDENT
    if not cons:
        ante = [i for i, g in enumerate(genes) if g == ANTECEDENT]
        if ante:
            genes[_choice(rng, ante)] = CONSEQUENT
        else:
            a, c = distinct_pair(rng, m)
            genes[a] = ANTECEDENT
            genes[c] = CONSEQUENT
    if ANTECEDENT not in genes:
        others = [i for i, g in enumerate(genes) if g != CONSEQUENT]
        genes[_choice(rng, others)] = ANTECEDENT
    return Rule(tuple(genes))


def _argmax_over(keys: list[float], idx: list[int]) -> int:
    return max(idx, key=keys.__getitem__)


def _repair_row(genes: list[int], keys: list[float]) -> list[int]:
    """Structural repair of one gene list in place, with choices driven by iid uniform ``keys``.

    Every choice takes the highest-keyed candidate, which is a uniform pick;
    keeping one uniformly chosen consequent matches demoting uniformly
    chosen surplus consequents one at a time.
    """
    cons = [i for i, g in enumerate(genes) if g == CONSEQUENT]
    if len(cons) > 1:
        keep = _argmax_over(keys, cons)
        for i in cons:
            genes[i] = ANTECEDENT
        genes[keep] = CONSEQUENT
        return genes
    if not cons:
        ante = [i for i, g in enumerate(genes) if g == ANTECEDENT]
        if ante:
            genes[_argmax_over(keys, ante)] = CONSEQUENT
        else:
            order = sorted(range(len(genes)), key=keys.__getitem__, reverse=True)
            genes[order[0]] = ANTECEDENT
            genes[order[1]] = CONSEQUENT
            return genes
    if ANTECEDENT not in genes:
        others = [i for i, g in enumerate(genes) if g != CONSEQUENT]
        genes[_argmax_over(keys, others)] = ANTECEDENT
    return genes


def structural_repair_batch(genes: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """:func:`structural_repair` applied to every row of a gene matrix."""
    genes = np.asarray(genes)
    k, m = genes.shape
    if m < 2:
        raise TooFewItems("a rule needs at least two items")
    keys = rng.random((k, m)).tolist()
    return np.array([_repair_row(row, kr) for row, kr in zip(genes.tolist(), keys)], dtype=np.int8)


def random_rule(n_items: int, rng: np.random.Generator) -> Rule:
    """Uniform ternary genes followed by structural repair (support unchecked)."""
    if n_items < 2:
        raise TooFewItems("a rule needs at least two items")
    return Rule(tuple(structural_repair_batch(rng.integers(0, 3, size=(1, n_items)), rng)[0].tolist()))


def transaction_seeded_rule(db: TransactionDatabase, rng: np.random.Generator) -> Rule:
    """Rule built from a random multi-item transaction: one item as consequent, the rest antecedent."""
    candidates = db.multi_item_rows
    if not candidates:
        raise SeedingImpossible("no transaction holds two or more items")
    items = sorted(db.rows[_choice(rng, candidates)])
    consequent = _choice(rng, items)
    genes = [ABSENT] * db.n_items
    for i in items:
        genes[i] = ANTECEDENT
    genes[consequent] = CONSEQUENT
    return Rule(tuple(genes))


BATCH = 16


def fresh_rule(db: TransactionDatabase, strategy: str, rng: np.random.Generator, retries: int = DEFAULT_RETRIES) -> Rule:
    """A new valid rule with positive support, drawn per ``strategy``.

    The random strategy draws candidates in small batches and returns the
    first supported one; at most ``retries`` candidates are examined.
    """
    if strategy == "seeded":
        return transaction_seeded_rule(db, rng)
    if db.n_items < 2:
        raise TooFewItems("a rule needs at least two items")
    tried = 0
    while tried < retries:
        size = min(BATCH, retries - tried)
        keys = rng.random((size, db.n_items)).tolist()
        for row, kr in zip(rng.integers(0, 3, size=(size, db.n_items)).tolist(), keys):
            row = _repair_row(row, kr)
            if _genes_supported(row, db.columns, db.all_mask):
                return Rule(tuple(row))
        tried += size
    raise RepairExhausted(f"no supported random rule found in {retries} draws")


def crossover(a: Rule, b: Rule, pc: float, rng: np.random.Generator) -> tuple[Rule, Rule]:
    """Single-point crossover applied with probability ``pc``; children are unrepaired."""
    if len(a) != len(b):
        raise GeneLengthMismatch(f"parents have {len(a)} and {len(b)} genes")
    if len(a) < 2 or rng.random() >= pc:
        return a, b
    return single_point_crossover(a, b, int(rng.integers(1, len(a))))


def single_point_crossover(a: Rule, b: Rule, cut: int) -> tuple[Rule, Rule]:
    if len(a) != len(b):
        raise GeneLengthMismatch(f"parents have {len(a)} and {len(b)} genes")
    if not 1 <= cut <= len(a) - 1:
        raise InputError(f"cut {cut} outside [1, {len(a) - 1}]")
    return Rule(a.genes[:cut] + b.genes[cut:]), Rule(b.genes[:cut] + a.genes[cut:])


def mutate(rule: Rule, pm: float, rng: np.random.Generator, mode: str = "per-gene") -> Rule:
    """Resample genes to one of the two other symbols.

    ``per-gene``: each gene flips independently with probability ``pm``.
    ``per-individual``: with probability ``pm`` a single random gene flips.
    """
    m = len(rule)
    if mode == "per-gene":
        hits = [i for i, u in enumerate(rng.random(m).tolist()) if u < pm]
    elif mode == "per-individual":
        hits = [int(rng.integers(m))] if rng.random() < pm else []
    else:
        raise InputError(f"unknown mutation mode {mode!r}")
    if len(hits) == 0:
        return rule
    genes = list(rule.genes)
    shifts = rng.integers(1, 3, size=len(hits))
    for i, s in zip(hits, shifts):
        genes[i] = (genes[i] + int(s)) % 3
    return Rule(tuple(genes))


def repair(
    rule: Rule,
    db: TransactionDatabase,
    rng: np.random.Generator,
    strategy: str = "random",
    retries: int = DEFAULT_RETRIES,
) -> Rule:
    """Structural repair, then replacement of zero-support rules."""
    fixed = structural_repair(rule.genes, rng)
    if has_support(fixed, db):
        return fixed
    return fresh_rule(db, strategy, rng, retries)


def dedup(
    rules: Sequence[Rule],
    db: TransactionDatabase,
    rng: np.random.Generator,
    strategy: str = "random",
    retries: int = DEFAULT_RETRIES,
) -> list[Rule]:
    """Replace repeated gene vectors (after the first) with fresh unseen rules."""
    if len(rules) > rule_space_size(db.n_items):
        raise PopulationTooLargeForRuleSpace(
            f"{len(rules)} distinct rules requested, only {rule_space_size(db.n_items)} exist"
        )
    seen: set[Rule] = set()
    out = []
    for rule in rules:
        if rule in seen:
            for _ in range(retries):
                rule = fresh_rule(db, strategy, rng, retries)
                if rule not in seen:
                    break
            else:
                raise PopulationTooLargeForRuleSpace(
                    f"could not find a distinct valid rule in {retries} draws"
                )
        seen.add(rule)
        out.append(rule)
    return out


def initial_population(
    db: TransactionDatabase, size: int, params: VariationParams, rng: np.random.Generator
) -> list[Rule]:
    rules = [fresh_rule(db, params.init_strategy, rng, params.retries) for _ in range(size)]
    return dedup(rules, db, rng, params.init_strategy, params.retries)


def make_child(
    a: Rule, b: Rule, db: TransactionDatabase, params: VariationParams, rng: np.random.Generator
) -> tuple[Rule, Rule]:
    """Crossover, mutation and repair of one parent pair."""
    c1, c2 = crossover(a, b, params.crossover_prob, rng)
    out = []
    for child in (c1, c2):
        child = mutate(child, params.mutation_prob, rng, params.mutation_mode)
        out.append(repair(child, db, rng, params.init_strategy, params.retries))
    return out[0], out[1]
