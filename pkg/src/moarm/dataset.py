"""Binary transaction databases stored as per-item bitsets.

Every rule metric is an AND-popcount over item columns, so each column is
kept as a Python ``int`` whose bit ``t`` is set when transaction ``t``
contains the item.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from functools import cached_property, reduce
from operator import and_
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DuplicateItem,
    EmptyDataset,
    EmptyItemSet,
    EmptyTransaction,
    InputError,
    InvalidDensity,
    MalformedCell,
)

FORMATS = ("matrix-csv", "basket")


@dataclass(frozen=True)
class TransactionDatabase:
    """Immutable transaction database.

    ``columns[i]`` is the bitset of transactions containing item ``i``.
    ``rows[t]`` is the set of item indices in transaction ``t``; it exists for
    row-scan consumers (the oracle) and is never used for support counting here.
    """

    item_names: tuple[str, ...]
    columns: tuple[int, ...]
    n_transactions: int
    rows: tuple[frozenset[int], ...] = field(repr=False, compare=False)

    @property
    def n_items(self) -> int:
        return len(self.item_names)

    @property
    def all_mask(self) -> int:
        return (1 << self.n_transactions) - 1

    def support_count(self, items: Iterable[int]) -> int:
        return support_count(self, items)

    @cached_property
    def multi_item_rows(self) -> tuple[int, ...]:
        """Indices of transactions holding at least two items."""
        return tuple(t for t, row in enumerate(self.rows) if len(row) >= 2)

    def item_index(self, name: str) -> int:
        return self.item_names.index(name)

    def mean_density(self) -> float:
        """Mean fraction of items present per transaction."""
        total = sum(col.bit_count() for col in self.columns)
        return total / (self.n_transactions * self.n_items)

    def to_matrix(self) -> np.ndarray:
        mat = np.zeros((self.n_transactions, self.n_items), dtype=np.uint8)
        for t, row in enumerate(self.rows):
            mat[t, list(row)] = 1
        return mat

    def to_matrix_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.item_names)
        writer.writerows(self.to_matrix().tolist())
        return buf.getvalue()


def from_rows(rows: Sequence[Iterable[int]], item_names: Sequence[str]) -> TransactionDatabase:
    """Build a database from transactions given as item-index collections."""
    names = tuple(item_names)
    if not rows:
        raise EmptyDataset("dataset has no transactions")
    if not names:
        raise EmptyDataset("dataset has no items")
    if len(set(names)) != len(names):
        dupes = sorted({n for n in names if names.count(n) > 1})
        raise DuplicateItem(f"duplicate item names: {dupes}")
    if any(not n for n in names):
        raise InputError("item names must be non-empty")
    m = len(names)
    columns = [0] * m
    frozen = []
    for t, row in enumerate(rows):
        row = frozenset(int(i) for i in row)
        if not row:
            raise EmptyTransaction(t + 1)
        for i in row:
            if not 0 <= i < m:
                raise InputError(f"item index {i} out of range in transaction {t}")
            columns[i] |= 1 << t
        frozen.append(row)
    return TransactionDatabase(names, tuple(columns), len(frozen), tuple(frozen))


def from_matrix(matrix: np.ndarray, item_names: Sequence[str] | None = None) -> TransactionDatabase:
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] == 0:
        raise EmptyDataset("matrix must be a non-empty 2-D array")
    if item_names is None:
        item_names = [f"i{j}" for j in range(matrix.shape[1])]
    rows = [np.flatnonzero(r).tolist() for r in matrix]
    return from_rows(rows, item_names)


def load_transactions(path: str | Path, format: str = "matrix-csv") -> TransactionDatabase:
    """Load a dataset from disk in ``matrix-csv`` or ``basket`` format."""
    text = Path(path).read_text(encoding="utf-8")
    if format == "matrix-csv":
        return parse_matrix_csv(text)
    if format == "basket":
        return parse_basket(text)
    raise InputError(f"unknown dataset format {format!r}; expected one of {FORMATS}")


def parse_matrix_csv(text: str) -> TransactionDatabase:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise EmptyDataset("empty file")
    header = [h.strip() for h in lines[0].split(",")]
    if len(set(header)) != len(header):
        dupes = sorted({h for h in header if header.count(h) > 1})
        raise DuplicateItem(f"duplicate header items: {dupes}")
    if len(lines) == 1:
        raise EmptyDataset("matrix-csv has a header but no data rows")
    rows = []
    for r, line in enumerate(lines[1:], start=1):
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != len(header):
            raise InputError(f"row {r} has {len(cells)} cells, header has {len(header)}")
        row = []
        for c, cell in enumerate(cells):
            if cell == "1":
                row.append(c)
            elif cell != "0":
                raise MalformedCell(r, c, cell)
        if not row:
            raise EmptyTransaction(r + 1)
        rows.append(row)
    return from_rows(rows, header)


def parse_basket(text: str) -> TransactionDatabase:
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise EmptyDataset("empty file")
    index: dict[str, int] = {}
    rows = []
    for n, line in enumerate(lines, start=1):
        labels = [lab.strip() for lab in line.split(",")]
        labels = [lab for lab in labels if lab]
        if not labels:
            raise EmptyTransaction(n)
        row = set()
        for lab in labels:
            row.add(index.setdefault(lab, len(index)))
        rows.append(row)
    return from_rows(rows, list(index))


def support_count(db: TransactionDatabase, items: Iterable[int]) -> int:
    """Number of transactions containing every item in ``items``."""
    members = list(items)
    if not members:
        raise EmptyItemSet("support of the empty itemset is not defined here")
    for i in members:
        if not 0 <= i < db.n_items:
            raise InputError(f"item index {i} out of range [0, {db.n_items})")
    return reduce(and_, (db.columns[i] for i in members)).bit_count()


def generate_synthetic(n_transactions: int, n_items: int, density: float, seed: int) -> TransactionDatabase:
    """Independent Bernoulli(density) cells; empty rows get one random item."""
    if not 0.0 < density < 1.0:
        raise InvalidDensity(f"density must lie in (0, 1), got {density}")
    if n_transactions < 1 or n_items < 1:
        raise InputError("n_transactions and n_items must be at least 1")
    rng = np.random.default_rng(seed)
    mat = rng.random((n_transactions, n_items)) < density
    empty = np.flatnonzero(~mat.any(axis=1))
    if empty.size:
        mat[empty, rng.integers(0, n_items, size=empty.size)] = True
    return from_matrix(mat, [f"i{j}" for j in range(n_items)])
