"""Experiment driver: parameter grids, repeated runs, indicator tables, rule frequencies."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .dataset import TransactionDatabase, load_transactions
from .errors import InputError, MissingReferenceFront
from .moead import MoeadParams, run_moead
from .nsga3 import Nsga3Params, divisions_for, run_nsga3
from .quality import (
    FrontApproximation,
    approximate_true_front,
    format_ratio,
    hv_igd_ratio,
    normalized_hypervolume,
    normalized_igd,
    read_front,
    write_front,
)
from .rules import OBJECTIVE_NAMES, VARIANTS, Rule, RuleMetrics, evaluate_rule, rule_to_json
from .variation import VariationParams, resolve_init_strategy

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger(__name__)

ALGORITHMS = ("nsga3", "moead")
FRAMEWORK_NAMES = {"nsga3": "NSGA-III-ARM", "moead": "MOEAD-ARM"}
TOP_RULES = 10


@dataclass
class ExperimentConfig:
    dataset: str
    format: str = "matrix-csv"
    problem: str = ""
    algorithms: list[str] = field(default_factory=lambda: list(ALGORITHMS))
    variants: list[str] = field(default_factory=lambda: list(VARIANTS))
    pc: list[float] = field(default_factory=lambda: [0.8, 0.85, 0.9])
    pm: list[float] = field(default_factory=lambda: [0.1, 0.15, 0.2])
    runs: int = 30
    generations: int = 200
    pop_size: int = 50
    divisions: int = 12
    moead_divisions: int = 8
    neighbors: int = 20
    theta: float = 5.0
    base_seed: int = 0
    init: str = "auto"
    mutation_mode: str = "per-gene"
    moead_dedup_working_set: bool = False
    ratio_mode: str = "ratio-of-means"
    truefront_pop: int = 500
    truefront_generations: int = 500
    no_truefront: bool = False
    zeff: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if isinstance(self.algorithms, str):
            self.algorithms = [self.algorithms]
        if isinstance(self.variants, str):
            self.variants = [self.variants]
        if isinstance(self.pc, (int, float)):
            self.pc = [self.pc]
        if isinstance(self.pm, (int, float)):
            self.pm = [self.pm]
        if not self.pc or not self.pm:
            raise InputError("parameter grids must be non-empty")
        if self.runs < 1:
            raise InputError("runs must be at least 1")
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise InputError(f"unknown algorithm {a!r}; expected one of {ALGORITHMS}")
        for v in self.variants:
            if v not in VARIANTS:
                raise InputError(f"unknown variant {v!r}; expected one of {VARIANTS}")
        if not self.problem:
            self.problem = Path(self.dataset).stem

    @classmethod
    def from_toml(cls, path: str | Path) -> ExperimentConfig:
        path = Path(path)
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise InputError(f"unknown config keys: {sorted(unknown)}")
        if "dataset" not in raw:
            raise InputError("config needs a 'dataset' key")
        base = path.parent
        raw["dataset"] = str(base / raw["dataset"])
        raw["zeff"] = {k: str(base / v) for k, v in raw.get("zeff", {}).items()}
        return cls(**raw)


def derive_seed(*parts) -> int:
    """Stable 63-bit seed from arbitrary parts; independent of Python's hash randomization."""
    digest = hashlib.sha256(repr(parts).encode()).digest()
    return int.from_bytes(digest[:8], "big") & (2**63 - 1)


@dataclass(frozen=True)
class RunTask:
    algorithm: str
    variant: str
    cell: int
    pc: float
    pm: float
    run: int
    seed: int


@dataclass
class RunRecord:
    task: RunTask
    rules: list[Rule]
    objectives: np.ndarray
    evaluations: int
    seconds: float
    hv: float = 0.0
    igd: float = 0.0
    clamped: int = 0


def run_algorithm(
    db: TransactionDatabase,
    algorithm: str,
    variant: str,
    *,
    pc: float,
    pm: float,
    generations: int,
    seed: int,
    pop_size: int = 50,
    divisions: int = 12,
    moead_divisions: int = 8,
    neighbors: int = 20,
    theta: float = 5.0,
    init: str = "auto",
    mutation_mode: str = "per-gene",
    moead_dedup_working_set: bool = False,
):
    variation = VariationParams(pc, pm, resolve_init_strategy(db, init), mutation_mode)
    if algorithm == "nsga3":
        params = Nsga3Params(pop_size, generations, divisions, variation, seed, track_archive=False)
        return run_nsga3(db, variant, params)
    if algorithm == "moead":
        params = MoeadParams(
            moead_divisions,
            neighbors,
            generations,
            theta,
            variation,
            seed,
            dedup_working_set=moead_dedup_working_set,
            track_archive=False,
        )
        return run_moead(db, variant, params)
    raise InputError(f"unknown algorithm {algorithm!r}")


def _execute(args) -> RunRecord:
    db, config, task = args
    start = time.perf_counter()
    out = run_algorithm(
        db,
        task.algorithm,
        task.variant,
        pc=task.pc,
        pm=task.pm,
        generations=config.generations,
        seed=task.seed,
        pop_size=config.pop_size,
        divisions=config.divisions,
        moead_divisions=config.moead_divisions,
        neighbors=config.neighbors,
        theta=config.theta,
        init=config.init,
        mutation_mode=config.mutation_mode,
        moead_dedup_working_set=config.moead_dedup_working_set,
    )
    return RunRecord(task, out.rules, out.objectives, out.evaluations, time.perf_counter() - start)


@dataclass
class FrequencyRow:
    rule: Rule
    frequency: int
    metrics: RuleMetrics
    key: str


def rule_frequency_table(
    fronts: Sequence[Sequence[Rule]], db: TransactionDatabase
) -> list[FrequencyRow]:
    """Count distinct rules across fronts, most frequent first.

    Ties break on support (descending) and then on the rule's JSON rendering.
    """
    if not fronts:
        raise InputError("at least one front is required")
    counts: dict[Rule, int] = {}
    for front in fronts:
        for rule in set(front):
            counts[rule] = counts.get(rule, 0) + 1
    rows = []
    for rule, freq in counts.items():
        metrics = evaluate_rule(rule, db)
        key = json.dumps(rule_to_json(rule, metrics, db.item_names), sort_keys=True)
        rows.append(FrequencyRow(rule, freq, metrics, key))
    rows.sort(key=lambda r: (-r.frequency, -r.metrics.support, r.key))
    return rows


@dataclass
class CellSummary:
    algorithm: str
    variant: str
    cell: int
    pc: float
    pm: float
    mean_hv: float
    mean_igd: float
    ratio: float
    evaluations: int
    clamped: int
    best: bool = False


@dataclass
class AggregateReport:
    algorithm: str
    variant: str
    cells: list[CellSummary]
    best_cell: CellSummary
    top_rules: list[FrequencyRow]
    runs: int


def score_runs(records: list[RunRecord], fronts: dict[str, FrontApproximation]) -> None:
    for rec in records:
        front = fronts[rec.task.variant]
        rec.igd = normalized_igd(rec.objectives, front)
        rec.hv, rec.clamped = normalized_hypervolume(rec.objectives, front)


def aggregate(
    records: list[RunRecord], db: TransactionDatabase, ratio_mode: str = "ratio-of-means"
) -> list[AggregateReport]:
    """Reduce scored run records, in (algorithm, variant, cell, run) order, to reports."""
    groups: dict[tuple[str, str], dict[int, list[RunRecord]]] = {}
    for rec in sorted(records, key=lambda r: (r.task.algorithm, r.task.variant, r.task.cell, r.task.run)):
        groups.setdefault((rec.task.algorithm, rec.task.variant), {}).setdefault(rec.task.cell, []).append(rec)
    reports = []
    for (algo, variant), cells in groups.items():
        summaries = []
        for cell, recs in sorted(cells.items()):
            t = recs[0].task
            summaries.append(
                CellSummary(
                    algo,
                    variant,
                    cell,
                    t.pc,
                    t.pm,
                    float(np.mean([r.hv for r in recs])),
                    float(np.mean([r.igd for r in recs])),
                    hv_igd_ratio([(r.hv, r.igd) for r in recs], ratio_mode),
                    sum(r.evaluations for r in recs),
                    sum(r.clamped for r in recs),
                )
            )
        best = min(summaries, key=lambda s: (-s.ratio, s.pc, s.pm))
        best.best = True
        best_runs = cells[best.cell]
        table = rule_frequency_table([r.rules for r in best_runs], db)[:TOP_RULES]
        reports.append(AggregateReport(algo, variant, summaries, best, table, len(best_runs)))
    return reports


def _fmt(x: float) -> str:
    return format_ratio(x)


def framework_name(algorithm: str, variant: str) -> str:
    return f"{FRAMEWORK_NAMES[algorithm]}-{variant.upper()}"


def write_reports(reports: list[AggregateReport], db: TransactionDatabase, problem: str, out_dir: str | Path) -> None:
    """Per-variant indicator tables, per-framework rule tables and one JSON document."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    variants = sorted({r.variant for r in reports})
    for variant in variants:
        subset = [r for r in reports if r.variant == variant]
        with open(out / f"hv_igd_{variant}.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["problem", "framework", "prob cross", "prob mut", "mean hv", "mean igd", "hv/igd", "best", "evaluations", "clamped"])
            for rep in subset:
                for c in rep.cells:
                    w.writerow([problem, framework_name(c.algorithm, c.variant), c.pc, c.pm, _fmt(c.mean_hv), _fmt(c.mean_igd), _fmt(c.ratio), "*" if c.best else "", c.evaluations, c.clamped])
        with open(out / f"best_{variant}.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["problem", "framework", "prob cross", "prob mut", "hv/igd"])
            for rep in subset:
                b = rep.best_cell
                w.writerow([problem, framework_name(b.algorithm, b.variant), b.pc, b.pm, _fmt(b.ratio)])
    for rep in reports:
        names = OBJECTIVE_NAMES[rep.variant]
        with open(out / f"rules_{rep.algorithm}_{rep.variant}.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["frequency", "antecedent", "consequent", *names])
            for row in rep.top_rules:
                info = rule_to_json(row.rule, row.metrics, db.item_names)
                w.writerow([row.frequency, ",".join(info["antecedent"]), ",".join(info["consequent"]), *(f"{info[n]:.4f}" for n in names)])
    doc = {"problem": problem, "reports": [_report_json(r, db) for r in reports]}
    (out / "report.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _jsonable(x: float):
    return "inf" if math.isinf(x) else x


def _report_json(rep: AggregateReport, db: TransactionDatabase) -> dict:
    cells = []
    for c in rep.cells:
        d = asdict(c)
        d["ratio"] = _jsonable(c.ratio)
        cells.append(d)
    return {
        "algorithm": rep.algorithm,
        "framework": framework_name(rep.algorithm, rep.variant),
        "variant": rep.variant,
        "runs_per_cell": rep.runs,
        "cells": cells,
        "best_cell": {"pc": rep.best_cell.pc, "pm": rep.best_cell.pm, "ratio": _jsonable(rep.best_cell.ratio)},
        "top_rules": [
            {"frequency": r.frequency, **rule_to_json(r.rule, r.metrics, db.item_names)} for r in rep.top_rules
        ],
    }


def reference_fronts(config: ExperimentConfig, db: TransactionDatabase, out_dir: Path) -> dict[str, FrontApproximation]:
    fronts = {}
    for variant in config.variants:
        if variant in config.zeff:
            fronts[variant] = FrontApproximation.from_points(read_front(config.zeff[variant]))
            continue
        if config.no_truefront:
            raise MissingReferenceFront(f"no reference front for {variant} and true-front computation disabled")
        log.info("approximating true front for %s", variant)
        front = approximate_true_front(
            db,
            variant,
            derive_seed(config.base_seed, "truefront", variant),
            pop_size=config.truefront_pop,
            generations=config.truefront_generations,
            init_strategy=resolve_init_strategy(db, config.init),
        )
        write_front(out_dir / f"zeff_{variant}.csv", front.points)
        fronts[variant] = front
    return fronts


def build_tasks(config: ExperimentConfig) -> list[RunTask]:
    tasks = []
    for algo in config.algorithms:
        for variant in config.variants:
            cell = 0
            for pc in config.pc:
                for pm in config.pm:
                    for run in range(config.runs):
                        seed = derive_seed(config.base_seed, algo, variant, pc, pm, run)
                        tasks.append(RunTask(algo, variant, cell, pc, pm, run, seed))
                    cell += 1
    return tasks


def run_experiment(config: ExperimentConfig, out_dir: str | Path, workers: int = 1) -> list[AggregateReport]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    db = load_transactions(config.dataset, config.format)
    fronts = reference_fronts(config, db, out)
    tasks = build_tasks(config)
    jobs = [(db, config, t) for t in tasks]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_execute, jobs, chunksize=4))
    else:
        records = [_execute(j) for j in jobs]
    score_runs(records, fronts)
    reports = aggregate(records, db, config.ratio_mode)
    write_reports(reports, db, config.problem, out)
    # wall-clock varies between runs, so it lives outside the reproducible reports
    with open(out / "timings.txt", "w", encoding="utf-8") as fh:
        for rec in records:
            t = rec.task
            fh.write(f"{t.algorithm}\t{t.variant}\t{t.pc}\t{t.pm}\t{t.run}\t{rec.seconds:.3f}\t{rec.evaluations}\n")
    return reports


def mine_params_pop(algorithm: str, pop: int | None) -> dict:
    """Map a requested population size onto each optimizer's knobs."""
    if algorithm == "moead":
        return {"moead_divisions": divisions_for(pop) if pop else 8}
    return {"pop_size": pop or 50}
