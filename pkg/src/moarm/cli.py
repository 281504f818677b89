"""Command-line interface: mine, truefront, experiment, oracle, indicators."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import harness
from .dataset import FORMATS, load_transactions
from .errors import InfeasibleError, InputError
from .oracle import exact_pareto_front, naive_evaluate
from .quality import (
    FrontApproximation,
    approximate_true_front,
    normalized_hypervolume,
    normalized_igd,
    read_front,
    write_front,
)
from .rules import VARIANTS, rule_to_json
from .variation import INIT_STRATEGIES, resolve_init_strategy

EXIT_INPUT = 2
EXIT_INFEASIBLE = 3


def _dataset_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dataset", required=True, type=Path)
    p.add_argument("--format", choices=FORMATS, default="matrix-csv")


def _write_rules(path: Path, rules, db) -> None:
    from .rules import evaluate_rule

    doc = [rule_to_json(r, evaluate_rule(r, db), db.item_names) for r in rules]
    doc.sort(key=lambda d: json.dumps(d, sort_keys=True))
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def cmd_mine(args) -> int:
    db = load_transactions(args.dataset, args.format)
    out = harness.run_algorithm(
        db,
        args.algo,
        args.variant,
        pc=args.pc,
        pm=args.pm,
        generations=args.gens,
        seed=args.seed,
        theta=args.theta,
        init=args.init,
        **harness.mine_params_pop(args.algo, args.pop),
    )
    args.out.mkdir(parents=True, exist_ok=True)
    write_front(args.out / "front.csv", out.objectives)
    _write_rules(args.out / "rules.json", out.rules, db)
    print(f"{len(out.rules)} non-dominated rules written to {args.out}")
    return 0


def cmd_truefront(args) -> int:
    db = load_transactions(args.dataset, args.format)
    front = approximate_true_front(
        db,
        args.variant,
        args.seed,
        pop_size=args.pop,
        generations=args.gens,
        init_strategy=resolve_init_strategy(db, args.init),
    )
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_front(args.out, front.points)
    print(f"{len(front)} reference points written to {args.out}")
    return 0


def cmd_experiment(args) -> int:
    config = harness.ExperimentConfig.from_toml(args.config)
    reports = harness.run_experiment(config, args.out, workers=args.workers)
    for rep in reports:
        b = rep.best_cell
        print(f"{harness.framework_name(rep.algorithm, rep.variant)}: best pc={b.pc} pm={b.pm} hv/igd={harness._fmt(b.ratio)}")
    return 0


def cmd_oracle(args) -> int:
    db = load_transactions(args.dataset, args.format)
    front = exact_pareto_front(db, args.variant, args.max_antecedent)
    args.out.mkdir(parents=True, exist_ok=True)
    write_front(args.out / "front.csv", front.objectives)
    doc = [rule_to_json(r, naive_evaluate(r, db), db.item_names) for r in front.rules]
    doc.sort(key=lambda d: json.dumps(d, sort_keys=True))
    (args.out / "rules.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"{len(front.rules)} exact Pareto-optimal rules written to {args.out}")
    return 0


def cmd_indicators(args) -> int:
    zeff = FrontApproximation.from_points(read_front(args.zeff))
    points = read_front(args.front)
    hv, clamped = normalized_hypervolume(points, zeff)
    ig = normalized_igd(points, zeff)
    print(f"hv\t{hv!r}")
    print(f"igd\t{ig!r}")
    print(f"clamped\t{clamped}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="moarm", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mine", help="run one optimizer and write its non-dominated rules")
    _dataset_args(p)
    p.add_argument("--algo", choices=harness.ALGORITHMS, required=True)
    p.add_argument("--variant", choices=VARIANTS, required=True)
    p.add_argument("--pc", type=float, default=0.9)
    p.add_argument("--pm", type=float, default=0.1)
    p.add_argument("--gens", type=int, default=200)
    p.add_argument("--pop", type=int, default=None, help="NSGA-III population (default 50); MOEA/D weight count (default 45)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--init", choices=INIT_STRATEGIES, default="auto")
    p.add_argument("--theta", type=float, default=5.0)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("truefront", help="approximate the true Pareto front with a large NSGA-III run")
    _dataset_args(p)
    p.add_argument("--variant", choices=VARIANTS, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pop", type=int, default=500)
    p.add_argument("--gens", type=int, default=500)
    p.add_argument("--init", choices=INIT_STRATEGIES, default="auto")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_truefront)

    p = sub.add_parser("experiment", help="run a parameter-grid experiment from a TOML config")
    p.add_argument("--config", type=Path, required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("oracle", help="enumerate rules and write the exact Pareto front")
    _dataset_args(p)
    p.add_argument("--variant", choices=VARIANTS, required=True)
    p.add_argument("--max-antecedent", type=int, default=None)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("indicators", help="HV and IGD of a front file against a reference front file")
    p.add_argument("--front", type=Path, required=True)
    p.add_argument("--zeff", type=Path, required=True)
    p.set_defaults(func=cmd_indicators)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
