import csv
import json
import math

import numpy as np
import pytest

from moarm import cli
from moarm.dataset import generate_synthetic, load_transactions
from moarm.errors import InputError, MissingReferenceFront
from moarm.harness import (
    ExperimentConfig,
    RunRecord,
    RunTask,
    aggregate,
    build_tasks,
    derive_seed,
    rule_frequency_table,
    run_experiment,
    write_reports,
)
from moarm.quality import read_front, write_front
from moarm.rules import Rule, evaluate_rule


def rules_for(db):
    return [Rule.from_items([0], 1, db.n_items), Rule.from_items([1], 0, db.n_items), Rule.from_items([0, 1], 2, db.n_items)]


@pytest.fixture(scope="module")
def data_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "syn.csv"
    path.write_text(generate_synthetic(80, 6, 0.4, seed=5).to_matrix_csv())
    return path


def write_config(path, data_file, **extra):
    lines = [
        f'dataset = "{data_file}"',
        "runs = 2",
        "generations = 5",
        "pop_size = 12",
        "divisions = 3",
        "moead_divisions = 3",
        "neighbors = 4",
        "pc = [0.8, 0.9]",
        "pm = [0.1]",
        "truefront_pop = 30",
        "truefront_generations = 10",
        "base_seed = 7",
    ]
    lines += [f"{k} = {json.dumps(v)}" for k, v in extra.items()]
    path.write_text("\n".join(lines) + "\n")
    return path


class TestFrequencyTable:
    def test_hand_count(self, small_db):
        r1, r2, r3 = rules_for(small_db)
        table = rule_frequency_table([{r1, r2}, {r1}, {r1, r3}], small_db)
        assert [(row.rule, row.frequency) for row in table][0] == (r1, 3)
        assert sorted(row.frequency for row in table) == [1, 1, 3]

    def test_identical_fronts(self, small_db):
        r1 = rules_for(small_db)[0]
        table = rule_frequency_table([[r1]] * 3, small_db)
        assert len(table) == 1 and table[0].frequency == 3

    def test_disjoint_fronts_tie_on_support(self, small_db):
        rules = rules_for(small_db)
        table = rule_frequency_table([[r] for r in rules], small_db)
        assert all(row.frequency == 1 for row in table)
        supports = [row.metrics.support for row in table]
        assert supports == sorted(supports, reverse=True)

    def test_empty(self, small_db):
        with pytest.raises(InputError):
            rule_frequency_table([], small_db)


class TestConfig:
    def test_seeds_are_stable_and_distinct(self):
        assert derive_seed(0, "nsga3", "v1", 0.8, 0.1, 0) == derive_seed(0, "nsga3", "v1", 0.8, 0.1, 0)
        assert derive_seed(0, "nsga3", "v1", 0.8, 0.1, 0) != derive_seed(0, "nsga3", "v1", 0.8, 0.1, 1)

    def test_default_grid(self, data_file):
        tasks = build_tasks(ExperimentConfig(dataset=str(data_file)))
        assert len(tasks) == 9 * 30 * 2 * 2
        assert len({t.seed for t in tasks}) == len(tasks)

    def test_adding_cells_keeps_seeds(self, data_file):
        small = build_tasks(ExperimentConfig(dataset=str(data_file), pc=[0.8], pm=[0.1]))
        big = build_tasks(ExperimentConfig(dataset=str(data_file)))
        big_seeds = {(t.algorithm, t.variant, t.pc, t.pm, t.run): t.seed for t in big}
        assert all(big_seeds[(t.algorithm, t.variant, t.pc, t.pm, t.run)] == t.seed for t in small)

    def test_toml_relative_paths(self, tmp_path, data_file):
        (tmp_path / "d.csv").write_text(data_file.read_text())
        cfg_path = tmp_path / "c.toml"
        cfg_path.write_text('dataset = "d.csv"\nruns = 3\nalgorithms = ["moead"]\n')
        cfg = ExperimentConfig.from_toml(cfg_path)
        assert cfg.dataset == str(tmp_path / "d.csv")
        assert cfg.runs == 3 and cfg.algorithms == ["moead"]
        assert cfg.problem == "d"

    @pytest.mark.parametrize(
        "body",
        ['dataset = "x.csv"\nbogus = 1\n', "runs = 3\n", 'dataset = "x.csv"\nruns = 0\n', 'dataset = "x.csv"\npc = []\n'],
    )
    def test_invalid(self, tmp_path, body):
        (tmp_path / "c.toml").write_text(body)
        with pytest.raises(InputError):
            ExperimentConfig.from_toml(tmp_path / "c.toml")


class TestAggregate:
    def make_records(self, db, igds):
        rule = rules_for(db)[0]
        obj = np.array([[0.1, 0.2, 0.3]])
        records = []
        for cell, (pc, pm) in enumerate([(0.8, 0.1), (0.9, 0.1)]):
            for run, value in enumerate(igds[cell]):
                rec = RunRecord(RunTask("nsga3", "v1", cell, pc, pm, run, 0), [rule], obj, 10, 0.0)
                rec.hv, rec.igd = 0.5, value
                records.append(rec)
        return records

    def test_best_cell_and_inf(self, small_db, tmp_path):
        reports = aggregate(self.make_records(small_db, [[0.1, 0.3], [0.0, 0.0]]), small_db)
        (rep,) = reports
        assert rep.cells[0].ratio == pytest.approx(2.5)
        assert math.isinf(rep.cells[1].ratio)
        assert rep.best_cell.pc == 0.9 and rep.best_cell.best
        assert rep.top_rules[0].frequency == 2
        write_reports(reports, small_db, "toy", tmp_path)
        with open(tmp_path / "hv_igd_v1.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert rows[1]["hv/igd"] == "inf" and rows[1]["best"] == "*"
        assert rows[0]["hv/igd"] == "2.5000"
        doc = json.loads((tmp_path / "report.json").read_text())
        assert doc["reports"][0]["best_cell"]["ratio"] == "inf"

    def test_tie_prefers_smallest_parameters(self, small_db):
        (rep,) = aggregate(self.make_records(small_db, [[0.2], [0.2]]), small_db)
        assert rep.best_cell.pc == 0.8


class TestExperiment:
    def test_end_to_end_and_reproducible(self, tmp_path, data_file):
        cfg = ExperimentConfig.from_toml(write_config(tmp_path / "c.toml", data_file))
        reports = run_experiment(cfg, tmp_path / "a")
        run_experiment(cfg, tmp_path / "b")
        assert len(reports) == 4
        names = sorted(p.name for p in (tmp_path / "a").iterdir())
        assert names == sorted(
            ["best_v1.csv", "best_v2.csv", "hv_igd_v1.csv", "hv_igd_v2.csv", "report.json", "timings.txt", "zeff_v1.csv", "zeff_v2.csv"]
            + [f"rules_{a}_{v}.csv" for a in ("moead", "nsga3") for v in ("v1", "v2")]
        )
        for name in names:
            if name != "timings.txt":
                assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), name
        db = load_transactions(data_file)
        for rep in reports:
            assert all(row.frequency <= cfg.runs for row in rep.top_rules)
            for row in rep.top_rules:
                m = evaluate_rule(row.rule, db)
                assert m.confidence >= m.support

    def test_supplied_reference_front(self, tmp_path, data_file):
        write_front(tmp_path / "z1.csv", [(0.1, 0.5, 1.2), (0.3, 0.4, 1.0)])
        cfg_path = write_config(
            tmp_path / "c.toml", data_file, variants=["v1"], algorithms=["nsga3"], no_truefront=True
        )
        with open(cfg_path, "a") as fh:
            fh.write('[zeff]\nv1 = "z1.csv"\n')
        cfg = ExperimentConfig.from_toml(cfg_path)
        run_experiment(cfg, tmp_path / "out")
        assert not (tmp_path / "out" / "zeff_v1.csv").exists()

    def test_missing_reference_front(self, tmp_path, data_file):
        cfg = ExperimentConfig.from_toml(write_config(tmp_path / "c.toml", data_file, no_truefront=True))
        with pytest.raises(MissingReferenceFront):
            run_experiment(cfg, tmp_path / "out")


class TestCli:
    def test_mine(self, tmp_path, data_file, capsys):
        args = ["mine", "--dataset", str(data_file), "--algo", "nsga3", "--variant", "v2", "--gens", "5", "--pop", "12", "--out", str(tmp_path)]
        assert cli.main(args) == 0
        rules = json.loads((tmp_path / "rules.json").read_text())
        assert len(read_front(tmp_path / "front.csv")) == len(rules) > 0
        assert {"antecedent", "consequent", "confidence", "lift", "interestingness"} <= set(rules[0])

    def test_mine_moead(self, tmp_path, data_file):
        args = ["mine", "--dataset", str(data_file), "--algo", "moead", "--variant", "v1", "--gens", "3", "--pop", "45", "--out", str(tmp_path)]
        assert cli.main(args) == 0

    def test_oracle_and_indicators(self, tmp_path, data_file, capsys):
        assert cli.main(["oracle", "--dataset", str(data_file), "--variant", "v1", "--out", str(tmp_path)]) == 0
        front = tmp_path / "front.csv"
        capsys.readouterr()
        assert cli.main(["indicators", "--front", str(front), "--zeff", str(front)]) == 0
        out = dict(line.split("\t") for line in capsys.readouterr().out.splitlines())
        assert float(out["igd"]) == 0.0
        assert out["clamped"] == "0"

    def test_truefront(self, tmp_path, data_file):
        out = tmp_path / "z.csv"
        args = ["truefront", "--dataset", str(data_file), "--variant", "v1", "--pop", "20", "--gens", "3", "--out", str(out)]
        assert cli.main(args) == 0
        assert len(read_front(out)) > 0

    def test_experiment(self, tmp_path, data_file):
        cfg = write_config(tmp_path / "c.toml", data_file, algorithms=["moead"], variants=["v2"])
        assert cli.main(["experiment", "--config", str(cfg), "--workers", "1", "--out", str(tmp_path / "o")]) == 0
        assert (tmp_path / "o" / "rules_moead_v2.csv").exists()

    def test_malformed_input_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("A,B\n1,x\n")
        assert cli.main(["oracle", "--dataset", str(bad), "--variant", "v1", "--out", str(tmp_path)]) == 2
        assert "error" in capsys.readouterr().err

    def test_missing_file_exits_2(self, tmp_path):
        assert cli.main(["oracle", "--dataset", str(tmp_path / "nope.csv"), "--variant", "v1", "--out", str(tmp_path)]) == 2

    def test_infeasible_exits_3(self, tmp_path, capsys):
        # two items admit only two rules, far fewer than the population
        tiny = tmp_path / "tiny.csv"
        tiny.write_text("A,B\n1,1\n1,0\n")
        args = ["mine", "--dataset", str(tiny), "--algo", "nsga3", "--variant", "v1", "--gens", "1", "--out", str(tmp_path)]
        assert cli.main(args) == 3
        assert "infeasible" in capsys.readouterr().err
