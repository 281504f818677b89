from math import comb

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from moarm.dataset import from_rows, generate_synthetic
from moarm.errors import InputError, InstanceTooLarge, InvalidRule
from moarm.oracle import (
    _pareto_filter,
    enumerate_rules,
    exact_pareto_front,
    naive_evaluate,
    structural_rules,
)
from moarm.pareto import dominates, nondominated_mask
from moarm.rules import Rule, evaluate_rule, objective_vector
from moarm.variation import random_rule


class TestEnumeration:
    @pytest.mark.parametrize("m,count", [(2, 2), (3, 9)])
    def test_small_counts(self, m, count):
        assert len(list(structural_rules(m))) == count

    @pytest.mark.parametrize("m", range(2, 10))
    def test_closed_form(self, m):
        rules = list(structural_rules(m))
        assert len(rules) == len(set(rules)) == m * (2 ** (m - 1) - 1)
        assert all(r.is_valid for r in rules)

    def test_cap(self):
        m = 12
        assert len(list(structural_rules(m, 3))) == m * sum(comb(m - 1, k) for k in (1, 2, 3))

    def test_d5_all_supported(self, d5):
        assert len(list(enumerate_rules(d5))) == 9

    def test_support_filter(self):
        db = from_rows([{0, 1}, {2}], "ABC")
        rules = list(enumerate_rules(db))
        assert {(r.antecedent, r.consequent) for r in rules} == {((0,), (1,)), ((1,), (0,))}

    def test_too_large(self):
        db = generate_synthetic(30, 21, 0.3, seed=0)
        with pytest.raises(InstanceTooLarge):
            next(enumerate_rules(db))
        assert next(enumerate_rules(db, max_antecedent=1)).is_valid

    def test_bad_cap(self, d5):
        with pytest.raises(InputError):
            next(enumerate_rules(d5, max_antecedent=0))


class TestNaiveEvaluate:
    def test_d5(self, d5):
        rule = Rule.from_items([0], 1, 3)
        m = naive_evaluate(rule, d5)
        assert (m.support, m.confidence, m.lift, m.interestingness) == (0.6, 0.75, 0.9375, 0.225)

    def test_zero_support(self):
        db = from_rows([{0, 1}, {2}], "ABC")
        with pytest.raises(InvalidRule):
            naive_evaluate(Rule.from_items([0], 2, 3), db)

    def test_agrees_with_bitset_path(self, small_db):
        rng = np.random.default_rng(0)
        checked = 0
        while checked < 1000:
            rule = random_rule(small_db.n_items, rng)
            try:
                expected = naive_evaluate(rule, small_db)
            except InvalidRule:
                with pytest.raises(InvalidRule):
                    evaluate_rule(rule, small_db)
                continue
            assert evaluate_rule(rule, small_db) == expected
            checked += 1


class TestExactFront:
    def test_d5(self, d5):
        # every single-antecedent rule ties at (3/5, 3/4, 15/16, 9/40); the rest are dominated
        for variant in ("v1", "v2"):
            front = exact_pareto_front(d5, variant)
            assert len(front.rules) == 6
            assert all(len(r.antecedent) == 1 for r in front.rules)
        front = exact_pareto_front(d5, "v1")
        np.testing.assert_array_equal(np.unique(front.objectives, axis=0), [[0.6, 0.75, 0.9375]])

    def test_d5_two_item_antecedent_is_dominated(self, d5):
        rule = Rule.from_items([0, 2], 1, 3)
        m = naive_evaluate(rule, d5)
        assert (m.support, m.confidence) == (0.4, 2 / 3)
        assert m.lift == pytest.approx(5 / 6)
        assert m.interestingness == pytest.approx(0.2)
        assert rule not in exact_pareto_front(d5, "v1").rules

    def test_single_rule_instance(self):
        # only A->B and B->A have support; A never appears without B, so A->B wins on confidence
        db = from_rows([{0, 1}, {1}, {2}], "ABC")
        front = exact_pareto_front(db, "v1")
        assert front.rules == [Rule.from_items([0], 1, 3)]
        np.testing.assert_allclose(front.objectives, [[1 / 3, 1.0, 1.5]])

    def test_covers_every_rule(self, small_db):
        front = exact_pareto_front(small_db, "v2")
        assert nondominated_mask(front.objectives).all()
        for rule in enumerate_rules(small_db):
            v = np.array(objective_vector(evaluate_rule(rule, small_db), "v2"))
            assert rule in front.rules or any(dominates(f, v) for f in front.objectives)

    def test_deterministic(self, small_db):
        a, b = exact_pareto_front(small_db, "v1"), exact_pareto_front(small_db, "v1")
        assert a.rules == b.rules

    @given(st.integers(0, 2**32 - 1))
    def test_filter_matches_mask_and_is_idempotent(self, seed):
        objs = np.random.default_rng(seed).integers(0, 5, size=(60, 3)).astype(float)
        keep = _pareto_filter(objs)
        assert keep == np.flatnonzero(nondominated_mask(objs)).tolist()
        assert _pareto_filter(objs[keep]) == list(range(len(keep)))
