import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from moarm.dataset import generate_synthetic
from moarm.errors import DegenerateWeight, InputError, NeighborhoodOverdraw
from moarm.moead import MoeadParams, MoeadTrace, neighborhoods, pbi_many, pbi_scalar, run_moead
from moarm.nsga3 import das_dennis
from moarm.oracle import exact_pareto_front
from moarm.pareto import dominates


@pytest.fixture(scope="module")
def db():
    return generate_synthetic(100, 5, 0.4, seed=11)


class TestPbi:
    def test_at_ideal(self):
        assert pbi_scalar((0.2, 0.3, 0.5), (1, 1, 1), (0.2, 0.3, 0.5)) == 0.0

    def test_on_ray(self):
        w = np.array([1.0, 2.0, 2.0])
        assert pbi_scalar(2.5 * w / 3, w, (0, 0, 0)) == pytest.approx(2.5)

    def test_off_ray(self):
        assert pbi_scalar((1, 1, 0), (1, 0, 0), (0, 0, 0), theta=5) == pytest.approx(6.0)

    def test_zero_weight(self):
        with pytest.raises(DegenerateWeight):
            pbi_scalar((1, 1, 1), (0, 0, 0), (0, 0, 0))
        with pytest.raises(DegenerateWeight):
            pbi_many(np.ones((1, 3)), np.zeros((1, 3)), np.zeros(3), 5.0)

    @given(st.integers(0, 2**32 - 1))
    def test_vectorized_agrees(self, seed):
        rng = np.random.default_rng(seed)
        costs = rng.random((10, 3))
        weights = rng.random((10, 3)) + 0.01
        ideal = rng.random(3) * 0.1
        many = pbi_many(costs, weights, ideal, 5.0)
        single = [pbi_scalar(c, w, ideal) for c, w in zip(costs, weights)]
        np.testing.assert_allclose(many, single, rtol=1e-12)


class TestNeighborhoods:
    def test_self_first_and_nearest(self):
        w = das_dennis(8).points
        hood = neighborhoods(w, 20)
        assert hood.shape == (45, 20)
        assert np.array_equal(hood[:, 0], np.arange(45))
        dist = np.linalg.norm(w[:, None] - w[None], axis=2)
        for i in range(45):
            assert dist[i, hood[i]].max() <= np.sort(dist[i])[19] + 1e-12

    def test_overdraw(self):
        with pytest.raises(NeighborhoodOverdraw):
            neighborhoods(das_dennis(1).points, 4)

    def test_too_small(self):
        with pytest.raises(InputError):
            neighborhoods(das_dennis(2).points, 1)


class TestRun:
    def test_trace_invariants(self, db):
        trace = MoeadTrace()
        run_moead(db, "v1", MoeadParams(divisions=4, neighbors=5, generations=10, seed=3), trace)
        ideal = np.array(trace.ideal)
        assert np.all(np.diff(ideal, axis=0) >= 0)
        assert trace.replacements
        assert all(g_new <= g_old for *_, g_new, g_old in trace.replacements)

    def test_zero_generations(self, db):
        trace = MoeadTrace()
        out = run_moead(db, "v2", MoeadParams(divisions=4, neighbors=5, generations=0, seed=3), trace)
        assert not trace.replacements
        assert len(out.history) == 1

    def test_deterministic(self, db):
        params = MoeadParams(divisions=4, neighbors=5, generations=10, seed=9)
        a, b = run_moead(db, "v1", params), run_moead(db, "v1", params)
        assert a.rules == b.rules
        np.testing.assert_array_equal(a.objectives, b.objectives)

    @pytest.mark.parametrize("decomposition", ["pbi", "tchebycheff"])
    def test_output_mutually_non_dominated(self, small_db, decomposition):
        params = MoeadParams(divisions=6, neighbors=8, generations=20, seed=1, decomposition=decomposition)
        out = run_moead(small_db, "v2", params)
        assert len(set(out.rules)) == len(out.rules)
        for a in out.objectives:
            assert not any(dominates(b, a) for b in out.objectives)

    def test_dedup_working_set(self, db):
        params = MoeadParams(divisions=4, neighbors=5, generations=10, seed=2, dedup_working_set=True)
        assert run_moead(db, "v1", params).rules

    @pytest.mark.parametrize("variant", ["v1", "v2"])
    def test_subset_of_exact_front(self, db, variant):
        exact = set(exact_pareto_front(db, variant).rules)
        out = run_moead(db, variant, MoeadParams(generations=200, seed=4))
        assert set(out.rules) <= exact

    def test_bad_params(self):
        with pytest.raises(InputError):
            MoeadParams(theta=-1)
        with pytest.raises(InputError):
            MoeadParams(decomposition="weighted-sum")
