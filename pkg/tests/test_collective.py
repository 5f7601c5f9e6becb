import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from swarmsense import (
    SensingRequirement,
    brute_force,
    build_tree,
    greedy_select,
    optimize,
    rss,
    unit_scale,
)
from swarmsense.collective import read_selection_csv, write_selection
from swarmsense.errors import (
    CombinationBoundExceeded,
    DimensionMismatchError,
    EmptyPopulationError,
)
from swarmsense.plangen import AgentPlanSet, Plan
from swarmsense.seeding import rng_for


def plan(hover, cost=None):
    hover = np.asarray(hover, dtype=float)
    route = tuple(int(c) for c in np.flatnonzero(hover))
    return Plan(hover=hover, route=route, cost=float(hover.sum()) if cost is None else cost)


def plan_set(agent_id, hovers, costs=None):
    costs = costs or [None] * len(hovers)
    return AgentPlanSet(agent_id, tuple(plan(h, c) for h, c in zip(hovers, costs)), (0.0, -0.15))


class TestBuildTree:
    def test_single_agent(self):
        tree = build_tree(1, rng_for(0, "t"))
        assert tree.levels == ((0,),)
        assert tree.parent == {}

    def test_four_agents_shape(self):
        tree = build_tree(4, rng_for(0, "t"))
        assert [len(level) for level in tree.levels] == [1, 2, 1]
        root = tree.root
        assert len(tree.children[root]) == 2
        assert sorted(a for level in tree.levels for a in level) == [0, 1, 2, 3]

    def test_seven_agents_perfect(self):
        tree = build_tree(7, rng_for(0, "t"))
        assert [len(level) for level in tree.levels] == [1, 2, 4]

    def test_empty_population(self):
        with pytest.raises(EmptyPopulationError):
            build_tree(0)

    def test_deterministic_assignment(self):
        a = build_tree(9, rng_for(4, "t"))
        b = build_tree(9, rng_for(4, "t"))
        assert a.levels == b.levels and a.parent == b.parent


class TestUnitScaleRss:
    def test_three_four_five(self):
        assert unit_scale(np.array([3.0, 4.0])).tolist() == pytest.approx([0.6, 0.8])

    def test_zero_vector(self):
        assert unit_scale(np.zeros(3)).tolist() == [0, 0, 0]

    @given(st.lists(st.floats(-50, 50), min_size=1, max_size=8))
    def test_norm_zero_or_one(self, values):
        n = np.linalg.norm(unit_scale(np.array(values)))
        assert n == pytest.approx(0.0, abs=1e-12) or n == pytest.approx(1.0, rel=1e-12)

    def test_rss_identical(self):
        v = np.array([2.0, 5.0, 1.0])
        assert rss(v, v) == pytest.approx(0.0, abs=1e-15)

    def test_rss_frozen_example(self):
        # (1 - 1/sqrt2)^2 + (1/sqrt2)^2 = 2 - sqrt2
        assert rss(np.array([1.0, 0.0]), np.array([1.0, 1.0])) == pytest.approx(
            0.5857864376269049, rel=1e-12
        )

    @given(st.floats(0.1, 50), st.floats(0.1, 50))
    def test_rss_scale_invariant(self, lam, mu):
        a = np.array([1.0, 2.0, 0.5])
        b = np.array([3.0, 0.1, 1.0])
        assert rss(lam * a, mu * b) == pytest.approx(rss(a, b), rel=1e-9, abs=1e-12)

    def test_rss_length_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            rss(np.ones(2), np.ones(3))


class TestOptimize:
    def test_single_agent_argmin(self):
        hovers = [[1, 0], [0, 1], [1, 1]]
        ps = [plan_set(0, hovers)]
        req = SensingRequirement(np.array([1.0, 1.0]))
        sel = optimize(ps, req, iterations=1, rng=rng_for(0, "t"))
        assert sel.chosen == [2]
        assert sel.rss == pytest.approx(0.0, abs=1e-15)
        more = optimize(ps, req, iterations=5, rng=rng_for(0, "t"))
        assert more.chosen == sel.chosen

    def test_two_agent_complementary(self):
        ps = [plan_set(0, [[1, 0], [0, 1]]), plan_set(1, [[1, 0], [0, 1]])]
        req = SensingRequirement(np.array([1.0, 1.0]))
        sel = optimize(ps, req, iterations=5, rng=rng_for(1, "t"))
        assert sel.aggregate.tolist() == [1.0, 1.0]
        assert sel.rss == pytest.approx(0.0, abs=1e-15)
        assert brute_force(ps, req).rss == pytest.approx(sel.rss, abs=1e-15)

    def test_trace_non_increasing(self, paper_env):
        rng = rng_for(2, "inst")
        ps = [
            plan_set(a, [rng.uniform(0, 10, 6) for _ in range(4)])
            for a in range(5)
        ]
        req = SensingRequirement(rng.uniform(0, 40, 6))
        sel = optimize(ps, req, iterations=12, rng=rng_for(2, "t"))
        assert all(b <= a + 1e-12 for a, b in zip(sel.trace, sel.trace[1:]))
        assert len(sel.trace) == 12

    def test_aggregate_exact_sum(self):
        ps = [plan_set(0, [[1, 2], [3, 0]]), plan_set(1, [[0, 1], [2, 2]])]
        req = SensingRequirement(np.array([2.0, 3.0]))
        sel = optimize(ps, req, iterations=3, rng=rng_for(3, "t"))
        expected = ps[0].plans[sel.chosen[0]].hover + ps[1].plans[sel.chosen[1]].hover
        assert np.array_equal(sel.aggregate, expected)

    def test_determinism(self):
        rng = rng_for(4, "inst")
        ps = [plan_set(a, [rng.uniform(0, 10, 4) for _ in range(3)]) for a in range(4)]
        req = SensingRequirement(np.array([1.0, 5.0, 2.0, 0.5]))
        a = optimize(ps, req, iterations=8, rng=rng_for(4, "t"))
        b = optimize(ps, req, iterations=8, rng=rng_for(4, "t"))
        assert a.chosen == b.chosen and a.trace == b.trace


class TestBruteForce:
    def test_matches_optimize_single_agent(self):
        ps = [plan_set(0, [[2, 1], [1, 2], [5, 5]])]
        req = SensingRequirement(np.array([1.0, 1.0]))
        assert brute_force(ps, req).chosen == optimize(ps, req, rng=rng_for(0, "t")).chosen

    def test_combination_guard(self):
        ps = [plan_set(a, [[1, 0], [0, 1]]) for a in range(21)]  # 2^21 > 1e6
        with pytest.raises(CombinationBoundExceeded):
            brute_force(ps, SensingRequirement(np.array([1.0, 1.0])))

    def test_tie_breaks_lexicographic(self):
        # both plans identical: every combination ties; expect (0, 0)
        ps = [plan_set(0, [[1, 1], [1, 1]]), plan_set(1, [[2, 2], [2, 2]])]
        sel = brute_force(ps, SensingRequirement(np.array([1.0, 1.0])))
        assert sel.chosen == [0, 0]

    def test_lower_bound_property(self):
        rng = rng_for(5, "inst")
        for trial in range(20):
            ps = [plan_set(a, [rng.uniform(0, 10, 3) for _ in range(3)]) for a in range(3)]
            req = SensingRequirement(rng.uniform(0, 20, 3))
            bf = brute_force(ps, req)
            opt = optimize(ps, req, iterations=6, rng=rng_for(trial, "t"))
            assert bf.rss <= opt.rss + 1e-12


class TestGreedy:
    def test_picks_min_cost(self):
        ps = [
            plan_set(0, [[1, 0], [0, 1]], costs=[5.0, 3.0]),
            plan_set(1, [[1, 0], [0, 1]], costs=[2.0, 9.0]),
        ]
        sel = greedy_select(ps)
        assert sel.chosen == [1, 0]
        assert math.isnan(sel.rss)

    def test_tie_lowest_index(self):
        ps = [plan_set(0, [[1, 0], [0, 1], [1, 1]], costs=[4.0, 4.0, 7.0])]
        assert greedy_select(ps).chosen == [0]

    def test_pointwise_minimum(self):
        rng = rng_for(6, "inst")
        ps = [
            plan_set(a, [rng.uniform(0, 5, 3) for _ in range(4)],
                     costs=list(rng.uniform(1, 100, 4)))
            for a in range(3)
        ]
        sel = greedy_select(ps)
        for a, idx in enumerate(sel.chosen):
            assert all(ps[a].plans[idx].cost <= p.cost for p in ps[a].plans)

    def test_rss_filled_when_requirement_given(self):
        ps = [plan_set(0, [[1, 0]], costs=[1.0])]
        sel = greedy_select(ps, SensingRequirement(np.array([1.0, 0.0])))
        assert sel.rss == pytest.approx(0.0, abs=1e-15)


def test_selection_file_roundtrip(tmp_path):
    ps = [plan_set(0, [[1, 0], [0, 1]]), plan_set(1, [[1, 0], [0, 1]])]
    req = SensingRequirement(np.array([1.0, 1.0]))
    sel = optimize(ps, req, iterations=2, rng=rng_for(0, "t"))
    csv_path, json_path = tmp_path / "sel.csv", tmp_path / "sel.json"
    write_selection(sel, csv_path, json_path)
    assert read_selection_csv(csv_path) == sel.chosen
    assert json_path.exists()
