import json
import math

import numpy as np
import pytest

from swarmsense import (
    DroneSpec,
    Scenario,
    Selection,
    SensingRequirement,
    build_grid,
    build_timed_path,
    plan_cost,
    risk_distance,
    run,
    schedule_ca,
)
from swarmsense.errors import DataError
from swarmsense.pfield import FieldParams
from swarmsense.plangen import AgentPlanSet, Plan
from swarmsense.scheduling import assign_priorities, detect_collisions
from swarmsense.seeding import rng_for
from swarmsense.sim import DONE, HOVERING, RETURNING, TRAVELING, write_report_json, write_trajectory_csv


def make_plan(env, spec, route, hovers, home):
    hover = np.zeros(env.n_cells)
    for c, h in zip(route, hovers):
        hover[c] = h
    return Plan(hover=hover, route=tuple(route), cost=plan_cost(route, hover, env, spec, home))


def scenario_for(env, spec, plans, method, seed=0, **kw):
    plan_sets = tuple(
        AgentPlanSet(i, (p,), env.home_pads[i]) for i, p in enumerate(plans)
    )
    req = kw.pop("requirement", SensingRequirement(np.ones(env.n_cells)))
    return Scenario(
        env=env, spec=spec, requirement=req, n_drones=len(plans), method=method,
        seed=seed, plan_sets=plan_sets, **kw,
    )


def selection_for(scenario):
    agg = np.sum([ps.plans[0].hover for ps in scenario.plan_sets], axis=0)
    return Selection([0] * scenario.n_drones, agg, float("nan"))


@pytest.fixture
def single_env():
    return build_grid(1, 1, 1.0, 1.0, 0.5, 1)


class TestSingleDrone:
    @pytest.mark.parametrize("method", ["EPOS", "EPOS-PF", "Greedy-PF"])
    def test_hover_ten_seconds(self, single_env, paper_spec, method):
        plan = make_plan(single_env, paper_spec, (0,), (10.0,), single_env.home_pads[0])
        sc = scenario_for(single_env, paper_spec, [plan], method)
        rep = run(sc, selection_for(sc))
        assert rep.complete
        assert rep.sensed[0] == pytest.approx(10.0, abs=sc.dt + 1e-9)
        assert rep.energy == pytest.approx(plan.cost, rel=0.02)
        assert rep.risk_distance == 0.0

    def test_energy_exact_for_unobstructed_pf(self, single_env, paper_spec):
        plan = make_plan(single_env, paper_spec, (0,), (12.3,), single_env.home_pads[0])
        sc = scenario_for(single_env, paper_spec, [plan], "EPOS-PF")
        rep = run(sc, selection_for(sc))
        assert rep.energy == pytest.approx(plan.cost, rel=1e-9)

    def test_phase_progression(self, single_env, paper_spec):
        plan = make_plan(single_env, paper_spec, (0,), (5.0,), single_env.home_pads[0])
        sc = scenario_for(single_env, paper_spec, [plan], "EPOS-PF")
        rep = run(sc, selection_for(sc))
        seen = [rep.phases[0, 0]]
        for k in range(1, len(rep.times)):
            if rep.phases[k, 0] != seen[-1]:
                seen.append(rep.phases[k, 0])
        assert seen == [TRAVELING, HOVERING, RETURNING, DONE]

    def test_distance_at_least_straight_line(self, single_env, paper_spec):
        plan = make_plan(single_env, paper_spec, (0,), (5.0,), single_env.home_pads[0])
        sc = scenario_for(single_env, paper_spec, [plan], "EPOS-PF")
        rep = run(sc, selection_for(sc))
        home = single_env.home_pads[0]
        straight = 2 * math.dist(home, (0.5, 0.5))
        assert rep.total_distance == pytest.approx(straight, rel=1e-9)


class TestSuperposition:
    def test_far_apart_pair_equals_isolated_runs(self, paper_env, paper_spec):
        env = build_grid(2, 3, 0.55, 0.47, 0.5, 2)
        p0 = make_plan(env, paper_spec, (0,), (8.0,), env.home_pads[0])
        p1 = make_plan(env, paper_spec, (5,), (8.0,), env.home_pads[1])
        pair = scenario_for(env, paper_spec, [p0, p1], "EPOS-PF")
        rep_pair = run(pair, selection_for(pair))

        solo_reports = []
        for i, plan in enumerate((p0, p1)):
            ps = (AgentPlanSet(0, (plan,), env.home_pads[i]),)
            sc = Scenario(env=env, spec=paper_spec, requirement=pair.requirement,
                          n_drones=1, method="EPOS-PF", seed=0, plan_sets=ps)
            solo_reports.append(run(sc, Selection([0], plan.hover.copy(), float("nan"))))

        assert rep_pair.sub_dmin_events == 0
        for i, solo in enumerate(solo_reports):
            t = len(solo.times)
            assert np.array_equal(rep_pair.positions[:t, i], solo.positions[:, 0])
            assert rep_pair.energy_per_drone[i] == pytest.approx(solo.energy, rel=1e-12)


class TestHeadOn:
    def build(self, method, spec):
        env = build_grid(2, 3, 0.55, 0.47, 0.5, 2)
        # drones swap sides along the same row: crossing straight legs
        p0 = make_plan(env, spec, (2,), (6.0,), env.home_pads[0])
        p1 = make_plan(env, spec, (0,), (6.0,), env.home_pads[1])
        return scenario_for(env, spec, [p0, p1], method, seed=3)

    def test_epos_collides_pf_does_not(self, paper_spec):
        rep_plain = run(self.build("EPOS", paper_spec), selection_for(self.build("EPOS", paper_spec)))
        assert rep_plain.sub_dmin_events >= 1

        sc = self.build("EPOS-PF", paper_spec)
        rep_pf = run(sc, selection_for(sc))
        assert rep_pf.sub_dmin_events == 0
        assert rep_pf.complete
        finite = rep_pf.min_dist[np.isfinite(rep_pf.min_dist)]
        assert finite.min() >= sc.params.d_min


class TestEposCa:
    def test_schedule_required_exactly_for_ca(self, single_env, paper_spec):
        plan = make_plan(single_env, paper_spec, (0,), (4.0,), single_env.home_pads[0])
        sc = scenario_for(single_env, paper_spec, [plan], "EPOS-CA")
        with pytest.raises(DataError):
            run(sc, selection_for(sc))  # no schedule
        sc2 = scenario_for(single_env, paper_spec, [plan], "EPOS")
        path = build_timed_path(0, plan.route, plan.hover, single_env, paper_spec, single_env.home_pads[0])
        with pytest.raises(DataError):
            run(sc2, selection_for(sc2), schedule=[path])

    def test_waits_extend_mission_and_energy(self, paper_spec):
        env = build_grid(2, 3, 0.55, 0.47, 0.5, 2)
        p0 = make_plan(env, paper_spec, (2,), (30.0,), env.home_pads[0])
        p1 = make_plan(env, paper_spec, (2,), (10.0,), env.home_pads[1])
        paths = [
            build_timed_path(i, p.route, p.hover, env, paper_spec, env.home_pads[i])
            for i, p in enumerate((p0, p1))
        ]
        pri = assign_priorities(2, rng_for(3, "priorities"))
        repaired = schedule_ca(paths, pri, FieldParams(), env)
        assert detect_collisions(repaired, FieldParams()) == []

        sc_ca = scenario_for(env, paper_spec, [p0, p1], "EPOS-CA", seed=3)
        rep_ca = run(sc_ca, selection_for(sc_ca), schedule=repaired)
        sc_plain = scenario_for(env, paper_spec, [p0, p1], "EPOS", seed=3)
        rep_plain = run(sc_plain, selection_for(sc_plain))
        assert rep_ca.energy >= rep_plain.energy
        assert rep_ca.complete

    def test_waiting_drone_senses_beneath(self, paper_spec):
        # lower-priority drone waits at its first-leg start (its hover cell), double-sensing it
        env = build_grid(2, 3, 0.55, 0.47, 0.5, 2)
        p0 = make_plan(env, paper_spec, (1, 2), (20.0, 5.0), env.home_pads[0])
        p1 = make_plan(env, paper_spec, (2,), (30.0,), env.home_pads[1])
        paths = [
            build_timed_path(i, p.route, p.hover, env, paper_spec, env.home_pads[i])
            for i, p in enumerate((p0, p1))
        ]
        pri = assign_priorities(2, rng_for(1, "priorities"))
        repaired = schedule_ca(paths, pri, FieldParams(), env)
        total_wait = sum(w.end - w.start for p in repaired for w in p.waits)
        sc = scenario_for(env, paper_spec, [p0, p1], "EPOS-CA", seed=1)
        rep = run(sc, selection_for(sc), schedule=repaired)
        planned = p0.hover + p1.hover
        if total_wait > 0:
            assert rep.sensed.sum() > planned.sum() + total_wait / 2


class TestDeterminismAndCaps:
    def test_bit_identical_reports(self, paper_spec):
        env = build_grid(2, 3, 0.55, 0.47, 0.5, 3)
        plans = [
            make_plan(env, paper_spec, (c,), (6.0,), env.home_pads[i])
            for i, c in enumerate((0, 4, 2))
        ]
        sc = scenario_for(env, paper_spec, plans, "EPOS-PF", seed=7)
        a, b = run(sc, selection_for(sc)), run(sc, selection_for(sc))
        assert np.array_equal(a.positions, b.positions)
        assert np.array_equal(a.energy_series, b.energy_series)
        assert a.risk_distance == b.risk_distance
        assert [e.time for e in a.events] == [e.time for e in b.events]

    def test_time_cap_flags_incomplete(self, single_env, paper_spec):
        plan = make_plan(single_env, paper_spec, (0,), (60.0,), single_env.home_pads[0])
        sc = scenario_for(single_env, paper_spec, [plan], "EPOS-PF", time_cap=5.0)
        rep = run(sc, selection_for(sc))
        assert not rep.complete
        assert rep.times[-1] == pytest.approx(5.0, abs=sc.dt)

    def test_risk_radius_must_cover_dmin(self, single_env, paper_spec):
        plan = make_plan(single_env, paper_spec, (0,), (1.0,), single_env.home_pads[0])
        with pytest.raises(DataError):
            scenario_for(single_env, paper_spec, [plan], "EPOS-PF", risk_radius=0.1)


class TestRiskDistance:
    def test_all_far_apart(self):
        positions = np.zeros((5, 2, 2))
        positions[:, 1, 0] = 10.0
        positions[:, 0, 0] = np.linspace(0, 1, 5)
        min_dist = np.full((5, 2), 10.0)
        assert risk_distance(positions, min_dist, 0.5) == 0.0

    def test_close_pair_counts_both(self):
        # two drones drive 1 m each while 0.2 m apart: both legs accumulate
        steps = 101
        xs = np.linspace(0.0, 1.0, steps)
        positions = np.zeros((steps, 2, 2))
        positions[:, 0, 0] = xs
        positions[:, 1, 0] = xs
        positions[:, 1, 1] = 0.2
        min_dist = np.full((steps, 2), 0.2)
        assert risk_distance(positions, min_dist, 0.5) == pytest.approx(2.0)

    def test_pass_through_window(self):
        # head-on pass-through: each drone accumulates only the stretch flown
        # while the pair is inside the risk radius (analytic: rho per drone)
        steps = 2001
        xs = np.linspace(0.0, 2.0, steps)
        positions = np.zeros((steps, 2, 2))
        positions[:, 0, 0] = xs
        positions[:, 1, 0] = 2.0 - xs
        gap = np.abs(positions[:, 0, 0] - positions[:, 1, 0])
        min_dist = gap.reshape(steps, 1) * np.ones((1, 2))
        # gap = |2 - 2x| <= rho for x in [1 - rho/2, 1 + rho/2]: rho metres per drone
        assert risk_distance(positions, min_dist, 0.5) == pytest.approx(1.0, abs=0.01)

    def test_single_tick(self):
        positions = np.zeros((1, 1, 2))
        assert risk_distance(positions, np.zeros((1, 1)), 0.5) == 0.0


def test_log_writers(tmp_path, single_env, paper_spec):
    plan = make_plan(single_env, paper_spec, (0,), (2.0,), single_env.home_pads[0])
    sc = scenario_for(single_env, paper_spec, [plan], "EPOS-PF")
    rep = run(sc, selection_for(sc))
    csv_path, json_path = tmp_path / "traj.csv", tmp_path / "report.json"
    write_trajectory_csv(rep, csv_path)
    write_report_json(rep, json_path)
    header = csv_path.read_text().splitlines()[0]
    assert header == "t,drone,x,y,phase,energy_J,min_dist_m"
    payload = json.loads(json_path.read_text())
    assert payload["complete"] is True
    assert payload["energy_J"] == pytest.approx(rep.energy)
