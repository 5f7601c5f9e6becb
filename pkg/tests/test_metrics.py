import numpy as np
import pytest

from swarmsense import SensingRequirement, aggregate, compute_metrics
from swarmsense.errors import DataError
from swarmsense.metrics import metrics_row, read_results_csv, write_results_csv
from swarmsense.scheduling import KIND_CROSS, KIND_DEST_OCCUPIED, CollisionEvent
from swarmsense.sim import MissionReport


def report(sensed, d=10.0, d_r=2.0, energy=100.0, complete=True, sub=0):
    n = 1
    t = 3
    return MissionReport(
        method="EPOS", seed=0,
        times=np.linspace(0, 1, t),
        positions=np.zeros((t, n, 2)),
        phases=np.zeros((t, n), dtype=np.int8),
        min_dist=np.full((t, n), np.inf),
        energy_series=np.zeros((t, n)),
        energy_per_drone=np.array([energy]),
        energy=energy,
        sensed=np.asarray(sensed, dtype=float),
        total_distance=d,
        risk_distance=d_r,
        events=[],
        sub_dmin_events=sub,
        complete=complete,
        wall_clock=0.0,
    )


def event(kind, t=1.0):
    return CollisionEvent(kind, (0, 1), t, (0.5, 0.5))


class TestComputeMetrics:
    def test_proportional_sensing_zero_mismatch(self):
        req = SensingRequirement(np.array([1.0, 2.0, 0.0]))
        m = compute_metrics(report([10.0, 20.0, 0.0]), req, [])
        assert m.mismatch_rss == pytest.approx(0.0, abs=1e-15)

    def test_zero_risk(self):
        req = SensingRequirement(np.array([1.0]))
        m = compute_metrics(report([1.0], d_r=0.0), req, [])
        assert m.risk_ratio == 0.0

    def test_zero_distance_guard(self):
        req = SensingRequirement(np.array([1.0]))
        m = compute_metrics(report([1.0], d=0.0, d_r=0.0), req, [])
        assert m.risk_ratio == 0.0

    def test_frozen_mismatch_example(self):
        req = SensingRequirement(np.array([1.0, 1.0, 0.0]))
        m = compute_metrics(report([10.0, 0.0, 0.0]), req, [])
        assert m.mismatch_rss == pytest.approx(0.5857864376269049, rel=1e-12)

    def test_collision_counts_sum(self):
        req = SensingRequirement(np.array([1.0]))
        events = [event(KIND_CROSS), event(KIND_CROSS), event(KIND_DEST_OCCUPIED)]
        m = compute_metrics(report([1.0]), req, events)
        assert sum(m.collision_counts.values()) == 3
        assert m.collision_counts[KIND_CROSS] == 2

    def test_risk_ratio_in_unit_interval(self):
        req = SensingRequirement(np.array([1.0]))
        m = compute_metrics(report([1.0], d=4.0, d_r=1.0), req, [])
        assert 0.0 <= m.risk_ratio <= 1.0

    def test_timeout_flagged(self):
        req = SensingRequirement(np.array([1.0]))
        m = compute_metrics(report([1.0], complete=False), req, [])
        assert not m.complete
        assert metrics_row("EPOS", 0, m)["status"] == "timeout"


class TestAggregate:
    def row(self, method, seed, energy, risk=0.1, mism=0.2, status="ok"):
        return {
            "method": method, "seed": seed, "energy_J": energy, "risk_ratio": risk,
            "mismatch_rss": mism, "cross": 1, "parallel": 0, "dest_occupied": 2,
            "status": status,
        }

    def test_single_run(self):
        out = aggregate([self.row("EPOS", 0, 5.0)])
        assert out[0]["energy_J_mean"] == pytest.approx(5.0)
        assert out[0]["energy_J_stderr"] == 0.0

    def test_two_runs_frozen(self):
        out = aggregate([self.row("EPOS", 0, 2.0), self.row("EPOS", 1, 4.0)])
        assert out[0]["energy_J_mean"] == pytest.approx(3.0)
        assert out[0]["energy_J_stderr"] == pytest.approx(1.0)

    def test_permutation_invariant(self):
        rows = [self.row("EPOS", s, float(s)) for s in range(5)]
        assert aggregate(rows) == aggregate(rows[::-1])

    def test_failed_cells_skipped(self):
        rows = [self.row("EPOS", 0, 2.0), self.row("EPOS", 1, 100.0, status="error:X")]
        out = aggregate(rows)
        assert out[0]["runs"] == 1
        assert out[0]["energy_J_mean"] == pytest.approx(2.0)

    def test_empty_raises(self):
        with pytest.raises(DataError):
            aggregate([])


def test_results_csv_roundtrip(tmp_path):
    rows = [
        {"method": "EPOS", "seed": 0, "energy_J": 1.25, "risk_ratio": 0.5,
         "mismatch_rss": 0.01, "cross": 1, "parallel": 0, "dest_occupied": 3, "status": "ok"},
    ]
    path = tmp_path / "results.csv"
    write_results_csv(rows, path)
    back = read_results_csv(path)
    assert back[0]["method"] == "EPOS"
    assert float(back[0]["energy_J"]) == 1.25
    assert back[0]["status"] == "ok"
