import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fuzzy_rrt.bench import (
    BenchReport,
    PlannerSpec,
    RunRecord,
    Summary,
    bench,
    compare,
    load_report,
    write_comparison,
    write_report,
)
from fuzzy_rrt.fis import constant_bank
from fuzzy_rrt.planner import plan_rrt


def sorted_quantile(values, p):
    """Linear-interpolation quantile from a sorted list, independent of numpy."""
    v = sorted(values)
    pos = (len(v) - 1) * p
    lo = math.floor(pos)
    hi = min(lo + 1, len(v) - 1)
    return v[lo] + (pos - lo) * (v[hi] - v[lo])


def fake_report(iters, costs=None, kind="rrt", scenario="s"):
    costs = costs if costs is not None else [10.0] * len(iters)
    runs = [RunRecord(i, not math.isnan(c), it, c, c, it) for i, (it, c) in enumerate(zip(iters, costs))]
    return BenchReport({"kind": kind, "max_iter": 10000}, scenario, len(iters), 0, runs)


class TestSummary:
    def test_single_value(self):
        s = Summary.of([7])
        assert s.min == s.q1 == s.median == s.q3 == s.max == s.mean == 7

    def test_three_values(self):
        assert Summary.of([3, 1, 2]).median == 2

    def test_empty(self):
        assert Summary.of([]) is None

    @given(st.lists(st.integers(0, 10000), min_size=1, max_size=60))
    def test_matches_sort_oracle(self, xs):
        s = Summary.of(xs)
        assert s.min == min(xs) and s.max == max(xs)
        for p, got in ((0.25, s.q1), (0.5, s.median), (0.75, s.q3)):
            assert got == pytest.approx(sorted_quantile(xs, p), abs=1e-9)
        assert s.min <= s.q1 <= s.median <= s.q3 <= s.max


class TestCompare:
    def test_identical(self):
        a = fake_report([100, 200, 300])
        c = compare(a, a)
        assert c.iteration_factor == 1.0
        assert c.search_time_improvement_pct == 0.0
        assert c.cost_improvement == 0.0

    def test_factor_eight(self):
        c = compare(fake_report([800] * 3, [100.0] * 3), fake_report([100] * 3, [57.0] * 3, "fuzzy"))
        assert c.iteration_factor == 8.0
        assert c.search_time_improvement_pct == 700.0
        assert c.cost_improvement == pytest.approx(0.43)

    def test_mismatch_rejected(self):
        with pytest.raises(ValueError):
            compare(fake_report([1, 2]), fake_report([1, 2, 3]))
        with pytest.raises(ValueError):
            compare(fake_report([1, 2]), fake_report([1, 2], scenario="other"))

    def test_failures_in_iterations_not_in_cost(self):
        rep = fake_report([10000, 100, 200], [math.nan, 50.0, 70.0])
        assert rep.iterations.max == 10000
        assert rep.iterations.median == 200
        assert rep.path_cost.median == 60.0
        assert rep.success_rate == pytest.approx(2 / 3)

    def test_all_failed_has_no_cost(self):
        rep = fake_report([50, 50], [math.nan, math.nan])
        assert rep.path_cost is None
        assert compare(rep, rep).cost_improvement is None


class TestBench:
    def test_runs_use_paired_seeds(self, empty_scenario):
        spec = PlannerSpec("rrt", max_iter=500)
        rep = bench(empty_scenario, spec, 4, base_seed=9)
        for r in rep.runs:
            res = plan_rrt(empty_scenario, 500, rng=np.random.default_rng(np.random.SeedSequence([9, r.run])))
            assert (r.success, r.iterations, r.tree_nodes) == (res.success, res.iterations, len(res.tree))

    def test_constant_bank_matches_baseline(self, default_scenario):
        bank = constant_bank(-180, 180, -180, 180, 5.0, 0.05)
        a = bench(default_scenario, PlannerSpec("rrt", max_iter=3000), 3)
        b = bench(default_scenario, PlannerSpec("fuzzy", bank, max_iter=3000), 3)
        assert [r.iterations for r in a.runs] == [r.iterations for r in b.runs]
        assert [r.path_cost for r in a.runs] == [r.path_cost for r in b.runs]

    def test_failed_runs_at_max_iter(self, enclosed_scenario):
        rep = bench(enclosed_scenario, PlannerSpec("rrt", max_iter=200), 3)
        assert rep.success_rate == 0
        assert all(r.iterations == 200 and math.isnan(r.path_cost) for r in rep.runs)

    def test_invalid_spec(self):
        with pytest.raises(ValueError):
            PlannerSpec("fuzzy")
        with pytest.raises(ValueError):
            PlannerSpec("prm")

    def test_files_reproducible_and_reloadable(self, empty_scenario, tmp_path):
        spec = PlannerSpec("rrt", max_iter=300)
        for d in ("a", "b"):
            write_report(bench(empty_scenario, spec, 5, workers=2 if d == "b" else 1), tmp_path / d)
        for name in ("runs.csv", "report.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        back = load_report(tmp_path / "a")
        assert back.runs == bench(empty_scenario, spec, 5).runs
        data = json.loads((tmp_path / "a" / "report.json").read_text())
        assert data["n_runs"] == 5 and len(data["runs"]) == 5

    def test_box_files(self, tmp_path):
        a = fake_report([100, 10000, 300], [40.0, math.nan, 45.0])
        b = fake_report([50, 60, 70], [30.0, 31.0, 32.0], "fuzzy")
        write_comparison(compare(a, b), a, b, tmp_path)
        it = (tmp_path / "iterations_box.csv").read_text().splitlines()
        cost = (tmp_path / "path_cost_box.csv").read_text().splitlines()
        assert len(it) == len(cost) == 1 + 2 * 3
        assert sum(line.startswith("rrt,") for line in it) == 3
        assert "rrt,1," in cost  # failed run keeps its row with an empty cost
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert "wall_time_factor" not in summary
        assert summary["iteration_factor"] == 300 / 60
