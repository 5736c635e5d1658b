"""Batch benchmarking of the baseline and fuzzy planners.

Run r of any batch uses the seed sequence (base_seed, r), so two planners
benchmarked with the same base seed see paired random streams. Failed runs
enter the iteration statistics at max_iter and are left out of the path-cost
statistics.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .arm import Scenario
from .fis import FisBank
from .planner import DEFAULT_MAX_ITER, DEFAULT_RRT_BIAS, DEFAULT_RRT_STEP, plan_fuzzy_rrt, plan_rrt

REPORT_VERSION = 1


@dataclass(frozen=True)
class PlannerSpec:
    kind: str  # "rrt" or "fuzzy"
    bank: Optional[FisBank] = None
    max_iter: int = DEFAULT_MAX_ITER
    step: float = DEFAULT_RRT_STEP
    bias: float = DEFAULT_RRT_BIAS
    env_source: str = "nearest"

    def __post_init__(self) -> None:
        if self.kind not in ("rrt", "fuzzy"):
            raise ValueError(f"unknown planner kind {self.kind!r}")
        if self.kind == "fuzzy" and self.bank is None:
            raise ValueError("the fuzzy planner needs a trained bank")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")

    def run(self, s: Scenario, rng: np.random.Generator):
        if self.kind == "rrt":
            return plan_rrt(s, self.max_iter, self.step, self.bias, rng)
        return plan_fuzzy_rrt(s, self.bank, self.max_iter, rng, env_source=self.env_source)

    def describe(self) -> dict:
        d = {"kind": self.kind, "max_iter": self.max_iter}
        if self.kind == "rrt":
            d.update(step=self.step, bias=self.bias)
        else:
            d.update(env_source=self.env_source)
        return d


@dataclass(frozen=True)
class RunRecord:
    run: int
    success: bool
    iterations: int
    path_cost: float  # nan on failure
    ee_path_length: float
    tree_nodes: int
    wall_time: float = field(default=0.0, compare=False)


@dataclass(frozen=True)
class Summary:
    min: float
    q1: float
    median: float
    q3: float
    max: float
    mean: float

    @classmethod
    def of(cls, values: Sequence[float]) -> Optional[Summary]:
        v = np.asarray(values, dtype=float)
        if v.size == 0:
            return None
        q1, med, q3 = np.percentile(v, [25, 50, 75])
        return cls(float(v.min()), float(q1), float(med), float(q3), float(v.max()), float(v.mean()))

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class BenchReport:
    planner: dict
    scenario: str
    n_runs: int
    base_seed: int
    runs: list[RunRecord]

    @property
    def success_rate(self) -> float:
        return sum(r.success for r in self.runs) / self.n_runs

    @property
    def iterations(self) -> Summary:
        return Summary.of([r.iterations for r in self.runs])

    @property
    def path_cost(self) -> Optional[Summary]:
        return Summary.of([r.path_cost for r in self.runs if r.success])

    @property
    def wall_time(self) -> Summary:
        return Summary.of([r.wall_time for r in self.runs])

    def to_dict(self) -> dict:
        cost = self.path_cost
        return {
            "format_version": REPORT_VERSION,
            "planner": self.planner,
            "scenario": self.scenario,
            "n_runs": self.n_runs,
            "base_seed": self.base_seed,
            "success_rate": self.success_rate,
            "iterations": self.iterations.to_dict(),
            "path_cost": cost.to_dict() if cost else None,
            "runs": [
                {
                    "run": r.run,
                    "success": r.success,
                    "iterations": r.iterations,
                    "path_cost": r.path_cost if r.success else None,
                    "ee_path_length": r.ee_path_length if r.success else None,
                    "tree_nodes": r.tree_nodes,
                }
                for r in self.runs
            ],
        }

    @classmethod
    def from_dict(cls, data: dict, wall_times: Optional[Sequence[float]] = None) -> BenchReport:
        if data.get("format_version") != REPORT_VERSION:
            raise ValueError("unsupported bench report format")
        runs = []
        for i, r in enumerate(data["runs"]):
            runs.append(RunRecord(
                r["run"], r["success"], r["iterations"],
                r["path_cost"] if r["success"] else math.nan,
                r["ee_path_length"] if r["success"] else math.nan,
                r["tree_nodes"],
                wall_times[i] if wall_times is not None else 0.0,
            ))
        return cls(data["planner"], data["scenario"], data["n_runs"], data["base_seed"], runs)


def _run_one(args) -> RunRecord:
    scenario, spec, base_seed, run = args
    rng = np.random.default_rng(np.random.SeedSequence([base_seed, run]))
    res = spec.run(scenario, rng)
    return RunRecord(
        run,
        res.success,
        res.iterations,
        res.path_cost if res.success else math.nan,
        res.ee_path_length if res.success else math.nan,
        len(res.tree),
        res.wall_time,
    )


def bench(
    scenario: Scenario,
    spec: PlannerSpec,
    n_runs: int = 200,
    base_seed: int = 0,
    workers: int = 1,
) -> BenchReport:
    """Execute `n_runs` seeded runs of one planner and aggregate them."""
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    scenario.validate()
    tasks = [(scenario, spec, base_seed, r) for r in range(n_runs)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_run_one, tasks))
    else:
        runs = [_run_one(t) for t in tasks]
    runs.sort(key=lambda r: r.run)
    return BenchReport(spec.describe(), scenario.name, n_runs, base_seed, runs)


RUN_FIELDS = ["run", "success", "iterations", "path_cost", "ee_path_length", "tree_nodes"]


def _fmt(x: float) -> str:
    return "" if x is None or (isinstance(x, float) and math.isnan(x)) else repr(x)


def write_report(report: BenchReport, out_dir: str | Path) -> None:
    """Write runs.csv and report.json (both reproducible) plus timing.csv (wall clock)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "runs.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RUN_FIELDS)
        for r in report.runs:
            w.writerow([r.run, int(r.success), r.iterations, _fmt(r.path_cost), _fmt(r.ee_path_length), r.tree_nodes])
    (out / "report.json").write_text(json.dumps(report.to_dict(), indent=1) + "\n")
    with open(out / "timing.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["run", "wall_time_s"])
        for r in report.runs:
            w.writerow([r.run, f"{r.wall_time:.6f}"])


def load_report(out_dir: str | Path) -> BenchReport:
    out = Path(out_dir)
    data = json.loads((out / "report.json").read_text())
    wall = None
    timing = out / "timing.csv"
    if timing.exists():
        with open(timing, newline="") as fh:
            rows = list(csv.DictReader(fh))
        wall = [float(r["wall_time_s"]) for r in rows]
    return BenchReport.from_dict(data, wall)


@dataclass(frozen=True)
class Comparison:
    baseline: str
    candidate: str
    n_runs: int
    iteration_factor: float  # median(baseline) / median(candidate)
    search_time_improvement_pct: float
    mean_iteration_factor: float
    cost_improvement: Optional[float]  # 1 - medianCost(candidate) / medianCost(baseline)
    wall_time_factor: Optional[float]
    success_rates: tuple[float, float]

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["success_rates"] = list(self.success_rates)
        return d


def compare(baseline: BenchReport, candidate: BenchReport) -> Comparison:
    """Iteration-reduction factor and path-cost improvement of `candidate` over `baseline`."""
    if baseline.n_runs != candidate.n_runs:
        raise ValueError("reports must cover the same number of runs")
    if baseline.scenario != candidate.scenario:
        raise ValueError("reports must come from the same scenario")
    factor = baseline.iterations.median / candidate.iterations.median
    mean_factor = baseline.iterations.mean / candidate.iterations.mean
    ca, cb = baseline.path_cost, candidate.path_cost
    cost = 1.0 - cb.median / ca.median if ca is not None and cb is not None else None
    wa, wb = baseline.wall_time, candidate.wall_time
    wall = wa.median / wb.median if wa.median > 0 and wb.median > 0 else None
    return Comparison(
        baseline.planner["kind"],
        candidate.planner["kind"],
        baseline.n_runs,
        factor,
        (factor - 1.0) * 100.0,
        mean_factor,
        cost,
        wall,
        (baseline.success_rate, candidate.success_rate),
    )


def write_comparison(
    comp: Comparison, baseline: BenchReport, candidate: BenchReport, out_dir: str | Path, include_wall_time: bool = False
) -> None:
    """Write summary.json and long-format box-plot data (one row per run and planner)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    d = comp.to_dict()
    if not include_wall_time:
        d.pop("wall_time_factor")
    (out / "summary.json").write_text(json.dumps(d, indent=1) + "\n")
    labels = _labels(baseline, candidate)
    with open(out / "iterations_box.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["planner", "run", "iterations"])
        for label, rep in zip(labels, (baseline, candidate)):
            for r in rep.runs:
                w.writerow([label, r.run, r.iterations])
    with open(out / "path_cost_box.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["planner", "run", "path_cost"])
        for label, rep in zip(labels, (baseline, candidate)):
            for r in rep.runs:
                w.writerow([label, r.run, _fmt(r.path_cost)])


def _labels(a: BenchReport, b: BenchReport) -> tuple[str, str]:
    la, lb = a.planner["kind"], b.planner["kind"]
    return (la, lb) if la != lb else (la + "_a", lb + "_b")
