"""Benchmark the baseline and the trained fuzzy planner on the default scenario and compare them.

    python scripts/reproduce_headline.py [--n-runs 200] [--model models/trained_bank.json]
"""

import argparse
from pathlib import Path

from fuzzy_rrt.arm import load_scenario
from fuzzy_rrt.bench import PlannerSpec, bench, compare, write_comparison, write_report
from fuzzy_rrt.fis import load_bank

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scenario", default=str(ROOT / "scenarios" / "default.json"))
    ap.add_argument("--model", default=str(ROOT / "models" / "trained_bank.json"))
    ap.add_argument("--n-runs", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default=str(ROOT / "runs" / "headline"))
    args = ap.parse_args()

    s = load_scenario(args.scenario)
    out = Path(args.out)
    base = bench(s, PlannerSpec("rrt"), args.n_runs, args.seed, args.workers)
    fuzzy = bench(s, PlannerSpec("fuzzy", load_bank(args.model)), args.n_runs, args.seed, args.workers)
    write_report(base, out / "rrt")
    write_report(fuzzy, out / "fuzzy")
    comp = compare(base, fuzzy)
    write_comparison(comp, base, fuzzy, out / "compare")

    for name, rep in (("baseline", base), ("fuzzy", fuzzy)):
        it, c = rep.iterations, rep.path_cost
        cost = f"{c.median:.1f}" if c else "n/a"
        print(f"{name:8s} success {rep.success_rate:6.1%}  iterations median {it.median:7.1f} "
              f"(q1 {it.q1:.0f}, q3 {it.q3:.0f})  path cost median {cost}")
    print(f"iteration factor {comp.iteration_factor:.2f} ({comp.search_time_improvement_pct:.0f}% faster search)")
    if comp.cost_improvement is not None:
        print(f"path cost {comp.cost_improvement:.1%} lower")


if __name__ == "__main__":
    main()
