"""Print a coarse C-space occupancy map of a scenario and probe both planners on it.

    python scripts/design_scenario.py scenarios/default.json --runs 30
"""

import argparse

import numpy as np

from fuzzy_rrt.arm import JointConfig, is_collision_free, is_path_collision_free, load_scenario
from fuzzy_rrt.fis import random_genome, decode
from fuzzy_rrt.planner import plan_fuzzy_rrt, plan_rrt


def cspace_map(s, res):
    grid = np.arange(-180, 180 + 1e-9, res)
    rows = []
    for t2 in grid[::-1]:
        cells = []
        for t1 in grid:
            q = JointConfig(t1, t2)
            if q.distance(s.start) < res / 2:
                cells.append("S")
            elif q.distance(s.goal) < res / 2:
                cells.append("G")
            else:
                cells.append("." if is_collision_free(q, s) else "#")
        rows.append(f"{t2:6.0f} " + "".join(cells))
    rows.append("       theta1 from -180 (left) to 180 (right)")
    return "\n".join(rows)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("scenario")
    ap.add_argument("--res", type=float, default=6.0)
    ap.add_argument("--runs", type=int, default=30)
    args = ap.parse_args()
    s = load_scenario(args.scenario)
    print(cspace_map(s, args.res))
    print(f"straight line free: {is_path_collision_free(s.start, s.goal, s)}, length {s.start.distance(s.goal):.1f} deg")

    its, costs = [], []
    for seed in range(args.runs):
        r = plan_rrt(s, rng=np.random.default_rng(seed))
        its.append(r.iterations)
        costs.append(r.path_cost if r.success else np.nan)
    print(f"baseline: median {np.median(its):.1f} iterations (range {min(its)}-{max(its)}), "
          f"median cost {np.nanmedian(costs) if np.isfinite(costs).any() else float('nan'):.1f}")

    rng = np.random.default_rng(0)
    ok = sum(plan_fuzzy_rrt(s, decode(random_genome(rng)), rng=np.random.default_rng(g)).success
             for g in range(args.runs))
    print(f"random fuzzy banks: {ok}/{args.runs} succeed")


if __name__ == "__main__":
    main()
