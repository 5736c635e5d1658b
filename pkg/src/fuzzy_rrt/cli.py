"""Command-line entry point: plan, train, bench, compare."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .arm import ScenarioError, load_scenario
from .bench import PlannerSpec, bench, compare, load_report, write_comparison, write_report
from .fis import GenomeError, ModelFormatError, decode, load_bank, save_bank
from .ga import GaConfig, run_ga
from .planner import DEFAULT_MAX_ITER, DEFAULT_RRT_BIAS, DEFAULT_RRT_STEP, ENV_SOURCES, save_tree_dump

log = logging.getLogger("fuzzy_rrt")


def _add_planner_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenario", required=True, help="scenario JSON file")
    p.add_argument("--planner", choices=("rrt", "fuzzy"), default="rrt")
    p.add_argument("--model", help="trained bank (required for --planner fuzzy)")
    p.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    p.add_argument("--step", type=float, default=DEFAULT_RRT_STEP, help="baseline step size in degrees")
    p.add_argument("--bias", type=float, default=DEFAULT_RRT_BIAS, help="baseline goal bias")
    p.add_argument("--env-source", choices=ENV_SOURCES, default="nearest",
                   help="node whose surroundings feed the fuzzy bank")


def _spec(args) -> PlannerSpec:
    if args.planner == "fuzzy":
        if not args.model:
            raise ValueError("--model is required for the fuzzy planner")
        bank = load_bank(args.model)
        return PlannerSpec("fuzzy", bank, args.max_iter, env_source=args.env_source)
    if not 0.0 <= args.bias <= 1.0 or args.step < 0:
        raise ValueError("--bias must be in [0, 1] and --step non-negative")
    return PlannerSpec("rrt", None, args.max_iter, args.step, args.bias)


def cmd_plan(args) -> int:
    s = load_scenario(args.scenario)
    spec = _spec(args)
    seed = s.rng_seed if args.seed is None else args.seed
    res = spec.run(s, np.random.default_rng(seed))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_tree_dump(res, out / "tree.txt")
    summary = {
        "planner": spec.describe(),
        "seed": seed,
        "success": res.success,
        "iterations": res.iterations,
        "path_cost": res.path_cost,
        "ee_path_length": res.ee_path_length,
        "tree_nodes": len(res.tree),
    }
    (out / "result.json").write_text(json.dumps(summary, indent=1) + "\n")
    status = "success" if res.success else "failure"
    print(f"{spec.kind}: {status} after {res.iterations} iterations, path cost {res.path_cost:.2f} deg")
    return 0


def cmd_train(args) -> int:
    s = load_scenario(args.scenario)
    if args.config:
        cfg = GaConfig.load(args.config)
    elif args.full_scale:
        cfg = GaConfig.full_scale()
    else:
        cfg = GaConfig()
    overrides = {
        "population_size": args.population,
        "max_generations": args.generations,
        "runs_per_eval": args.runs_per_eval,
        "base_seed": args.seed,
        "workers": args.workers,
        "max_iter": args.max_iter,
    }
    data = cfg.to_dict()
    data.update({k: v for k, v in overrides.items() if v is not None})
    cfg = GaConfig.from_dict(data)
    out = Path(args.out)

    def report(stats):
        print(f"gen {stats.generation:3d}  best {stats.best_fitness:9.2f}  mean {stats.mean_fitness:9.2f}  "
              f"best-ever {stats.best_ever_fitness:9.2f}", flush=True)

    res = run_ga(s, cfg, out, resume=args.resume, callback=report)
    save_bank(decode(res.best_genome), out / "model.json")
    (out / "config.json").write_text(json.dumps(cfg.to_dict(), indent=1) + "\n")
    print(f"best fitness {res.best_fitness:.2f} (initial population best {res.initial_best_fitness:.2f}); "
          f"model written to {out / 'model.json'}")
    return 0


def cmd_bench(args) -> int:
    s = load_scenario(args.scenario)
    spec = _spec(args)
    rep = bench(s, spec, args.n_runs, args.seed, args.workers)
    write_report(rep, args.out)
    it = rep.iterations
    line = (f"{spec.kind}: {args.n_runs} runs, success {rep.success_rate:.0%}, iterations "
            f"min {it.min:.0f} median {it.median:.0f} max {it.max:.0f}")
    if rep.path_cost is not None:
        line += f", median path cost {rep.path_cost.median:.2f} deg"
    print(line)
    return 0


def cmd_compare(args) -> int:
    a, b = load_report(args.baseline), load_report(args.candidate)
    comp = compare(a, b)
    write_comparison(comp, a, b, args.out, include_wall_time=args.wall_time)
    print(f"iterations: median {a.iterations.median:.0f} -> {b.iterations.median:.0f} "
          f"(factor {comp.iteration_factor:.2f}, {comp.search_time_improvement_pct:.0f}% faster)")
    if comp.cost_improvement is not None:
        print(f"path cost: median {a.path_cost.median:.2f} -> {b.path_cost.median:.2f} "
              f"({comp.cost_improvement:.1%} lower)")
    if args.wall_time and comp.wall_time_factor is not None:
        print(f"wall time: factor {comp.wall_time_factor:.2f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fuzzy-rrt", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="run one planner once and dump its tree and path")
    _add_planner_args(p)
    p.add_argument("--seed", type=int, help="RNG seed (default: the scenario's seed)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("train", help="train a fuzzy bank with the genetic algorithm")
    p.add_argument("--scenario", required=True)
    p.add_argument("--config", help="GA configuration JSON")
    p.add_argument("--full-scale", action="store_true", help="population 400, 50 generations")
    p.add_argument("--population", type=int)
    p.add_argument("--generations", type=int)
    p.add_argument("--runs-per-eval", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--resume", action="store_true", help="continue from the checkpoint in --out")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("bench", help="batch-run a planner and write statistics")
    _add_planner_args(p)
    p.add_argument("--n-runs", type=int, default=200)
    p.add_argument("--seed", type=int, default=0, help="base seed; run r uses (seed, r)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("compare", help="compare two bench output directories")
    p.add_argument("baseline")
    p.add_argument("candidate")
    p.add_argument("--out", required=True)
    p.add_argument("--wall-time", action="store_true", help="include the (non-reproducible) wall-time factor")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ScenarioError, ModelFormatError, GenomeError, FileNotFoundError, ValueError) as exc:
        print(f"fuzzy-rrt {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
