"""Train the desk-scale bank on the default scenario and install it as models/trained_bank.json.

    python scripts/train_desk.py [--config configs/ga_desk.json] [--out runs/train_desk] [--resume]
"""

import argparse
import shutil
import time
from pathlib import Path

from fuzzy_rrt.arm import load_scenario
from fuzzy_rrt.ga import GaConfig, run_ga

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scenario", default=str(ROOT / "scenarios" / "default.json"))
    ap.add_argument("--config", default=str(ROOT / "configs" / "ga_desk.json"))
    ap.add_argument("--out", default=str(ROOT / "runs" / "train_desk"))
    ap.add_argument("--resume", action="store_true")
    ap.add_argument("--no-install", action="store_true", help="leave models/ untouched")
    args = ap.parse_args()

    cfg = GaConfig.load(args.config)
    t0 = time.perf_counter()
    res = run_ga(
        load_scenario(args.scenario), cfg, args.out, resume=args.resume,
        callback=lambda h: print(f"gen {h.generation:3d} best {h.best_fitness:8.1f} "
                                 f"mean {h.mean_fitness:8.1f} best-ever {h.best_ever_fitness:8.1f}", flush=True),
    )
    print(f"done in {time.perf_counter() - t0:.0f}s: best-ever {res.best_fitness:.1f}, "
          f"initial best {res.initial_best_fitness:.1f}")
    if not args.no_install:
        dest = ROOT / "models" / "trained_bank.json"
        shutil.copyfile(Path(args.out) / "best_model.json", dest)
        print(f"installed {dest}")


if __name__ == "__main__":
    main()
