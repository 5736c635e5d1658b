"""Real-coded genetic algorithm that trains the six-system fuzzy bank.

Fitness of a genome is the mean reward over several seeded Fuzzy-RRT runs,
where a run that needs x iterations earns 10000 - x and a failed run -100.
"""

from __future__ import annotations

import csv
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .arm import Scenario
from .fis import GENOME_LENGTH, GenomeError, decode, save_bank
from .planner import DEFAULT_MAX_ITER, ENV_SOURCES, plan_fuzzy_rrt

log = logging.getLogger(__name__)

REWARD_HORIZON = 10_000
FAIL_REWARD = -100.0
_OPS_STREAM = 0x6A  # seed-sequence tag separating breeding draws from evaluation draws
_INIT_STREAM = 0x1B


def reward(x: int) -> float:
    """Reward for a run that needed x iterations to find a valid path."""
    if x < 0:
        raise ValueError("iteration count must be non-negative")
    return float(REWARD_HORIZON - x) if x < REWARD_HORIZON else FAIL_REWARD


@dataclass
class GaConfig:
    population_size: int = 40
    max_generations: int = 20
    fitness_stop: float = 9750.0
    runs_per_eval: int = 5
    tournament_size: int = 3
    crossover_rate: float = 0.9
    blend_alpha: float = 0.5
    mutation_rate: float = 0.02
    mutation_sigma: float = 0.05
    elitism_count: int = 2
    base_seed: int = 0
    max_iter: int = DEFAULT_MAX_ITER
    workers: int = 1
    reevaluate_elites: bool = False
    env_source: str = "nearest"

    def __post_init__(self) -> None:
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.runs_per_eval < 1:
            raise ValueError("runs_per_eval must be >= 1")
        if self.max_generations < 1:
            raise ValueError("max_generations must be >= 1")
        for name in ("crossover_rate", "mutation_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if self.tournament_size < 1:
            raise ValueError("tournament_size must be >= 1")
        if not 0 <= self.elitism_count <= self.population_size:
            raise ValueError("elitism_count must be in [0, population_size]")
        if self.mutation_sigma < 0 or self.blend_alpha < 0:
            raise ValueError("mutation_sigma and blend_alpha must be non-negative")
        if self.max_iter < 1 or self.workers < 1 or self.base_seed < 0:
            raise ValueError("max_iter and workers must be >= 1, base_seed >= 0")
        if self.env_source not in ENV_SOURCES:
            raise ValueError(f"env_source must be one of {ENV_SOURCES}")

    @classmethod
    def full_scale(cls, **overrides) -> GaConfig:
        """Population 400, up to 50 generations, as in the original training run."""
        return cls(**{"population_size": 400, "max_generations": 50, **overrides})

    @classmethod
    def from_dict(cls, data: dict) -> GaConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown GA config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path: str | Path) -> GaConfig:
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class EvalRecord:
    genome_id: int
    iterations: tuple[int, ...]
    rewards: tuple[float, ...]

    @property
    def fitness(self) -> float:
        return float(np.mean(self.rewards))


def eval_seed(base_seed: int, generation: int, genome_id: int, run: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([base_seed, generation, genome_id, run])


def evaluate(
    genome: np.ndarray,
    scenario: Scenario,
    cfg: GaConfig,
    generation: int = 0,
    genome_id: int = 0,
) -> EvalRecord:
    """Run the fuzzy planner `cfg.runs_per_eval` times and average the rewards."""
    bank = decode(genome)
    iters, rewards = [], []
    for r in range(cfg.runs_per_eval):
        rng = np.random.default_rng(eval_seed(cfg.base_seed, generation, genome_id, r))
        res = plan_fuzzy_rrt(scenario, bank, cfg.max_iter, rng, env_source=cfg.env_source)
        # a failure never earns more than the failure reward, even with a short max_iter
        x = res.iterations if res.success else max(res.iterations, REWARD_HORIZON)
        iters.append(res.iterations)
        rewards.append(reward(x))
    return EvalRecord(genome_id, tuple(iters), tuple(rewards))


def _eval_task(args) -> EvalRecord:
    genome, scenario, cfg, generation, gid = args
    return evaluate(genome, scenario, cfg, generation, gid)


def evaluate_population(
    pop: np.ndarray,
    ids: Sequence[int],
    scenario: Scenario,
    cfg: GaConfig,
    generation: int,
    pool: Optional[ProcessPoolExecutor] = None,
) -> list[EvalRecord]:
    tasks = [(pop[i], scenario, cfg, generation, i) for i in ids]
    if pool is None:
        return [_eval_task(t) for t in tasks]
    # map preserves submission order, so results merge by genome index
    return list(pool.map(_eval_task, tasks))


def tournament(fitness: np.ndarray, k: int, rng: np.random.Generator) -> int:
    entrants = rng.integers(0, fitness.shape[0], size=k)
    return int(entrants[np.argmax(fitness[entrants])])


def blend_crossover(a: np.ndarray, b: np.ndarray, alpha: float, rng: np.random.Generator) -> np.ndarray:
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    span = hi - lo
    lo = lo - alpha * span
    hi = hi + alpha * span
    return np.clip(lo + (hi - lo) * rng.random(a.shape[0]), 0.0, 1.0)


def gaussian_mutation(g: np.ndarray, rate: float, sigma: float, rng: np.random.Generator) -> np.ndarray:
    mask = rng.random(g.shape[0]) < rate
    out = g.copy()
    out[mask] += rng.normal(0.0, sigma, int(mask.sum()))
    return np.clip(out, 0.0, 1.0)


def elite_indices(fitness: np.ndarray, count: int) -> np.ndarray:
    # stable sort: equal fitness keeps the lower index first
    return np.argsort(-fitness, kind="stable")[:count]


def next_generation(
    pop: np.ndarray, fitness: np.ndarray, cfg: GaConfig, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Breed a new population. Returns (population, indices of carried-over elites)."""
    n = pop.shape[0]
    elites = elite_indices(fitness, cfg.elitism_count)
    children = [pop[i].copy() for i in elites]
    while len(children) < n:
        a = pop[tournament(fitness, cfg.tournament_size, rng)]
        b = pop[tournament(fitness, cfg.tournament_size, rng)]
        if rng.random() < cfg.crossover_rate:
            c1 = blend_crossover(a, b, cfg.blend_alpha, rng)
            c2 = blend_crossover(a, b, cfg.blend_alpha, rng)
        else:
            c1, c2 = a.copy(), b.copy()
        for c in (c1, c2):
            if len(children) < n:
                children.append(gaussian_mutation(c, cfg.mutation_rate, cfg.mutation_sigma, rng))
    return np.stack(children), elites


@dataclass
class GenerationStats:
    generation: int
    best_fitness: float
    mean_fitness: float
    best_ever_fitness: float
    eval_time: float = field(default=0.0, compare=False)


@dataclass
class GaResult:
    best_genome: np.ndarray
    best_fitness: float
    history: list[GenerationStats]
    stopped_early: bool

    @property
    def initial_best_fitness(self) -> float:
        return self.history[0].best_fitness


LOG_HEADER = ["generation", "best_fitness", "mean_fitness", "best_ever_fitness"]


class _Checkpoint:
    """Training state saved after every generation; .npy and JSON only, so files are byte-reproducible."""

    def __init__(self, out_dir: Path):
        self.dir = out_dir / "checkpoint"

    def save(self, cfg: GaConfig, generation: int, pop, fitness, best_genome, best_fitness, history) -> None:
        self.dir.mkdir(parents=True, exist_ok=True)
        np.save(self.dir / "population.npy", pop)
        np.save(self.dir / "fitness.npy", fitness)
        np.save(self.dir / "best_genome.npy", best_genome)
        state = {
            "generation": generation,
            "best_fitness": best_fitness,
            "config": cfg.to_dict(),
            "history": [[h.generation, h.best_fitness, h.mean_fitness, h.best_ever_fitness] for h in history],
        }
        (self.dir / "state.json").write_text(json.dumps(state, indent=1) + "\n")

    def load(self, cfg: GaConfig):
        state = json.loads((self.dir / "state.json").read_text())
        saved = GaConfig.from_dict(state["config"])
        # generation cap and worker count may change between sessions; nothing else may
        for name in ("max_generations", "workers"):
            setattr(saved, name, getattr(cfg, name))
        if saved != cfg:
            raise ValueError("checkpoint was written with a different GA configuration")
        history = [GenerationStats(int(g), b, m, e) for g, b, m, e in state["history"]]
        return (
            int(state["generation"]),
            np.load(self.dir / "population.npy"),
            np.load(self.dir / "fitness.npy"),
            np.load(self.dir / "best_genome.npy"),
            float(state["best_fitness"]),
            history,
        )


def run_ga(
    scenario: Scenario,
    cfg: GaConfig,
    out_dir: Optional[str | Path] = None,
    resume: bool = False,
    callback: Optional[Callable[[GenerationStats], None]] = None,
) -> GaResult:
    """Evolve a genome until best-ever fitness reaches `cfg.fitness_stop` or the generation cap.

    With `out_dir`, appends one row per generation to train_log.csv (timings go
    to timing.csv), rewrites best_model.json and saves a resumable checkpoint.
    """
    scenario.validate()
    out = Path(out_dir) if out_dir is not None else None
    ckpt = _Checkpoint(out) if out is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)

    pool = ProcessPoolExecutor(max_workers=cfg.workers) if cfg.workers > 1 else None
    try:
        if resume:
            if ckpt is None:
                raise ValueError("resume requires an output directory")
            generation, pop, fitness, best_genome, best_fitness, history = ckpt.load(cfg)
            _truncate_logs(out, generation)
            log.info("resumed from generation %d (best %.2f)", generation, best_fitness)
        else:
            if out is not None:
                for name, header in (("train_log.csv", LOG_HEADER), ("timing.csv", ["generation", "eval_time_s"])):
                    with open(out / name, "w", newline="") as fh:
                        csv.writer(fh).writerow(header)
            init_rng = np.random.default_rng(np.random.SeedSequence([cfg.base_seed, _INIT_STREAM]))
            pop = init_rng.random((cfg.population_size, GENOME_LENGTH))
            t0 = time.perf_counter()
            records = evaluate_population(pop, range(cfg.population_size), scenario, cfg, 0, pool)
            fitness = np.array([r.fitness for r in records])
            generation = 0
            best_genome, best_fitness, history = pop[0], -np.inf, []
            best_genome, best_fitness = _record(
                generation, pop, fitness, best_genome, best_fitness, history,
                time.perf_counter() - t0, cfg, out, ckpt, callback,
            )

        while not _should_stop(best_fitness, generation, cfg):
            rng = np.random.default_rng(np.random.SeedSequence([cfg.base_seed, generation, _OPS_STREAM]))
            new_pop, elites = next_generation(pop, fitness, cfg, rng)
            generation += 1
            new_fit = np.empty(cfg.population_size)
            if cfg.reevaluate_elites:
                todo = list(range(cfg.population_size))
            else:
                new_fit[: len(elites)] = fitness[elites]
                todo = list(range(len(elites), cfg.population_size))
            t0 = time.perf_counter()
            for rec in evaluate_population(new_pop, todo, scenario, cfg, generation, pool):
                new_fit[rec.genome_id] = rec.fitness
            pop, fitness = new_pop, new_fit
            best_genome, best_fitness = _record(
                generation, pop, fitness, best_genome, best_fitness, history,
                time.perf_counter() - t0, cfg, out, ckpt, callback,
            )
    finally:
        if pool is not None:
            pool.shutdown()

    return GaResult(best_genome.copy(), best_fitness, history, best_fitness >= cfg.fitness_stop)


def _truncate_logs(out: Path, generation: int) -> None:
    # drop rows written after the last checkpoint (a crash between log write and checkpoint)
    for name in ("train_log.csv", "timing.csv"):
        path = out / name
        if not path.exists():
            continue
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        keep = rows[:1] + [r for r in rows[1:] if int(r[0]) <= generation]
        with open(path, "w", newline="") as fh:
            csv.writer(fh).writerows(keep)


def _should_stop(best_fitness: float, generation: int, cfg: GaConfig) -> bool:
    return best_fitness >= cfg.fitness_stop or generation + 1 >= cfg.max_generations


def _record(generation, pop, fitness, best_genome, best_fitness, history, eval_time, cfg, out, ckpt, callback):
    i = int(np.argmax(fitness))
    if fitness[i] > best_fitness:
        best_genome, best_fitness = pop[i].copy(), float(fitness[i])
    stats = GenerationStats(generation, float(fitness[i]), float(np.mean(fitness)), best_fitness, eval_time)
    history.append(stats)
    log.info(
        "generation %d: best %.2f mean %.2f best-ever %.2f (%.1fs)",
        generation, stats.best_fitness, stats.mean_fitness, best_fitness, eval_time,
    )
    if out is not None:
        with open(out / "train_log.csv", "a", newline="") as fh:
            csv.writer(fh).writerow([generation, repr(stats.best_fitness), repr(stats.mean_fitness), repr(best_fitness)])
        with open(out / "timing.csv", "a", newline="") as fh:
            csv.writer(fh).writerow([generation, f"{eval_time:.3f}"])
        save_bank(decode(best_genome), out / "best_model.json")
        ckpt.save(cfg, generation, pop, fitness, best_genome, best_fitness, history)
    if callback is not None:
        callback(stats)
    return best_genome, best_fitness


__all__ = [
    "EvalRecord",
    "GaConfig",
    "GaResult",
    "GenerationStats",
    "GenomeError",
    "evaluate",
    "reward",
    "run_ga",
]
