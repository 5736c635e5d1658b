"""Goal-biased RRT and Fuzzy-RRT in the arm's joint space.

Both planners run the same tree-construction loop (`build_tree`); they differ
only in where the per-iteration sampling bounds, goal bias and step size come
from. The baseline uses constants, the fuzzy planner queries a `FisBank` with
the end-effector's bearing and distance to the goal and nearest obstacle.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, TextIO

import numpy as np

from .arm import (
    DEFAULT_RESOLUTION,
    JOINT_MAX,
    JOINT_MIN,
    JointConfig,
    Scenario,
    forward_kinematics,
    is_collision_free,
    is_path_collision_free,
)
from .fis import TWO_PI, EnvInputs, FisBank, FuzzyParams, evaluate_bank

FULL_BOX = ((JOINT_MIN, JOINT_MAX), (JOINT_MIN, JOINT_MAX))
DEFAULT_MAX_ITER = 10_000
DEFAULT_RRT_STEP = 5.0
DEFAULT_RRT_BIAS = 0.05
ENV_SOURCES = ("nearest", "newest")


class Tree:
    """Growing RRT tree. Node 0 is the root; the root's parent is -1."""

    def __init__(self, root: JointConfig, capacity: int = 256):
        self.nodes: list[JointConfig] = []
        self.parent: list[int] = []
        self.goal_index: Optional[int] = None
        self._xs = np.empty(capacity)
        self._ys = np.empty(capacity)
        self.add(root, -1)

    def __len__(self) -> int:
        return len(self.nodes)

    def add(self, q: JointConfig, parent: int) -> int:
        n = len(self.nodes)
        if parent >= n or parent < -1 or (parent == -1 and n > 0):
            raise ValueError(f"invalid parent index {parent} for node {n}")
        if n == self._xs.shape[0]:
            self._xs = np.concatenate([self._xs, np.empty(n)])
            self._ys = np.concatenate([self._ys, np.empty(n)])
        self._xs[n] = q.theta1
        self._ys[n] = q.theta2
        self.nodes.append(q)
        self.parent.append(parent)
        return n

    def nearest(self, q: JointConfig) -> int:
        n = len(self.nodes)
        dx = self._xs[:n] - q.theta1
        dy = self._ys[:n] - q.theta2
        # argmin returns the first minimum, i.e. the lowest index on ties
        return int(np.argmin(dx * dx + dy * dy))


@dataclass
class PlanResult:
    success: bool
    iterations: int
    path: list[JointConfig]
    path_cost: float
    tree: Tree = field(compare=False, repr=False)
    ee_path_length: float = 0.0
    wall_time: float = field(default=0.0, compare=False)

    def tree_signature(self) -> tuple:
        return tuple(self.tree.nodes), tuple(self.tree.parent)


def sample_point(
    bias: float,
    bounds: tuple[tuple[float, float], tuple[float, float]],
    goal: JointConfig,
    rng: np.random.Generator,
) -> JointConfig:
    """Return the goal with probability `bias`, else a uniform draw inside `bounds`."""
    if rng.random() < bias:
        return goal
    (lo1, hi1), (lo2, hi2) = bounds
    return JointConfig(lo1 + (hi1 - lo1) * rng.random(), lo2 + (hi2 - lo2) * rng.random())


def nearest_neighbor(t: Tree, sample: JointConfig) -> int:
    return t.nearest(sample)


def steer(frm: JointConfig, to: JointConfig, step: float) -> JointConfig:
    """Move from `frm` toward `to` by at most `step` degrees."""
    if step < 0:
        raise ValueError("step must be non-negative")
    d = frm.distance(to)
    if d <= step:
        return to
    f = step / d
    return JointConfig(frm.theta1 + f * (to.theta1 - frm.theta1), frm.theta2 + f * (to.theta2 - frm.theta2))


def _bearing(dx: float, dy: float) -> float:
    a = math.atan2(dy, dx) % TWO_PI
    return 0.0 if a >= TWO_PI else a


def env_inputs(q_near: JointConfig, s: Scenario, goal_ee: Optional[tuple[float, float]] = None) -> EnvInputs:
    """Bearing/distance from the end effector at q_near to the goal and the nearest obstacle."""
    _, ee = forward_kinematics(q_near, s.geometry)
    if goal_ee is None:
        _, goal_ee = forward_kinematics(s.goal, s.geometry)
    gx, gy = goal_ee[0] - ee[0], goal_ee[1] - ee[1]
    if s.obstacles:
        best = None
        best_clear = math.inf
        for obs in s.obstacles:
            clear = math.hypot(obs.center[0] - ee[0], obs.center[1] - ee[1]) - obs.radius
            if clear < best_clear:
                best, best_clear = obs, clear
        angle_obs = _bearing(best.center[0] - ee[0], best.center[1] - ee[1])
        dist_obs = max(best_clear, 0.0)
    else:
        angle_obs, dist_obs = 0.0, math.inf
    return EnvInputs(_bearing(gx, gy), math.hypot(gx, gy), angle_obs, dist_obs)


ParamsFn = Callable[[JointConfig], FuzzyParams]


def build_tree(
    s: Scenario,
    params_for: ParamsFn,
    max_iter: int,
    rng: np.random.Generator,
    resolution: float = DEFAULT_RESOLUTION,
    env_source: str = "nearest",
) -> PlanResult:
    """Shared tree-construction loop.

    `params_for` is called once per iteration with the configuration whose
    surroundings drive the parameters: the nearest neighbour found in the
    previous iteration (initially the start), or with env_source="newest"
    the most recently inserted node.
    Rejected iterations still count toward the iteration total.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if env_source not in ENV_SOURCES:
        raise ValueError(f"env_source must be one of {ENV_SOURCES}")
    s.validate()
    t0 = time.perf_counter()
    goal = s.goal
    tree = Tree(s.start, capacity=min(max_iter + 2, 1024))
    nearest = 0
    newest = 0
    for it in range(1, max_iter + 1):
        ref = nearest if env_source == "nearest" else newest
        p = params_for(tree.nodes[ref])
        sample = sample_point(p.bias, p.bounds, goal, rng)
        nearest = tree.nearest(sample)
        q_near = tree.nodes[nearest]
        new = steer(q_near, sample, p.step)
        if not is_collision_free(new, s):
            continue
        if not is_path_collision_free(q_near, new, s, resolution):
            continue
        newest = tree.add(new, nearest)
        if new == goal:
            tree.goal_index = newest
            return _finish(tree, s, it, t0)
        if new.distance(goal) <= p.step and is_path_collision_free(new, goal, s, resolution):
            tree.goal_index = tree.add(goal, newest)
            return _finish(tree, s, it, t0)
    return PlanResult(False, max_iter, [], 0.0, tree, 0.0, time.perf_counter() - t0)


def _finish(tree: Tree, s: Scenario, iterations: int, t0: float) -> PlanResult:
    path = extract_path(tree)
    return PlanResult(
        True,
        iterations,
        path,
        path_cost(path),
        tree,
        ee_path_length(path, s),
        time.perf_counter() - t0,
    )


def plan_rrt(
    s: Scenario,
    max_iter: int = DEFAULT_MAX_ITER,
    fixed_step: float = DEFAULT_RRT_STEP,
    fixed_bias: float = DEFAULT_RRT_BIAS,
    rng: Optional[np.random.Generator] = None,
    resolution: float = DEFAULT_RESOLUTION,
) -> PlanResult:
    """Baseline goal-biased RRT sampling the whole joint box."""
    if not 0.0 <= fixed_bias <= 1.0:
        raise ValueError("fixed_bias must be in [0, 1]")
    if fixed_step < 0:
        raise ValueError("fixed_step must be non-negative")
    rng = rng if rng is not None else np.random.default_rng(s.rng_seed)
    params = FuzzyParams(fixed_bias, FULL_BOX, fixed_step)
    return build_tree(s, lambda q: params, max_iter, rng, resolution)


def plan_fuzzy_rrt(
    s: Scenario,
    bank: FisBank,
    max_iter: int = DEFAULT_MAX_ITER,
    rng: Optional[np.random.Generator] = None,
    resolution: float = DEFAULT_RESOLUTION,
    env_source: str = "nearest",
) -> PlanResult:
    """RRT whose bounds, bias and step are produced by `bank` every iteration."""
    rng = rng if rng is not None else np.random.default_rng(s.rng_seed)
    _, goal_ee = forward_kinematics(s.goal, s.geometry)

    def params_for(q: JointConfig) -> FuzzyParams:
        return evaluate_bank(bank, env_inputs(q, s, goal_ee))

    return build_tree(s, params_for, max_iter, rng, resolution, env_source)


def extract_path(t: Tree) -> list[JointConfig]:
    if t.goal_index is None:
        raise ValueError("tree does not contain the goal")
    path = []
    i = t.goal_index
    while i != -1:
        path.append(t.nodes[i])
        i = t.parent[i]
    path.reverse()
    return path


def path_cost(path: list[JointConfig]) -> float:
    """Joint-space Euclidean length of the path, in degrees."""
    if not path:
        raise ValueError("path is empty")
    return float(sum(a.distance(b) for a, b in zip(path, path[1:])))


def ee_path_length(path: list[JointConfig], s: Scenario) -> float:
    """Workspace length of the polyline through the end-effector positions of the path vertices."""
    pts = [forward_kinematics(q, s.geometry)[1] for q in path]
    return float(sum(math.hypot(b[0] - a[0], b[1] - a[1]) for a, b in zip(pts, pts[1:])))


def write_tree_dump(result: PlanResult, out: TextIO) -> None:
    """Plain-text dump: one node per line (index theta1 theta2 parent), then the path."""
    tree = result.tree
    out.write(f"# success {int(result.success)} iterations {result.iterations} path_cost {result.path_cost!r}\n")
    out.write(f"# nodes {len(tree)}\n")
    out.write("# index theta1 theta2 parent\n")
    for i, (q, p) in enumerate(zip(tree.nodes, tree.parent)):
        out.write(f"{i} {q.theta1!r} {q.theta2!r} {p}\n")
    out.write(f"# path {len(result.path)}\n")
    out.write("# theta1 theta2\n")
    for q in result.path:
        out.write(f"{q.theta1!r} {q.theta2!r}\n")


def save_tree_dump(result: PlanResult, path: str | Path) -> None:
    with open(path, "w") as fh:
        write_tree_dump(result, fh)


def read_tree_dump(path: str | Path) -> tuple[list[tuple[int, float, float, int]], list[tuple[float, float]]]:
    """Parse a dump back into (node rows, path rows)."""
    nodes, pts = [], []
    section = None
    for line in Path(path).read_text().splitlines():
        if line.startswith("# nodes"):
            section = "nodes"
        elif line.startswith("# path"):
            section = "path"
        elif line.startswith("#") or not line.strip():
            continue
        elif section == "nodes":
            i, a, b, p = line.split()
            nodes.append((int(i), float(a), float(b), int(p)))
        elif section == "path":
            a, b = line.split()
            pts.append((float(a), float(b)))
    return nodes, pts
