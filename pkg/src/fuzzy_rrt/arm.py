"""Two-link planar arm: kinematics, circular obstacles and collision predicates.

Joint angles are in degrees throughout; radians only appear inside the
trigonometry. The joint space is the box [-180, 180]^2 with no wraparound.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

JOINT_MIN = -180.0
JOINT_MAX = 180.0
DEFAULT_RESOLUTION = 1.0  # degrees between interpolated path checks

Point = tuple[float, float]


class ScenarioError(ValueError):
    """Raised for malformed scenario files or infeasible start/goal poses."""


def _clamp_joint(v: float) -> float:
    return JOINT_MIN if v < JOINT_MIN else JOINT_MAX if v > JOINT_MAX else v


@dataclass(frozen=True, slots=True)
class JointConfig:
    """A point in joint space. Out-of-box angles are clamped, non-finite ones rejected."""

    theta1: float
    theta2: float

    def __post_init__(self) -> None:
        t1, t2 = float(self.theta1), float(self.theta2)
        if not (math.isfinite(t1) and math.isfinite(t2)):
            raise ValueError(f"joint angles must be finite, got ({t1}, {t2})")
        object.__setattr__(self, "theta1", _clamp_joint(t1))
        object.__setattr__(self, "theta2", _clamp_joint(t2))

    def as_tuple(self) -> Point:
        return (self.theta1, self.theta2)

    def distance(self, other: JointConfig) -> float:
        return math.hypot(self.theta1 - other.theta1, self.theta2 - other.theta2)


@dataclass(frozen=True, slots=True)
class ArmGeometry:
    link1_len: float = 0.3
    link2_len: float = 0.3
    base: Point = (0.0, 0.0)

    def __post_init__(self) -> None:
        if not (self.link1_len > 0 and self.link2_len > 0):
            raise ScenarioError("link lengths must be positive")

    @property
    def reach(self) -> float:
        return self.link1_len + self.link2_len


@dataclass(frozen=True, slots=True)
class Obstacle:
    center: Point
    radius: float

    def __post_init__(self) -> None:
        cx, cy = self.center
        if not (math.isfinite(cx) and math.isfinite(cy)):
            raise ScenarioError(f"obstacle center must be finite, got {self.center}")
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ScenarioError(f"obstacle radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", (float(cx), float(cy)))
        object.__setattr__(self, "radius", float(self.radius))


@dataclass(frozen=True)
class Scenario:
    geometry: ArmGeometry
    obstacles: tuple[Obstacle, ...]
    start: JointConfig
    goal: JointConfig
    rng_seed: int = 0
    name: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        if self.rng_seed < 0:
            raise ScenarioError("rng_seed must be a non-negative integer")

    def validate(self) -> None:
        """Raise ScenarioError unless start and goal are both collision-free."""
        for label, q in (("start", self.start), ("goal", self.goal)):
            if not is_collision_free(q, self):
                raise ScenarioError(f"{label} configuration {q.as_tuple()} is in collision")


def _fk(t1: float, t2: float, g: ArmGeometry) -> tuple[Point, Point]:
    a1 = math.radians(t1)
    a12 = a1 + math.radians(t2)
    bx, by = g.base
    ex = bx + g.link1_len * math.cos(a1)
    ey = by + g.link1_len * math.sin(a1)
    return (ex, ey), (ex + g.link2_len * math.cos(a12), ey + g.link2_len * math.sin(a12))


def forward_kinematics(q: JointConfig, g: ArmGeometry) -> tuple[Point, Point]:
    """Return (elbow, end effector) workspace positions; theta2 is relative to link 1."""
    return _fk(q.theta1, q.theta2, g)


def segment_point_distance(p1: Point, p2: Point, c: Point) -> float:
    """Minimum distance from point c to the closed segment [p1, p2]."""
    # canonical endpoint order keeps the result exactly symmetric in p1/p2
    if p2 < p1:
        p1, p2 = p2, p1
    dx, dy = p2[0] - p1[0], p2[1] - p1[1]
    fx, fy = c[0] - p1[0], c[1] - p1[1]
    den = dx * dx + dy * dy
    if den == 0.0:
        return math.hypot(fx, fy)
    t = (fx * dx + fy * dy) / den
    if t <= 0.0:
        return math.hypot(fx, fy)
    if t >= 1.0:
        return math.hypot(c[0] - p2[0], c[1] - p2[1])
    return math.hypot(fx - t * dx, fy - t * dy)


def segment_circle_intersects(p1: Point, p2: Point, obs: Obstacle) -> bool:
    return segment_point_distance(p1, p2, obs.center) <= obs.radius


def _pose_clear(t1: float, t2: float, g: ArmGeometry, obstacles: Sequence[Obstacle]) -> bool:
    elbow, ee = _fk(t1, t2, g)
    base = g.base
    for obs in obstacles:
        if segment_circle_intersects(base, elbow, obs) or segment_circle_intersects(elbow, ee, obs):
            return False
    return True


def is_collision_free(q: JointConfig, s: Scenario) -> bool:
    """True iff neither link touches any obstacle."""
    if not s.obstacles:
        return True
    return _pose_clear(q.theta1, q.theta2, s.geometry, s.obstacles)


def interpolation_count(distance: float, resolution: float) -> int:
    """Number of equal sub-segments used to check a joint-space edge.

    Always a power of two, so halving the resolution checks a superset of
    the configurations checked before.
    """
    n = 1
    while distance / n > resolution:
        n *= 2
    return n


def is_path_collision_free(
    qa: JointConfig,
    qb: JointConfig,
    s: Scenario,
    resolution: float = DEFAULT_RESOLUTION,
) -> bool:
    """Check every interpolated pose on the straight joint-space edge qa -> qb."""
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    if not s.obstacles:
        return True
    n = interpolation_count(qa.distance(qb), resolution)
    a1, a2 = qa.theta1, qa.theta2
    d1, d2 = qb.theta1 - a1, qb.theta2 - a2
    g, obstacles = s.geometry, s.obstacles
    for k in range(n + 1):
        # k/n and (n-k)/n give identical poses from either direction
        if 2 * k == n:
            t1, t2 = 0.5 * (a1 + qb.theta1), 0.5 * (a2 + qb.theta2)
        elif 2 * k < n:
            f = k / n
            t1, t2 = a1 + f * d1, a2 + f * d2
        else:
            f = (n - k) / n
            t1, t2 = qb.theta1 - f * d1, qb.theta2 - f * d2
        if not _pose_clear(t1, t2, g, obstacles):
            return False
    return True


# --- scenario files -------------------------------------------------------

_SCENARIO_KEYS = {"name", "links", "obstacles", "start", "goal", "seed"}
_OBSTACLE_KEYS = {"center", "radius"}


def _pair(value, what: str) -> Point:
    if not (isinstance(value, list) and len(value) == 2 and all(isinstance(v, (int, float)) for v in value)):
        raise ScenarioError(f"{what} must be a list of two numbers, got {value!r}")
    return (float(value[0]), float(value[1]))


def scenario_from_dict(data: dict) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a JSON object")
    unknown = set(data) - _SCENARIO_KEYS
    if unknown:
        raise ScenarioError(f"unknown scenario keys: {sorted(unknown)}")
    missing = {"start", "goal"} - set(data)
    if missing:
        raise ScenarioError(f"missing scenario keys: {sorted(missing)}")
    l1, l2 = _pair(data.get("links", [0.3, 0.3]), "links")
    obstacles = []
    for i, item in enumerate(data.get("obstacles", [])):
        if not isinstance(item, dict):
            raise ScenarioError(f"obstacle {i} must be an object")
        bad = set(item) - _OBSTACLE_KEYS
        if bad or set(item) != _OBSTACLE_KEYS:
            raise ScenarioError(f"obstacle {i} must have exactly keys {sorted(_OBSTACLE_KEYS)}")
        r = item["radius"]
        if not isinstance(r, (int, float)):
            raise ScenarioError(f"obstacle {i} radius must be a number")
        obstacles.append(Obstacle(_pair(item["center"], f"obstacle {i} center"), float(r)))
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ScenarioError("seed must be an integer")
    try:
        start = JointConfig(*_pair(data["start"], "start"))
        goal = JointConfig(*_pair(data["goal"], "goal"))
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc
    name = data.get("name", "")
    if not isinstance(name, str):
        raise ScenarioError("name must be a string")
    s = Scenario(ArmGeometry(l1, l2), tuple(obstacles), start, goal, seed, name)
    s.validate()
    return s


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "name": s.name,
        "links": [s.geometry.link1_len, s.geometry.link2_len],
        "obstacles": [{"center": list(o.center), "radius": o.radius} for o in s.obstacles],
        "start": list(s.start.as_tuple()),
        "goal": list(s.goal.as_tuple()),
        "seed": s.rng_seed,
    }


def load_scenario(path: str | Path) -> Scenario:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: not valid JSON ({exc})") from exc
    return scenario_from_dict(data)


def save_scenario(s: Scenario, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(s), indent=2) + "\n")
