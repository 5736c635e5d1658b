"""Fuzzy-RRT: RRT path planning for a planar 2-DOF arm with fuzzy-tuned sampling."""

from .arm import (
    ArmGeometry,
    JointConfig,
    Obstacle,
    Scenario,
    ScenarioError,
    forward_kinematics,
    is_collision_free,
    is_path_collision_free,
    load_scenario,
    save_scenario,
    segment_circle_intersects,
)
from .fis import FisBank, FuzzyParams, TskFis, decode, encode, evaluate_bank, infer, load_bank, save_bank
from .planner import PlanResult, build_tree, plan_fuzzy_rrt, plan_rrt

__version__ = "0.1.0"
