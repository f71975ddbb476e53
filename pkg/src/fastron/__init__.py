"""Kernel-perceptron proxy collision detection for planar arms, with active learning."""

from ._backend import available as available_backends
from ._backend import core as _core
from .active_learning import ActiveLearningParams, CycleStats, select_relabel_set, update_cycle
from .dataset import Dataset, SamplerSpec, build_dataset, gram_matrix, kernel
from .geometry import ArmModel, ConvexPolygon, forward_kinematics, gjk_intersects, sat_intersects
from .kcd import KcdStats, KinematicChecker, Workspace, kcd_check, relabel
from .model import FastronChecker, FastronModel, UpdateReport
from .planner import PlanResult, RrtParams, edge_free, rrt_plan

BACKEND = _core.NAME

__all__ = [
    "ActiveLearningParams", "ArmModel", "BACKEND", "ConvexPolygon", "CycleStats", "Dataset",
    "FastronChecker", "FastronModel", "KcdStats", "KinematicChecker", "PlanResult",
    "RrtParams", "SamplerSpec", "UpdateReport", "Workspace", "available_backends",
    "build_dataset", "edge_free", "forward_kinematics", "gjk_intersects", "gram_matrix",
    "kcd_check", "kernel", "relabel", "rrt_plan", "sat_intersects", "select_relabel_set",
    "update_cycle",
]
