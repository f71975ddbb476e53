"""Standard RRT in joint space with a pluggable collision checker.

A checker is any callable mapping a configuration to +1 (collision) or -1
(free); both :class:`fastron.kcd.KinematicChecker` and
:class:`fastron.model.FastronChecker` qualify.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .dataset import JOINT_BOUNDS


@dataclass(frozen=True)
class RrtParams:
    step_size: float = 0.2
    goal_bias: float = 0.05
    max_iterations: int = 10_000
    edge_resolution: float = 0.05
    goal_tolerance: float = 0.1
    seed: int = 0
    joint_bounds: tuple[float, float] = JOINT_BOUNDS

    def __post_init__(self):
        if not self.step_size > 0:
            raise ValueError("step_size must be positive")
        if not 0 < self.edge_resolution <= self.step_size:
            raise ValueError("edge_resolution must be in (0, step_size]")
        if not 0.0 <= self.goal_bias <= 1.0:
            raise ValueError("goal_bias must be in [0, 1]")


@dataclass
class PlanResult:
    path: list = field(default_factory=list)
    iterations: int = 0
    checker_time: float = 0.0
    checker_queries: int = 0

    @property
    def success(self) -> bool:
        return bool(self.path)


class TimedChecker:
    """Wraps a checker, accumulating call count and time spent inside it."""

    def __init__(self, checker):
        self.checker = checker
        self.calls = 0
        self.elapsed = 0.0

    def __call__(self, q) -> int:
        t0 = time.perf_counter()
        label = self.checker(q)
        self.elapsed += time.perf_counter() - t0
        self.calls += 1
        return label


def _edge_samples(a, b, resolution):
    dist = float(np.linalg.norm(b - a))
    n = max(1, math.ceil(dist / resolution))
    return [a + (b - a) * (i / n) for i in range(n + 1)]


def edge_free(checker, a, b, resolution: float) -> bool:
    """True iff every sample along ``a -> b`` (spacing <= resolution, endpoints included) is free."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("edge endpoints must have equal dimension")
    if np.array_equal(a, b):
        return checker(a) < 0
    return all(checker(q) < 0 for q in _edge_samples(a, b, resolution))


def _extension_free(checker, a, b, resolution) -> bool:
    # `a` is already in the tree, so it is not re-checked; check from the far end
    samples = _edge_samples(a, b, resolution)[1:]
    return all(checker(q) < 0 for q in reversed(samples))


def rrt_plan(start, goal, checker, params: RrtParams = RrtParams()) -> PlanResult:
    """Plan from ``start`` to ``goal``; an empty path means no plan within the budget.

    A start within ``goal_tolerance`` of the goal yields the single-waypoint
    path ``[start]``. Otherwise the tree tries to connect straight to the goal
    whenever a new node lands within one step of it.

    ``checker_time`` and ``checker_queries`` cover collision checking only.
    Raises ``ValueError`` if the checker reports ``start`` or ``goal`` in
    collision.
    """
    start = np.asarray(start, dtype=np.float64)
    goal = np.asarray(goal, dtype=np.float64)
    if start.shape != goal.shape or start.ndim != 1:
        raise ValueError("start and goal must be vectors of equal length")
    timed = TimedChecker(checker)

    def result(path, iterations):
        return PlanResult(path, iterations, timed.elapsed, timed.calls)

    if timed(start) > 0:
        raise ValueError("start configuration is in collision")
    if timed(goal) > 0:
        raise ValueError("goal configuration is in collision")
    if float(np.linalg.norm(goal - start)) <= params.goal_tolerance:
        return result([start.copy()], 0)

    rng = np.random.default_rng(params.seed)
    lo, hi = params.joint_bounds
    dof = start.shape[0]
    nodes = np.empty((params.max_iterations + 2, dof))
    parents = np.full(params.max_iterations + 2, -1, dtype=np.intp)
    nodes[0] = start
    count = 1

    def path_to(idx):
        out = [goal.copy()]
        while idx >= 0:
            out.append(nodes[idx].copy())
            idx = parents[idx]
        return out[::-1]

    if (float(np.linalg.norm(goal - start)) <= params.step_size
            and _extension_free(timed, start, goal, params.edge_resolution)):
        return result(path_to(0), 0)

    for it in range(1, params.max_iterations + 1):
        target = goal if rng.random() < params.goal_bias else rng.uniform(lo, hi, dof)
        d2 = np.einsum("ij,ij->i", nodes[:count] - target, nodes[:count] - target)
        near = int(np.argmin(d2))
        dist = math.sqrt(d2[near])
        if dist == 0.0:
            continue
        base = nodes[near]
        new = target if dist <= params.step_size else base + (target - base) * (params.step_size / dist)
        if not _extension_free(timed, base, new, params.edge_resolution):
            continue
        nodes[count] = new
        parents[count] = near
        count += 1
        if (float(np.linalg.norm(goal - new)) <= params.step_size
                and _extension_free(timed, new, goal, params.edge_resolution)):
            if float(np.linalg.norm(goal - new)) == 0.0:
                return result(path_to(parents[count - 1]), it)
            return result(path_to(count - 1), it)
    return result([], params.max_iterations)


def path_is_valid(checker, path, resolution: float) -> bool:
    return all(edge_free(checker, a, b, resolution) for a, b in zip(path, path[1:]))


def dump_path_csv(path, fh) -> None:
    """One configuration per row, columns ``q0 .. q{dof-1}``."""
    writer = csv.writer(fh, lineterminator="\n")
    if not path:
        return
    writer.writerow([f"q{i}" for i in range(len(path[0]))])
    for q in path:
        writer.writerow([repr(float(v)) for v in q])
