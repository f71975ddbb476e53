"""Kinematic collision detection: the ground-truth oracle.

A configuration is labelled by running forward kinematics and testing every
link rectangle against every workspace obstacle with GJK.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .geometry import ArmModel, ConvexPolygon, check_configuration, clip_to_box

COLLISION = 1
FREE = -1


@dataclass(frozen=True)
class Workspace:
    """Convex obstacles inside an axis-aligned box ``(xmin, ymin, xmax, ymax)``.

    Obstacles are clipped to the box on construction; any that fall entirely
    outside are dropped.
    """

    obstacles: tuple[ConvexPolygon, ...] = ()
    bounds: tuple[float, float, float, float] = (-2.5, -2.5, 2.5, 2.5)

    def __post_init__(self):
        xmin, ymin, xmax, ymax = (float(v) for v in self.bounds)
        if not (xmin < xmax and ymin < ymax):
            raise ValueError("workspace bounds must have positive extent")
        clipped = []
        for obs in self.obstacles:
            if not isinstance(obs, ConvexPolygon):
                obs = ConvexPolygon(obs)
            lo_x, lo_y, hi_x, hi_y = obs.bounding_box()
            if xmin <= lo_x and hi_x <= xmax and ymin <= lo_y and hi_y <= ymax:
                clipped.append(obs)
                continue
            obs = clip_to_box(obs, (xmin, ymin, xmax, ymax))
            if obs is not None:
                clipped.append(obs)
        object.__setattr__(self, "obstacles", tuple(clipped))
        object.__setattr__(self, "bounds", (xmin, ymin, xmax, ymax))

    @property
    def width(self) -> float:
        return self.bounds[2] - self.bounds[0]

    def with_obstacles(self, obstacles) -> Workspace:
        return Workspace(tuple(obstacles), self.bounds)


@dataclass
class KcdStats:
    """Query counter and accumulated oracle time (seconds) for one trial.

    Safe to share between threads; call :meth:`reset` between trials.
    """

    query_count: int = 0
    total_time: float = 0.0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def record(self, queries: int, seconds: float) -> None:
        with self._lock:
            self.query_count += queries
            self.total_time += seconds

    def reset(self) -> None:
        with self._lock:
            self.query_count = 0
            self.total_time = 0.0

    def snapshot(self) -> tuple[int, float]:
        with self._lock:
            return self.query_count, self.total_time


class KinematicChecker:
    """KCD oracle bound to one arm and one workspace snapshot.

    Calling the checker with a configuration returns ``+1`` (collision) or
    ``-1`` (free). Every query is counted and timed in ``stats``.
    """

    def __init__(self, arm: ArmModel, workspace: Workspace, stats: KcdStats | None = None,
                 backend: str | None = None):
        self.arm = arm
        self.workspace = workspace
        self.stats = stats if stats is not None else KcdStats()
        self.core = _backend.core if backend is None else _backend.load(backend)
        self._scene = self.core.ArmScene(
            arm.link_lengths, 0.5 * arm.link_thickness, arm.base,
            [o.vertices for o in workspace.obstacles])

    @property
    def dof(self) -> int:
        return self.arm.dof

    def __call__(self, q) -> int:
        q = np.asarray(q, dtype=np.float64)
        if q.shape != (self.arm.dof,):
            raise ValueError(f"configuration must have {self.arm.dof} joint angles")
        t0 = time.perf_counter()
        hit = self._scene.collides(q)
        self.stats.record(1, time.perf_counter() - t0)
        return COLLISION if hit else FREE

    def raw(self, q) -> bool:
        """Uninstrumented collision query on a float64 vector; for timing loops."""
        return self._scene.collides(q)

    def check_many(self, configs) -> np.ndarray:
        configs = np.ascontiguousarray(configs, dtype=np.float64).reshape(-1, self.arm.dof)
        t0 = time.perf_counter()
        labels = self._scene.label_many(configs)
        self.stats.record(len(configs), time.perf_counter() - t0)
        return labels


def kcd_check(arm: ArmModel, q, w: Workspace, stats: KcdStats | None = None) -> int:
    """Label one configuration: ``+1`` if any link touches any obstacle, else ``-1``."""
    q = check_configuration(q, arm.dof)
    return KinematicChecker(arm, w, stats)(q)


def relabel(arm: ArmModel, w: Workspace, dataset, indices, stats: KcdStats | None = None,
            checker: KinematicChecker | None = None) -> int:
    """Re-query the oracle at ``indices`` and store the fresh labels.

    Returns the number of labels that changed.
    """
    idx = np.asarray(indices, dtype=np.intp).reshape(-1)
    if idx.size == 0:
        return 0
    if idx.min() < 0 or idx.max() >= dataset.n:
        raise ValueError("relabel index out of range")
    if checker is None:
        checker = KinematicChecker(arm, w, stats)
    fresh = checker.check_many(dataset.points[idx])
    flips = int(np.count_nonzero(dataset.labels[idx] != fresh))
    dataset.labels[idx] = fresh
    return flips
