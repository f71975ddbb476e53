"""Scenario configuration and scene generation for the benchmarks.

Config files are flat ``key = value`` text, one pair per line, ``#`` starts
a comment. Keys are the field names of :class:`ScenarioSpec`; tuples are
comma-separated; ``none`` clears an optional field. Unknown keys are errors.
"""

from __future__ import annotations

import dataclasses
import math
import types
import typing
from dataclasses import dataclass

import numpy as np

from .active_learning import ActiveLearningParams
from .dataset import SamplerSpec, grid_side
from .geometry import ArmModel, ConvexPolygon, random_convex_polygon
from .kcd import Workspace
from .planner import RrtParams


@dataclass(frozen=True)
class ScenarioSpec:
    # arm
    dof: int = 2
    arm_length: float = 2.0
    link_lengths: tuple[float, ...] | None = None
    link_thickness: float | None = None
    base: tuple[float, float] = (0.0, 0.0)
    # workspace
    workspace_bounds: tuple[float, float, float, float] = (-2.5, -2.5, 2.5, 2.5)
    obstacle_count: int = 1
    obstacle_radius: tuple[float, float] = (0.2, 0.5)
    obstacle_vertices: tuple[int, int] = (3, 8)
    obstacle_clearance: float = 0.6
    # motion
    motion: str = "linear-bounce"
    speed: float = 0.02
    cycles: int = 100
    # dataset and model
    sampler: str = "auto"
    n_samples: int = 625
    gamma: float = 10.0
    r_plus: float = 100.0
    max_updates: int = 5000
    # active learning
    allowance: int | None = None
    allowance_fraction: float = 0.3
    exploit_proportion: float = 0.8
    k_ns: int = 4
    # evaluation
    eval_size: int = 10_000
    timing_samples: int = 2000
    record_timing: bool = True
    scenes: int = 20
    seed: int = 0
    backend: str = "default"
    # sweeps
    obstacle_counts: tuple[int, ...] = (1, 2, 3, 4, 5)
    sweep_n: tuple[int, ...] = ()
    sweep_allowance: tuple[float, ...] = ()
    # rrt
    rrt_step_size: float = 0.2
    rrt_goal_bias: float = 0.05
    rrt_max_iterations: int = 10_000
    rrt_edge_resolution: float = 0.05
    rrt_goal_tolerance: float = 0.1
    rrt_start: tuple[float, ...] = (-2.0, 0.5)
    rrt_goal: tuple[float, ...] = (2.0, -0.5)
    rrt_replans: int = 5
    rrt_max_shift: float = 0.3
    rrt_placement_retries: int = 200
    rrt_validation_factor: int = 10

    def __post_init__(self):
        if self.dof < 1:
            raise ValueError("dof must be >= 1")
        if self.link_lengths is not None and len(self.link_lengths) != self.dof:
            raise ValueError("link_lengths must have dof entries")
        if self.motion not in ("static", "linear-bounce"):
            raise ValueError(f"unknown motion {self.motion!r}")
        if self.sampler not in ("auto", "grid", "uniform"):
            raise ValueError(f"unknown sampler {self.sampler!r}")
        if self.backend not in ("default", "compiled", "python"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.eval_size < 1 or self.scenes < 1 or self.cycles < 0:
            raise ValueError("eval_size and scenes must be positive, cycles non-negative")
        if not 0.0 <= self.allowance_fraction <= 1.0:
            raise ValueError("allowance_fraction must be in [0, 1]")
        # validate nested specs eagerly so config errors surface at load time
        self.arm()
        self.sampler_spec()
        self.al_params()
        self.rrt_params()

    @property
    def kernel_backend(self) -> str | None:
        return None if self.backend == "default" else self.backend

    def arm(self) -> ArmModel:
        lengths = self.link_lengths or tuple([self.arm_length / self.dof] * self.dof)
        return ArmModel(lengths, self.link_thickness, self.base)

    def sampler_spec(self, n: int | None = None, seed: int | None = None) -> SamplerSpec:
        n = self.n_samples if n is None else n
        kind = self.sampler
        if kind == "auto":
            kind = "grid" if self.dof == 2 and grid_side(n, self.dof) is not None else "uniform"
        return SamplerSpec(kind, n, self.dof, self.seed if seed is None else seed)

    def allowance_for(self, n: int, fraction: float | None = None) -> int:
        if fraction is None and self.allowance is not None:
            return min(self.allowance, n)
        fraction = self.allowance_fraction if fraction is None else fraction
        return min(n, int(round(fraction * n)))

    def al_params(self, n: int | None = None, fraction: float | None = None,
                  seed: int | None = None) -> ActiveLearningParams:
        n = self.n_samples if n is None else n
        return ActiveLearningParams(self.allowance_for(n, fraction), self.exploit_proportion,
                                    self.k_ns, self.seed if seed is None else seed)

    def rrt_params(self, seed: int | None = None) -> RrtParams:
        return RrtParams(self.rrt_step_size, self.rrt_goal_bias, self.rrt_max_iterations,
                         self.rrt_edge_resolution, self.rrt_goal_tolerance,
                         self.seed if seed is None else seed)


def _unwrap_optional(tp):
    origin = typing.get_origin(tp)
    if origin in (typing.Union, types.UnionType):
        args = [a for a in typing.get_args(tp) if a is not type(None)]
        return args[0], True
    return tp, False


def _parse_value(tp, raw: str):
    tp, optional = _unwrap_optional(tp)
    text = raw.strip()
    if optional and text.lower() == "none":
        return None
    if typing.get_origin(tp) is tuple:
        item = typing.get_args(tp)[0]
        parts = [p.strip() for p in text.split(",") if p.strip()]
        return tuple(_parse_value(item, p) for p in parts)
    if tp is bool:
        low = text.lower()
        if low in ("true", "yes", "1", "on"):
            return True
        if low in ("false", "no", "0", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if tp is int:
        return int(text)
    if tp is float:
        return float(text)
    return text


def _field_types():
    hints = typing.get_type_hints(ScenarioSpec)
    return {f.name: hints[f.name] for f in dataclasses.fields(ScenarioSpec)}


def parse_config(text: str, source: str = "<config>") -> dict:
    """Parse ``key = value`` lines into typed overrides for :class:`ScenarioSpec`."""
    types_ = _field_types()
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{source}:{lineno}: expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in types_:
            raise ValueError(f"{source}:{lineno}: unknown key {key!r}")
        try:
            values[key] = _parse_value(types_[key], raw)
        except ValueError as exc:
            raise ValueError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from None
    return values


def load_spec(path=None, **overrides) -> ScenarioSpec:
    values = {}
    if path is not None:
        with open(path) as fh:
            values = parse_config(fh.read(), str(path))
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ScenarioSpec(**values)


def format_config(spec: ScenarioSpec) -> str:
    """Render ``spec`` back to config text (round-trips through :func:`parse_config`)."""
    lines = []
    for f in dataclasses.fields(spec):
        v = getattr(spec, f.name)
        if v is None:
            text = "none"
        elif isinstance(v, tuple):
            text = ", ".join(repr(x) for x in v)
        elif isinstance(v, bool):
            text = "true" if v else "false"
        else:
            text = repr(v) if isinstance(v, float) else str(v)
        lines.append(f"{f.name} = {text}")
    return "\n".join(lines) + "\n"


def random_obstacle(spec: ScenarioSpec, arm: ArmModel, rng: np.random.Generator) -> ConvexPolygon:
    """Obstacle centred inside the arm's reach, at least ``obstacle_clearance`` from the base."""
    lo = min(spec.obstacle_clearance, 0.95 * arm.reach)
    r = rng.uniform(lo, 0.95 * arm.reach)
    theta = rng.uniform(0.0, 2.0 * math.pi)
    center = (arm.base.x + r * math.cos(theta), arm.base.y + r * math.sin(theta))
    return random_convex_polygon(rng, center, spec.obstacle_radius, spec.obstacle_vertices)


def random_workspace(spec: ScenarioSpec, arm: ArmModel, rng: np.random.Generator,
                     count: int | None = None) -> Workspace:
    count = spec.obstacle_count if count is None else count
    return Workspace(tuple(random_obstacle(spec, arm, rng) for _ in range(count)),
                     spec.workspace_bounds)


class ObstacleMotion:
    """Constant-velocity obstacles that bounce elastically off the workspace walls."""

    def __init__(self, workspace: Workspace, speed: float, rng: np.random.Generator):
        self.workspace = workspace
        self.obstacles = list(workspace.obstacles)
        step = speed * workspace.width
        angles = rng.uniform(0.0, 2.0 * math.pi, len(self.obstacles))
        self.velocities = [np.array([step * math.cos(a), step * math.sin(a)]) for a in angles]

    def step(self) -> Workspace:
        xmin, ymin, xmax, ymax = self.workspace.bounds
        moved = []
        for i, (obs, v) in enumerate(zip(self.obstacles, self.velocities)):
            lo_x, lo_y, hi_x, hi_y = obs.bounding_box()
            if lo_x + v[0] < xmin or hi_x + v[0] > xmax:
                v[0] = -v[0]
            if lo_y + v[1] < ymin or hi_y + v[1] > ymax:
                v[1] = -v[1]
            moved.append(obs.translated(float(v[0]), float(v[1])))
        self.obstacles = moved
        self.workspace = self.workspace.with_obstacles(moved)
        return self.workspace
