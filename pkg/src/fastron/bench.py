"""Benchmark runners for static scenes, moving obstacles and the planner comparison.

Every runner returns plain rows (lists of dicts) that :func:`write_csv`
turns into CSV. Durations in CSV are integer microseconds. With
``record_timing = false`` the timing columns are written as 0 so that the
output depends only on the scenario and seed.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .active_learning import CycleStats, update_cycle
from .dataset import JOINT_BOUNDS, Dataset, build_dataset
from .kcd import KcdStats, KinematicChecker, Workspace
from .model import FastronModel
from .planner import _edge_samples, rrt_plan
from .scenario import ObstacleMotion, ScenarioSpec, random_obstacle, random_workspace


@dataclass(frozen=True)
class Metrics:
    """Confusion counts against the oracle plus per-query timing means (seconds)."""

    tp: int
    fn: int
    fp: int
    tn: int
    fcd_time_mean: float = 0.0
    kcd_time_mean: float = 0.0
    update_time_mean: float = 0.0

    @property
    def recall(self) -> float | None:
        pos = self.tp + self.fn
        return self.tp / pos if pos else None

    @property
    def fpr(self) -> float | None:
        neg = self.fp + self.tn
        return self.fp / neg if neg else None

    @property
    def ratio(self) -> float | None:
        if self.fcd_time_mean <= 0.0:
            return None
        return self.kcd_time_mean / self.fcd_time_mean

    @classmethod
    def from_labels(cls, truth, predicted, **timing) -> Metrics:
        truth = np.asarray(truth) > 0
        predicted = np.asarray(predicted) > 0
        return cls(int(np.count_nonzero(truth & predicted)),
                   int(np.count_nonzero(truth & ~predicted)),
                   int(np.count_nonzero(~truth & predicted)),
                   int(np.count_nonzero(~truth & ~predicted)), **timing)


def _seeded(*key) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(k) for k in key]))


def _time_per_query(fn, configs) -> float:
    """Mean seconds per call of ``fn`` over the rows of ``configs``."""
    rows = [np.ascontiguousarray(q) for q in configs]
    if not rows:
        return 0.0
    t0 = time.perf_counter()
    for q in rows:
        fn(q)
    return (time.perf_counter() - t0) / len(rows)


def evaluate(model: FastronModel, d: Dataset, arm, w: Workspace, M: int = 10_000,
             seed: int = 0, timing_samples: int = 2000, backend: str | None = None,
             joint_bounds=JOINT_BOUNDS) -> Metrics:
    """Score the model on ``M`` fresh uniform configurations labelled by KCD.

    Timing uses the first ``timing_samples`` of those configurations, one
    query at a time through each checker, with both checkers on ``backend``.
    """
    rng = np.random.default_rng(seed)
    lo, hi = joint_bounds
    configs = rng.uniform(lo, hi, size=(M, d.dof))
    kcd = KinematicChecker(arm, w, backend=backend)
    fcd = model.checker(d, backend)
    truth = kcd.check_many(configs)
    predicted = fcd.check_many(configs)
    timing = {}
    if timing_samples > 0:
        sub = configs[:timing_samples]
        timing["kcd_time_mean"] = _time_per_query(kcd.raw, sub)
        timing["fcd_time_mean"] = _time_per_query(fcd.raw, sub)
    return Metrics.from_labels(truth, predicted, **timing)


def _train_full(spec: ScenarioSpec, d: Dataset, arm, w: Workspace):
    d.labels[:] = KinematicChecker(arm, w, backend=spec.kernel_backend).check_many(d.points)
    model = FastronModel(d.n, spec.r_plus, spec.max_updates, spec.kernel_backend)
    return model, model.update(d)


def _mean(values) -> float | None:
    values = [v for v in values if v is not None]
    return sum(values) / len(values) if values else None


def _us(seconds: float | None, spec: ScenarioSpec) -> int:
    if not spec.record_timing or seconds is None:
        return 0
    return int(round(seconds * 1e6))


def _fmt(value: float | None, digits: int = 6) -> str:
    return "NA" if value is None else f"{value:.{digits}f}"


# static --------------------------------------------------------------------

STATIC_COLUMNS = ["obstacle_count", "scenes", "recall", "fpr", "fcd_time_ns",
                  "kcd_time_ns", "ratio", "support_mean", "converged_scenes"]


def run_static_bench(spec: ScenarioSpec) -> list[dict]:
    """One row per obstacle count: scenes averaged, each fully labelled and trained.

    Per-query times are reported in integer nanoseconds since a
    single compiled query takes well under a microsecond.
    """
    arm = spec.arm()
    d = build_dataset(spec.sampler_spec(), JOINT_BOUNDS, spec.gamma)
    timing_samples = spec.timing_samples if spec.record_timing else 0
    rows = []
    for count in spec.obstacle_counts:
        per_scene = []
        support = []
        converged = 0
        for scene in range(spec.scenes):
            rng = _seeded(spec.seed, count, scene)
            w = random_workspace(spec, arm, rng, count)
            model, report = _train_full(spec, d, arm, w)
            converged += report.converged
            support.append(len(model.support))
            per_scene.append(evaluate(model, d, arm, w, spec.eval_size,
                                      int(rng.integers(2**32)), timing_samples,
                                      spec.kernel_backend))
        kcd_t = _mean([m.kcd_time_mean for m in per_scene])
        fcd_t = _mean([m.fcd_time_mean for m in per_scene])
        ratio = kcd_t / fcd_t if spec.record_timing and fcd_t else None
        rows.append({
            "obstacle_count": count,
            "scenes": spec.scenes,
            "recall": _fmt(_mean([m.recall for m in per_scene])),
            "fpr": _fmt(_mean([m.fpr for m in per_scene])),
            "fcd_time_ns": _us(fcd_t * 1e3 if fcd_t is not None else None, spec),
            "kcd_time_ns": _us(kcd_t * 1e3 if kcd_t is not None else None, spec),
            "ratio": _fmt(ratio, 3),
            "support_mean": _fmt(_mean(support), 2),
            "converged_scenes": converged,
        })
    return rows


# dynamic -------------------------------------------------------------------

CYCLE_COLUMNS = ["n", "allowance", "trial", "cycle", "relabeled", "kcd_queries", "flips",
                 "support", "converged", "iterations", "recall", "fpr", "select_us",
                 "kcd_us", "train_us", "update_us"]
DYNAMIC_COLUMNS = ["n", "allowance", "trials", "cycles", "recall", "fpr", "update_time_us",
                   "select_us", "kcd_us", "train_us", "support_mean", "flips_mean",
                   "max_kcd_queries", "budget_ok", "unconverged_cycles"]


def _dynamic_trial(spec: ScenarioSpec, arm, n: int, fraction: float | None, trial: int):
    rng = _seeded(spec.seed, n, trial)
    d = build_dataset(spec.sampler_spec(n, int(rng.integers(2**32))), JOINT_BOUNDS, spec.gamma)
    w = random_workspace(spec, arm, rng)
    model, _ = _train_full(spec, d, arm, w)
    params = spec.al_params(n, fraction, int(rng.integers(2**32)))
    al_rng = np.random.default_rng(params.seed)
    speed = spec.speed if spec.motion == "linear-bounce" else 0.0
    motion = ObstacleMotion(w, speed, rng)
    stats = KcdStats()
    rows = []
    for cycle in range(1, spec.cycles + 1):
        w = motion.step()
        checker = KinematicChecker(arm, w, stats, spec.kernel_backend)
        cs: CycleStats = update_cycle(model, d, arm, w, params, al_rng, checker=checker)
        m = evaluate(model, d, arm, w, spec.eval_size, int(rng.integers(2**32)), 0,
                     spec.kernel_backend)
        rows.append({
            "n": n, "allowance": params.allowance, "trial": trial, "cycle": cycle,
            "relabeled": cs.relabeled, "kcd_queries": cs.kcd_queries, "flips": cs.flips,
            "support": cs.update.support_count, "converged": int(cs.update.converged),
            "iterations": cs.update.iterations,
            "recall": _fmt(m.recall), "fpr": _fmt(m.fpr),
            "select_us": _us(cs.select_time, spec), "kcd_us": _us(cs.kcd_time, spec),
            "train_us": _us(cs.update_time, spec), "update_us": _us(cs.total_time, spec),
            "_m": m, "_cs": cs,
        })
    return rows


def _grid(spec: ScenarioSpec):
    ns = spec.sweep_n or (spec.n_samples,)
    fractions = spec.sweep_allowance or (None,)
    return [(n, f) for n in ns for f in fractions]


def run_dynamic_bench(spec: ScenarioSpec) -> tuple[list[dict], list[dict]]:
    """Moving-obstacle trials over the (N, allowance) grid.

    Returns ``(cycle_rows, aggregate_rows)``. Recall is averaged over cycles
    whose evaluation set contained collisions; ``spec.scenes`` trials per cell.
    """
    arm = spec.arm()
    cycle_rows, agg = [], []
    for n, fraction in _grid(spec):
        rows = []
        for trial in range(spec.scenes):
            rows.extend(_dynamic_trial(spec, arm, n, fraction, trial))
        allowance = spec.allowance_for(n, fraction)
        cs = [r["_cs"] for r in rows]
        ms = [r["_m"] for r in rows]
        max_q = max((c.kcd_queries for c in cs), default=0)
        agg.append({
            "n": n, "allowance": allowance, "trials": spec.scenes, "cycles": spec.cycles,
            "recall": _fmt(_mean([m.recall for m in ms])),
            "fpr": _fmt(_mean([m.fpr for m in ms])),
            "update_time_us": _us(_mean([c.total_time for c in cs]), spec),
            "select_us": _us(_mean([c.select_time for c in cs]), spec),
            "kcd_us": _us(_mean([c.kcd_time for c in cs]), spec),
            "train_us": _us(_mean([c.update_time for c in cs]), spec),
            "support_mean": _fmt(_mean([c.update.support_count for c in cs]), 2),
            "flips_mean": _fmt(_mean([c.flips for c in cs]), 2),
            "max_kcd_queries": max_q,
            "budget_ok": int(max_q <= allowance),
            "unconverged_cycles": sum(not c.update.converged for c in cs),
        })
        cycle_rows.extend(rows)
    return cycle_rows, agg


# rrt -----------------------------------------------------------------------

PLAN_COLUMNS = ["scene", "replan", "planner", "status", "iterations", "queries",
                "check_us", "update_us", "collision_us", "waypoints", "fine_samples",
                "fine_violations"]
RRT_COLUMNS = ["planner", "plans", "successes", "skipped_scenes", "collision_us_mean",
               "update_us_mean", "queries_mean", "fine_samples", "fine_violations",
               "free_fraction", "ratio"]


def _straight_blocked(kcd, start, goal, resolution) -> bool:
    return any(kcd.raw(q) for q in _edge_samples(start, goal, resolution))


def _grid_connected(kcd, start, goal, resolution, joint_bounds=JOINT_BOUNDS) -> bool:
    """Whether start and goal share a free component of a 2-D C-space grid."""
    lo, hi = joint_bounds
    m = int(math.ceil((hi - lo) / resolution))
    axis = lo + (np.arange(m) + 0.5) * (hi - lo) / m
    mesh = np.meshgrid(axis, axis, indexing="ij")
    free = kcd.check_many(np.column_stack([g.ravel() for g in mesh])).reshape(m, m) < 0
    comp, _ = ndimage.label(free)

    def cell(q):
        return tuple(np.clip(((q - lo) / (hi - lo) * m).astype(int), 0, m - 1))

    a, b = comp[cell(start)], comp[cell(goal)]
    return bool(a) and a == b


def _rrt_workspace_ok(kcd, start, goal, resolution) -> bool:
    if kcd.raw(start) or kcd.raw(goal) or not _straight_blocked(kcd, start, goal, resolution):
        return False
    # a full connectivity check is only affordable in two dimensions
    return len(start) != 2 or _grid_connected(kcd, start, goal, resolution / 2)


def _label_fn(raw):
    # identical call path for both checkers so their timings compare like for like
    return lambda q: 1 if raw(np.asarray(q, dtype=np.float64)) else -1


def _place_scene(spec, arm, rng, start, goal):
    for _ in range(spec.rrt_placement_retries):
        w = random_workspace(spec, arm, rng)
        if _rrt_workspace_ok(KinematicChecker(arm, w), start, goal, spec.rrt_edge_resolution):
            return w
    return None


def _shift_scene(spec, arm, rng, w, start, goal):
    """Translate the first obstacle by a random offset, keeping the scene valid."""
    for _ in range(spec.rrt_placement_retries):
        angle = rng.uniform(0.0, 2.0 * math.pi)
        dist = rng.uniform(0.0, spec.rrt_max_shift)
        moved = w.obstacles[0].translated(dist * math.cos(angle), dist * math.sin(angle))
        cand = w.with_obstacles((moved,) + w.obstacles[1:])
        if len(cand.obstacles) == len(w.obstacles) and _rrt_workspace_ok(
                KinematicChecker(arm, cand), start, goal, spec.rrt_edge_resolution):
            return cand
    return None


def _fine_check(arm, w, path, resolution):
    """Count fine-resolution samples along ``path`` and how many are in collision."""
    kcd = KinematicChecker(arm, w)
    if len(path) == 1:
        return 1, int(kcd.raw(np.asarray(path[0])))
    samples = [q for a, b in zip(path, path[1:]) for q in _edge_samples(a, b, resolution)]
    hits = kcd.check_many(np.array(samples))
    return len(samples), int(np.count_nonzero(hits > 0))


def run_rrt_bench(spec: ScenarioSpec) -> tuple[list[dict], list[dict]]:
    """FCD-RRT vs KCD-RRT over ``spec.scenes`` scenes of ``rrt_replans`` plans each.

    Between plans the first obstacle is translated. FCD-RRT runs one update
    cycle before each plan and that cycle's time counts toward its collision
    stage. Returns ``(plan_rows, summary_rows)``.
    """
    arm = spec.arm()
    start = np.asarray(spec.rrt_start, dtype=np.float64)
    goal = np.asarray(spec.rrt_goal, dtype=np.float64)
    if start.shape != (arm.dof,) or goal.shape != (arm.dof,):
        raise ValueError("rrt_start and rrt_goal must have dof entries")
    fine = spec.rrt_edge_resolution / spec.rrt_validation_factor
    plans, skipped = [], 0
    for scene in range(spec.scenes):
        rng = _seeded(spec.seed, scene)
        w = _place_scene(spec, arm, rng, start, goal)
        if w is None:
            skipped += 1
            continue
        d = build_dataset(spec.sampler_spec(seed=int(rng.integers(2**32))), JOINT_BOUNDS,
                          spec.gamma)
        model, _ = _train_full(spec, d, arm, w)
        params = spec.al_params(seed=int(rng.integers(2**32)))
        al_rng = np.random.default_rng(params.seed)
        for replan in range(spec.rrt_replans):
            if replan > 0:
                shifted = _shift_scene(spec, arm, rng, w, start, goal)
                if shifted is not None:
                    w = shifted
            rrt = spec.rrt_params(int(rng.integers(2**32)))
            kcd = KinematicChecker(arm, w, backend=spec.kernel_backend)
            cs = update_cycle(model, d, arm, w, params, al_rng, checker=kcd)
            fcd = model.checker(d, spec.kernel_backend)
            for name, checker, overhead in (("fcd", _label_fn(fcd.raw), cs.total_time),
                                            ("kcd", _label_fn(kcd.raw), 0.0)):
                try:
                    res = rrt_plan(start, goal, checker, rrt)
                    status = "ok" if res.success else "no_path"
                except ValueError:
                    res, status = None, "endpoint_blocked"
                check_t = res.checker_time if res else 0.0
                samples, bad = _fine_check(arm, w, res.path, fine) if res and res.path else (0, 0)
                plans.append({
                    "scene": scene, "replan": replan, "planner": name, "status": status,
                    "iterations": res.iterations if res else 0,
                    "queries": res.checker_queries if res else 0,
                    "check_us": _us(check_t, spec), "update_us": _us(overhead, spec),
                    "collision_us": _us(check_t + overhead, spec),
                    "waypoints": len(res.path) if res else 0,
                    "fine_samples": samples, "fine_violations": bad,
                    "_collision": check_t + overhead, "_update": overhead,
                })
    summary = []
    means = {}
    for name in ("fcd", "kcd"):
        rows = [p for p in plans if p["planner"] == name]
        ok = [p for p in rows if p["status"] == "ok"]
        samples = sum(p["fine_samples"] for p in rows)
        bad = sum(p["fine_violations"] for p in rows)
        means[name] = _mean([p["_collision"] for p in rows])
        summary.append({
            "planner": name, "plans": len(rows), "successes": len(ok),
            "skipped_scenes": skipped,
            "collision_us_mean": _us(means[name], spec),
            "update_us_mean": _us(_mean([p["_update"] for p in rows]), spec),
            "queries_mean": _fmt(_mean([p["queries"] for p in rows]), 1),
            "fine_samples": samples, "fine_violations": bad,
            "free_fraction": _fmt(1.0 - bad / samples if samples else None),
            "ratio": "",
        })
    ratio = (means["kcd"] / means["fcd"]
             if spec.record_timing and means["fcd"] and means["kcd"] is not None else None)
    for row in summary:
        row["ratio"] = _fmt(ratio, 3)
    return plans, summary


# output --------------------------------------------------------------------

def write_csv(rows, columns, fh) -> None:
    writer = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore",
                            lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)


def label_dump(spec: ScenarioSpec) -> tuple[Dataset, Workspace]:
    """Dataset labelled by a full KCD sweep over one seeded scene."""
    arm = spec.arm()
    rng = _seeded(spec.seed, spec.obstacle_count, 0)
    w = random_workspace(spec, arm, rng)
    d = build_dataset(spec.sampler_spec(), JOINT_BOUNDS, spec.gamma)
    d.labels[:] = KinematicChecker(arm, w, backend=spec.kernel_backend).check_many(d.points)
    return d, w


__all__ = [
    "Metrics", "evaluate", "run_static_bench", "run_dynamic_bench", "run_rrt_bench",
    "label_dump", "write_csv", "random_obstacle",
]
