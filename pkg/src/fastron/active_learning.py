"""Relabel-set selection and the per-cycle model refresh.

Selection spends a KCD allowance ``A`` in two stages. Exploitation takes the
support set (or a random ``A`` of it) and, while fewer than ``ceil(p * A)``
points are chosen, adds each support point's 1st, 2nd, ... ``k_ns``-th
nearest non-support point. Exploration fills the rest of the allowance with
uniformly random unchosen points.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, nearest_nonsupport_table
from .geometry import ArmModel
from .kcd import KcdStats, KinematicChecker, Workspace, relabel
from .model import FastronModel, UpdateReport


@dataclass(frozen=True)
class ActiveLearningParams:
    allowance: int
    exploit_proportion: float = 0.8
    k_ns: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.allowance < 0:
            raise ValueError("allowance must be >= 0")
        if not 0.0 <= self.exploit_proportion <= 1.0:
            raise ValueError("exploit_proportion must be in [0, 1]")
        if self.k_ns < 0:
            raise ValueError("k_ns must be >= 0")


@dataclass
class CycleStats:
    relabeled: int
    flips: int
    kcd_queries: int
    update: UpdateReport
    select_time: float
    kcd_time: float
    update_time: float

    @property
    def total_time(self) -> float:
        return self.select_time + self.kcd_time + self.update_time


def select_relabel_set(d: Dataset, support, params: ActiveLearningParams,
                       rng: np.random.Generator | None = None) -> np.ndarray:
    """Choose at most ``params.allowance`` distinct dataset indices to relabel.

    The k-th neighbour batch is added whole once started, even past
    ``ceil(p * A)``, but never beyond ``A``.
    """
    if rng is None:
        rng = np.random.default_rng(params.seed)
    allowance = min(params.allowance, d.n)
    if allowance == 0:
        return np.empty(0, dtype=np.intp)
    support = np.asarray(support, dtype=np.intp)

    if len(support) <= allowance:
        chosen = support.tolist()
        seen = set(chosen)
        target = math.ceil(params.exploit_proportion * allowance)
        if params.k_ns > 0 and len(chosen) < target and len(support) > 0:
            table = nearest_nonsupport_table(d, support, params.k_ns)
            for k in range(params.k_ns):
                if len(chosen) >= target:
                    break
                for j in table[:, k].tolist():
                    if len(chosen) >= allowance:
                        break
                    if j >= 0 and j not in seen:
                        seen.add(j)
                        chosen.append(j)
    else:
        chosen = rng.choice(support, size=allowance, replace=False).tolist()

    remaining = allowance - len(chosen)
    if remaining > 0:
        mask = np.ones(d.n, dtype=bool)
        mask[chosen] = False
        pool = np.flatnonzero(mask)
        chosen.extend(rng.choice(pool, size=min(remaining, len(pool)), replace=False).tolist())
    return np.asarray(chosen, dtype=np.intp)


def update_cycle(model: FastronModel, d: Dataset, arm: ArmModel, w: Workspace,
                 params: ActiveLearningParams, rng: np.random.Generator | None = None,
                 stats: KcdStats | None = None,
                 checker: KinematicChecker | None = None) -> CycleStats:
    """One pass: select from the current support set, relabel by KCD, update the model."""
    if rng is None:
        rng = np.random.default_rng(params.seed)
    if checker is None:
        checker = KinematicChecker(arm, w, stats)
    before, _ = checker.stats.snapshot()

    t0 = time.perf_counter()
    chosen = select_relabel_set(d, model.support, params, rng)
    t1 = time.perf_counter()
    flips = relabel(arm, w, d, chosen, checker=checker)
    t2 = time.perf_counter()
    report = model.update(d)
    t3 = time.perf_counter()

    after, _ = checker.stats.snapshot()
    return CycleStats(
        relabeled=len(chosen),
        flips=flips,
        kcd_queries=after - before,
        update=report,
        select_time=t1 - t0,
        kcd_time=t2 - t1,
        update_time=t3 - t2,
    )
