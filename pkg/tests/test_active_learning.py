import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fastron.active_learning import ActiveLearningParams, select_relabel_set, update_cycle
from fastron.dataset import Dataset, SamplerSpec, build_dataset
from fastron.geometry import ArmModel, ConvexPolygon
from fastron.kcd import KcdStats, KinematicChecker, Workspace
from fastron.model import FastronModel
from fastron.scenario import ObstacleMotion, ScenarioSpec, random_workspace

ARM = ArmModel.uniform(2)


def exploitation_oracle(points, support, allowance, p, k_ns):
    """Support points, then k-th Euclidean neighbours batch by batch, as a plain loop."""
    chosen = list(support)
    target = math.ceil(p * allowance)
    others = [i for i in range(len(points)) if i not in set(support)]
    for k in range(k_ns):
        if len(chosen) >= target:
            break
        for s in support:
            dist = [(abs(points[o] - points[s]), o) for o in others]
            j = sorted(dist)[k][1]
            if len(chosen) < allowance and j not in chosen:
                chosen.append(j)
    return chosen


def test_hand_trace_three_support_points():
    x = np.array([0.0, 0.05, 0.12, 0.2, 0.31, 0.45, 0.6, 0.72, 0.81, 0.95,
                  1.1, 1.22, 1.37, 1.5, 1.61, 1.8, 1.93, 2.05, 2.2, 2.4])
    d = Dataset(x[:, None], gamma=10.0)
    support = [3, 9, 15]
    params = ActiveLearningParams(allowance=10, exploit_proportion=0.8, k_ns=4, seed=1)
    chosen = select_relabel_set(d, support, params).tolist()
    expected = exploitation_oracle(x, support, 10, 0.8, 4)
    # 3 support + 3 first neighbours = 6 < 8, so second neighbours are added: 9 >= 8
    assert len(expected) == 9
    assert chosen[:9] == expected
    assert len(chosen) == 10 and len(set(chosen)) == 10
    assert chosen[9] not in expected


def test_more_support_than_allowance_samples_support_only():
    d = Dataset(np.linspace(0, 3, 40)[:, None])
    support = np.arange(0, 30, 2)
    chosen = select_relabel_set(d, support, ActiveLearningParams(10, 0.8, 4, seed=3))
    assert len(chosen) == 10 and set(chosen) <= set(support.tolist())


def test_zero_allowance():
    d = Dataset(np.zeros((5, 1)))
    assert select_relabel_set(d, [0, 1], ActiveLearningParams(0)).size == 0


def test_params_validation():
    with pytest.raises(ValueError):
        ActiveLearningParams(-1)
    with pytest.raises(ValueError):
        ActiveLearningParams(5, exploit_proportion=1.5)
    with pytest.raises(ValueError):
        ActiveLearningParams(5, k_ns=-1)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=80)
def test_selection_properties(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 120))
    d = Dataset(rng.uniform(-3, 3, (n, 2)))
    support = np.sort(rng.choice(n, size=int(rng.integers(0, n + 1)), replace=False))
    params = ActiveLearningParams(int(rng.integers(0, n + 5)), float(rng.uniform(0, 1)),
                                  int(rng.integers(0, 6)), seed)
    chosen = select_relabel_set(d, support, params)
    allowance = min(params.allowance, n)
    assert len(chosen) == allowance
    assert len(set(chosen.tolist())) == len(chosen)
    assert np.all((0 <= chosen) & (chosen < n))
    np.testing.assert_array_equal(chosen, select_relabel_set(d, support, params))
    if len(support) <= allowance:
        # exploitation floor: support first, then neighbours until ceil(pA) or exhausted
        head = chosen[:len(support)]
        assert sorted(head.tolist()) == support.tolist()
        target = math.ceil(params.exploit_proportion * allowance)
        neighbours = set()
        if params.k_ns and len(support):
            others = np.setdiff1d(np.arange(n), support)
            for s in support:
                dist = np.linalg.norm(d.points[others] - d.points[s], axis=1)
                neighbours.update(others[np.lexsort((others, dist))][:params.k_ns].tolist())
        exploit = len(support) + len(neighbours)
        prefix = chosen[:min(allowance, exploit)].tolist()
        got = sum(1 for i in prefix if i in neighbours or i in set(support.tolist()))
        assert got >= min(target, exploit, allowance)


def trained(w, n=625, backend=None):
    d = build_dataset(SamplerSpec("grid", n, 2))
    d.labels[:] = KinematicChecker(ARM, w).check_many(d.points)
    m = FastronModel(d.n, 100.0, backend=backend)
    assert m.update(d).converged
    return m, d


def scene(seed=0, count=1):
    return random_workspace(ScenarioSpec(), ARM, np.random.default_rng(seed), count)


def test_static_scene_is_a_fixed_point():
    w = scene(3)
    m, d = trained(w)
    params = ActiveLearningParams(188, 0.8, 4, seed=0)
    rng = np.random.default_rng(0)
    supports = []
    for _ in range(10):
        cs = update_cycle(m, d, ARM, w, params, rng)
        assert cs.flips == 0
        supports.append(m.support.tolist())
    assert all(s == supports[0] for s in supports)


def test_obstacle_leaving_reach_clears_model():
    w = scene(5)
    m, d = trained(w)
    far = ConvexPolygon([(2.2, 2.2), (2.45, 2.2), (2.45, 2.45), (2.2, 2.45)])
    gone = Workspace((far,), w.bounds)
    params = ActiveLearningParams(188, 0.8, 4, seed=0)
    rng = np.random.default_rng(1)
    for _ in range(60):
        update_cycle(m, d, ARM, gone, params, rng)
        if np.all(d.labels == -1) and np.all(m.classify_many(d, d.points) == -1):
            break
    assert np.all(d.labels == -1)
    assert np.all(m.classify_many(d, d.points) == -1)


def test_full_allowance_matches_full_sweep():
    w = scene(2, 2)
    m, d = trained(w)
    moved = ObstacleMotion(w, 0.05, np.random.default_rng(0)).step()
    cs = update_cycle(m, d, ARM, moved, ActiveLearningParams(d.n, 0.3, 4))
    np.testing.assert_array_equal(d.labels, KinematicChecker(ARM, moved).check_many(d.points))
    assert cs.kcd_queries == d.n


def test_zero_allowance_never_relabels():
    w = scene(2, 2)
    m, d = trained(w)
    before = d.labels.copy()
    moved = ObstacleMotion(w, 0.05, np.random.default_rng(0)).step()
    for _ in range(3):
        cs = update_cycle(m, d, ARM, moved, ActiveLearningParams(0))
        assert cs.kcd_queries == 0 and cs.relabeled == 0
    np.testing.assert_array_equal(d.labels, before)


def test_budget_is_respected_under_motion():
    w = scene(7, 2)
    m, d = trained(w)
    motion = ObstacleMotion(w, 0.02, np.random.default_rng(7))
    params = ActiveLearningParams(100, 0.8, 4, seed=7)
    rng = np.random.default_rng(7)
    stats = KcdStats()
    for _ in range(20):
        w = motion.step()
        before = stats.query_count
        cs = update_cycle(m, d, ARM, w, params, rng, stats=stats)
        assert cs.kcd_queries == stats.query_count - before <= 100
        assert cs.total_time >= cs.update_time >= 0
