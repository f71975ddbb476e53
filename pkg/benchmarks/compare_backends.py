"""Time the compiled and pure-Python kernels on the same workload.

    python3 benchmarks/compare_backends.py [--obstacles 3] [--queries 5000]

Reports per-query checker cost (single calls and batched) for each available
backend, plus the time for a full fit and for an active-learning cycle.
"""

import argparse
import time

import numpy as np

from fastron import available_backends
from fastron.active_learning import update_cycle
from fastron.dataset import build_dataset
from fastron.kcd import KinematicChecker
from fastron.model import FastronModel
from fastron.scenario import ObstacleMotion, ScenarioSpec, random_workspace


def best_of(fn, repeat=3):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def run(backend, spec, queries):
    arm = spec.arm()
    rng = np.random.default_rng(spec.seed)
    w = random_workspace(spec, arm, rng)
    d = build_dataset(spec.sampler_spec(), gamma=spec.gamma)
    kcd = KinematicChecker(arm, w, backend=backend)
    d.labels[:] = kcd.check_many(d.points)

    def fit():
        m = FastronModel(d.n, spec.r_plus, spec.max_updates, backend)
        m.update(d)
        return m

    fit_time = best_of(fit)
    model = fit()
    fcd = model.checker(d, backend)
    configs = rng.uniform(-np.pi, np.pi, size=(queries, arm.dof))
    rows = [np.ascontiguousarray(q) for q in configs]

    def loop(raw):
        for q in rows:
            raw(q)

    out = {
        "kcd single": best_of(lambda: loop(kcd.raw)) / queries,
        "fcd single": best_of(lambda: loop(fcd.raw)) / queries,
        "kcd batch": best_of(lambda: kcd.check_many(configs)) / queries,
        "fcd batch": best_of(lambda: fcd.check_many(configs)) / queries,
        "fit": fit_time,
    }
    motion = ObstacleMotion(w, spec.speed, np.random.default_rng(1))
    params = spec.al_params()
    al_rng = np.random.default_rng(2)
    cycle_times = []
    for _ in range(10):
        w = motion.step()
        cs = update_cycle(model, d, arm, w, params, al_rng,
                          checker=KinematicChecker(arm, w, backend=backend))
        cycle_times.append(cs.total_time)
    out["cycle"] = float(np.mean(cycle_times))
    out["support"] = len(model.support)
    return out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--obstacles", type=int, default=3)
    parser.add_argument("--queries", type=int, default=5000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    spec = ScenarioSpec(obstacle_count=args.obstacles, seed=args.seed)
    results = {b: run(b, spec, args.queries) for b in available_backends()}
    names = list(results)
    print(f"{'metric':<12}" + "".join(f"{n:>14}" for n in names))
    for key, scale, unit in (("kcd single", 1e6, "us"), ("fcd single", 1e6, "us"),
                             ("kcd batch", 1e6, "us"), ("fcd batch", 1e6, "us"),
                             ("fit", 1e3, "ms"), ("cycle", 1e3, "ms")):
        print(f"{key + ' ' + unit:<12}" + "".join(f"{results[n][key] * scale:>14.3f}" for n in names))
    for n in names:
        r = results[n]
        print(f"{n}: |S| = {r['support']}, single-query KCD/FCD = "
              f"{r['kcd single'] / r['fcd single']:.2f}")
    if len(names) == 2:
        a, b = (results[n] for n in names)
        print("speedup " + ", ".join(f"{k}: {b[k] / a[k]:.1f}x" for k in
                                     ("kcd single", "fcd single", "kcd batch", "fcd batch",
                                      "fit", "cycle")))


if __name__ == "__main__":
    main()
