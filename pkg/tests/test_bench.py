import io
import time

import numpy as np
import pytest

from fastron import bench
from fastron.cli import main
from fastron.dataset import Dataset, SamplerSpec, build_dataset
from fastron.model import FastronModel
from fastron.scenario import ScenarioSpec


def test_metrics_arithmetic():
    truth = [1] * 100 + [-1] * 1000
    pred = [1] * 98 + [-1] * 2 + [1] * 36 + [-1] * 964
    m = bench.Metrics.from_labels(truth, pred)
    assert (m.tp, m.fn, m.fp, m.tn) == (98, 2, 36, 964)
    assert m.recall == pytest.approx(0.98)
    assert m.fpr == pytest.approx(0.036)
    assert m.recall + m.fn / (m.tp + m.fn) == pytest.approx(1.0)
    assert m.fpr + m.tn / (m.fp + m.tn) == pytest.approx(1.0)


def test_metrics_edge_cases():
    perfect = bench.Metrics.from_labels([1, -1, 1], [1, -1, 1])
    assert perfect.recall == 1.0 and perfect.fpr == 0.0
    no_pos = bench.Metrics.from_labels([-1, -1], [1, -1])
    assert no_pos.recall is None and no_pos.fpr == 0.5
    assert bench.Metrics(1, 0, 0, 1, fcd_time_mean=2.0, kcd_time_mean=6.0).ratio == 3.0
    assert bench.Metrics(1, 0, 0, 1).ratio is None


def test_evaluate_oracle_like_model():
    spec = ScenarioSpec()
    arm = spec.arm()
    d = build_dataset(SamplerSpec("grid", 625, 2))
    w = bench.random_workspace(spec, arm, np.random.default_rng(0))
    model, report = bench._train_full(spec, d, arm, w)
    m = bench.evaluate(model, d, arm, w, M=2000, seed=1, timing_samples=50)
    assert 0.9 <= m.recall <= 1.0 and m.fpr < 0.1
    assert m.tp + m.fn + m.fp + m.tn == 2000
    assert m.kcd_time_mean > 0 and m.fcd_time_mean > 0


def test_empty_workspace_control():
    rows = bench.run_static_bench(ScenarioSpec(obstacle_counts=(0,), scenes=2, eval_size=500,
                                               record_timing=False))
    (row,) = rows
    assert row["recall"] == "NA" and float(row["fpr"]) == 0.0
    assert float(row["support_mean"]) <= 1


def test_static_rows_and_trend():
    rows = bench.run_static_bench(ScenarioSpec(obstacle_counts=(1, 5), scenes=4,
                                               eval_size=3000, timing_samples=200))
    assert [r["obstacle_count"] for r in rows] == [1, 5]
    assert float(rows[1]["fpr"]) > float(rows[0]["fpr"])
    assert all(float(r["recall"]) > 0.9 for r in rows)
    assert all(r["kcd_time_ns"] > 0 and r["fcd_time_ns"] > 0 for r in rows)


def test_dynamic_zero_velocity_is_static():
    cycles, (agg,) = bench.run_dynamic_bench(ScenarioSpec(motion="static", scenes=1, cycles=5,
                                                          eval_size=1000))
    assert all(r["flips"] == 0 for r in cycles)
    assert len({r["recall"] for r in cycles}) >= 1
    assert agg["budget_ok"] == 1 and agg["max_kcd_queries"] <= 188


def test_dynamic_fpr_falls_with_n():
    _, agg = bench.run_dynamic_bench(ScenarioSpec(sweep_n=(100, 900), scenes=3, cycles=15,
                                                  eval_size=2000, record_timing=False))
    assert [a["n"] for a in agg] == [100, 900]
    assert float(agg[1]["fpr"]) < float(agg[0]["fpr"])
    assert all(a["budget_ok"] for a in agg)


def test_rrt_bench_small():
    plans, summary = bench.run_rrt_bench(ScenarioSpec(scenes=2, rrt_replans=2, obstacle_count=3))
    assert {s["planner"] for s in summary} == {"fcd", "kcd"}
    assert len(plans) == 8
    kcd = next(s for s in summary if s["planner"] == "kcd")
    assert kcd["successes"] == kcd["plans"] == 4
    assert float(kcd["free_fraction"]) > 0.99
    assert all(p["update_us"] == 0 for p in plans if p["planner"] == "kcd")


def test_rrt_obstacle_free_control():
    plans, _ = bench.run_rrt_bench(ScenarioSpec(scenes=1, rrt_replans=1, obstacle_count=0,
                                                rrt_placement_retries=3))
    # nothing can block the straight segment, so the scene is skipped rather than faked
    assert plans == []


def test_fcd_time_grows_with_support():
    rng = np.random.default_rng(0)
    qs = rng.uniform(-3, 3, (300, 2))
    times = []
    for n in (10, 3000):
        d = Dataset(rng.uniform(-3, 3, (n, 2)))
        checker = FastronModel.from_alpha(np.ones(n), d).checker(d)
        t0 = time.perf_counter()
        for q in qs:
            checker.raw(q)
        times.append(time.perf_counter() - t0)
    assert times[1] > times[0]


def run_cli(tmp_path, *argv):
    return main([*argv])


def test_cli_reproducible_csv(tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("scenes = 2\nobstacle_counts = 1, 2\neval_size = 800\nrecord_timing = false\n")
    for name in ("a.csv", "b.csv"):
        assert main(["static-bench", "--config", str(cfg), "--out", str(tmp_path / name)]) == 0
    a = (tmp_path / "a.csv").read_bytes()
    assert a == (tmp_path / "b.csv").read_bytes()
    assert a.decode().splitlines()[0] == ",".join(bench.STATIC_COLUMNS)
    main(["static-bench", "--config", str(cfg), "--out", str(tmp_path / "c.csv"), "--seed", "5"])
    assert (tmp_path / "c.csv").read_bytes() != a


def test_cli_dynamic_and_label_dump(tmp_path):
    cfg = tmp_path / "d.cfg"
    cfg.write_text("scenes = 1\ncycles = 3\neval_size = 500\nrecord_timing = false\n")
    assert main(["dynamic-bench", "--config", str(cfg), "--out", str(tmp_path / "agg.csv"),
                 "--cycles-out", str(tmp_path / "cyc.csv")]) == 0
    assert len((tmp_path / "cyc.csv").read_text().splitlines()) == 4
    assert main(["label-dump", "--config", str(cfg), "--out", str(tmp_path / "l.csv"),
                 "--dataset-out", str(tmp_path / "d.bin")]) == 0
    lines = (tmp_path / "l.csv").read_text().splitlines()
    assert lines[0] == "q0,q1,label" and len(lines) == 626
    d = Dataset.load(tmp_path / "d.bin")
    assert d.labels.tolist() == [int(line.rsplit(",", 1)[1]) for line in lines[1:]]


def test_cli_rejects_bad_config(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("unknown_key = 3\n")
    assert main(["static-bench", "--config", str(cfg)]) == 2
    assert "unknown key" in capsys.readouterr().err
    assert main(["static-bench", "--config", str(tmp_path / "missing.cfg")]) == 2


def test_write_csv_integer_durations():
    buf = io.StringIO()
    bench.write_csv([{"a": 1, "b": "x", "_hidden": 3}], ["a", "b"], buf)
    assert buf.getvalue() == "a,b\n1,x\n"
