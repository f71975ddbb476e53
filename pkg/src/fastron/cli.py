"""Command-line entry point: ``fastron <subcommand> [--config FILE] [--out CSV] [--seed N]``."""

from __future__ import annotations

import argparse
import contextlib
import sys

from . import bench
from .scenario import load_spec


@contextlib.contextmanager
def _open_out(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _static(spec, args):
    with _open_out(args.out) as fh:
        bench.write_csv(bench.run_static_bench(spec), bench.STATIC_COLUMNS, fh)


def _dynamic(spec, args):
    cycles, agg = bench.run_dynamic_bench(spec)
    with _open_out(args.out) as fh:
        bench.write_csv(agg, bench.DYNAMIC_COLUMNS, fh)
    if args.cycles_out:
        with _open_out(args.cycles_out) as fh:
            bench.write_csv(cycles, bench.CYCLE_COLUMNS, fh)


def _rrt(spec, args):
    plans, summary = bench.run_rrt_bench(spec)
    with _open_out(args.out) as fh:
        bench.write_csv(summary, bench.RRT_COLUMNS, fh)
    if args.plans_out:
        with _open_out(args.plans_out) as fh:
            bench.write_csv(plans, bench.PLAN_COLUMNS, fh)


def _labels(spec, args):
    d, _ = bench.label_dump(spec)
    rows = [{**{f"q{j}": repr(float(v)) for j, v in enumerate(p)}, "label": int(y)}
            for p, y in zip(d.points, d.labels)]
    with _open_out(args.out) as fh:
        bench.write_csv(rows, [f"q{j}" for j in range(d.dof)] + ["label"], fh)
    if args.dataset_out:
        d.dump(args.dataset_out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fastron", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, handler, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="key = value scenario file")
        p.add_argument("--out", help="CSV output path (default: stdout)")
        p.add_argument("--seed", type=int, help="override the scenario seed")
        p.set_defaults(handler=handler)
        return p

    add("static-bench", _static, "accuracy and query timing per obstacle count")
    add("dynamic-bench", _dynamic, "moving-obstacle trials with active learning").add_argument(
        "--cycles-out", help="also write one CSV row per cycle")
    add("rrt-bench", _rrt, "FCD-RRT vs KCD-RRT collision-stage time").add_argument(
        "--plans-out", help="also write one CSV row per plan")
    add("label-dump", _labels, "fully labelled dataset for one scene").add_argument(
        "--dataset-out", help="also write the binary dataset dump")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = load_spec(args.config, seed=args.seed)
    except (OSError, ValueError) as exc:
        print(f"fastron: {exc}", file=sys.stderr)
        return 2
    args.handler(spec, args)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
