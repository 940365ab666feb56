"""Command-line entry point: ``red-sched run|fuzz|compare``."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import replace
from typing import List, Optional, Sequence

from .core import CycleLimitExceeded, Instruction, SchedulerConfig
from .harness import DEFAULT_CAPACITIES, fuzz
from .metrics import write_trace_csv
from .oracle import EdfScheduler
from .scheduler import DEFAULT_CYCLE_LIMIT, RedScheduler, run
from .workload import PRESETS, WorkloadFormatError, generate, load_jsonl, preset

EXIT_OK = 0
EXIT_IO = 1
EXIT_CYCLE_LIMIT = 2
EXIT_DIVERGENCE = 3

SEED_ENV = "RED_SCHED_SEED"


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw, 0)
    except ValueError:
        raise SystemExit(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _non_negative(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {v}")
    return v


def _add_source(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--workload", metavar="PATH", help="JSONL instruction stream")
    src.add_argument("--preset", choices=sorted(PRESETS), help="generate a workload from a preset")
    p.add_argument("--seed", type=int, default=None, help=f"generator seed (default ${SEED_ENV} or 0)")
    p.add_argument("--capacity", type=_positive, default=16, help="ready-queue capacity")
    p.add_argument("--reject-capacity", type=_positive, default=None, help="defaults to --capacity")


def _config(args) -> SchedulerConfig:
    return SchedulerConfig(args.capacity, args.reject_capacity)


def _workload(args, config: SchedulerConfig) -> List[Instruction]:
    if args.workload is not None:
        return load_jsonl(args.workload, id_space=config.id_space)
    seed = args.seed if args.seed is not None else _default_seed()
    return generate(preset(args.preset, seed=seed, id_space=config.id_space))


def _err(msg: str) -> None:
    print(f"red-sched: {msg}", file=sys.stderr)


def cmd_run(args) -> int:
    config = _config(args)
    try:
        workload = _workload(args, config)
        result = run(workload, config, cycle_limit=args.cycle_limit)
    except (OSError, WorkloadFormatError) as e:
        _err(str(e))
        return EXIT_IO
    except CycleLimitExceeded as e:
        _err(str(e))
        return EXIT_CYCLE_LIMIT
    try:
        if args.trace:
            write_trace_csv(result.trace, args.trace)
        if args.metrics:
            with open(args.metrics, "w", encoding="utf-8") as fh:
                fh.write(result.metrics.to_json() + "\n")
    except OSError as e:
        _err(str(e))
        return EXIT_IO
    if not args.metrics:
        print(result.metrics.to_json())
    return EXIT_OK


def cmd_fuzz(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    capacities = (args.capacity,) if args.capacity else DEFAULT_CAPACITIES
    start = time.perf_counter()
    summary = fuzz(args.episodes, args.ops, seed, capacities, jobs=args.jobs)
    elapsed = time.perf_counter() - start
    print(
        f"{summary.episodes} episodes, {summary.cycles} cycles, "
        f"{summary.rejections} rejections, {summary.reclaims} reclaims, "
        f"{summary.reclaim_redos_checked} reclaim redos checked, {elapsed:.1f}s"
    )
    if summary.ok:
        print("0 divergences")
        return EXIT_OK
    first = summary.failures[0]
    print(f"{len(summary.failures)} failing episode(s); first: seed={first.seed} capacity={first.capacity}")
    if first.divergence is not None:
        print(first.divergence)
    for v in first.violations[:10]:
        print(f"  {v}")
    return EXIT_DIVERGENCE


def cmd_compare(args) -> int:
    config = _config(args)
    try:
        workload = _workload(args, config)
        edf = run(workload, config, cycle_limit=args.cycle_limit, machine=EdfScheduler(config))
        red = run(workload, config, cycle_limit=args.cycle_limit, machine=RedScheduler(config))
    except (OSError, WorkloadFormatError) as e:
        _err(str(e))
        return EXIT_IO
    except CycleLimitExceeded as e:
        _err(str(e))
        return EXIT_CYCLE_LIMIT
    report = {
        "instructions": len(workload),
        "ready_capacity": config.ready_capacity,
        "reject_capacity": config.reject_capacity,
        "edf": edf.metrics.to_dict(),
        "red": red.metrics.to_dict(),
    }
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as e:
            _err(str(e))
            return EXIT_IO
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="red-sched", description="RED scheduler coprocessor simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate one workload")
    _add_source(p)
    p.add_argument("--trace", metavar="PATH", help="write the per-cycle trace as CSV")
    p.add_argument("--metrics", metavar="PATH", help="write RunMetrics as JSON (stdout otherwise)")
    p.add_argument("--cycle-limit", type=_positive, default=DEFAULT_CYCLE_LIMIT)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("fuzz", help="differential fuzzing against the reference model")
    p.add_argument("--episodes", type=_non_negative, default=10_000)
    p.add_argument("--ops", type=_non_negative, default=500, help="instructions per episode")
    p.add_argument("--seed", type=int, default=None, help=f"base seed (default ${SEED_ENV} or 0)")
    p.add_argument("--capacity", type=_positive, default=None, help="fix one capacity instead of 8/16/64")
    p.add_argument("--jobs", type=_positive, default=1, help="worker processes")
    p.set_defaults(func=cmd_fuzz)

    p = sub.add_parser("compare", help="plain EDF versus RED on the same workload")
    _add_source(p)
    p.add_argument("--out", metavar="PATH", help="write the JSON report here (stdout otherwise)")
    p.add_argument("--cycle-limit", type=_positive, default=DEFAULT_CYCLE_LIMIT)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
