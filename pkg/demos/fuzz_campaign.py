"""A small differential fuzz campaign.

Each episode feeds one random instruction stream to the cell-level
machine and to the list-based reference model, comparing every cycle.
The full campaign is ``red-sched fuzz``; this script runs a short one
and explains what the summary means.
"""

import sys
import time

from red_sched.harness import fuzz


def main(episodes=200):
    start = time.perf_counter()
    summary = fuzz(episodes, ops=500, seed=0)
    elapsed = time.perf_counter() - start

    print(f"{summary.episodes} episodes, {summary.cycles} cycles compared in {elapsed:.1f}s")
    print(f"rejections exercised: {summary.rejections}, reclaims: {summary.reclaims}")
    print(f"failed reclaims checked for exact restoration: {summary.reclaim_redos_checked}")
    print(f"divergences: {summary.divergences}, invariant violations: {sum(summary.violations.values())}")
    for report in summary.failures[:3]:
        print(f"  seed {report.seed} capacity {report.capacity}: {report.divergence or report.violations[0]}")


if __name__ == "__main__":
    main(*map(int, sys.argv[1:2]))
