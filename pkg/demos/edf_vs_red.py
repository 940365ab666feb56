"""Plain EDF versus RED on an overloaded workload.

Under overload EDF gives no guarantee: a late arrival can drag every
process behind it past its deadline, hard ones included. RED sheds the
least critical work instead. This script runs both models on the same
generated stream and prints the misses per criticality level.
"""

import sys

from red_sched import EdfScheduler, SchedulerConfig, generate, preset, run


def main(seed=1, capacity=16):
    config = SchedulerConfig(capacity)
    workload = generate(preset("overload_stress", seed=seed, id_space=config.id_space))
    print(f"overload_stress seed={seed}, capacity={capacity}, {len(workload)} instructions\n")

    edf = run(workload, config, machine=EdfScheduler(config)).metrics
    red = run(workload, config).metrics

    print(f"{'':20s}{'EDF':>8s}{'RED':>8s}")
    for level, name in enumerate(("non-critical", "medium", "high", "hard RT")):
        print(f"{name + ' misses':20s}{edf.misses_by_criticality[level]:8d}{red.misses_by_criticality[level]:8d}")
    print(f"{'completed':20s}{edf.completed:8d}{red.completed:8d}")
    print(f"{'utilization':20s}{edf.utilization:8.3f}{red.utilization:8.3f}")
    print(f"\nRED rejected {red.rejections} times and reclaimed {red.reclaims} processes.")


if __name__ == "__main__":
    main(*map(int, sys.argv[1:3]))
