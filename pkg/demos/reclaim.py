"""Reclaiming rejected work, and undoing a reclaim that does not fit.

Whenever the control unit is idle it tries to bring the best rejected
process back. If the tentative insertion overloads the ready queue the
move is reverted (a "redo"), and it is not retried until the ready queue
changes.
"""

from red_sched import Criticality, Process, RedScheduler


def replay(title, ready, rejected, cycles):
    print(title)
    m = RedScheduler()
    m.preload(ready, rejected)
    for _ in range(cycles):
        out = m.step()
        events = ", ".join(str(e) for e in out.events) or "-"
        print(f"  cycle {out.cycle}  {out.phase:9s} run={out.process_to_run}  {events}")
    print(f"  ready {m.ready.snapshot()}  reject {m.reject.snapshot()}\n")


def main():
    running = Process(1, 10, 4, Criticality.HIGH)
    replay(
        "Slack is available, so the rejected LOW process comes back:",
        [running],
        [Process(3, 9, 5, Criticality.LOW)],
        3,
    )
    replay(
        "Process 3 needs 6 cycles but only 4 are spare, so the move is undone:",
        [Process(1, 10, 8, Criticality.HIGH)],
        [Process(3, 12, 6, Criticality.MEDIUM)],
        7,
    )


if __name__ == "__main__":
    main()
