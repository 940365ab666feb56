"""Walk through one overloading insertion, cycle by cycle.

Two high-criticality processes are already queued. A low-criticality
process with an in-between deadline arrives and makes the set
infeasible. The machine accepts it, notices the overload through the
per-cell overload bits, and moves the cheapest process to the reject
queue. Run with ``python demos/overload_walkthrough.py``.
"""

from red_sched import Criticality, Instruction, Process, RedScheduler


def show(machine, out):
    events = ", ".join(str(e) for e in out.events) or "-"
    print(f"cycle {out.cycle:2d}  {out.phase:9s} run={out.process_to_run}  events: {events}")
    cells = [(c.desc.id, c.rem_wcet, c.cum_exec, int(c.overload)) for c in machine.ready.cells]
    print(f"          ready (id, rem, cum, bit): {cells}")
    print(f"          reject (id, rem): {machine.reject.snapshot()}")


def main():
    m = RedScheduler()
    m.preload([Process(1, 10, 4, Criticality.HIGH), Process(2, 6, 3, Criticality.HIGH)])
    print("Before: two HIGH processes, cumulative demand 7 within both deadlines.\n")

    late = Process(3, 9, 5, Criticality.LOW)
    print("Issuing INSERT id=3 deadline=9 wcet=5 LOW at cycle 0.\n")
    show(m, m.step(Instruction.insert(0, late)))
    for _ in range(3):
        show(m, m.step())

    print("\nThe LOW process sat in front of process 1 and would have pushed it")
    print("past its deadline (bit set at cycle 1). As the lowest-criticality cell")
    print("in the overload window it now waits in the reject queue, with its")
    print("remaining WCET intact.")


if __name__ == "__main__":
    main()
