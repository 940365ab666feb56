import pytest

from red_sched.core import (
    Criticality,
    CycleLimitExceeded,
    EventKind,
    Instruction,
    InstructionWhileBusyError,
    Process,
    SchedulerConfig,
)
from red_sched.oracle import OracleScheduler
from red_sched.scheduler import RedScheduler, feed, run

P1 = Process(1, 10, 4, Criticality.HIGH)
P2 = Process(2, 6, 3, Criticality.HIGH)
P3 = Process(3, 9, 5, Criticality.LOW)


def drive(model, script, cycles):
    """Step ``cycles`` times; ``script`` maps cycle -> instruction."""
    return [model.step(script.get(model.now)) for _ in range(cycles)]


def both(script, cycles, ready=(), rejected=(), capacity=8):
    outs = []
    for cls in (RedScheduler, OracleScheduler):
        m = cls(SchedulerConfig(capacity))
        m.preload(ready, rejected)
        outs.append((drive(m, script, cycles), m.snapshot()))
    assert outs[0] == outs[1]
    return outs[0]


def kinds(out):
    return [(e.kind, e.id) for e in out.events]


def test_insert_takes_two_cycles():
    trace = run([Instruction.insert(0, P1)]).trace
    assert [o.busy for o in trace[:3]] == [True, True, False]
    assert trace[1].process_to_run is None
    assert trace[2].process_to_run == 1


def test_quiescent_machine():
    out = RedScheduler().step()
    assert (out.process_to_run, out.busy, out.events) == (None, False, ())


def test_instruction_while_busy_raises():
    m = RedScheduler()
    m.step(Instruction.insert(0, P1))
    with pytest.raises(InstructionWhileBusyError):
        m.step(Instruction.kill(1, 1))


def test_overloading_insert_rejects_the_low_criticality_process():
    trace, state = both({0: Instruction.insert(0, P3)}, 4, ready=[P1, P2])
    assert [o.phase for o in trace] == ["insert/2", "insert/1", "reject/2", "reject/1"]
    assert (EventKind.ACCEPTED, 3) in kinds(trace[1])
    assert (EventKind.REJECTED, 3) in kinds(trace[3])
    # P2 had one cycle left when the rejection started and finished meanwhile
    assert (EventKind.COMPLETED, 2) in kinds(trace[2])
    assert [r[0] for r in state["ready"]] == [1]
    assert state["reject"] == [(3, 5)]


def test_two_victims_need_two_rejection_phases():
    ready = [
        Process(0, 22, 7, Criticality.LOW),
        Process(1, 10, 7, Criticality.HIGH),
        Process(2, 14, 2, Criticality.HIGH),
    ]
    hard = Process(9, 15, 10, Criticality.HARD)
    trace, state = both({0: Instruction.insert(0, hard)}, 6, ready=ready)
    assert [o.phase for o in trace] == ["insert/2", "insert/1", "reject/2", "reject/1", "reject/2", "reject/1"]
    rejected = [e.id for o in trace for e in o.events if e.kind is EventKind.REJECTED]
    assert rejected == [2, 1]
    # while the overload is shed the hard process holds the CPU
    assert [o.process_to_run for o in trace[2:]] == [9, 9, 9, 9]
    assert state["ready"] == [(9, 6, 6), (0, 7, 13)]
    assert sorted(state["reject"]) == [(1, 5), (2, 2)]


def test_hard_overload_drops_the_infeasible_hard_process():
    ready = [Process(0, 6, 4, Criticality.HARD)]
    hard = Process(1, 7, 4, Criticality.HARD)
    trace, state = both({0: Instruction.insert(0, hard)}, 4, ready=ready)
    assert [o.phase for o in trace] == ["insert/2", "insert/1", "reject/2", "reject/1"]
    # the running hard process still completes on time
    assert kinds(trace[3]) == [
        (EventKind.COMPLETED, 0),
        (EventKind.DEADLINE_MISS, 1),
        (EventKind.HARD_OVERLOAD, 1),
    ]
    assert state["ready"] == []
    assert state["reject"] == []


def test_duplicate_insert_is_ignored():
    trace, state = both({0: Instruction.insert(0, P1)}, 2, ready=[P1])
    assert kinds(trace[1]) == [(EventKind.DUPLICATE_ID_IGNORED, 1)]
    assert state["ready"] == [(1, 2, 2)]


def test_insert_into_full_queue_rejects_the_tail():
    far = Process(7, 100, 3, Criticality.MEDIUM)
    trace, state = both({0: Instruction.insert(0, P1)}, 2, ready=[P2, far], capacity=2)
    assert kinds(trace[1]) == [(EventKind.ACCEPTED, 1), (EventKind.REJECTED, 7)]
    assert [r[0] for r in state["ready"]] == [2, 1]
    assert state["reject"] == [(7, 3)]


def test_kill_running_head():
    trace, state = both({0: Instruction.kill(0, 2)}, 3, ready=[P1, P2])
    assert [o.process_to_run for o in trace] == [2, 2, 1]
    assert kinds(trace[1]) == [(EventKind.KILLED, 2)]


def test_kill_in_reject_queue():
    trace, state = both({0: Instruction.kill(0, 3)}, 2, rejected=[P3])
    assert kinds(trace[1]) == [(EventKind.KILLED, 3)]
    assert state["reject"] == [] and state["live_ids"] == []


def test_kill_unknown():
    trace, state = both({0: Instruction.kill(0, 5)}, 2, ready=[P1])
    assert kinds(trace[1]) == [(EventKind.UNKNOWN_ID_IGNORED, 5)]
    assert state["live_ids"] == [1]


def test_reclaim_succeeds_when_it_fits():
    trace, state = both({}, 3, ready=[P1], rejected=[P3])
    assert [o.phase for o in trace] == ["reclaim/2", "reclaim/1", "idle"]
    assert kinds(trace[1]) == [(EventKind.RECLAIMED, 3)]
    # P1 ran for the two cycles of the move
    assert state["ready"] == [(3, 4, 4), (1, 2, 6)]


def test_failed_reclaim_is_undone_and_not_retried():
    ready = [Process(1, 10, 8, Criticality.HIGH)]
    back = Process(3, 12, 6, Criticality.MEDIUM)  # 2 + 6 + 6 > 12
    m = RedScheduler(SchedulerConfig(8))
    m.preload(ready, [back])
    before = (m.ready.snapshot(), m.reject.snapshot())
    trace = drive(m, {}, 4)
    assert [o.phase for o in trace] == ["reclaim/2", "reclaim/1", "redo/2", "redo/1"]
    assert kinds(trace[3]) == [(EventKind.RECLAIM_REDONE, 3)]
    assert m.reject.snapshot() == before[1]
    # only the running head moved on
    assert m.ready.snapshot() == [(1, before[0][0][1] - 4)]
    # P1 (4 cycles left) is unchanged in membership, so no retry yet
    assert [m.step().phase for _ in range(3)] == ["idle"] * 3


def test_empty_reject_queue_never_reclaims():
    trace, _ = both({}, 3, ready=[P1])
    assert all(o.phase == "idle" for o in trace)


def test_run_empty_workload():
    result = run([])
    assert result.trace == []
    assert result.metrics.total_cycles == 0 and result.metrics.accepted == 0


def test_run_insert_then_kill():
    wl = [Instruction.insert(0, Process(1, 100, 50)), Instruction.kill(10, 1)]
    result = run(wl)
    m = result.metrics
    assert (m.accepted, m.killed, m.completed) == (1, 1, 0)
    running = sum(o.process_to_run is not None for o in result.trace)
    assert running == 10  # cycles 2..11, the kill lands at the end of cycle 11
    assert m.utilization == running / m.total_cycles


def test_run_respects_busy_and_issue_cycles():
    wl = [Instruction.insert(0, Process(i, 500, 3)) for i in range(3)] + [Instruction.kill(20, 1)]
    trace = run(wl).trace
    starts = [o.cycle for o in trace if o.phase in ("insert/2", "kill/2")]
    assert starts == [0, 2, 4, 20]


def test_run_rejects_unsorted_workload():
    wl = [Instruction.kill(5, 1), Instruction.kill(2, 1)]
    with pytest.raises(ValueError):
        run(wl)


def test_cycle_limit():
    with pytest.raises(CycleLimitExceeded):
        run([Instruction.insert(0, Process(1, 10**6, 1000))], cycle_limit=50)


def test_feed_accepts_any_model():
    wl = [Instruction.insert(0, P1), Instruction.insert(1, P2)]
    a = list(feed(RedScheduler(), wl))
    b = list(feed(OracleScheduler(), wl))
    assert a == b


def test_preload_guards():
    m = RedScheduler(SchedulerConfig(2))
    with pytest.raises(ValueError):
        m.preload([P1, P2, P3])
    m = RedScheduler()
    with pytest.raises(ValueError):
        m.preload([Process(1, 3, 5)])
