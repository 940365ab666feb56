from hypothesis import given, settings
from hypothesis import strategies as st

from red_sched.core import Criticality, Process
from red_sched.oracle import check_victim, edf_feasible
from red_sched.ready_queue import ReadyQueue

P1 = Process(1, 10, 4, Criticality.HIGH)
P2 = Process(2, 6, 3, Criticality.HIGH)
P3 = Process(3, 9, 5, Criticality.LOW)


def cums(rq):
    return [c.cum_exec for c in rq.cells]


def bits(rq):
    return [c.overload for c in rq.cells]


def recomputed(rq, now):
    """(cum, bit) per cell from scratch."""
    out, total = [], 0
    for c in rq.cells:
        total += c.rem_wcet
        out.append((total, now + total > c.desc.deadline))
    return out


def test_single_insert():
    rq = ReadyQueue(8)
    report, displaced = rq.insert(P1, 0)
    assert cums(rq) == [4]
    assert not report.any_overload and displaced is None


def test_insert_earlier_deadline():
    rq = ReadyQueue(8)
    rq.insert(P1, 0)
    report, _ = rq.insert(P2, 0)
    assert rq.ids() == [2, 1]
    assert cums(rq) == [3, 7]
    assert not report.any_overload


def test_overloading_insert_picks_low_criticality_victim():
    rq = ReadyQueue(8)
    rq.insert(P1, 0)
    rq.insert(P2, 0)
    report, _ = rq.insert(P3, 0)
    assert rq.ids() == [2, 3, 1]
    assert cums(rq) == [3, 8, 12]
    assert report.bits == (False, False, True)
    assert report.first_overload_pos == 2
    assert report.victim == (1, 3)
    jobs = [(c.desc, c.rem_wcet) for c in rq.cells]
    assert check_victim(jobs, 0) == report.victim


def test_remove_subtracts_remaining_wcet():
    rq = ReadyQueue(8)
    for d in (P1, P2, P3):
        rq.insert(d, 0)
    assert rq.remove(3, 0).desc is P3
    assert cums(rq) == [3, 7]


def test_remove_partially_run_head():
    rq = ReadyQueue(8)
    for d in (P1, P2, P3):
        rq.insert(d, 0)
    rq.tick(1)  # P2: 3 -> 2
    assert rq.cells[0].rem_wcet == 2
    rq.remove(2, 1)
    assert cums(rq) == [5, 9]
    assert rq.registers_consistent()


def test_remove_unknown():
    rq = ReadyQueue(8)
    rq.insert(P1, 0)
    assert rq.remove(77, 0) is None
    assert cums(rq) == [4]


def test_tick():
    rq = ReadyQueue(8)
    rq.insert(P1, 0)
    rq.insert(P2, 0)
    assert rq.tick(1) is None
    assert [(c.rem_wcet, c.cum_exec) for c in rq.cells] == [(2, 2), (4, 6)]


def test_tick_completes_head():
    rq = ReadyQueue(8)
    rq.insert(Process(5, 10, 1), 0)
    done = rq.tick(1)
    assert done.desc.id == 5 and len(rq) == 0
    assert ReadyQueue(2).tick(1) is None


def test_overload_report_over_time():
    rq = ReadyQueue(8)
    for d in (P1, P2, P3):
        rq.insert(d, 0)
    assert bits(rq) == [False, False, True]
    report = rq.overload(4)  # 4 + 3 > 6
    assert report.bits[0] and report.first_overload_pos == 0
    empty = ReadyQueue(4).overload(0)
    assert not empty.any_overload and empty.victim is None


def test_victim_lowest_criticality_in_window():
    rq = ReadyQueue(8)
    rq.insert(Process(0, 20, 10, 3), 0)
    rq.insert(Process(1, 21, 5, 0), 0)
    rq.insert(Process(2, 22, 10, 1), 0)  # 25 > 22: first overload at 2
    assert rq.overload(0).victim == (1, 1)


def test_victim_tie_goes_to_later_position():
    rq = ReadyQueue(8)
    rq.insert(Process(0, 20, 10, 2), 0)
    rq.insert(Process(1, 21, 15, 2), 0)
    assert rq.overload(0).victim == (1, 1)


def test_all_hard_candidates_means_no_victim():
    rq = ReadyQueue(8)
    rq.insert(Process(0, 20, 10, 3), 0)
    rq.insert(Process(1, 21, 15, 3), 0)
    report = rq.overload(0)
    assert report.hard_overload and report.victim is None


def test_head_observer():
    rq = ReadyQueue(8)
    assert rq.head() is None
    rq.insert(P1, 0)
    rq.insert(P2, 0)
    assert rq.head() is P2
    rq.remove(2, 0)
    assert rq.head() is P1


def test_full_queue_displaces_latest_deadline():
    rq = ReadyQueue(2)
    rq.insert(P1, 0)
    rq.insert(P2, 0)
    _, displaced = rq.insert(P3, 0)
    assert displaced.desc is P1
    assert rq.ids() == [2, 3] and cums(rq) == [3, 8]


procs = st.builds(
    lambda pid, dl, w, c, s: Process(pid, dl, w, c, s if c == 0 else 0),
    st.integers(0, 31),
    st.integers(0, 120),
    st.integers(1, 12),
    st.integers(0, 3),
    st.integers(0, 1023),
)
actions = st.lists(
    st.one_of(
        st.tuples(st.just("ins"), procs),
        st.tuples(st.just("del"), st.integers(0, 31)),
        st.tuples(st.just("tick"), st.integers(1, 5)),
    ),
    max_size=40,
)


@settings(max_examples=300)
@given(actions, st.integers(1, 10))
def test_incremental_registers_match_recomputation(script, capacity):
    rq = ReadyQueue(capacity)
    now = 0
    for op in script:
        if op[0] == "ins":
            if op[1].id in rq:
                continue
            rq.insert(op[1], now)
        elif op[0] == "del":
            rq.remove(op[1], now)
        else:
            for _ in range(op[1]):
                now += 1
                rq.tick(now)
        assert rq.registers_consistent()
        assert [(c.cum_exec, c.overload) for c in rq.cells] == recomputed(rq, now)
        dls = [c.desc.deadline for c in rq.cells]
        assert dls == sorted(dls)
        report = rq.overload(now)
        jobs = [(c.desc.deadline, c.rem_wcet) for c in rq.cells]
        assert report.any_overload == (not edf_feasible(jobs, now))
        assert report.any_overload == any(report.bits)
        assert report.victim == check_victim([(c.desc, c.rem_wcet) for c in rq.cells], now)


def test_reclaimed_process_fits_at_time_zero():
    rq = ReadyQueue(8)
    rq.insert(P1, 0)
    report, _ = rq.insert(P3, 0)
    assert rq.ids() == [3, 1] and cums(rq) == [5, 9]
    assert not report.any_overload


def test_hard_first_dispatch_skips_soft_cells():
    rq = ReadyQueue(8)
    rq.insert(Process(0, 10, 3, Criticality.HIGH), 0)
    rq.insert(Process(1, 12, 4, Criticality.HARD), 0)
    assert rq.running().desc.id == 0
    rq.hard_first = True
    assert rq.running().desc.id == 1
    rq.tick(1)
    assert [(c.desc.id, c.rem_wcet, c.cum_exec) for c in rq.cells] == [(0, 3, 3), (1, 3, 6)]
    assert rq.registers_consistent()
    rq.remove(1, 1)
    assert rq.running().desc.id == 0  # no hard cell left: first unmasked
