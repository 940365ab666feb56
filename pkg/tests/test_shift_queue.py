import pytest
from hypothesis import given
from hypothesis import strategies as st

from red_sched.core import DuplicateIdError, Process
from red_sched.shift_queue import Direction, ShiftQueue


def p(pid, deadline):
    return Process(pid, deadline, 1)


def deadlines(q):
    return [x.deadline for x in q.snapshot()]


def test_insert_into_empty():
    q = ShiftQueue(4)
    assert q.insert(p(1, 5)) == (0, None)
    assert q.head().id == 1


def test_insert_in_the_middle():
    q = ShiftQueue(4)
    q.insert(p(1, 3))
    q.insert(p(2, 9))
    pos, displaced = q.insert(p(3, 7))
    assert (pos, displaced) == (1, None)
    assert deadlines(q) == [3, 7, 9]


def test_full_queue_loses_its_tail():
    q = ShiftQueue(3)
    for pid, dl in [(1, 3), (2, 7), (3, 9)]:
        q.insert(p(pid, dl))
    pos, displaced = q.insert(p(4, 5))
    assert pos == 1
    assert displaced.deadline == 9
    assert deadlines(q) == [3, 5, 7]


def test_item_worse_than_a_full_queue_falls_off_itself():
    q = ShiftQueue(2)
    q.insert(p(1, 3))
    q.insert(p(2, 4))
    new = p(3, 10)
    assert q.insert(new) == (2, new)
    assert deadlines(q) == [3, 4]


def test_duplicate_id_raises():
    q = ShiftQueue(4)
    q.insert(p(1, 3))
    with pytest.raises(DuplicateIdError):
        q.insert(p(1, 8))


def test_remove_by_id():
    q = ShiftQueue(4)
    for pid, dl in [(1, 3), (2, 7), (3, 9)]:
        q.insert(p(pid, dl))
    assert q.remove_by_id(2).deadline == 7
    assert deadlines(q) == [3, 9]
    assert q.remove_by_id(42) is None
    assert deadlines(q) == [3, 9]


def test_remove_head_then_reinsert_restores_queue():
    q = ShiftQueue(4)
    for pid, dl in [(1, 3), (2, 7), (3, 9)]:
        q.insert(p(pid, dl))
    before = q.snapshot()
    head = q.remove_by_id(q.head().id)
    q.insert(head)
    assert q.snapshot() == before


def test_observers():
    q = ShiftQueue(4)
    assert q.head() is None and len(q) == 0
    for pid, dl in [(1, 9), (2, 3), (3, 7)]:
        q.insert(p(pid, dl))
    assert deadlines(q) == [3, 7, 9]

    m = ShiftQueue(4, direction=Direction.MAX)
    for pid, dl in [(1, 9), (2, 3), (3, 7)]:
        m.insert(p(pid, dl))
    assert deadlines(m) == [9, 7, 3]


def test_equal_keys_are_fifo():
    q = ShiftQueue(4)
    for pid in (5, 1, 3):
        q.insert(p(pid, 7))
    assert [x.id for x in q] == [5, 1, 3]


ops = st.lists(
    st.one_of(
        st.tuples(st.just("ins"), st.integers(0, 15), st.integers(0, 30)),
        st.tuples(st.just("del"), st.integers(0, 15)),
    ),
    max_size=60,
)


@given(ops, st.integers(1, 6), st.sampled_from(list(Direction)))
def test_matches_sorted_list_reference(script, capacity, direction):
    """Stable sort of the survivors, truncated at each overflow."""
    q = ShiftQueue(capacity, direction=direction)
    ref = []  # (key, arrival, item)
    arrival = 0
    sign = 1 if direction is Direction.MIN else -1
    for op in script:
        if op[0] == "ins":
            _, pid, dl = op
            if any(x.id == pid for _, _, x in ref):
                with pytest.raises(DuplicateIdError):
                    q.insert(p(pid, dl))
                continue
            item = p(pid, dl)
            ref.append((sign * dl, arrival, item))
            arrival += 1
            ref.sort(key=lambda e: (e[0], e[1]))
            expected_drop = ref.pop()[2] if len(ref) > capacity else None
            _, displaced = q.insert(item)
            assert displaced == expected_drop
        else:
            _, pid = op
            hit = next((e for e in ref if e[2].id == pid), None)
            if hit is not None:
                ref.remove(hit)
            assert q.remove_by_id(pid) == (hit[2] if hit else None)
        assert q.snapshot() == [x for _, _, x in ref]
        assert len(q) <= capacity


@given(st.lists(st.integers(0, 50), max_size=8), st.integers(0, 50))
def test_insert_then_remove_is_identity(dls, new_dl):
    q = ShiftQueue(16)
    for i, dl in enumerate(dls):
        q.insert(p(i, dl))
    before = q.snapshot()
    q.insert(p(99, new_dl))
    q.remove_by_id(99)
    assert q.snapshot() == before
