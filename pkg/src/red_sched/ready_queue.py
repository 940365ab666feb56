"""EDF ready queue with overload analysis.

Every cell carries an execution-time register: its own remaining WCET plus
the remaining WCET of every cell scheduled sooner. A cell overloads when
that cumulative demand, started now, would finish past its deadline. The
per-cell bits are OR-ed into a single overload flag, and a victim is picked
among the cells up to and including the first overloading one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

from .core import Criticality, Process, edf_key
from .shift_queue import Direction, ShiftQueue


@dataclass(slots=True)
class ReadyCell:
    desc: Process
    rem_wcet: int
    cum_exec: int = 0
    overload: bool = False

    @property
    def id(self) -> int:
        return self.desc.id


@dataclass(frozen=True)
class OverloadReport:
    any_overload: bool
    first_overload_pos: Optional[int] = None
    victim: Optional[Tuple[int, int]] = None
    bits: Tuple[bool, ...] = ()

    @property
    def hard_overload(self) -> bool:
        """Overloaded, but every candidate is hard real-time."""
        return self.any_overload and self.victim is None


def _cell_key(cell: ReadyCell) -> int:
    return edf_key(cell.desc)


class ReadyQueue:
    def __init__(self, capacity: int) -> None:
        self.cells: ShiftQueue[ReadyCell] = ShiftQueue(capacity, _cell_key, Direction.MIN)
        self._c = self.cells._cells  # shared list, for the per-cycle loops
        # id of a cell that is present but must not be dispatched
        self.masked: Optional[int] = None
        # set while an overload is being shed: hard RT work gets the CPU
        self.hard_first = False

    @property
    def capacity(self) -> int:
        return self.cells.capacity

    def __len__(self) -> int:
        return len(self.cells)

    def __contains__(self, pid: int) -> bool:
        return pid in self.cells

    def full(self) -> bool:
        return self.cells.full()

    def ids(self) -> List[int]:
        return [c.desc.id for c in self._c]

    def head(self) -> Optional[Process]:
        c = self.cells.head()
        return c.desc if c is not None else None

    def _run_pos(self) -> Optional[int]:
        cells = self._c
        if self.hard_first:
            for i, c in enumerate(cells):
                if c.desc.criticality == Criticality.HARD:
                    return i
        masked = self.masked
        for i, c in enumerate(cells):
            if c.desc.id != masked:
                return i
        return None

    def running(self) -> Optional[ReadyCell]:
        """The cell driven onto PROCESS_TO_RUN.

        Normally the first unmasked cell. With ``hard_first`` set it is the
        first hard RT cell when there is one.
        """
        pos = self._run_pos()
        return self._c[pos] if pos is not None else None

    def insert(
        self, d: Process, now: int, rem_wcet: Optional[int] = None
    ) -> Tuple[OverloadReport, Optional[ReadyCell]]:
        rem = d.wcet if rem_wcet is None else rem_wcet
        cell = ReadyCell(d, rem)
        pos, displaced = self.cells.insert(cell)
        if displaced is not cell:
            cell.cum_exec = rem + (self.cells[pos - 1].cum_exec if pos else 0)
            for i in range(pos + 1, len(self.cells)):
                self.cells[i].cum_exec += rem
        # a displaced tail carried the largest register; nothing behind it
        return self.overload(now), displaced

    def remove(self, pid: int, now: int) -> Optional[ReadyCell]:
        pos = self.cells.index(pid)
        if pos is None:
            return None
        cell = self.cells.pop_at(pos)
        for i in range(pos, len(self.cells)):
            self.cells[i].cum_exec -= cell.rem_wcet
        if self.masked == pid:
            self.masked = None
        self._refresh(now)
        return cell

    def tick(self, now: int) -> Optional[ReadyCell]:
        """Execute one cycle of the running cell.

        ``now`` is the time at the end of the executed cycle. Returns the
        cell if it just ran out of remaining WCET (it is removed).
        """
        cells = self._c
        n = len(cells)
        pos = self._run_pos()
        if pos is None:
            return None
        run = cells[pos]
        run.rem_wcet -= 1
        for i in range(pos, n):
            cells[i].cum_exec -= 1
        done = None
        if run.rem_wcet == 0:
            done = self.cells.pop_at(pos)
        if pos:
            # when the head runs, now + cum_exec is unchanged for every cell
            # and so is every bit; only running a later cell breaks that
            self._refresh(now)
        return done

    def _refresh(self, now: int) -> Optional[int]:
        """Recompute every overload bit; return the first overloading position."""
        first = None
        for i, c in enumerate(self._c):
            c.overload = bit = now + c.cum_exec > c.desc.deadline
            if bit and first is None:
                first = i
        return first

    def overload(self, now: int) -> OverloadReport:
        first = self._refresh(now)
        bits = tuple(c.overload for c in self._c)
        if first is None:
            return OverloadReport(False, bits=bits)
        report = OverloadReport(True, first, None, bits)
        return OverloadReport(True, first, self.select_victim(report), bits)

    def select_victim(self, report: OverloadReport) -> Optional[Tuple[int, int]]:
        """Lowest criticality among cells 0..first_overload_pos, never hard RT.

        Ties go to the latest position, then the lowest sub-priority, then
        the highest id.
        """
        if not report.any_overload:
            return None
        best = None
        best_key = None
        for pos in range(report.first_overload_pos + 1):
            d = self.cells[pos].desc
            if d.criticality == Criticality.HARD:
                continue
            k = (int(d.criticality), -pos, d.sub_priority, -d.id)
            if best_key is None or k < best_key:
                best, best_key = (pos, d.id), k
        return best

    def registers_consistent(self) -> bool:
        total = 0
        for c in self.cells:
            total += c.rem_wcet
            if c.cum_exec != total or not 0 < c.rem_wcet <= c.desc.wcet:
                return False
        return True

    def snapshot(self) -> List[Tuple[int, int]]:
        return [(c.desc.id, c.rem_wcet) for c in self.cells]

    def __repr__(self) -> str:
        inner = ", ".join(
            f"{c.desc.id}(dl={c.desc.deadline},rem={c.rem_wcet},cum={c.cum_exec})"
            for c in self.cells
        )
        return f"ReadyQueue[{inner}]"
