"""Cycle-level model of the RED scheduler coprocessor.

The top module owns the ready queue, the reject queue and the control
unit. Every CPU instruction and every automatic move between the queues
occupies the control unit for exactly two clock cycles; the effect lands at
the end of the second cycle. While the control unit is busy, new
instructions are refused, so callers must poll :attr:`RedScheduler.busy`.

Per cycle, in order:

1. deadline bookkeeping (ready-queue misses, reject-queue expiry purge);
2. intake: an idle control unit takes the offered instruction, or starts
   reclaiming the reject-queue head when nothing is offered;
3. the running process executes for one cycle;
4. the current phase advances; on completion its effect is applied and the
   overload flag decides whether a rejection phase follows immediately.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import Iterable, List, NamedTuple, Optional, Sequence

from .core import (
    Criticality,
    CycleLimitExceeded,
    CycleOutput,
    DuplicateIdError,
    Event,
    EventKind,
    Insert,
    Instruction,
    InstructionWhileBusyError,
    Process,
    SchedulerConfig,
)
from .metrics import RunMetrics
from .ready_queue import ReadyQueue
from .reject_queue import RejectQueue

PHASE_CYCLES = 2
DEFAULT_CYCLE_LIMIT = 10_000_000


class PhaseKind(str, enum.Enum):
    IDLE = "idle"
    INSERT = "insert"
    KILL = "kill"
    REJECT = "reject"
    RECLAIM = "reclaim"
    REDO = "redo"


class Phase(NamedTuple):
    kind: PhaseKind
    cycles_left: int = 0
    instruction: Optional[Instruction] = None
    target: Optional[int] = None

    @property
    def tag(self) -> str:
        return _TAGS[self.kind, self.cycles_left]


IDLE = Phase(PhaseKind.IDLE)
_TAGS = {(k, n): f"{k.value}/{n}" for k in PhaseKind for n in range(1, PHASE_CYCLES + 1)}
_TAGS[PhaseKind.IDLE, 0] = "idle"


class RedScheduler:
    """The coprocessor: ready queue, reject queue and control unit."""

    def __init__(self, config: Optional[SchedulerConfig] = None) -> None:
        self.config = config or SchedulerConfig()
        self.now = 0
        self.ready = ReadyQueue(self.config.ready_capacity)
        self.reject = RejectQueue(self.config.reject_capacity)
        self._rj = self.reject.entries._cells  # shared list, for cheap emptiness tests
        self.phase = IDLE
        self.live_ids: set = set()
        self._missed: set = set()
        self._ready_version = 0
        self._blocked: Optional[tuple] = None  # (reject head id, ready version)

    @property
    def busy(self) -> bool:
        return self.phase.kind is not PhaseKind.IDLE

    @property
    def drained(self) -> bool:
        return self.phase.kind is PhaseKind.IDLE and not self.ready._c and not self._rj

    def preload(self, ready: Iterable[Process] = (), rejected: Iterable[Process] = ()) -> None:
        """Place processes straight into the queues, bypassing the ISA.

        Meant for setting up a known state; the ready queue must come out
        free of overload.
        """
        if self.busy:
            raise InstructionWhileBusyError("preload needs an idle control unit")
        for d in ready:
            if d.id in self.live_ids:
                raise DuplicateIdError(d.id)
            _, displaced = self.ready.insert(d, self.now)
            if displaced is not None:
                raise ValueError("preload exceeds the ready capacity")
            self.live_ids.add(d.id)
            self._ready_version += 1
        for d in rejected:
            if d.id in self.live_ids:
                raise DuplicateIdError(d.id)
            if self.reject.insert(d) is not None:
                raise ValueError("preload exceeds the reject capacity")
            self.live_ids.add(d.id)
        if self.ready._refresh(self.now) is not None:
            raise ValueError("preloaded ready queue is overloaded")

    def process_to_run(self) -> Optional[int]:
        c = self.ready.running()
        return c.desc.id if c is not None else None

    def step(self, instr: Optional[Instruction] = None) -> CycleOutput:
        if instr is not None and self.busy:
            raise InstructionWhileBusyError(f"cycle {self.now}: control unit busy ({self.phase.tag})")
        now = self.now
        events: List[Event] = []
        ready = self.ready

        masked = ready.masked
        for c in ready._c:
            d = c.desc
            if d.deadline <= now and d.id != masked and d.id not in self._missed:
                self._missed.add(d.id)
                events.append(Event(now, EventKind.DEADLINE_MISS, d.id, int(d.criticality)))
        if self._rj:
            for e in self.reject.purge_expired(now):
                d = e.desc
                if d.criticality in (Criticality.MEDIUM, Criticality.HIGH) and d.id not in self._missed:
                    events.append(Event(now, EventKind.DEADLINE_MISS, d.id, int(d.criticality)))
                events.append(Event(now, EventKind.EXPIRED_PURGED, d.id, int(d.criticality)))
                self._retire(d.id)

        phase = self.phase
        if phase.kind is PhaseKind.IDLE:
            if instr is not None:
                kind = PhaseKind.INSERT if isinstance(instr.op, Insert) else PhaseKind.KILL
                phase = self.phase = Phase(kind, PHASE_CYCLES, instr)
            elif self._rj and self._can_reclaim():
                target = self.reject.peek_reclaim().id
                phase = self.phase = Phase(PhaseKind.RECLAIM, PHASE_CYCLES, None, target)

        busy = phase.kind is not PhaseKind.IDLE
        # shedding an overload: soft work would eat slack the hard set needs
        ready.hard_first = phase.kind is PhaseKind.REJECT
        running = ready.running()
        running = running.desc.id if running is not None else None

        done = ready.tick(now + 1)
        if done is not None:
            events.append(Event(now, EventKind.COMPLETED, done.desc.id, int(done.desc.criticality)))
            self._ready_version += 1
            self._retire(done.desc.id)

        if busy:
            if phase.cycles_left > 1:
                self.phase = Phase(phase.kind, phase.cycles_left - 1, phase.instruction, phase.target)
            else:
                self._finish(phase, events)

        self.now = now + 1
        return CycleOutput(now, running, busy, phase.tag, tuple(events))

    # -- control unit -------------------------------------------------------

    def _can_reclaim(self) -> bool:
        head = self.reject.peek_reclaim()
        if head is None or self.ready.full():
            return False
        return self._blocked != (head.id, self._ready_version)

    def _finish(self, phase: Phase, events: List[Event]) -> None:
        t = self.now + 1
        self.phase = IDLE
        kind = phase.kind
        if kind is PhaseKind.INSERT:
            self.apply_insert(phase.instruction.op.process, events)
        elif kind is PhaseKind.KILL:
            self.apply_kill(phase.instruction.op.id, events)
        elif kind is PhaseKind.REJECT:
            self.resolve_overload(phase.target, events)
        elif kind is PhaseKind.RECLAIM:
            if self._reclaim_try(phase.target, events):
                self.phase = Phase(PhaseKind.REDO, PHASE_CYCLES, target=phase.target)
                return
        elif kind is PhaseKind.REDO:
            self._reclaim_redo(phase.target, events)
        if self.ready._refresh(t) is not None:
            # the victim is chosen now and parked until the move lands, so
            # the CPU does not spend the two cycles on work being shelved
            victim = self.ready.overload(t).victim
            target = victim[1] if victim is not None else None
            self.ready.masked = target
            self.phase = Phase(PhaseKind.REJECT, PHASE_CYCLES, target=target)

    def apply_insert(self, d: Process, events: List[Event]) -> None:
        t = self.now + 1
        if d.id in self.live_ids:
            events.append(Event(self.now, EventKind.DUPLICATE_ID_IGNORED, d.id))
            return
        _, displaced = self.ready.insert(d, t)
        self._ready_version += 1
        self.live_ids.add(d.id)
        events.append(Event(self.now, EventKind.ACCEPTED, d.id, int(d.criticality)))
        if displaced is not None:
            self._to_reject(displaced.desc, displaced.rem_wcet, events)

    def apply_kill(self, pid: int, events: List[Event]) -> None:
        t = self.now + 1
        cell = self.ready.remove(pid, t)
        if cell is not None:
            self._ready_version += 1
            d = cell.desc
        else:
            entry = self.reject.remove(pid)
            if entry is None:
                events.append(Event(self.now, EventKind.UNKNOWN_ID_IGNORED, pid))
                return
            d = entry.desc
        events.append(Event(self.now, EventKind.KILLED, d.id, int(d.criticality)))
        self._retire(d.id)

    def resolve_overload(self, victim: Optional[int], events: List[Event]) -> None:
        """Move the parked victim out of the ready queue.

        Without a non-hard candidate the first overloading (hard RT) cell
        cannot meet its deadline; it is dropped and reported.
        """
        t = self.now + 1
        if victim is not None:
            cell = self.ready.remove(victim, t)
            self._ready_version += 1
            self._to_reject(cell.desc, cell.rem_wcet, events)
            return
        report = self.ready.overload(t)
        if not report.any_overload:
            return
        self._ready_version += 1
        d = self.ready.cells[report.first_overload_pos].desc
        self.ready.remove(d.id, t)
        if d.id not in self._missed:
            events.append(Event(self.now, EventKind.DEADLINE_MISS, d.id, int(d.criticality)))
        events.append(Event(self.now, EventKind.HARD_OVERLOAD, d.id, int(d.criticality)))
        self._retire(d.id)

    def _reclaim_try(self, pid: int, events: List[Event]) -> bool:
        """Tentatively move ``pid`` back; return True if it must be undone."""
        t = self.now + 1
        entry = self.reject.remove(pid)
        if entry is None:
            return False
        report, _ = self.ready.insert(entry.desc, t, entry.rem_wcet)
        self._ready_version += 1
        if report.any_overload:
            self.ready.masked = pid
            return True
        events.append(Event(self.now, EventKind.RECLAIMED, pid, int(entry.desc.criticality)))
        return False

    def _reclaim_redo(self, pid: int, events: List[Event]) -> None:
        t = self.now + 1
        cell = self.ready.remove(pid, t)
        self._ready_version += 1
        dropped = self.reject.insert(cell.desc, cell.rem_wcet)
        assert dropped is None, "reject queue cannot fill during a reclaim"
        events.append(Event(self.now, EventKind.RECLAIM_REDONE, pid, int(cell.desc.criticality)))
        self._blocked = (pid, self._ready_version)

    def _to_reject(self, d: Process, rem: int, events: List[Event]) -> None:
        if d.criticality == Criticality.HARD:
            events.append(Event(self.now, EventKind.CAPACITY_DROP, d.id, int(d.criticality)))
            self._retire(d.id)
            return
        dropped = self.reject.insert(d, rem)
        events.append(Event(self.now, EventKind.REJECTED, d.id, int(d.criticality)))
        if dropped is not None:
            dd = dropped.desc
            events.append(Event(self.now, EventKind.CAPACITY_DROP, dd.id, int(dd.criticality)))
            self._retire(dd.id)

    def _retire(self, pid: int) -> None:
        self.live_ids.discard(pid)
        self._missed.discard(pid)

    # -- observers ----------------------------------------------------------

    def snapshot(self) -> dict:
        return {
            "now": self.now,
            "phase": self.phase.tag,
            "ready": [(c.desc.id, c.rem_wcet, c.cum_exec) for c in self.ready.cells],
            "reject": self.reject.snapshot(),
            "live_ids": sorted(self.live_ids),
        }


@dataclass
class RunResult:
    trace: List[CycleOutput]
    metrics: RunMetrics


def feed(
    machine,
    workload: Sequence[Instruction],
    cycle_limit: Optional[int] = DEFAULT_CYCLE_LIMIT,
) -> Iterable[CycleOutput]:
    """Step ``machine`` until the workload is consumed and it drains.

    Each instruction is offered at the first non-busy cycle at or after its
    issue cycle. Works with any object exposing ``step``, ``busy``,
    ``drained`` and ``now``.
    """
    pending = deque(workload)
    last = None
    for ins in pending:
        if last is not None and ins.issue_cycle < last:
            raise ValueError("workload issue cycles must be nondecreasing")
        last = ins.issue_cycle
    while pending or not machine.drained:
        if cycle_limit is not None and machine.now >= cycle_limit:
            raise CycleLimitExceeded(f"no quiescence after {cycle_limit} cycles")
        instr = None
        if pending and not machine.busy and pending[0].issue_cycle <= machine.now:
            instr = pending.popleft()
        yield machine.step(instr)


def run(
    workload: Sequence[Instruction],
    config: Optional[SchedulerConfig] = None,
    cycle_limit: Optional[int] = DEFAULT_CYCLE_LIMIT,
    machine=None,
) -> RunResult:
    machine = machine if machine is not None else RedScheduler(config)
    trace = list(feed(machine, workload, cycle_limit))
    return RunResult(trace, RunMetrics.from_trace(trace))
