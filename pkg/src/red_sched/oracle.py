"""Behavioral golden models.

:class:`OracleScheduler` makes the same decisions as
:class:`~red_sched.scheduler.RedScheduler` but keeps plain unsorted lists
and recomputes every order, prefix sum, overload bit and victim from
scratch whenever it needs one. It shares only the comparators in
:mod:`red_sched.core` with the cell-based model.

:class:`EdfScheduler` is the plain EDF baseline: every insert is accepted,
there is no overload analysis and no reject queue, and processes still
queued at their deadline are reported and dropped.
"""

from __future__ import annotations

from operator import attrgetter
from typing import Iterable, List, Optional, Sequence, Tuple

from .core import (
    Criticality,
    CycleOutput,
    DuplicateIdError,
    Event,
    EventKind,
    Insert,
    Instruction,
    InstructionWhileBusyError,
    Process,
    SchedulerConfig,
    edf_key,
    reject_key,
)

_TWO = 2


def edf_feasible(processes: Iterable[Tuple[int, int]], now: int) -> bool:
    """True iff every (deadline, remaining wcet) job finishes in time under EDF."""
    t = now
    for deadline, rem in sorted(processes, key=lambda p: p[0]):
        t += rem
        if t > deadline:
            return False
    return True


def check_victim(
    jobs: Sequence[Tuple[Process, int]], now: int
) -> Optional[Tuple[int, int]]:
    """Exhaustive victim search over ``jobs`` given in EDF order.

    ``jobs`` are (descriptor, remaining wcet) pairs. Returns (position, id)
    or None when there is no overload or only hard RT candidates.
    """
    t = now
    first = None
    for pos, (d, rem) in enumerate(jobs):
        t += rem
        if t > d.deadline:
            first = pos
            break
    if first is None:
        return None
    candidates = [
        (pos, d) for pos, (d, _) in enumerate(jobs[: first + 1]) if d.criticality != Criticality.HARD
    ]
    if not candidates:
        return None
    lowest = min(int(d.criticality) for _, d in candidates)
    tied = [(pos, d) for pos, d in candidates if int(d.criticality) == lowest]
    latest = max(pos for pos, _ in tied)
    tied = [(pos, d) for pos, d in tied if pos == latest]
    low_sub = min(d.sub_priority for _, d in tied)
    tied = [(pos, d) for pos, d in tied if d.sub_priority == low_sub]
    pos, d = max(tied, key=lambda pd: pd[1].id)
    return pos, d.id


class _Job:
    __slots__ = ("desc", "rem", "seq", "key")

    def __init__(self, desc: Process, rem: int, seq: int) -> None:
        self.desc = desc
        self.rem = rem
        self.seq = seq
        self.key = (edf_key(desc), seq)


_job_key = attrgetter("key")


class _BaseModel:
    def __init__(self, config: Optional[SchedulerConfig] = None) -> None:
        self.config = config or SchedulerConfig()
        self.now = 0
        self.ready: List[_Job] = []
        self._seq = 0
        # (kind, cycles_left, payload); kind None means idle
        self._phase: Tuple = (None, 0, None)

    @property
    def busy(self) -> bool:
        return self._phase[0] is not None

    def _tag(self) -> str:
        kind, left, _ = self._phase
        return "idle" if kind is None else f"{kind}/{left}"

    def _ordered(self) -> List[_Job]:
        return sorted(self.ready, key=_job_key)

    def _find(self, pid: int) -> Optional[_Job]:
        for j in self.ready:
            if j.desc.id == pid:
                return j
        return None

    def _add_ready(self, desc: Process, rem: int) -> Optional[_Job]:
        """Add a job, then drop and return the EDF-last one on overflow."""
        self._seq += 1
        self.ready.append(_Job(desc, rem, self._seq))
        if len(self.ready) > self.config.ready_capacity:
            last = self._ordered()[-1]
            self.ready.remove(last)
            return last
        return None


class OracleScheduler(_BaseModel):
    """Reference RED model; see module docstring."""

    def __init__(self, config: Optional[SchedulerConfig] = None) -> None:
        super().__init__(config)
        self.rejected: List[Tuple[Process, int]] = []
        self.masked: Optional[int] = None
        self.blocked: Optional[int] = None
        self.missed: set = set()

    @property
    def drained(self) -> bool:
        return not self.busy and not self.ready and not self.rejected

    @property
    def live_ids(self) -> set:
        return {j.desc.id for j in self.ready} | {d.id for d, _ in self.rejected}

    def preload(self, ready: Iterable[Process] = (), rejected: Iterable[Process] = ()) -> None:
        """Same contract as :meth:`RedScheduler.preload`."""
        if self.busy:
            raise InstructionWhileBusyError("preload needs an idle control unit")
        for d in ready:
            if d.id in self.live_ids:
                raise DuplicateIdError(d.id)
            if self._add_ready(d, d.wcet) is not None:
                raise ValueError("preload exceeds the ready capacity")
        for d in rejected:
            if d.id in self.live_ids:
                raise DuplicateIdError(d.id)
            if len(self.rejected) >= self.config.reject_capacity:
                raise ValueError("preload exceeds the reject capacity")
            self.rejected.append((d, d.wcet))
        if self.overloaded(self.now):
            raise ValueError("preloaded ready queue is overloaded")

    def _reject_order(self) -> List[Tuple[Process, int]]:
        return sorted(self.rejected, key=lambda e: reject_key(e[0]), reverse=True)

    def _jobs(self) -> List[Tuple[Process, int]]:
        return [(j.desc, j.rem) for j in self._ordered()]

    def overloaded(self, now: int) -> bool:
        return not edf_feasible(((j.desc.deadline, j.rem) for j in self.ready), now)

    def _ready_changed(self) -> None:
        self.blocked = None

    def step(self, instr: Optional[Instruction] = None) -> CycleOutput:
        busy = self._phase[0] is not None
        if instr is not None and busy:
            raise InstructionWhileBusyError(f"cycle {self.now}: busy")
        now = self.now
        ev: List[Event] = []

        order = self._ordered()
        for j in order:
            d = j.desc
            if d.deadline <= now and d.id != self.masked and d.id not in self.missed:
                self.missed.add(d.id)
                ev.append(Event(now, EventKind.DEADLINE_MISS, d.id, int(d.criticality)))
        if any(d.deadline <= now and not d.is_non_rt for d, _ in self.rejected):
            for d, rem in self._reject_order():
                if d.is_non_rt or d.deadline > now:
                    continue
                self.rejected.remove((d, rem))
                if int(d.criticality) in (1, 2) and d.id not in self.missed:
                    ev.append(Event(now, EventKind.DEADLINE_MISS, d.id, int(d.criticality)))
                ev.append(Event(now, EventKind.EXPIRED_PURGED, d.id, int(d.criticality)))
                self.missed.discard(d.id)

        if not busy:
            if instr is not None:
                kind = "insert" if isinstance(instr.op, Insert) else "kill"
                self._phase = (kind, _TWO, instr.op)
            elif self.rejected and len(self.ready) < self.config.ready_capacity:
                best = self._reject_order()[0][0]
                if best.id != self.blocked:
                    self._phase = ("reclaim", _TWO, best.id)

        tag = self._tag()
        busy = self.busy
        # intake never touches the ready list, so the order above still holds
        running = None
        if self._phase[0] == "reject":
            running = next((j for j in order if j.desc.is_hard), None)
        if running is None:
            running = next((j for j in order if j.desc.id != self.masked), None)
        if running is not None:
            running.rem -= 1
            if running.rem == 0:
                self.ready.remove(running)
                d = running.desc
                ev.append(Event(now, EventKind.COMPLETED, d.id, int(d.criticality)))
                self.missed.discard(d.id)
                self._ready_changed()

        if busy:
            kind, left, payload = self._phase
            if left > 1:
                self._phase = (kind, left - 1, payload)
            else:
                self._phase = (None, 0, None)
                self._effect(kind, payload, now, ev)

        self.now = now + 1
        return CycleOutput(now, running.desc.id if running else None, busy, tag, tuple(ev))

    def _effect(self, kind: str, payload, now: int, ev: List[Event]) -> None:
        t = now + 1
        if kind == "insert":
            d = payload.process
            if d.id in self.live_ids:
                ev.append(Event(now, EventKind.DUPLICATE_ID_IGNORED, d.id))
            else:
                ev.append(Event(now, EventKind.ACCEPTED, d.id, int(d.criticality)))
                out = self._add_ready(d, d.wcet)
                self._ready_changed()
                if out is not None:
                    self._reject(out.desc, out.rem, now, ev)
        elif kind == "kill":
            pid = payload.id
            j = self._find(pid)
            hit = None
            if j is not None:
                self.ready.remove(j)
                self._ready_changed()
                hit = j.desc
            else:
                for d, rem in self.rejected:
                    if d.id == pid:
                        self.rejected.remove((d, rem))
                        hit = d
                        break
            if hit is None:
                ev.append(Event(now, EventKind.UNKNOWN_ID_IGNORED, pid))
            else:
                ev.append(Event(now, EventKind.KILLED, hit.id, int(hit.criticality)))
                self.missed.discard(hit.id)
        elif kind == "reject":
            if payload is not None:
                j = self._find(payload)
                self.ready.remove(j)
                self.masked = None
                self._ready_changed()
                self._reject(j.desc, j.rem, now, ev)
            else:
                jobs = self._jobs()
                acc = t
                for d, r in jobs:
                    acc += r
                    if acc > d.deadline:
                        break
                else:
                    d = None
                if d is not None:
                    self._ready_changed()
                    self.ready.remove(self._find(d.id))
                    if d.id not in self.missed:
                        ev.append(Event(now, EventKind.DEADLINE_MISS, d.id, int(d.criticality)))
                    ev.append(Event(now, EventKind.HARD_OVERLOAD, d.id, int(d.criticality)))
                    self.missed.discard(d.id)
        elif kind == "reclaim":
            pid = payload
            entry = next((e for e in self.rejected if e[0].id == pid), None)
            if entry is not None:
                self.rejected.remove(entry)
                self._add_ready(entry[0], entry[1])
                self._ready_changed()
                if self.overloaded(t):
                    self.masked = pid
                    self._phase = ("redo", _TWO, pid)
                    return
                ev.append(Event(now, EventKind.RECLAIMED, pid, int(entry[0].criticality)))
        elif kind == "redo":
            pid = payload
            j = self._find(pid)
            self.ready.remove(j)
            self.masked = None
            self.rejected.append((j.desc, j.rem))
            ev.append(Event(now, EventKind.RECLAIM_REDONE, pid, int(j.desc.criticality)))
            self.blocked = pid
        if self.overloaded(t):
            victim = check_victim(self._jobs(), t)
            self.masked = victim[1] if victim is not None else None
            self._phase = ("reject", _TWO, self.masked)

    def _reject(self, d: Process, rem: int, now: int, ev: List[Event]) -> None:
        if d.criticality == Criticality.HARD:
            ev.append(Event(now, EventKind.CAPACITY_DROP, d.id, int(d.criticality)))
            self.missed.discard(d.id)
            return
        self.rejected.append((d, rem))
        ev.append(Event(now, EventKind.REJECTED, d.id, int(d.criticality)))
        if len(self.rejected) > self.config.reject_capacity:
            worst = self._reject_order()[-1]
            self.rejected.remove(worst)
            ev.append(Event(now, EventKind.CAPACITY_DROP, worst[0].id, int(worst[0].criticality)))
            self.missed.discard(worst[0].id)

    def snapshot(self) -> dict:
        ready = []
        acc = 0
        for j in self._ordered():
            acc += j.rem
            ready.append((j.desc.id, j.rem, acc))
        return {
            "now": self.now,
            "phase": self._tag(),
            "ready": ready,
            "reject": [(d.id, r) for d, r in self._reject_order()],
            "live_ids": sorted(self.live_ids),
        }


class EdfScheduler(_BaseModel):
    """Plain EDF: accept everything, drop what is late."""

    @property
    def drained(self) -> bool:
        return not self.busy and not self.ready

    @property
    def live_ids(self) -> set:
        return {j.desc.id for j in self.ready}

    def preload(self, ready: Iterable[Process] = ()) -> None:
        for d in ready:
            if d.id in self.live_ids:
                raise DuplicateIdError(d.id)
            if self._add_ready(d, d.wcet) is not None:
                raise ValueError("preload exceeds the ready capacity")

    def step(self, instr: Optional[Instruction] = None) -> CycleOutput:
        if instr is not None and self.busy:
            raise InstructionWhileBusyError(f"cycle {self.now}: busy")
        now = self.now
        ev: List[Event] = []
        for j in self._ordered():
            d = j.desc
            if d.deadline <= now:
                self.ready.remove(j)
                ev.append(Event(now, EventKind.DEADLINE_MISS, d.id, int(d.criticality)))
                ev.append(Event(now, EventKind.EXPIRED_PURGED, d.id, int(d.criticality)))

        if not self.busy and instr is not None:
            kind = "insert" if isinstance(instr.op, Insert) else "kill"
            self._phase = (kind, _TWO, instr.op)
        tag = self._tag()
        busy = self.busy

        order = self._ordered()
        running = order[0] if order else None
        if running is not None:
            running.rem -= 1
            if running.rem == 0:
                self.ready.remove(running)
                d = running.desc
                ev.append(Event(now, EventKind.COMPLETED, d.id, int(d.criticality)))

        if busy:
            kind, left, op = self._phase
            if left > 1:
                self._phase = (kind, left - 1, op)
            else:
                self._phase = (None, 0, None)
                if kind == "insert":
                    d = op.process
                    if d.id in self.live_ids:
                        ev.append(Event(now, EventKind.DUPLICATE_ID_IGNORED, d.id))
                    else:
                        ev.append(Event(now, EventKind.ACCEPTED, d.id, int(d.criticality)))
                        out = self._add_ready(d, d.wcet)
                        if out is not None:
                            od = out.desc
                            ev.append(Event(now, EventKind.CAPACITY_DROP, od.id, int(od.criticality)))
                else:
                    j = self._find(op.id)
                    if j is None:
                        ev.append(Event(now, EventKind.UNKNOWN_ID_IGNORED, op.id))
                    else:
                        self.ready.remove(j)
                        ev.append(Event(now, EventKind.KILLED, j.desc.id, int(j.desc.criticality)))

        self.now = now + 1
        return CycleOutput(now, running.desc.id if running else None, busy, tag, tuple(ev))
