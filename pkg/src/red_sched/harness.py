"""Differential fuzzing of the cell-based machine against the oracle.

Each episode generates a workload, steps :class:`RedScheduler` and
:class:`OracleScheduler` in lockstep and compares their cycle outputs.
Alongside the comparison it audits the machine's internal state every
cycle: register prefix sums, the stabilization property, the two-cycle
phase contract, conservation of accepted processes, and the exact
restoration of both queues after a failed reclaim.
"""

from __future__ import annotations

import multiprocessing
from collections import Counter, deque
from dataclasses import dataclass, field, replace
from typing import Callable, List, NamedTuple, Optional, Sequence

from .core import TERMINAL_KINDS, EventKind, SchedulerConfig
from .oracle import OracleScheduler, edf_feasible
from .scheduler import PhaseKind, RedScheduler, feed
from .workload import WorkloadParams, generate, preset

DEFAULT_CAPACITIES = (8, 16, 64)


def episode_seed(base_seed: int, index: int) -> int:
    return (base_seed << 20) + index


@dataclass
class Divergence:
    seed: int
    capacity: int
    cycle: int
    reason: str
    machine: dict
    oracle: dict

    def __str__(self) -> str:
        return (
            f"divergence seed={self.seed} capacity={self.capacity} cycle={self.cycle}: "
            f"{self.reason}\n  machine: {self.machine}\n  oracle:  {self.oracle}"
        )


class Violation(NamedTuple):
    """A broken invariant; ``kind`` names the property family."""

    kind: str  # two_cycle, registers, stabilization, reclaim_restore, conservation, limit
    cycle: Optional[int]
    message: str

    def __str__(self) -> str:
        where = f"cycle {self.cycle}: " if self.cycle is not None else ""
        return f"[{self.kind}] {where}{self.message}"


@dataclass
class EpisodeReport:
    seed: int
    capacity: int
    cycles: int = 0
    instructions: int = 0
    divergence: Optional[Divergence] = None
    violations: List[Violation] = field(default_factory=list)
    reclaim_redos_checked: int = 0
    rejections: int = 0
    reclaims: int = 0

    @property
    def ok(self) -> bool:
        return self.divergence is None and not self.violations


class _ReclaimShadow:
    """Queues as they would evolve if a reclaim attempt had not happened."""

    def __init__(self, machine: RedScheduler, target: int) -> None:
        self.target = target
        self.ready = [[c.desc, c.rem_wcet] for c in machine.ready.cells]
        self.reject = [(e.desc, e.rem_wcet) for e in machine.reject.entries]
        self.cycles = 0

    def advance(self, now: int) -> None:
        # the target sits in the ready queue for the last two cycles
        in_transit = self.cycles >= 2
        self.reject = [
            (d, r)
            for d, r in self.reject
            if d.is_non_rt or d.deadline > now or (in_transit and d.id == self.target)
        ]
        if self.ready:
            self.ready[0][1] -= 1
            if self.ready[0][1] == 0:
                self.ready.pop(0)
        self.cycles += 1

    def matches(self, machine: RedScheduler) -> bool:
        ready = [(d.id, r) for d, r in self.ready]
        reject = sorted(((d.id, r) for d, r in self.reject))
        return machine.ready.snapshot() == ready and sorted(machine.reject.snapshot()) == reject


def run_episode(
    seed: int,
    capacity: int = 16,
    ops: int = 500,
    params: Optional[WorkloadParams] = None,
    machine_factory: Callable = RedScheduler,
    oracle_factory: Callable = OracleScheduler,
    cycle_limit: int = 1_000_000,
) -> EpisodeReport:
    config = SchedulerConfig(ready_capacity=capacity)
    base = params if params is not None else preset("uniform")
    p = replace(base, instruction_count=ops, seed=seed, id_space=config.id_space)
    workload = generate(p)
    machine = machine_factory(config)
    oracle = oracle_factory(config)
    report = EpisodeReport(seed, capacity, instructions=len(workload))
    v = report.violations

    def flag(kind: str, cycle: Optional[int], message: str) -> None:
        v.append(Violation(kind, cycle, message))

    pending = deque(workload)
    open_ids: set = set()
    prev_tag = "idle"
    starts = 0
    shadow: Optional[_ReclaimShadow] = None

    while pending or not machine.drained or not oracle.drained:
        now = machine.now
        if now >= cycle_limit:
            flag("limit", now, f"cycle limit {cycle_limit} exceeded")
            break
        machine_busy = machine.phase.kind is not PhaseKind.IDLE
        if machine_busy != oracle.busy:
            report.divergence = Divergence(
                seed, capacity, now, "busy flags differ", machine.snapshot(), oracle.snapshot()
            )
            break
        instr = None
        if pending and not machine_busy and pending[0].issue_cycle <= now:
            instr = pending.popleft()
        if shadow is None and not machine_busy and instr is None and machine._rj:
            shadow = _ReclaimShadow(machine, machine.reject.peek_reclaim().id)
        out = machine.step(instr)
        ref = oracle.step(instr)
        report.cycles += 1

        if out != ref:
            report.divergence = Divergence(
                seed, capacity, now, f"outputs differ: {out} != {ref}", machine.snapshot(), oracle.snapshot()
            )
            break

        # two-cycle contract
        tag = out.phase
        if tag.endswith("/2"):
            if prev_tag.endswith("/2"):
                flag("two_cycle", now, f"{tag} follows unfinished {prev_tag}")
            starts += tag.startswith(("insert", "kill"))
        elif tag.endswith("/1"):
            if prev_tag != tag[:-1] + "2":
                flag("two_cycle", now, f"{tag} without its first cycle")
        elif prev_tag.endswith("/2"):
            flag("two_cycle", now, f"{prev_tag} lasted one cycle")
        if out.busy != (tag != "idle"):
            flag("two_cycle", now, f"busy flag disagrees with phase {tag}")
        prev_tag = tag

        # conservation; queue membership only changes on event cycles
        ready_cells = machine.ready._c
        if out.events or len(machine.live_ids) != len(ready_cells) + len(machine._rj):
            for ev in out.events:
                if ev.kind is EventKind.ACCEPTED:
                    if ev.id in open_ids:
                        flag("conservation", now, f"id {ev.id} accepted twice")
                    open_ids.add(ev.id)
                elif ev.kind in TERMINAL_KINDS:
                    if ev.id not in open_ids:
                        flag("conservation", now, f"{ev} for a process that is not live")
                    open_ids.discard(ev.id)
                elif ev.kind is EventKind.REJECTED:
                    report.rejections += 1
                elif ev.kind is EventKind.RECLAIMED:
                    report.reclaims += 1
            in_ready = set(machine.ready.ids())
            in_reject = set(machine.reject.ids())
            queued = in_ready | in_reject
            if machine.live_ids != queued or open_ids != queued:
                flag("conservation", now, f"live ids {sorted(machine.live_ids)} != queues {sorted(queued)}")
            if in_ready & in_reject:
                flag("conservation", now, "a process sits in both queues")

        # registers, overload bits and stabilization, recomputed from scratch
        t = machine.now
        total = 0
        last_deadline = -1
        overloaded = False
        for c in ready_cells:
            d = c.desc
            total += c.rem_wcet
            if c.cum_exec != total or not 0 < c.rem_wcet <= d.wcet or d.deadline < last_deadline:
                flag("registers", now, f"execution-time registers inconsistent: {machine.ready!r}")
                break
            last_deadline = d.deadline
            bit = t + total > d.deadline
            if c.overload != bit:
                flag("registers", now, f"stale overload bit on {d.id}")
                break
            overloaded |= bit
        if overloaded and machine.phase.kind is PhaseKind.IDLE:
            flag("stabilization", now, "overloaded while idle")

        # reclaim restoration
        if shadow is not None:
            if shadow.cycles == 0 and tag != "reclaim/2":
                shadow = None
            else:
                if shadow.cycles == 0:
                    # the pre-step head may have expired this very cycle
                    shadow.target = machine.phase.target
                shadow.advance(now)
                if any(e.kind is EventKind.RECLAIM_REDONE for e in out.events):
                    report.reclaim_redos_checked += 1
                    if not shadow.matches(machine):
                        flag("reclaim_restore", now, f"failed reclaim of {shadow.target} did not restore queues")
                    shadow = None
                elif tag == "reclaim/1" and machine.phase.kind is not PhaseKind.REDO:
                    shadow = None

        if v:
            break

    if report.divergence is None and not v:
        if machine.snapshot() != oracle.snapshot():
            report.divergence = Divergence(
                seed, capacity, machine.now, "final states differ", machine.snapshot(), oracle.snapshot()
            )
        if starts != len(workload):
            flag("two_cycle", None, f"{len(workload)} instructions but {starts} instruction phases")
        if open_ids:
            flag("conservation", None, f"processes never terminated: {sorted(open_ids)}")
    return report


@dataclass
class FuzzSummary:
    episodes: int = 0
    cycles: int = 0
    reclaim_redos_checked: int = 0
    rejections: int = 0
    reclaims: int = 0
    divergences: int = 0
    violations: Counter = field(default_factory=Counter)  # kind -> count
    failures: List[EpisodeReport] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def add(self, r: EpisodeReport) -> None:
        self.episodes += 1
        self.cycles += r.cycles
        self.reclaim_redos_checked += r.reclaim_redos_checked
        self.rejections += r.rejections
        self.reclaims += r.reclaims
        self.divergences += r.divergence is not None
        self.violations.update(x.kind for x in r.violations)
        if not r.ok:
            self.failures.append(r)


def _episode_job(args) -> EpisodeReport:
    seed, capacity, ops, params = args
    return run_episode(seed, capacity, ops, params)


def fuzz(
    episodes: int,
    ops: int = 500,
    seed: int = 0,
    capacities: Sequence[int] = DEFAULT_CAPACITIES,
    jobs: int = 1,
    params: Optional[WorkloadParams] = None,
) -> FuzzSummary:
    """Run ``episodes`` lockstep episodes, cycling through ``capacities``.

    Episode ``i`` uses seed ``episode_seed(seed, i)`` regardless of
    ``jobs``, so results do not depend on the degree of parallelism.
    """
    tasks = [
        (episode_seed(seed, i), capacities[i % len(capacities)], ops, params) for i in range(episodes)
    ]
    summary = FuzzSummary()
    if jobs > 1 and episodes > 1:
        with multiprocessing.Pool(jobs) as pool:
            for r in pool.imap(_episode_job, tasks, chunksize=16):
                summary.add(r)
    else:
        for task in tasks:
            summary.add(_episode_job(task))
    return summary


def hard_subset_feasible(workload, config: SchedulerConfig) -> bool:
    """Replay ``workload`` on the machine; check the hard-RT subset.

    True iff, right after every instruction takes effect, the
    criticality-3 processes in the ready queue are EDF-feasible on their
    own.
    """
    machine = RedScheduler(config)
    for out in feed(machine, workload):
        if out.phase in ("insert/1", "kill/1"):
            jobs = [(c.desc.deadline, c.rem_wcet) for c in machine.ready.cells if c.desc.is_hard]
            if not edf_feasible(jobs, machine.now):
                return False
    return True
