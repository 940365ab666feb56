"""Domain types, ordering keys and validation shared by the scheduler models."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import List, NamedTuple, Optional, Tuple, Union

#: Largest representable deadline. Non-real-time processes carry it.
DEADLINE_SENTINEL = 2**32 - 1

SUB_PRIORITY_LEVELS = 1024


class Criticality(IntEnum):
    """Two-bit criticality code. Higher value means more critical."""

    LOW = 0  # "00": non-RT, or soft RT of low priority
    MEDIUM = 1  # "01": soft RT, medium priority
    HIGH = 2  # "10": soft RT, high priority
    HARD = 3  # "11": hard RT (safety-critical)

    @property
    def code(self) -> str:
        return format(int(self), "02b")


@dataclass(frozen=True, slots=True)
class Process:
    """A process descriptor as carried on the instruction bus."""

    id: int
    deadline: int
    wcet: int
    criticality: Criticality = Criticality.LOW
    sub_priority: int = 0

    def __post_init__(self) -> None:
        if not isinstance(self.criticality, Criticality):
            object.__setattr__(self, "criticality", Criticality(self.criticality))

    @property
    def is_hard(self) -> bool:
        return self.criticality == Criticality.HARD

    @property
    def is_non_rt(self) -> bool:
        return self.deadline >= DEADLINE_SENTINEL

    @property
    def level(self) -> int:
        """Flat index into the 1028 criticality/priority levels.

        Levels 0..1023 are the sub-priorities of non-RT processes;
        1024..1027 are the four criticalities of real-time processes.
        """
        if self.is_non_rt:
            return self.sub_priority
        return SUB_PRIORITY_LEVELS + int(self.criticality)


@dataclass(frozen=True, slots=True)
class Insert:
    process: Process


@dataclass(frozen=True, slots=True)
class Kill:
    id: int


Op = Union[Insert, Kill]


@dataclass(frozen=True, slots=True)
class Instruction:
    issue_cycle: int
    op: Op

    @classmethod
    def insert(cls, issue_cycle: int, process: Process) -> "Instruction":
        return cls(issue_cycle, Insert(process))

    @classmethod
    def kill(cls, issue_cycle: int, pid: int) -> "Instruction":
        return cls(issue_cycle, Kill(pid))


@dataclass(frozen=True)
class SchedulerConfig:
    ready_capacity: int = 16
    reject_capacity: Optional[int] = None  # defaults to ready_capacity
    deadline_sentinel: int = DEADLINE_SENTINEL

    def __post_init__(self) -> None:
        if self.reject_capacity is None:
            object.__setattr__(self, "reject_capacity", self.ready_capacity)
        if self.ready_capacity < 1 or self.reject_capacity < 1:
            raise ValueError("queue capacities must be >= 1")

    @property
    def id_bits(self) -> int:
        """Fewest bits able to name every process the two queues can hold."""
        return max(1, math.ceil(math.log2(self.ready_capacity + self.reject_capacity)))

    @property
    def id_space(self) -> int:
        return 1 << self.id_bits


class EventKind(str, Enum):
    ACCEPTED = "accepted"
    REJECTED = "rejected"
    RECLAIMED = "reclaimed"
    RECLAIM_REDONE = "reclaim_redone"
    KILLED = "killed"
    COMPLETED = "completed"
    DEADLINE_MISS = "deadline_miss"
    EXPIRED_PURGED = "expired_purged"
    CAPACITY_DROP = "capacity_drop"
    HARD_OVERLOAD = "hard_overload"
    DUPLICATE_ID_IGNORED = "duplicate_id_ignored"
    UNKNOWN_ID_IGNORED = "unknown_id_ignored"


#: Kinds that end the life of an accepted process. Exactly one per process.
TERMINAL_KINDS = frozenset(
    {
        EventKind.COMPLETED,
        EventKind.KILLED,
        EventKind.EXPIRED_PURGED,
        EventKind.CAPACITY_DROP,
        EventKind.HARD_OVERLOAD,
    }
)


class Event(NamedTuple):
    cycle: int
    kind: EventKind
    id: Optional[int] = None
    criticality: Optional[int] = None

    def __str__(self) -> str:
        if self.id is None:
            return self.kind.value
        if self.criticality is None:
            return f"{self.kind.value}:{self.id}"
        return f"{self.kind.value}:{self.id}/{self.criticality}"


class CycleOutput(NamedTuple):
    """Observable outputs of one clock cycle."""

    cycle: int
    process_to_run: Optional[int]
    busy: bool
    phase: str
    events: Tuple[Event, ...] = ()


class DuplicateIdError(ValueError):
    pass


class HardRtRejectedError(ValueError):
    """A hard real-time process was offered to the reject queue."""


class InstructionWhileBusyError(RuntimeError):
    pass


class CycleLimitExceeded(RuntimeError):
    pass


def edf_key(d: Process) -> int:
    """Ready-queue key: earlier deadline first.

    Equal deadlines keep insertion order; the shift queue inserts a new
    element after every element with an equal key.
    """
    return d.deadline


def reject_key(d: Process) -> tuple:
    """Reject-queue key, largest first.

    Criticality, then deadline, then sub-priority; a lower id wins any
    remaining tie, which makes the order strict.
    """
    return (int(d.criticality), d.deadline, d.sub_priority, -d.id)


def validate(d: Process, cfg: Optional[SchedulerConfig] = None) -> List[str]:
    """Return every invariant the descriptor violates (empty if valid)."""
    problems = []
    if d.wcet < 1:
        problems.append("wcet >= 1")
    if d.id < 0:
        problems.append("id >= 0")
    if d.deadline < 0:
        problems.append("deadline >= 0")
    sentinel = cfg.deadline_sentinel if cfg is not None else DEADLINE_SENTINEL
    if d.deadline > sentinel:
        problems.append(f"deadline <= {sentinel}")
    if not 0 <= d.sub_priority < SUB_PRIORITY_LEVELS:
        problems.append(f"sub_priority < {SUB_PRIORITY_LEVELS}")
    if d.criticality != Criticality.LOW and d.sub_priority != 0:
        problems.append("sub_priority == 0 when criticality > 0")
    if cfg is not None and d.id >= cfg.id_space:
        problems.append(f"id fits in {cfg.id_bits} bits")
    return problems
