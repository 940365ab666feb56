"""Aggregate statistics and trace serialization."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from typing import IO, Iterable, List, Sequence, Union

from .core import CycleOutput, EventKind

TRACE_HEADER = ("cycle", "process_to_run", "busy", "phase", "events")


@dataclass
class RunMetrics:
    total_cycles: int = 0
    busy_cycles: int = 0
    utilization: float = 0.0
    misses_by_criticality: List[int] = field(default_factory=lambda: [0, 0, 0, 0])
    accepted: int = 0
    rejections: int = 0
    reclaims: int = 0
    reclaim_redos: int = 0
    capacity_drops: int = 0
    hard_overloads: int = 0
    completed: int = 0
    killed: int = 0
    expired: int = 0
    duplicates_ignored: int = 0
    unknown_ignored: int = 0

    @classmethod
    def from_trace(cls, trace: Sequence[CycleOutput]) -> "RunMetrics":
        m = cls()
        running = 0
        counters = {
            EventKind.ACCEPTED: "accepted",
            EventKind.REJECTED: "rejections",
            EventKind.RECLAIMED: "reclaims",
            EventKind.RECLAIM_REDONE: "reclaim_redos",
            EventKind.CAPACITY_DROP: "capacity_drops",
            EventKind.HARD_OVERLOAD: "hard_overloads",
            EventKind.COMPLETED: "completed",
            EventKind.KILLED: "killed",
            EventKind.EXPIRED_PURGED: "expired",
            EventKind.DUPLICATE_ID_IGNORED: "duplicates_ignored",
            EventKind.UNKNOWN_ID_IGNORED: "unknown_ignored",
        }
        for out in trace:
            m.total_cycles += 1
            m.busy_cycles += out.busy
            running += out.process_to_run is not None
            for ev in out.events:
                if ev.kind is EventKind.DEADLINE_MISS:
                    m.misses_by_criticality[ev.criticality] += 1
                else:
                    name = counters[ev.kind]
                    setattr(m, name, getattr(m, name) + 1)
        m.utilization = running / m.total_cycles if m.total_cycles else 0.0
        return m

    @property
    def terminated(self) -> int:
        return self.completed + self.killed + self.expired + self.capacity_drops + self.hard_overloads

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def trace_rows(trace: Iterable[CycleOutput]):
    for out in trace:
        yield (
            out.cycle,
            "" if out.process_to_run is None else out.process_to_run,
            int(out.busy),
            out.phase,
            ";".join(str(e) for e in out.events),
        )


def write_trace_csv(trace: Iterable[CycleOutput], dest: Union[str, IO[str]]) -> None:
    if isinstance(dest, str):
        with open(dest, "w", newline="", encoding="utf-8") as fh:
            write_trace_csv(trace, fh)
        return
    w = csv.writer(dest, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    w.writerows(trace_rows(trace))


def trace_csv(trace: Iterable[CycleOutput]) -> str:
    buf = io.StringIO()
    write_trace_csv(trace, buf)
    return buf.getvalue()
