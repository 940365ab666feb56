"""MAX-ordered queue of temporarily rejected processes."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

from .core import Criticality, HardRtRejectedError, Process, reject_key
from .shift_queue import Direction, ShiftQueue


@dataclass(frozen=True, slots=True)
class RejectEntry:
    desc: Process
    rem_wcet: int  # progress made before rejection is kept

    @property
    def id(self) -> int:
        return self.desc.id


def _entry_key(e: RejectEntry) -> tuple:
    return reject_key(e.desc)


class RejectQueue:
    def __init__(self, capacity: int) -> None:
        self.entries: ShiftQueue[RejectEntry] = ShiftQueue(capacity, _entry_key, Direction.MAX)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, pid: int) -> bool:
        return pid in self.entries

    def ids(self) -> List[int]:
        return [e.desc.id for e in self.entries]

    def insert(self, d: Process, rem_wcet: Optional[int] = None) -> Optional[RejectEntry]:
        """Insert and return whatever fell off the tail, if anything."""
        if d.criticality == Criticality.HARD:
            raise HardRtRejectedError(d.id)
        entry = RejectEntry(d, d.wcet if rem_wcet is None else rem_wcet)
        _, dropped = self.entries.insert(entry)
        return dropped

    def peek_reclaim(self) -> Optional[RejectEntry]:
        return self.entries.head()

    def remove(self, pid: int) -> Optional[RejectEntry]:
        return self.entries.remove_by_id(pid)

    def purge_expired(self, now: int) -> List[RejectEntry]:
        """Drop every entry whose deadline is at or before ``now``.

        Sentinel-deadline (non-RT) entries never expire.
        """
        expired = [
            e for e in self.entries._cells if e.desc.deadline <= now and not e.desc.is_non_rt
        ]
        for e in expired:
            self.entries.remove_by_id(e.desc.id)
        return expired

    def snapshot(self) -> List[tuple]:
        return [(e.desc.id, e.rem_wcet) for e in self.entries]

    def __repr__(self) -> str:
        return f"RejectQueue{self.ids()}"
