"""Functional model of the shift-register priority queue.

Each cell holds one element and compares its key against the element on
the shared bus. An insert lands in the first cell whose occupant is
strictly worse; that cell and everything behind it shift one place toward
the tail. A full queue loses its tail element.
"""

from __future__ import annotations

from enum import Enum
from typing import Any, Callable, Generic, List, Optional, Tuple, TypeVar

from .core import DuplicateIdError, edf_key

T = TypeVar("T")


class Direction(Enum):
    MIN = "min"
    MAX = "max"


class ShiftQueue(Generic[T]):
    """Capacity-bounded sorted cell array.

    Elements only need an ``id`` attribute. Position 0 is the head: the
    smallest key for a MIN queue, the largest for a MAX queue.
    """

    __slots__ = ("capacity", "direction", "key", "_cells", "_keys")

    def __init__(
        self,
        capacity: int,
        key: Callable[[T], Any] = edf_key,
        direction: Direction = Direction.MIN,
    ) -> None:
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.direction = direction
        self.key = key
        self._cells: List[T] = []
        self._keys: List[Any] = []

    def _worse(self, occupant_key: Any, new_key: Any) -> bool:
        if self.direction is Direction.MIN:
            return occupant_key > new_key
        return occupant_key < new_key

    def insert(self, item: T) -> Tuple[int, Optional[T]]:
        """Insert ``item``; return ``(position, displaced)``.

        ``position`` equals ``capacity`` when the item itself fell off the
        end of a full queue (then ``displaced is item``).
        """
        if self.index(item.id) is not None:
            raise DuplicateIdError(item.id)
        k = self.key(item)
        pos = len(self._cells)
        for i, ck in enumerate(self._keys):
            if self._worse(ck, k):
                pos = i
                break
        self._cells.insert(pos, item)
        self._keys.insert(pos, k)
        displaced = None
        if len(self._cells) > self.capacity:
            displaced = self._cells.pop()
            self._keys.pop()
        return pos, displaced

    def index(self, pid: int) -> Optional[int]:
        for i, c in enumerate(self._cells):
            if c.id == pid:
                return i
        return None

    def remove_by_id(self, pid: int) -> Optional[T]:
        i = self.index(pid)
        if i is None:
            return None
        del self._keys[i]
        return self._cells.pop(i)

    def pop_at(self, pos: int) -> T:
        del self._keys[pos]
        return self._cells.pop(pos)

    def head(self) -> Optional[T]:
        return self._cells[0] if self._cells else None

    def snapshot(self) -> List[T]:
        return list(self._cells)

    def full(self) -> bool:
        return len(self._cells) >= self.capacity

    def __len__(self) -> int:
        return len(self._cells)

    def __iter__(self):
        return iter(self._cells)

    def __getitem__(self, pos: int) -> T:
        return self._cells[pos]

    def __contains__(self, pid: int) -> bool:
        return self.index(pid) is not None

    def __repr__(self) -> str:
        return f"ShiftQueue({self.direction.value}, {self._cells!r})"
