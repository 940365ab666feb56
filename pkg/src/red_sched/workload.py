"""Instruction-stream generation and JSONL persistence."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, replace
from typing import IO, Iterable, List, Optional, Sequence, Tuple, Union

from .core import (
    DEADLINE_SENTINEL,
    SUB_PRIORITY_LEVELS,
    Criticality,
    Insert,
    Instruction,
    Kill,
    Process,
)


@dataclass(frozen=True)
class WorkloadParams:
    """Knobs of the pseudo-random instruction generator.

    Each inserted process gets ``deadline = issue + wcet + slack`` with
    ``slack`` drawn from ``slack_range``; criticality-0 processes become
    non-RT (sentinel deadline) with probability ``non_rt_fraction``.
    ``id_space`` bounds the ids in use; when it is exhausted a kill is
    generated instead of an insert.
    """

    instruction_count: int = 500
    insert_ratio: float = 0.5
    slack_range: Tuple[int, int] = (0, 128)
    wcet_range: Tuple[int, int] = (1, 32)
    criticality_weights: Tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0)
    sub_priority_range: Tuple[int, int] = (0, SUB_PRIORITY_LEVELS - 1)
    inter_arrival: Tuple[int, int] = (1, 5)
    non_rt_fraction: float = 0.25
    id_space: Optional[int] = None
    seed: int = 0

    def check(self) -> None:
        def _range(name, lo_min=0, hi_max=None):
            lo, hi = getattr(self, name)
            if lo > hi or lo < lo_min or (hi_max is not None and hi > hi_max):
                raise ValueError(f"invalid {name}: {(lo, hi)}")

        if self.instruction_count < 0:
            raise ValueError("instruction_count must be >= 0")
        if not 0.0 <= self.insert_ratio <= 1.0:
            raise ValueError("insert_ratio must lie in [0, 1]")
        if not 0.0 <= self.non_rt_fraction <= 1.0:
            raise ValueError("non_rt_fraction must lie in [0, 1]")
        _range("slack_range")
        _range("wcet_range", lo_min=1)
        _range("sub_priority_range", hi_max=SUB_PRIORITY_LEVELS - 1)
        _range("inter_arrival")
        w = self.criticality_weights
        if len(w) != 4 or min(w) < 0 or sum(w) <= 0:
            raise ValueError("criticality_weights needs 4 non-negative weights")
        if self.id_space is not None and self.id_space < 1:
            raise ValueError("id_space must be >= 1")


PRESETS = {
    "uniform": WorkloadParams(),
    # tight slack, mostly soft processes: rejections without hard overloads
    "overload_stress": WorkloadParams(
        slack_range=(0, 64),
        wcet_range=(8, 32),
        criticality_weights=(3.0, 3.0, 3.0, 1.0),
        inter_arrival=(2, 6),
    ),
    # kills outnumber inserts, freeing slack that rejected work can reuse
    "reclaim_heavy": WorkloadParams(
        insert_ratio=0.4,
        slack_range=(0, 32),
        wcet_range=(16, 48),
        criticality_weights=(3.0, 3.0, 3.0, 1.0),
        inter_arrival=(2, 8),
    ),
    # long deadlines keep processes live until the ready queue overflows
    "capacity_pressure": WorkloadParams(
        insert_ratio=0.8,
        slack_range=(400, 1200),
        wcet_range=(16, 64),
        inter_arrival=(0, 2),
    ),
}


def preset(name: str, **overrides) -> WorkloadParams:
    try:
        params = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return replace(params, **overrides) if overrides else params


def generate(params: WorkloadParams) -> List[Instruction]:
    """Deterministic pseudo-random stream; a pure function of ``params``."""
    params.check()
    rng = random.Random(params.seed)
    live: List[int] = []
    live_set = set()
    out: List[Instruction] = []
    t = 0
    crits = list(Criticality)
    for _ in range(params.instruction_count):
        t += rng.randint(*params.inter_arrival)
        insert = rng.random() < params.insert_ratio
        if not live:
            insert = True
        elif params.id_space is not None and len(live) >= params.id_space:
            insert = False
        if not insert:
            pid = rng.choice(live)
            live.remove(pid)
            live_set.discard(pid)
            out.append(Instruction(t, Kill(pid)))
            continue
        pid = 0
        while pid in live_set:
            pid += 1
        crit = rng.choices(crits, weights=params.criticality_weights)[0]
        wcet = rng.randint(*params.wcet_range)
        slack = rng.randint(*params.slack_range)
        deadline = t + wcet + slack
        sub = 0
        if crit == Criticality.LOW:
            sub = rng.randint(*params.sub_priority_range)
            if rng.random() < params.non_rt_fraction:
                deadline = DEADLINE_SENTINEL
        live.append(pid)
        live_set.add(pid)
        out.append(Instruction(t, Insert(Process(pid, deadline, wcet, crit, sub))))
    return out


class WorkloadFormatError(ValueError):
    def __init__(self, line: int, message: str, field: Optional[str] = None) -> None:
        self.line = line
        self.field = field
        where = f"line {line}" + (f", field {field!r}" if field else "")
        super().__init__(f"{where}: {message}")


def _encode(ins: Instruction) -> dict:
    if isinstance(ins.op, Kill):
        return {"t": ins.issue_cycle, "op": "kill", "id": ins.op.id}
    d = ins.op.process
    return {
        "t": ins.issue_cycle,
        "op": "insert",
        "id": d.id,
        "deadline": d.deadline,
        "wcet": d.wcet,
        "crit": int(d.criticality),
        "prio": d.sub_priority,
    }


def _int_field(obj: dict, name: str, lineno: int, lo: int, hi: Optional[int] = None) -> int:
    if name not in obj:
        raise WorkloadFormatError(lineno, "missing field", name)
    v = obj[name]
    if not isinstance(v, int) or isinstance(v, bool):
        raise WorkloadFormatError(lineno, f"expected integer, got {v!r}", name)
    if v < lo or (hi is not None and v > hi):
        bound = f"[{lo}, {hi}]" if hi is not None else f">= {lo}"
        raise WorkloadFormatError(lineno, f"value {v} outside {bound}", name)
    return v


def _decode(obj, lineno: int, id_space: Optional[int]) -> Instruction:
    if not isinstance(obj, dict):
        raise WorkloadFormatError(lineno, "expected a JSON object")
    t = _int_field(obj, "t", lineno, 0)
    pid = _int_field(obj, "id", lineno, 0, None if id_space is None else id_space - 1)
    op = obj.get("op")
    if op == "kill":
        return Instruction(t, Kill(pid))
    if op != "insert":
        raise WorkloadFormatError(lineno, f"unknown op {op!r}", "op")
    wcet = _int_field(obj, "wcet", lineno, 1)
    deadline = _int_field(obj, "deadline", lineno, 0, DEADLINE_SENTINEL)
    crit = _int_field(obj, "crit", lineno, 0, 3)
    prio = _int_field(obj, "prio", lineno, 0, SUB_PRIORITY_LEVELS - 1)
    if crit != 0 and prio != 0:
        raise WorkloadFormatError(lineno, "must be 0 unless crit is 0", "prio")
    return Instruction(t, Insert(Process(pid, deadline, wcet, Criticality(crit), prio)))


def dumps_jsonl(stream: Iterable[Instruction]) -> str:
    return "".join(json.dumps(_encode(i), separators=(",", ":")) + "\n" for i in stream)


def loads_jsonl(text: str, id_space: Optional[int] = None) -> List[Instruction]:
    out = []
    last_t = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise WorkloadFormatError(lineno, f"invalid JSON ({e.msg})") from None
        ins = _decode(obj, lineno, id_space)
        if ins.issue_cycle < last_t:
            raise WorkloadFormatError(lineno, "issue cycles must be nondecreasing", "t")
        last_t = ins.issue_cycle
        out.append(ins)
    return out


def save_jsonl(stream: Sequence[Instruction], path: Union[str, IO[str]]) -> None:
    if isinstance(path, str):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(dumps_jsonl(stream))
    else:
        path.write(dumps_jsonl(stream))


def load_jsonl(path: Union[str, IO[str]], id_space: Optional[int] = None) -> List[Instruction]:
    if isinstance(path, str):
        with open(path, encoding="utf-8") as fh:
            return loads_jsonl(fh.read(), id_space)
    return loads_jsonl(path.read(), id_space)
