"""Cycle-level model of a RED (Robust Earliest Deadline) scheduler coprocessor."""

from .core import (
    DEADLINE_SENTINEL,
    Criticality,
    CycleOutput,
    Event,
    EventKind,
    Insert,
    Instruction,
    Kill,
    Process,
    SchedulerConfig,
    edf_key,
    reject_key,
    validate,
)
from .metrics import RunMetrics
from .oracle import EdfScheduler, OracleScheduler, check_victim, edf_feasible
from .ready_queue import OverloadReport, ReadyQueue
from .reject_queue import RejectQueue
from .scheduler import RedScheduler, run
from .shift_queue import Direction, ShiftQueue
from .workload import WorkloadParams, generate, load_jsonl, preset, save_jsonl

__version__ = "0.1.0"
