"""Task records, trace ingestion, origin assignment, and synthetic trace generation.

The canonical trace format is line-delimited JSON, one task per line, grouped on
load into 15-minute arrival intervals. Resource demands are absolute units
(cores, GPU units, GB). Tasks shorter than 15 minutes are rejected because the
simulation cannot resolve them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from datetime import datetime, timedelta, timezone
from enum import Enum

import numpy as np

from .errors import DataError

INTERVAL = timedelta(minutes=15)
MIN_DURATION_MIN = 15.0
DEFAULT_SLA_MULTIPLIER = 1.5

BUSINESS_HOURS = range(8, 20)
OFF_HOURS_ACTIVITY = 0.3


class TaskStatus(Enum):
    PENDING = "pending"
    DEFERRED = "deferred"
    IN_TRANSIT = "in_transit"
    RUNNING = "running"
    COMPLETED = "completed"


_ALLOWED_TRANSITIONS = {
    TaskStatus.PENDING: {TaskStatus.DEFERRED, TaskStatus.IN_TRANSIT, TaskStatus.RUNNING},
    TaskStatus.DEFERRED: {TaskStatus.PENDING},
    TaskStatus.IN_TRANSIT: {TaskStatus.PENDING},
    TaskStatus.RUNNING: {TaskStatus.COMPLETED},
    TaskStatus.COMPLETED: set(),
}


def _require_utc(dt: datetime, what: str) -> datetime:
    if dt.tzinfo is None:
        raise ValueError(f"{what} must be timezone-aware UTC")
    return dt.astimezone(timezone.utc)


@dataclass
class Task:
    """One schedulable job: resource demands, origin, SLA state, lifecycle status."""

    job_id: str
    arrival_time: datetime
    duration_min: float
    cores_req: float
    gpu_req: float
    mem_req: float
    bandwidth_gb: float
    sla_multiplier: float = DEFAULT_SLA_MULTIPLIER
    origin_dc_id: int | None = None
    sla_deadline: datetime | None = None
    dest_dc_id: int | None = None
    status: TaskStatus = TaskStatus.PENDING
    start_exec_time: datetime | None = None
    completion_time: datetime | None = None

    def __post_init__(self):
        self.arrival_time = _require_utc(self.arrival_time, "arrival_time")
        if (
            self.arrival_time.minute % 15
            or self.arrival_time.second
            or self.arrival_time.microsecond
        ):
            raise ValueError(
                f"task {self.job_id}: arrival_time {self.arrival_time.isoformat()} "
                "is not aligned to the 15-minute grid"
            )
        if self.duration_min < MIN_DURATION_MIN:
            raise ValueError(
                f"task {self.job_id}: duration {self.duration_min} min is below the "
                f"{MIN_DURATION_MIN:.0f}-minute floor"
            )
        for name in ("cores_req", "gpu_req", "mem_req", "bandwidth_gb"):
            if getattr(self, name) < 0:
                raise ValueError(f"task {self.job_id}: {name} must be >= 0")
        if self.sla_multiplier < 1.0:
            raise ValueError(f"task {self.job_id}: sla_multiplier must be >= 1")
        if self.sla_deadline is None:
            self.sla_deadline = compute_sla_deadline(self)
        else:
            self.sla_deadline = _require_utc(self.sla_deadline, "sla_deadline")
            if self.sla_deadline <= self.arrival_time:
                raise ValueError(f"task {self.job_id}: sla_deadline must be after arrival")

    def set_status(self, new: TaskStatus) -> None:
        if new not in _ALLOWED_TRANSITIONS[self.status]:
            raise ValueError(
                f"task {self.job_id}: illegal status transition "
                f"{self.status.value} -> {new.value}"
            )
        self.status = new


def compute_sla_deadline(task: Task) -> datetime:
    """Deadline rule: arrival + sla_multiplier * duration."""
    if task.duration_min <= 0:
        raise ValueError("duration must be positive")
    if task.sla_multiplier < 1.0:
        raise ValueError("sla_multiplier must be >= 1")
    return task.arrival_time + timedelta(minutes=task.sla_multiplier * task.duration_min)


@dataclass
class TraceInterval:
    """All tasks arriving during one 15-minute slot."""

    interval_start: datetime
    tasks: list[Task] = field(default_factory=list)

    def __post_init__(self):
        self.interval_start = _require_utc(self.interval_start, "interval_start")
        for t in self.tasks:
            if t.arrival_time != self.interval_start:
                raise ValueError(
                    f"task {t.job_id} arrival {t.arrival_time.isoformat()} does not "
                    f"match interval start {self.interval_start.isoformat()}"
                )


_TRACE_FIELDS = (
    "job_id",
    "arrival_time",
    "duration_min",
    "cores_req",
    "gpu_req",
    "mem_req",
    "bandwidth_gb",
    "sla_multiplier",
    "origin_dc_id",
)


def load_trace(path) -> list[TraceInterval]:
    """Load a JSONL trace, grouping tasks into time-sorted 15-minute intervals."""
    buckets: dict[datetime, list[Task]] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"line {lineno}: invalid JSON") from exc
            try:
                task = Task(
                    job_id=str(rec["job_id"]),
                    arrival_time=datetime.fromisoformat(rec["arrival_time"]),
                    duration_min=float(rec["duration_min"]),
                    cores_req=float(rec["cores_req"]),
                    gpu_req=float(rec["gpu_req"]),
                    mem_req=float(rec["mem_req"]),
                    bandwidth_gb=float(rec["bandwidth_gb"]),
                    sla_multiplier=float(rec.get("sla_multiplier", DEFAULT_SLA_MULTIPLIER)),
                    origin_dc_id=rec.get("origin_dc_id"),
                )
            except KeyError as exc:
                raise DataError(f"line {lineno}: missing field {exc.args[0]!r}") from exc
            except ValueError as exc:
                raise DataError(f"line {lineno}: {exc}") from exc
            buckets.setdefault(task.arrival_time, []).append(task)
    return [TraceInterval(start, tasks) for start, tasks in sorted(buckets.items())]


def save_trace(intervals: list[TraceInterval], path) -> None:
    """Write intervals back to the JSONL trace format (lifecycle state excluded)."""
    with open(path, "w") as fh:
        for interval in intervals:
            for t in interval.tasks:
                rec = {k: v for k, v in asdict(t).items() if k in _TRACE_FIELDS}
                rec["arrival_time"] = t.arrival_time.isoformat()
                fh.write(json.dumps(rec) + "\n")


def origin_probabilities(dcs, utc_now: datetime) -> np.ndarray:
    """Normalized origin-sampling distribution over data centers.

    ``dcs`` is a sequence of (dc_id, timezone_shift_h, population_weight). Each
    site's score is its population weight scaled by an activity factor of 1.0
    during local business hours (08-20) and 0.3 otherwise.
    """
    if not dcs:
        raise ValueError("at least one data center is required")
    utc_now = _require_utc(utc_now, "utc_now")
    scores = []
    for dc_id, shift_h, weight in dcs:
        if weight <= 0:
            raise ValueError(f"dc {dc_id}: population_weight must be > 0")
        local_hour = (utc_now + timedelta(hours=shift_h)).hour
        activity = 1.0 if local_hour in BUSINESS_HOURS else OFF_HOURS_ACTIVITY
        scores.append(weight * activity)
    scores = np.asarray(scores, dtype=np.float64)
    return scores / scores.sum()


def assign_task_origins(tasks, dcs, utc_now: datetime, rng: np.random.Generator) -> None:
    """Sample an origin dc_id for every task from the activity-weighted distribution."""
    probs = origin_probabilities(dcs, utc_now)
    if not tasks:
        return
    ids = np.array([dc[0] for dc in dcs])
    draws = rng.choice(ids, size=len(tasks), p=probs)
    for task, dc_id in zip(tasks, draws):
        task.origin_dc_id = int(dc_id)


@dataclass(frozen=True)
class ResourceRanges:
    """Uniform sampling ranges for synthetic task generation (inclusive bounds)."""

    duration_min: tuple[float, float] = (15.0, 180.0)
    cores_req: tuple[float, float] = (1.0, 32.0)
    gpu_req: tuple[float, float] = (0.0, 4.0)
    mem_req: tuple[float, float] = (2.0, 64.0)
    bandwidth_gb: tuple[float, float] = (0.05, 2.0)
    sla_multiplier: tuple[float, float] = (1.5, 1.5)

    def __post_init__(self):
        for name in ("duration_min", "cores_req", "gpu_req", "mem_req", "bandwidth_gb", "sla_multiplier"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name}: lower bound {lo} exceeds upper bound {hi}")
        if self.duration_min[0] < MIN_DURATION_MIN:
            raise ValueError(f"duration_min range must start at >= {MIN_DURATION_MIN:.0f}")
        if self.sla_multiplier[0] < 1.0:
            raise ValueError("sla_multiplier range must start at >= 1")
        for name in ("cores_req", "gpu_req", "mem_req", "bandwidth_gb"):
            if getattr(self, name)[0] < 0:
                raise ValueError(f"{name} range must be nonnegative")


def generate_synthetic_trace(
    start: datetime,
    num_intervals: int,
    mean_tasks_per_interval: float,
    ranges: ResourceRanges,
    seed: int,
) -> list[TraceInterval]:
    """Seeded synthetic trace: Poisson arrivals per interval, uniform resource draws.

    Origins are left unassigned (``origin_dc_id=None``) so the environment can
    apply its probabilistic origin model.
    """
    if mean_tasks_per_interval < 0:
        raise ValueError("mean_tasks_per_interval must be >= 0")
    start = _require_utc(start, "start")
    if start.minute % 15 or start.second or start.microsecond:
        raise ValueError("start must be aligned to the 15-minute grid")
    rng = np.random.default_rng(seed)
    intervals = []
    job_counter = 0

    def draw(bounds):
        lo, hi = bounds
        return lo if lo == hi else float(rng.uniform(lo, hi))

    for i in range(num_intervals):
        t0 = start + i * INTERVAL
        count = int(rng.poisson(mean_tasks_per_interval)) if mean_tasks_per_interval > 0 else 0
        tasks = []
        for _ in range(count):
            job_counter += 1
            tasks.append(
                Task(
                    job_id=f"job-{job_counter:06d}",
                    arrival_time=t0,
                    duration_min=draw(ranges.duration_min),
                    cores_req=draw(ranges.cores_req),
                    gpu_req=draw(ranges.gpu_req),
                    mem_req=draw(ranges.mem_req),
                    bandwidth_gb=draw(ranges.bandwidth_gb),
                    sla_multiplier=draw(ranges.sla_multiplier),
                )
            )
        intervals.append(TraceInterval(t0, tasks))
    return intervals
