"""Cluster state machine: per-DC queues, transit, resource allocation, accounting.

One logical cluster is advanced step by step by a single driver. Each step routes
fresh assignments (charging transmission penalties for remote ones), delivers
in-transit tasks whose delay elapsed, schedules local queues FIFO first-fit,
runs the site physics at the resulting utilization, and returns an accounting
record consumed by rewards and logs.

Availability is recomputed from the running set after every mutation, so the
bookkeeping identity ``available + sum(running demands) == total`` holds exactly.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from datetime import datetime, timedelta

from . import network
from .dcphysics import DcPhysicsParams, WeatherSample, dc_physics_step
from .envdata import TimeSeries, value_at, wet_bulb
from .errors import ProtocolError
from .workload import Task, TaskStatus

logger = logging.getLogger(__name__)

STEP = timedelta(minutes=15)


@dataclass
class DatacenterNode:
    """One site: capacities, queues, setpoint state, and its exogenous series."""

    dc_id: int
    location_code: str
    timezone_shift_h: float
    population_weight: float
    total_cores: float
    total_gpus: float
    total_mem_gb: float
    physics: DcPhysicsParams
    price: TimeSeries
    carbon: TimeSeries
    drybulb: TimeSeries
    humidity: TimeSeries
    hru_enabled: bool = False
    setpoint_c: float = 22.0
    pending: deque = field(default_factory=deque)
    running: list = field(default_factory=list)  # (task, completion_time)
    available_cores: float = field(init=False)
    available_gpus: float = field(init=False)
    available_mem_gb: float = field(init=False)
    last_return_temp_c: float | None = field(default=None, init=False)
    _warned_oversize: set = field(default_factory=set, init=False, repr=False)

    def __post_init__(self):
        if self.total_cores < 0 or self.total_gpus < 0 or self.total_mem_gb < 0:
            raise ValueError("capacities must be >= 0")
        lo, hi = self.physics.setpoint_range_c
        if not lo <= self.setpoint_c <= hi:
            raise ValueError(f"dc {self.dc_id}: initial setpoint outside [{lo}, {hi}]")
        self._recompute_available()

    def _recompute_available(self):
        self.available_cores = self.total_cores - sum(t.cores_req for t, _ in self.running)
        self.available_gpus = self.total_gpus - sum(t.gpu_req for t, _ in self.running)
        self.available_mem_gb = self.total_mem_gb - sum(t.mem_req for t, _ in self.running)

    def fits(self, task: Task) -> bool:
        return (
            task.cores_req <= self.available_cores
            and task.gpu_req <= self.available_gpus
            and task.mem_req <= self.available_mem_gb
        )

    def exceeds_capacity(self, task: Task) -> bool:
        return (
            task.cores_req > self.total_cores
            or task.gpu_req > self.total_gpus
            or task.mem_req > self.total_mem_gb
        )

    def utilization_fractions(self) -> tuple[float, float, float]:
        def used_frac(total, avail):
            return (total - avail) / total if total > 0 else 0.0

        return (
            used_frac(self.total_cores, self.available_cores),
            used_frac(self.total_gpus, self.available_gpus),
            used_frac(self.total_mem_gb, self.available_mem_gb),
        )

    def mem_used_gb(self) -> float:
        return self.total_mem_gb - self.available_mem_gb


@dataclass
class InTransit:
    task: Task
    dest_dc_id: int
    ready_step: int


@dataclass
class DcStepInfo:
    """Per-site accounting for one step."""

    energy_consumption_kwh: float = 0.0
    energy_cost_usd: float = 0.0
    carbon_emissions_kg: float = 0.0
    water_l: float = 0.0
    sla_met: int = 0
    sla_violated: int = 0
    cpu_util_pct: float = 0.0
    gpu_util_pct: float = 0.0
    mem_util_pct: float = 0.0
    running_count: int = 0
    pending_count: int = 0


@dataclass
class ClusterInfo:
    """Step accounting record: one entry per site plus cluster-wide totals."""

    datacenters: dict
    transmission_cost_total_usd: float = 0.0
    transmission_energy_total_kwh: float = 0.0
    transmission_emissions_total_kg: float = 0.0
    tasks_deferred_count: int = 0

    def total(self, attr: str) -> float:
        return sum(getattr(d, attr) for d in self.datacenters.values())


@dataclass
class TransmissionTotals:
    cost_usd: float = 0.0
    energy_kwh: float = 0.0
    emissions_kg: float = 0.0

    def add(self, cost, energy, emissions):
        self.cost_usd += cost
        self.energy_kwh += energy
        self.emissions_kg += emissions


class Cluster:
    """Owns the datacenter nodes, the in-transit pool, and per-step accounting."""

    def __init__(self, nodes, cost_matrix, delay_table, region_map):
        if not nodes:
            raise ValueError("a cluster needs at least one datacenter")
        ids = [n.dc_id for n in nodes]
        if len(set(ids)) != len(ids):
            raise ValueError("dc_id values must be unique")
        self.nodes = list(nodes)
        self.by_id = {n.dc_id: n for n in self.nodes}
        self.cost_matrix = cost_matrix
        self.delay_table = delay_table
        self.region_map = region_map
        self.in_transit: list[InTransit] = []
        self.completed: list[Task] = []
        self.injected_count = 0

    def route_assignments(self, decisions, step: int, now: datetime) -> TransmissionTotals:
        """Apply (task, dest_dc_id) decisions; remote ones pay cost/energy/CO2/delay."""
        totals = TransmissionTotals()
        for task, dest_id in decisions:
            if dest_id not in self.by_id:
                raise ProtocolError(f"unknown destination dc_id {dest_id}")
            if task.origin_dc_id not in self.by_id:
                raise ProtocolError(f"task {task.job_id} has unmapped origin {task.origin_dc_id}")
            task.dest_dc_id = dest_id
            if dest_id == task.origin_dc_id:
                self.by_id[dest_id].pending.append(task)
                continue
            origin = self.by_id[task.origin_dc_id]
            dest = self.by_id[dest_id]
            cost = network.transmission_cost(
                self.cost_matrix, self.region_map, task.bandwidth_gb,
                origin.location_code, dest.location_code,
            )
            energy = network.transmission_energy_kwh(task.bandwidth_gb)
            ci_origin = value_at(origin.carbon, now)
            emissions = network.transmission_emissions_kg(energy, ci_origin)
            delay = network.transmission_delay_s(
                self.delay_table, self.region_map, task.bandwidth_gb,
                origin.location_code, dest.location_code,
            )
            totals.add(cost, energy, emissions)
            task.set_status(TaskStatus.IN_TRANSIT)
            self.in_transit.append(InTransit(task, dest_id, step + network.delay_steps(delay)))
        return totals

    def advance_transit(self, step: int) -> None:
        """Deliver every transfer whose delay elapsed, preserving dispatch order."""
        still = []
        for item in self.in_transit:
            if item.ready_step <= step:
                item.task.set_status(TaskStatus.PENDING)
                self.by_id[item.dest_dc_id].pending.append(item.task)
            else:
                still.append(item)
        self.in_transit = still

    def step(self, step: int, now: datetime, tx: TransmissionTotals | None = None,
             deferred_count: int = 0, hvac_actions: dict | None = None) -> ClusterInfo:
        """Advance every site by one 15-minute interval and collect accounting."""
        tx = tx or TransmissionTotals()
        self.advance_transit(step)
        infos = {}
        for node in self.nodes:
            released = release_completed(node, now)
            self.completed.extend(t for t, _ in released)
            schedule_fifo_first_fit(node, now)
            u_cpu, u_gpu, u_mem = node.utilization_fractions()
            drybulb = value_at(node.drybulb, now)
            rh = value_at(node.humidity, now)
            weather = WeatherSample(drybulb, wet_bulb(drybulb, rh))
            action = (hvac_actions or {}).get(node.dc_id)
            result = dc_physics_step(
                node.physics, node.setpoint_c, u_cpu, u_gpu, node.mem_used_gb(),
                weather, setpoint_action=action, hru_enabled=node.hru_enabled,
            )
            node.setpoint_c = result.setpoint_c
            node.last_return_temp_c = result.crac_return_temp_c
            price = value_at(node.price, now)
            ci = value_at(node.carbon, now)
            met = sum(1 for _, ok in released if ok)
            violated = len(released) - met
            infos[node.dc_id] = DcStepInfo(
                energy_consumption_kwh=result.energy_kwh,
                energy_cost_usd=result.energy_kwh * price / 1000.0,
                carbon_emissions_kg=result.energy_kwh * ci / 1000.0,
                water_l=result.water_l_15min,
                sla_met=met,
                sla_violated=violated,
                cpu_util_pct=100.0 * u_cpu,
                gpu_util_pct=100.0 * u_gpu,
                mem_util_pct=100.0 * u_mem,
                running_count=len(node.running),
                pending_count=len(node.pending),
            )
        return ClusterInfo(
            datacenters=infos,
            transmission_cost_total_usd=tx.cost_usd,
            transmission_energy_total_kwh=tx.energy_kwh,
            transmission_emissions_total_kg=tx.emissions_kg,
            tasks_deferred_count=deferred_count,
        )

    def census(self) -> dict:
        """Task counts by lifecycle stage, for conservation checks."""
        return {
            "pending": sum(len(n.pending) for n in self.nodes),
            "running": sum(len(n.running) for n in self.nodes),
            "in_transit": len(self.in_transit),
            "completed": len(self.completed),
        }


def schedule_fifo_first_fit(dc: DatacenterNode, now: datetime) -> list[Task]:
    """Start every queued task that fits, scanning FIFO; blocked tasks do not bar later ones."""
    started = []
    remaining = deque()
    for task in dc.pending:
        if dc.fits(task):
            task.set_status(TaskStatus.RUNNING)
            task.start_exec_time = now
            task.completion_time = now + timedelta(minutes=task.duration_min)
            dc.running.append((task, task.completion_time))
            dc._recompute_available()
            started.append(task)
        else:
            if dc.exceeds_capacity(task) and task.job_id not in dc._warned_oversize:
                dc._warned_oversize.add(task.job_id)
                logger.warning(
                    "task %s demands more than dc %d total capacity; it will wait forever",
                    task.job_id, dc.dc_id,
                )
            remaining.append(task)
    dc.pending = remaining
    return started


def release_completed(dc: DatacenterNode, now: datetime) -> list[tuple[Task, bool]]:
    """Finish tasks whose completion time passed; returns (task, sla_met) pairs.

    A task meeting its deadline exactly counts as met.
    """
    done = []
    still = []
    for task, completion in dc.running:
        if completion <= now:
            task.set_status(TaskStatus.COMPLETED)
            done.append((task, task.completion_time <= task.sla_deadline))
        else:
            still.append((task, completion))
    if done:
        dc.running = still
        dc._recompute_available()
    return done
