"""Sequence optimisation: constructive schedule builder plus Simulated Annealing.

The builder is a two-pass critical-path propagation over the patient
sequence: a reverse pass tightens each patient's latest completion from the
successors that share their OR or surgeon, a forward pass chains earliest
starts off realised predecessor starts, and each start is then placed
uniformly at random inside its slack window.  Annealing searches the
sequence space with random pair swaps, minimising the peak expected
recovery occupancy.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import forecast
from .model import Instance, Schedule


@dataclass(frozen=True)
class SAConfig:
    """Annealing knobs; defaults are the tuned values."""

    iterations: int = 2500
    initial_temperature: float = 1.0
    cooling_factor: float = 0.95
    cooling_period: int = 200
    grid_step: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1")
        if not 0.0 < self.cooling_factor < 1.0:
            raise ValueError("cooling factor must lie in (0, 1)")
        if self.cooling_period < 1:
            raise ValueError("cooling period must be at least 1")
        if self.initial_temperature <= 0.0:
            raise ValueError("initial temperature must be positive")
        if self.grid_step <= 0.0:
            raise ValueError("grid step must be positive")


@dataclass
class SolveReport:
    """Everything a run produced, including per-iteration traces."""

    best_schedule: Schedule
    best_sequence: list[str]
    best_meo: float
    initial_meo: float
    meo_trace: list[float] = field(repr=False)
    best_trace: list[float] = field(repr=False)
    temperature_trace: list[float] = field(repr=False)
    delta_trace: list[float] = field(repr=False)
    accepted_trace: list[bool] = field(repr=False)
    accepted: int = 0
    rejected: int = 0
    wall_clock_seconds: float = 0.0
    config: SAConfig | None = None


class _Workspace:
    """Per-instance arrays for the schedule builder.

    ``neighbors[p]`` lists the patients sharing p's OR or surgeon; sequence
    position alone then decides who is a predecessor or successor.
    """

    def __init__(self, instance: Instance):
        patients = instance.patients
        self.n = len(patients)
        self.ids = [p.id for p in patients]
        self.index = {pid: i for i, pid in enumerate(self.ids)}
        self.duration = np.array([p.expected_duration for p in patients])
        self.setup = np.array([p.setup for p in patients])
        self.cleanup = np.array([p.cleanup for p in patients])
        self.earliest = np.array([max(0.0, instance.surgeon_by_id[p.surgeon_id].shift_start)
                                  for p in patients])
        self.or_close = instance.or_open_hours
        neighbor_sets: list[set[int]] = [set() for _ in range(self.n)]
        for group in list(instance.patients_by_surgeon.values()) + list(instance.patients_by_or.values()):
            idx = [self.index[p.id] for p in group]
            for a in idx:
                neighbor_sets[a].update(idx)
        self.neighbors = [sorted(s - {i}) for i, s in enumerate(neighbor_sets)]

    def order_from_ids(self, sequence: Sequence[str]) -> np.ndarray:
        if len(sequence) != self.n or {*sequence} != {*self.ids}:
            raise ValueError("sequence must be a permutation of the instance's patient ids")
        return np.array([self.index[pid] for pid in sequence], dtype=np.int64)


class _OccupancyKernel:
    """Fast peak-expected-occupancy evaluation for a fixed instance and grid."""

    def __init__(self, instance: Instance, grid_step: float):
        self.times = forecast.time_grid(grid_step, instance.day_hours)
        rows = [(i, p) for i, p in enumerate(instance.patients) if p.needs_recovery]
        self.rec_index = np.array([i for i, _ in rows], dtype=np.int64)
        self.log_mean = np.array([p.surgery.mu for _, p in rows])
        self.log_sd = np.array([p.surgery.sigma for _, p in rows])
        self.combined_log_mean = np.array([p.combined.mu for _, p in rows])
        self.combined_log_sd = np.array([p.combined.sigma for _, p in rows])

    def meo(self, starts: np.ndarray) -> float:
        if self.rec_index.size == 0:
            return 0.0
        probs = forecast.recovery_prob_matrix(
            self.log_mean, self.log_sd, self.combined_log_mean, self.combined_log_sd,
            starts[self.rec_index], self.times)
        return float(probs.sum(axis=0).max())


def _construct_starts(ws: _Workspace, order: np.ndarray,
                      rng: np.random.Generator | None) -> np.ndarray:
    """Two-pass propagation; one uniform draw per patient when rng is given."""
    position = np.empty(ws.n, dtype=np.int64)
    position[order] = np.arange(ws.n)
    latest_completion = np.full(ws.n, ws.or_close)
    earliest_start = ws.earliest.copy()
    for p in order[::-1]:
        successor_caps = [latest_completion[s] - ws.duration[s] - ws.setup[s]
                          for s in ws.neighbors[p] if position[s] > position[p]]
        if successor_caps:
            latest_completion[p] = min(successor_caps) - ws.cleanup[p]
    starts = np.empty(ws.n)
    for p in order:
        predecessor_floors = [earliest_start[q] + ws.duration[q] + ws.cleanup[q]
                              for q in ws.neighbors[p] if position[q] < position[p]]
        if predecessor_floors:
            earliest_start[p] = max(predecessor_floors) + ws.setup[p]
        u = rng.random() if rng is not None else 0.0
        slack = latest_completion[p] - earliest_start[p] - ws.duration[p]
        starts[p] = earliest_start[p] + max(0.0, u * slack)
        earliest_start[p] = starts[p]  # later patients chain off the realised start
    return starts


def construct_schedule(instance: Instance, sequence: Sequence[str],
                       rng: np.random.Generator | None = None) -> Schedule:
    """Build a feasible schedule for the given patient sequence.

    With ``rng`` omitted every patient is packed at its earliest start.
    Never fails on tight days: insufficient slack turns into overtime.
    """
    ws = _Workspace(instance)
    starts = _construct_starts(ws, ws.order_from_ids(sequence), rng)
    return Schedule(starts={ws.ids[i]: float(starts[i]) for i in range(ws.n)})


def baseline_schedule(instance: Instance) -> Schedule:
    """Deterministic earliest-start packing in input order; the comparison anchor."""
    return construct_schedule(instance, instance.patient_ids, rng=None)


def _draw_swap(n: int, rng: np.random.Generator) -> tuple[int, int]:
    i, j = rng.choice(n, size=2, replace=False)
    return int(i), int(j)


def swap_neighbor(sequence: Sequence[str], rng: np.random.Generator) -> list[str]:
    """Copy of the sequence with two distinct random positions exchanged."""
    seq = list(sequence)
    if len(seq) < 2:
        return seq
    i, j = _draw_swap(len(seq), rng)
    seq[i], seq[j] = seq[j], seq[i]
    return seq


def simulated_annealing(instance: Instance, config: SAConfig | None = None) -> SolveReport:
    """Minimise peak expected recovery occupancy over patient sequences.

    The incumbent starts as the input-order earliest-start packing.  Each
    iteration swaps two random patients, rebuilds the schedule with random
    slack placement, and applies the Metropolis rule: accept improvements
    always, worsenings with probability exp(-delta / temperature).  Fully
    deterministic for a given seed: one generator drives swap choices,
    slack draws, and acceptance draws.
    """
    config = config or SAConfig()
    started = time.perf_counter()
    ws = _Workspace(instance)
    kernel = _OccupancyKernel(instance, config.grid_step)
    rng = np.random.default_rng(config.seed)

    order = np.arange(ws.n, dtype=np.int64)
    current_starts = _construct_starts(ws, order, None)
    current = kernel.meo(current_starts)
    initial = current
    best, best_starts, best_order = current, current_starts, order

    meo_trace: list[float] = []
    best_trace: list[float] = []
    temperature_trace: list[float] = []
    delta_trace: list[float] = []
    accepted_trace: list[bool] = []
    accepted = rejected = 0
    temperature = config.initial_temperature

    for iteration in range(1, config.iterations + 1):
        candidate_order = order
        if ws.n >= 2:
            i, j = _draw_swap(ws.n, rng)
            candidate_order = order.copy()
            candidate_order[i], candidate_order[j] = candidate_order[j], candidate_order[i]
        candidate_starts = _construct_starts(ws, candidate_order, rng)
        candidate = kernel.meo(candidate_starts)
        delta = candidate - current
        take = delta <= 0.0 or rng.random() < math.exp(-delta / temperature)
        if take:
            order, current = candidate_order, candidate
            accepted += 1
        else:
            rejected += 1
        if candidate < best:
            best, best_starts, best_order = candidate, candidate_starts, candidate_order
        meo_trace.append(candidate)
        best_trace.append(best)
        temperature_trace.append(temperature)
        delta_trace.append(delta)
        accepted_trace.append(take)
        if iteration % config.cooling_period == 0:
            temperature *= config.cooling_factor

    schedule = Schedule(starts={ws.ids[i]: float(best_starts[i]) for i in range(ws.n)})
    return SolveReport(
        best_schedule=schedule,
        best_sequence=[ws.ids[i] for i in best_order],
        best_meo=best,
        initial_meo=initial,
        meo_trace=meo_trace,
        best_trace=best_trace,
        temperature_trace=temperature_trace,
        delta_trace=delta_trace,
        accepted_trace=accepted_trace,
        accepted=accepted,
        rejected=rejected,
        wall_clock_seconds=time.perf_counter() - started,
        config=config,
    )
