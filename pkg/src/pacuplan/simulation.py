"""Monte Carlo validation of the analytic forecast and synthetic day generation.

Two sampling modes exist.  "true" draws surgery and recovery durations
independently and sums them, exposing how well the moment-matched lognormal
stands in for the real sum.  "matched" draws the combined duration from the
matched lognormal itself, sharing the surgery draw's percentile, which makes
the analytic forecast exact and so isolates the approximation error.

The generator produces synthetic days at the scale of a large surgical
department (default: 61 patients, 35 surgeons, 21 ORs, 45 needing recovery).
Parameter ranges are plausible surgical magnitudes, documented as synthetic
rather than fitted.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import forecast
from .distributions import LognormalParams
from .model import Instance, Patient, Schedule, Surgeon

SAMPLING_MODES = ("true", "matched")

_CHUNK = 20_000  # samples per accumulation block; bounds peak memory


@dataclass(frozen=True)
class GenSpec:
    """Knobs for the synthetic day generator; ranges are (low, high) uniforms."""

    or_count: int = 21
    surgeon_count: int = 35
    patient_count: int = 61
    recovery_fraction: float = 45 / 61
    or_open_hours: float = 8.0
    day_hours: float = 24.0
    surgery_log_mean: tuple[float, float] = (math.log(0.5), math.log(3.0))
    surgery_log_var: tuple[float, float] = (0.05, 0.5)
    recovery_log_mean: tuple[float, float] = (math.log(0.25), math.log(2.0))
    recovery_log_var: tuple[float, float] = (0.05, 0.5)
    setup_hours: tuple[float, float] = (0.1, 0.5)
    cleanup_hours: tuple[float, float] = (0.1, 0.5)
    seed: int = 0

    def __post_init__(self) -> None:
        if min(self.or_count, self.surgeon_count, self.patient_count) < 1:
            raise ValueError("counts must all be at least 1")
        if self.surgeon_count > self.patient_count:
            raise ValueError(
                f"{self.surgeon_count} surgeons cannot all have patients among {self.patient_count}")
        if not 0.0 <= self.recovery_fraction <= 1.0:
            raise ValueError("recovery fraction must lie in [0, 1]")
        if not 0.0 < self.or_open_hours <= self.day_hours:
            raise ValueError("OR opening hours must lie in (0, day_hours]")
        for name in ("surgery_log_mean", "surgery_log_var", "recovery_log_mean",
                     "recovery_log_var", "setup_hours", "cleanup_hours"):
            low, high = getattr(self, name)
            if not low <= high:
                raise ValueError(f"{name} range is empty: ({low}, {high})")
        if self.surgery_log_var[0] <= 0.0 or self.recovery_log_var[0] <= 0.0:
            raise ValueError("log-variance ranges must be strictly positive")
        if self.setup_hours[0] < 0.0 or self.cleanup_hours[0] < 0.0:
            raise ValueError("setup and cleanup ranges must be non-negative")


@dataclass
class EmpiricalCurve:
    """Sampled occupancy statistics on the analytic curve's grid."""

    times: np.ndarray
    sample_mean: np.ndarray
    sample_variance: np.ndarray
    standard_error: np.ndarray
    above: np.ndarray
    below: np.ndarray
    inside: np.ndarray
    n_samples: int
    mode: str
    analytic: forecast.OccupancyCurve


@dataclass(frozen=True)
class CoverageStats:
    """How the samples sat relative to the analytic mean and 95% band."""

    fraction_above: float
    fraction_below: float
    fraction_inside: float
    mean_abs_error: float
    n_samples: int
    n_points: int


def generate_instance(spec: GenSpec, rng: np.random.Generator | None = None) -> Instance:
    """Deterministic synthetic day: same spec and seed, same instance.

    Each surgeon's patients form one contiguous block inside a single OR,
    mimicking block allocation of theatre time; the patient list (the day's
    input order) runs OR by OR, block by block.
    """
    rng = np.random.default_rng(spec.seed) if rng is None else rng
    n = spec.patient_count
    block_sizes = np.ones(spec.surgeon_count, dtype=np.int64)
    for _ in range(n - spec.surgeon_count):
        block_sizes[rng.integers(spec.surgeon_count)] += 1
    or_of_surgeon = rng.permutation(np.arange(spec.surgeon_count) % spec.or_count) + 1
    surgeon_order = np.argsort(or_of_surgeon, kind="stable")

    surgery_mu = rng.uniform(*spec.surgery_log_mean, n)
    surgery_s2 = rng.uniform(*spec.surgery_log_var, n)
    recovery_mu = rng.uniform(*spec.recovery_log_mean, n)
    recovery_s2 = rng.uniform(*spec.recovery_log_var, n)
    setup = rng.uniform(*spec.setup_hours, n)
    cleanup = rng.uniform(*spec.cleanup_hours, n)
    needs_recovery = np.zeros(n, dtype=bool)
    n_recovery = int(round(spec.recovery_fraction * n))
    needs_recovery[rng.choice(n, n_recovery, replace=False)] = True

    sw = len(str(spec.surgeon_count))
    pw = len(str(n))
    surgeons = [Surgeon(id=f"s{i + 1:0{sw}d}", shift_start=0.0, shift_end=spec.or_open_hours)
                for i in range(spec.surgeon_count)]
    patients = []
    k = 0
    for s in surgeon_order:
        for _ in range(block_sizes[s]):
            patients.append(Patient(
                id=f"p{k + 1:0{pw}d}",
                surgeon_id=surgeons[s].id,
                or_id=int(or_of_surgeon[s]),
                needs_recovery=bool(needs_recovery[k]),
                surgery=LognormalParams(float(surgery_mu[k]), float(surgery_s2[k])),
                recovery=LognormalParams(float(recovery_mu[k]), float(recovery_s2[k])),
                setup=float(setup[k]),
                cleanup=float(cleanup[k]),
            ))
            k += 1
    return Instance(surgeons=surgeons, patients=patients, or_count=spec.or_count,
                    or_open_hours=spec.or_open_hours, day_hours=spec.day_hours)


def _draw_windows(patient: Patient, start: float, rng: np.random.Generator,
                  size: int, mode: str) -> tuple[np.ndarray, np.ndarray]:
    """Recovery entry/exit times for one patient across ``size`` sampled days."""
    if mode == "true":
        surgery = np.exp(patient.surgery.mu + patient.surgery.sigma * rng.standard_normal(size))
        recovery = np.exp(patient.recovery.mu + patient.recovery.sigma * rng.standard_normal(size))
        entry = start + surgery
        return entry, entry + recovery
    if mode == "matched":
        # One percentile draw drives both durations, so entry <= t < exit has
        # probability max(0, F_surgery(t) - F_combined(t)): the analytic model.
        w = rng.standard_normal(size)
        entry = start + np.exp(patient.surgery.mu + patient.surgery.sigma * w)
        exit_ = start + np.exp(patient.combined.mu + patient.combined.sigma * w)
        return entry, exit_
    raise ValueError(f"unknown sampling mode {mode!r}; expected one of {SAMPLING_MODES}")


def sample_day(instance: Instance, schedule: Schedule, rng: np.random.Generator,
               mode: str = "true") -> list[tuple[float, float]]:
    """One sampled day: (recovery entry, recovery exit) per recovery patient."""
    out = []
    for p in instance.patients:
        if not p.needs_recovery:
            continue
        entry, exit_ = _draw_windows(p, schedule.starts[p.id], rng, 1, mode)
        out.append((float(entry[0]), float(exit_[0])))
    return out


def monte_carlo_curve(instance: Instance, schedule: Schedule, n_samples: int,
                      grid_step: float = 0.1, mode: str = "true",
                      rng: np.random.Generator | None = None) -> EmpiricalCurve:
    """Sampled occupancy curve with exceedance tallies against the analytic band.

    Occupancy at t counts patients with entry <= t < exit.  Samples are
    processed in blocks; statistics are exact aggregates over all samples.
    """
    if n_samples < 1:
        raise ValueError("need at least one sample")
    if mode not in SAMPLING_MODES:
        raise ValueError(f"unknown sampling mode {mode!r}; expected one of {SAMPLING_MODES}")
    rng = np.random.default_rng(0) if rng is None else rng

    starts = [schedule.starts[p.id] for p in instance.patients]
    analytic = forecast.occupancy_curve(instance.patients, starts,
                                        grid_step=grid_step, horizon=instance.day_hours)
    times = analytic.times
    recovery = [(p, schedule.starts[p.id]) for p in instance.patients if p.needs_recovery]

    total = np.zeros(times.size)
    total_sq = np.zeros(times.size)
    above = np.zeros(times.size, dtype=np.int64)
    below = np.zeros(times.size, dtype=np.int64)
    for block_start in range(0, n_samples, _CHUNK):
        block = min(_CHUNK, n_samples - block_start)
        occupancy = np.zeros((times.size, block), dtype=np.int16)
        for patient, start in recovery:
            entry, exit_ = _draw_windows(patient, start, rng, block, mode)
            occupancy += (entry[None, :] <= times[:, None]) & (times[:, None] < exit_[None, :])
        occ = occupancy.astype(np.float64)
        total += occ.sum(axis=1)
        total_sq += (occ * occ).sum(axis=1)
        above += (occupancy > analytic.upper[:, None]).sum(axis=1)
        below += (occupancy < analytic.lower[:, None]).sum(axis=1)

    sample_mean = total / n_samples
    if n_samples > 1:
        sample_variance = (total_sq - n_samples * sample_mean ** 2) / (n_samples - 1)
        sample_variance = np.maximum(sample_variance, 0.0)  # round-off guard
    else:
        sample_variance = np.zeros(times.size)
    standard_error = np.sqrt(sample_variance / n_samples)
    inside = n_samples - above - below
    return EmpiricalCurve(times=times, sample_mean=sample_mean,
                          sample_variance=sample_variance, standard_error=standard_error,
                          above=above, below=below, inside=inside,
                          n_samples=n_samples, mode=mode, analytic=analytic)


def coverage_stats(empirical: EmpiricalCurve) -> CoverageStats:
    """Aggregate band coverage and mean absolute error against the analytic mean."""
    cells = empirical.n_samples * empirical.times.size
    return CoverageStats(
        fraction_above=float(empirical.above.sum()) / cells,
        fraction_below=float(empirical.below.sum()) / cells,
        fraction_inside=float(empirical.inside.sum()) / cells,
        mean_abs_error=float(np.abs(empirical.sample_mean - empirical.analytic.mean).mean()),
        n_samples=empirical.n_samples,
        n_points=int(empirical.times.size),
    )
