"""Analytic start-of-day forecast of recovery-bed occupancy.

A patient who started surgery at Z is in recovery at time t with probability
F_surgery(t - Z) - F_combined(t - Z), where "combined" is the moment-matched
lognormal for surgery + recovery.  Aggregating the per-patient Bernoulli
indicators gives the expected headcount, its variance, and a normal-theory
95% prediction band, evaluated on a regular time grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np
from scipy.special import erf

from .distributions import SQRT2, LognormalParams, poisson_binomial_cdf

if TYPE_CHECKING:  # pragma: no cover
    from .model import Patient

# Width of the two-sided 95% normal prediction band.
Z95 = 1.96

# Below this gap between the two log-sigmas the crossing-point formula is
# numerically singular and the support is treated as unbounded.
SIGMA_TOLERANCE = 1e-12


@dataclass(frozen=True)
class OccupancyCurve:
    """Occupancy forecast sampled on a regular grid over [0, horizon]."""

    grid_step: float
    times: np.ndarray
    mean: np.ndarray
    variance: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def peak(self) -> float:
        return float(self.mean.max()) if self.mean.size else 0.0


def time_grid(grid_step: float, horizon: float) -> np.ndarray:
    """Regular grid 0, step, 2*step, ... covering [0, horizon]."""
    if grid_step <= 0.0:
        raise ValueError(f"grid step must be positive, got {grid_step}")
    if horizon <= 0.0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    n_steps = int(math.floor(horizon / grid_step + 1e-9))
    return np.arange(n_steps + 1) * grid_step


def support_upper_bound(surgery: LognormalParams, combined: LognormalParams,
                        start: float = 0.0) -> float:
    """Time offset at which the two standardised log arguments coincide.

    Past this point the surgery CDF no longer exceeds the combined CDF (for
    the usual case sigma_combined < sigma_surgery), so the in-recovery
    probability is zero.  Returns inf when the sigmas coincide and the
    crossing formula is singular.
    """
    s, c = surgery.sigma, combined.sigma
    if abs(c - s) < SIGMA_TOLERANCE:
        return math.inf
    return start + math.exp((c * surgery.mu - s * combined.mu) / (c - s))


def in_recovery_prob(patient: "Patient", start: float, t: float) -> float:
    """Probability that the patient occupies a recovery bed at time t."""
    x = t - start
    if x <= 0.0:
        return 0.0
    logx = math.log(x)
    fs = 0.5 * math.erf((logx - patient.surgery.mu) / (SQRT2 * patient.surgery.sigma))
    fc = 0.5 * math.erf((logx - patient.combined.mu) / (SQRT2 * patient.combined.sigma))
    return min(1.0, max(0.0, fs - fc))


def recovery_prob_matrix(log_mean: np.ndarray, log_sd: np.ndarray,
                         combined_log_mean: np.ndarray, combined_log_sd: np.ndarray,
                         starts: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Vectorised in-recovery probabilities, one row per patient, one column per time."""
    x = np.asarray(times, dtype=float)[None, :] - np.asarray(starts, dtype=float)[:, None]
    positive = x > 0.0
    logx = np.log(np.where(positive, x, 1.0))
    zs = (logx - log_mean[:, None]) / (SQRT2 * log_sd[:, None])
    zc = (logx - combined_log_mean[:, None]) / (SQRT2 * combined_log_sd[:, None])
    probs = np.clip(0.5 * (erf(zs) - erf(zc)), 0.0, 1.0)
    probs[~positive] = 0.0
    return probs


def _recovery_param_arrays(patients: Sequence["Patient"], starts: Sequence[float]):
    """Parameter arrays restricted to the patients that occupy a recovery bed."""
    if len(patients) != len(starts):
        raise ValueError(f"expected one start per patient, got {len(starts)} starts for {len(patients)} patients")
    rows = [(p.surgery.mu, p.surgery.sigma, p.combined.mu, p.combined.sigma, z)
            for p, z in zip(patients, starts) if p.needs_recovery]
    if not rows:
        return tuple(np.empty(0) for _ in range(5))
    return tuple(np.asarray(col, dtype=float) for col in zip(*rows))


def recovery_probs_at(patients: Sequence["Patient"], starts: Sequence[float],
                      t: float) -> np.ndarray:
    """Per-patient in-recovery probabilities at a single time (recovery patients only)."""
    mu, sd, cmu, csd, z = _recovery_param_arrays(patients, starts)
    if mu.size == 0:
        return np.empty(0)
    return recovery_prob_matrix(mu, sd, cmu, csd, z, np.array([t]))[:, 0]


def expected_occupancy(patients: Sequence["Patient"], starts: Sequence[float],
                       t: float) -> float:
    """Expected number of patients in recovery at time t."""
    return float(recovery_probs_at(patients, starts, t).sum())


def occupancy_variance(patients: Sequence["Patient"], starts: Sequence[float],
                       t: float) -> float:
    """Variance of the recovery headcount at time t (sum of Bernoulli variances)."""
    p = recovery_probs_at(patients, starts, t)
    return float((p * (1.0 - p)).sum())


def occupancy_curve(patients: Sequence["Patient"], starts: Sequence[float],
                    grid_step: float = 0.1, horizon: float = 24.0) -> OccupancyCurve:
    """Forecast mean, variance, and 95% band on a regular grid over [0, horizon]."""
    times = time_grid(grid_step, horizon)
    mu, sd, cmu, csd, z = _recovery_param_arrays(patients, starts)
    if mu.size == 0:
        zero = np.zeros(times.size)
        return OccupancyCurve(grid_step, times, zero, zero.copy(), zero.copy(), zero.copy())
    probs = recovery_prob_matrix(mu, sd, cmu, csd, z, times)
    mean = probs.sum(axis=0)
    variance = (probs * (1.0 - probs)).sum(axis=0)
    half_band = Z95 * np.sqrt(variance)
    return OccupancyCurve(grid_step, times, mean, variance,
                          mean - half_band, mean + half_band)


def exact_occupancy_cdf(patients: Sequence["Patient"], starts: Sequence[float],
                        t: float, k: int) -> float:
    """P(at most k patients in recovery at time t), exact Poisson-binomial tail.

    The normal band on the curve is an approximation; this is the opt-in
    exact query for tail probabilities where that approximation is too crude.
    """
    return poisson_binomial_cdf(recovery_probs_at(patients, starts, t), k)
