"""Lognormal duration primitives and the Poisson-binomial count distribution.

Durations are parameterised by the mean and variance of their natural
logarithm.  The headcount of patients simultaneously in recovery is a sum of
independent, non-identical Bernoulli indicators, i.e. Poisson binomial; its
CDF is computed exactly by characteristic-function inversion, with an
independent dynamic-programming implementation kept around as a cross-check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SQRT2 = math.sqrt(2.0)

# np.exp overflows to inf beyond ~709.78; reject earlier so means stay finite.
_LOG_FLOAT_MAX = math.log(np.finfo(float).max)


@dataclass(frozen=True)
class LognormalParams:
    """Lognormal duration: ``mu``/``sigma2`` are the mean/variance of the log."""

    mu: float
    sigma2: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.mu) and math.isfinite(self.sigma2)):
            raise ValueError(f"lognormal parameters must be finite, got ({self.mu}, {self.sigma2})")
        if self.sigma2 <= 0.0:
            raise ValueError(f"log-variance must be positive, got {self.sigma2}")
        if self.mu + self.sigma2 / 2.0 > _LOG_FLOAT_MAX:
            raise ValueError(f"parameters ({self.mu}, {self.sigma2}) overflow the distribution mean")

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)

    def mean(self) -> float:
        return math.exp(self.mu + self.sigma2 / 2.0)

    def variance(self) -> float:
        exponent = 2.0 * self.mu + self.sigma2
        if exponent > _LOG_FLOAT_MAX:
            raise ValueError(f"parameters ({self.mu}, {self.sigma2}) overflow the distribution variance")
        return math.expm1(self.sigma2) * math.exp(exponent)


def lognormal_cdf(t: float, params: LognormalParams) -> float:
    """P(duration <= t).  Zero for t <= 0 (support boundary, not an error)."""
    if t <= 0.0:
        return 0.0
    return 0.5 + 0.5 * math.erf((math.log(t) - params.mu) / (SQRT2 * params.sigma))


def moment_match_sum(surgery: LognormalParams, recovery: LognormalParams) -> LognormalParams:
    """Lognormal fit to the sum of two independent lognormal durations.

    Equates the first two moments: the returned distribution's mean and
    variance reproduce mean(surgery) + mean(recovery) and
    variance(surgery) + variance(recovery) exactly (to round-off).
    """
    m = surgery.mean() + recovery.mean()
    v = surgery.variance() + recovery.variance()
    if not (math.isfinite(m) and math.isfinite(v)):
        raise ValueError("moment matching overflowed; duration parameters are too extreme")
    sigma2 = math.log1p(v / (m * m))
    # Algebraically ln(m^2 / sqrt(v + m^2)); this arrangement keeps the
    # round-trip of the matched mean exact.
    mu = math.log(m) - sigma2 / 2.0
    return LognormalParams(mu=mu, sigma2=sigma2)


def _validate_probs(probs) -> np.ndarray:
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1:
        raise ValueError("probability vector must be one-dimensional")
    if p.size and not (np.all(p >= 0.0) and np.all(p <= 1.0)):
        raise ValueError("success probabilities must lie in [0, 1]")
    return p


# Bound on the (n, block) intermediate of the characteristic-function product.
_DFT_BLOCK = 512


def _dft_terms(probs: np.ndarray, k: int) -> complex:
    """Characteristic-function inversion sum; provably real up to round-off."""
    n = probs.size
    omega = 2.0 * math.pi / (n + 1)
    total = complex(k + 1)  # l = 0 summand is the 0/0 limit (k+1) * x_0 = k+1
    for lo in range(1, n + 1, _DFT_BLOCK):
        l = np.arange(lo, min(lo + _DFT_BLOCK, n + 1))
        z = np.exp(1j * omega * l)
        x = np.prod(1.0 - probs[None, :] + probs[None, :] * z[:, None], axis=1)
        num = 1.0 - np.exp(-1j * omega * l * (k + 1))
        den = 1.0 - np.exp(-1j * omega * l)
        total += (num / den * x).sum()
    return total / (n + 1)


def poisson_binomial_cdf(probs, k: int) -> float:
    """P(at most k successes) among independent Bernoulli trials ``probs``.

    Exact via DFT inversion of the characteristic function.  By convention
    k < 0 yields 0 and k >= len(probs) yields 1.
    """
    p = _validate_probs(probs)
    n = p.size
    if k < 0:
        return 0.0
    if k >= n:
        return 1.0
    return min(1.0, max(0.0, _dft_terms(p, k).real))


def poisson_binomial_cdf_oracle(probs, k: int) -> float:
    """Same CDF by truncated convolution: O(n*k) real arithmetic, no complexes."""
    p = _validate_probs(probs)
    n = p.size
    if k < 0:
        return 0.0
    if k >= n:
        return 1.0
    f = np.zeros(k + 1)
    f[0] = 1.0
    for q in p:
        f[1:] = f[1:] * (1.0 - q) + f[:-1] * q
        f[0] *= 1.0 - q
    return float(min(1.0, f.sum()))


def poisson_binomial_pmf(probs) -> np.ndarray:
    """Full PMF over {0, ..., n} by iterative convolution."""
    p = _validate_probs(probs)
    pmf = np.zeros(p.size + 1)
    pmf[0] = 1.0
    for q in p:
        pmf[1:] = pmf[1:] * (1.0 - q) + pmf[:-1] * q
        pmf[0] *= 1.0 - q
    return pmf
