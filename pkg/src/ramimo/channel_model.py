"""Large-scale fading model, its moments, and MMSE channel-estimation variances.

The terminals run statistical power control, so the per-antenna channel
variance beta of a terminal fluctuates uniformly around a nominal value:
beta ~ U[beta_bar*(1-alpha), beta_bar*(1+alpha)] with 0 <= alpha < 1.
Everything downstream (rate bounds, optimizer, slot simulator) consumes
either draws from this distribution or its first two direct and inverse
moments, which exist and are finite precisely because alpha < 1.

All quantities are linear power ratios; dB enters only at the CLI boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "BetaDistribution",
    "BetaMoments",
    "SystemParams",
    "EstimationStats",
    "analytic_moments",
    "numeric_moments",
    "sample_beta",
    "sample_betas",
    "mmse_variances",
    "sinr_from_estimation",
]

# Relative slack for floating-point checks of exact mathematical identities.
_REL_EPS = 1e-9


@dataclass(frozen=True)
class BetaDistribution:
    """Uniform power-control model for the large-scale coefficient beta.

    Attributes
    ----------
    beta_bar : float
        Nominal (mean) linear power ratio, > 0.  Equals the per-antenna SNR
        because noise is normalized to unit variance.
    alpha : float
        Relative half-width in [0, 1).  The support is exactly
        [beta_bar*(1-alpha), beta_bar*(1+alpha)]; alpha < 1 keeps beta
        positive and the inverse moments finite.
    """

    beta_bar: float
    alpha: float = 0.0

    def __post_init__(self) -> None:
        if not (self.beta_bar > 0 and math.isfinite(self.beta_bar)):
            raise ValueError(f"beta_bar must be positive and finite, got {self.beta_bar}")
        if not (0.0 <= self.alpha < 1.0):
            raise ValueError(f"alpha must lie in [0, 1), got {self.alpha}")

    @property
    def support(self) -> tuple[float, float]:
        return self.beta_bar * (1.0 - self.alpha), self.beta_bar * (1.0 + self.alpha)

    @classmethod
    def from_snr_db(cls, snr_db: float, alpha: float = 0.0) -> "BetaDistribution":
        """Construct from a nominal SNR in dB: beta_bar = 10**(snr_db/10)."""
        return cls(10.0 ** (snr_db / 10.0), alpha)


@dataclass(frozen=True)
class BetaMoments:
    """First/second direct and inverse moments of the beta distribution.

    mean = E[beta], mean_sq = E[beta^2], inv_mean = E[1/beta],
    inv_sq_mean = E[1/beta^2].  All four must be finite and positive and
    satisfy the Jensen relations mean_sq >= mean^2, inv_sq_mean >= inv_mean^2
    and inv_mean >= 1/mean.
    """

    mean: float
    mean_sq: float
    inv_mean: float
    inv_sq_mean: float

    def __post_init__(self) -> None:
        vals = (self.mean, self.mean_sq, self.inv_mean, self.inv_sq_mean)
        if not all(math.isfinite(v) and v > 0 for v in vals):
            raise ValueError(f"all moments must be finite and positive, got {vals}")
        slack = 1.0 + _REL_EPS
        if self.mean_sq * slack < self.mean**2:
            raise ValueError("mean_sq < mean^2 violates Jensen's inequality")
        if self.inv_sq_mean * slack < self.inv_mean**2:
            raise ValueError("inv_sq_mean < inv_mean^2 violates Jensen's inequality")
        if self.inv_mean * slack < 1.0 / self.mean:
            raise ValueError("inv_mean < 1/mean violates Jensen's inequality")


@dataclass(frozen=True)
class SystemParams:
    """Scalar configuration of the single-cell uplink.

    Attributes
    ----------
    m : int
        Base-station antennas, >= 2 (the bounds carry m-1 factors).
    k : int
        Total terminals associated with the cell, >= 1.
    tau_u : int
        Uplink slot length in symbols, >= 2.
    tau_p : int
        Pilot length == number of orthogonal pilots, 1 <= tau_p < tau_u.
    p_a : float
        Per-slot activation probability in (0, 1].
    tau_c : int, optional
        Coherence interval in symbols; when given, tau_u <= tau_c must hold.
    """

    m: int
    k: int
    tau_u: int
    tau_p: int
    p_a: float
    tau_c: Optional[int] = None

    def __post_init__(self) -> None:
        if self.m < 2:
            raise ValueError(f"m must be >= 2, got {self.m}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.tau_u < 2:
            raise ValueError(f"tau_u must be >= 2, got {self.tau_u}")
        if not (1 <= self.tau_p < self.tau_u):
            raise ValueError(f"need 1 <= tau_p < tau_u, got tau_p={self.tau_p}, tau_u={self.tau_u}")
        if not (0.0 < self.p_a <= 1.0):
            raise ValueError(f"p_a must lie in (0, 1], got {self.p_a}")
        if self.tau_c is not None:
            if self.tau_u > self.tau_c:
                raise ValueError(f"tau_u={self.tau_u} exceeds coherence interval tau_c={self.tau_c}")
            if self.tau_p >= self.tau_c:
                raise ValueError(f"tau_p={self.tau_p} must be < tau_c={self.tau_c}")

    @property
    def prelog(self) -> float:
        """Fraction of the slot carrying data, (tau_u - tau_p) / tau_u."""
        return (self.tau_u - self.tau_p) / self.tau_u


@dataclass(frozen=True)
class EstimationStats:
    """MMSE decomposition of a channel coefficient: beta = var_est + var_err."""

    var_est: float
    var_err: float

    def __post_init__(self) -> None:
        if not self.var_est > 0:
            raise ValueError(f"var_est must be positive, got {self.var_est}")
        if self.var_err < 0:
            raise ValueError(f"var_err must be nonnegative, got {self.var_err}")

    @property
    def beta(self) -> float:
        return self.var_est + self.var_err


def analytic_moments(dist: BetaDistribution) -> BetaMoments:
    """Closed-form moments of the uniform beta distribution.

    For beta ~ U[b(1-a), b(1+a)]:
        E[beta]      = b
        E[beta^2]    = b^2 (1 + a^2/3)
        E[1/beta]    = ln((1+a)/(1-a)) / (2 a b)
        E[1/beta^2]  = 1 / (b^2 (1 - a^2))
    At a = 0 the distribution degenerates to a point mass at b.
    """
    b, a = dist.beta_bar, dist.alpha
    if a == 0.0:
        return BetaMoments(b, b * b, 1.0 / b, 1.0 / (b * b))
    return BetaMoments(
        mean=b,
        mean_sq=b * b * (1.0 + a * a / 3.0),
        inv_mean=math.log((1.0 + a) / (1.0 - a)) / (2.0 * a * b),
        inv_sq_mean=1.0 / (b * b * (1.0 - a * a)),
    )


def numeric_moments(dist: BetaDistribution, n_points: int) -> BetaMoments:
    """Moments via composite-midpoint quadrature over the support.

    Deterministic oracle for :func:`analytic_moments`; the midpoint rule
    converges at O(1/n_points^2), so n_points = 1e6 gives far better than
    1e-8 relative accuracy everywhere on alpha in [0, 1).
    """
    if n_points < 2:
        raise ValueError(f"n_points must be >= 2, got {n_points}")
    lo, hi = dist.support
    if lo == hi:
        b = dist.beta_bar
        return BetaMoments(b, b * b, 1.0 / b, 1.0 / (b * b))
    h = (hi - lo) / n_points
    x = lo + (np.arange(n_points) + 0.5) * h
    # density is 1/(hi-lo), so each moment is the plain average over nodes
    return BetaMoments(
        mean=float(np.mean(x)),
        mean_sq=float(np.mean(x * x)),
        inv_mean=float(np.mean(1.0 / x)),
        inv_sq_mean=float(np.mean(1.0 / (x * x))),
    )


def sample_beta(dist: BetaDistribution, rng: np.random.Generator) -> float:
    """One draw from the beta distribution; reproducible given the generator state."""
    lo, hi = dist.support
    if lo == hi:
        return dist.beta_bar
    return float(rng.uniform(lo, hi))


def sample_betas(dist: BetaDistribution, rng: np.random.Generator, size) -> np.ndarray:
    """Array of i.i.d. draws; `size` follows numpy conventions."""
    lo, hi = dist.support
    if lo == hi:
        return np.full(size, dist.beta_bar)
    return rng.uniform(lo, hi, size=size)


def mmse_variances(
    beta_0: float, collider_betas: Sequence[float], tau_p: int
) -> EstimationStats:
    """MMSE estimate/error variances for a terminal whose pilot is shared.

    The pilot observation for the reference terminal is corrupted by the
    colliders (same-pilot active terminals) and unit noise, giving

        var_est = tau_p * beta_0^2 / (1 + tau_p * (beta_0 + sum colliders))
        var_err = beta_0 - var_est

    The orthogonal decomposition var_est + var_err = beta_0 is exact.
    """
    if tau_p < 1:
        raise ValueError(f"tau_p must be >= 1, got {tau_p}")
    if beta_0 <= 0:
        raise ValueError(f"beta_0 must be positive, got {beta_0}")
    colliders = np.asarray(collider_betas, dtype=float)
    if colliders.size and np.any(colliders <= 0):
        raise ValueError("all collider betas must be positive")
    group_sum = beta_0 + float(colliders.sum())
    var_est = tau_p * beta_0 * beta_0 / (1.0 + tau_p * group_sum)
    return EstimationStats(var_est=var_est, var_err=beta_0 - var_est)


def sinr_from_estimation(
    beta_0: float,
    collider_betas: Sequence[float],
    other_beta_sum: float,
    m: int,
    tau_p: int,
) -> float:
    """Use-and-forget MRC SINR expressed through the MMSE variances.

    This is the estimation-theoretic form of the conditional SINR: the
    numerator carries the deterministic combining gain (m-1)*var_est of the
    reference terminal, the denominator the coherent collider leakage plus
    the total estimation-error, non-colliding interference, and noise power.
    It must agree with the explicit large-scale-coefficient form
    (:func:`ramimo.bounds.sinr1`) to machine precision; the two routes are
    kept separate so that each one checks the other.
    """
    if m < 2:
        raise ValueError(f"m must be >= 2, got {m}")
    if other_beta_sum < 0:
        raise ValueError(f"other_beta_sum must be >= 0, got {other_beta_sum}")
    colliders = np.asarray(collider_betas, dtype=float)
    est0 = mmse_variances(beta_0, colliders, tau_p)
    group = np.concatenate(([beta_0], colliders))
    group_sum = float(group.sum())
    # every group member shares the pilot, so its colliders are the rest of
    # the group and its MMSE denominator uses the same group sum
    err_sum = group_sum - tau_p * float((group * group).sum()) / (1.0 + tau_p * group_sum)
    num = (m - 1) * est0.var_est * beta_0 * beta_0
    den = (m - 1) * est0.var_est * float((colliders * colliders).sum()) + beta_0 * beta_0 * (
        err_sum + other_beta_sum + 1.0
    )
    return num / den
