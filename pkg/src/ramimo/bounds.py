"""Ergodic sum-rate lower bounds for the random-access uplink.

Three bounds of decreasing tightness and cost:

* R1 — conditions on the collision pattern and averages the conditional
  use-and-forget SINR over the large-scale coefficients by Monte-Carlo.
* R2 — additionally averages the interference statistics over the fading
  parameters in closed form, leaving a deterministic double binomial sum
  over the number of active terminals and the number of colliders.
* R3 — further averages the collision process itself inside the SINR
  denominator, giving a fully closed form.  Loose, but it tracks the other
  bounds well and is the optimization target for pilot length and
  activation probability.

An asymptotic simplification of R3's SINR (dominant terms for many
antennas, long slots, and high load) feeds the heuristic parameter rules in
:mod:`ramimo.optimizer`.

All SINRs are linear; rates are bits/symbol aggregated over terminals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .channel_model import BetaDistribution, BetaMoments, SystemParams, sample_betas

__all__ = [
    "BinomialSpec",
    "CollisionScenario",
    "RateReport",
    "BOUND_R1",
    "BOUND_R2",
    "BOUND_R3",
    "BOUND_ASYM",
    "binom_log_pmf",
    "sinr1",
    "rate1_mc",
    "sinr2",
    "rate2",
    "sinr3",
    "sinr3_value",
    "rate3",
    "rate3_value",
    "sinr_asym",
    "sinr_asym_value",
]

BOUND_R1 = "R1"
BOUND_R2 = "R2"
BOUND_R3 = "R3"
BOUND_ASYM = "R_asym_heuristic"

# Cells whose probability mass falls below PMF_REL_TOL times the modal mass
# are dropped from the double sums; the retained mass must stay above
# MIN_RETAINED_MASS or the computation aborts.
PMF_REL_TOL = 1e-12
MIN_RETAINED_MASS = 1.0 - 1e-9


@dataclass(frozen=True)
class BinomialSpec:
    """Parameters (n trials, r successes, success probability p) of a binomial pmf."""

    n: int
    r: int
    p: float

    def __post_init__(self) -> None:
        if self.n < 0 or not (0 <= self.r <= self.n):
            raise ValueError(f"need 0 <= r <= n, got r={self.r}, n={self.n}")
        if not (0.0 <= self.p <= 1.0):
            raise ValueError(f"p must lie in [0, 1], got {self.p}")


@dataclass(frozen=True)
class CollisionScenario:
    """One realization of the collision pattern seen by a reference terminal.

    k_active counts all active terminals including the reference;
    collider_betas holds the large-scale coefficients of the active
    terminals sharing the reference's pilot, other_betas those of the
    remaining active terminals.
    """

    k_active: int
    beta_0: float
    collider_betas: tuple[float, ...] = ()
    other_betas: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.k_active < 1:
            raise ValueError(f"k_active must be >= 1, got {self.k_active}")
        if len(self.collider_betas) + len(self.other_betas) != self.k_active - 1:
            raise ValueError(
                "collider_betas and other_betas must hold k_active - 1 values in total"
            )
        if self.beta_0 <= 0 or any(
            b <= 0 for b in self.collider_betas + self.other_betas
        ):
            raise ValueError("all beta values must be positive")

    @property
    def collider_count(self) -> int:
        return len(self.collider_betas)


@dataclass(frozen=True)
class RateReport:
    """A bound value with its provenance.

    std_error is the Monte-Carlo standard error (exactly 0 for the
    deterministic bounds); n_samples the number of draws actually used.
    """

    bound_id: str
    value: float
    std_error: float
    params: SystemParams
    n_samples: int = 0

    def __post_init__(self) -> None:
        if self.value < 0:
            raise ValueError(f"rate must be nonnegative, got {self.value}")
        if self.std_error < 0:
            raise ValueError(f"std_error must be nonnegative, got {self.std_error}")


def binom_log_pmf(spec: BinomialSpec) -> float:
    """Exact log pmf of Binom(n, p) at r via log-gamma.

    The p = 0 and p = 1 edges are handled exactly (log 1 = 0 on the only
    possible outcome, -inf elsewhere).  Exponentiation is left to callers so
    that tail terms can be compared in log space without underflow.
    """
    n, r, p = spec.n, spec.r, spec.p
    if p == 0.0:
        return 0.0 if r == 0 else -math.inf
    if p == 1.0:
        return 0.0 if r == n else -math.inf
    return (
        math.lgamma(n + 1)
        - math.lgamma(r + 1)
        - math.lgamma(n - r + 1)
        + r * math.log(p)
        + (n - r) * math.log1p(-p)
    )


def _binom_pmf_row(n: int, p: float) -> np.ndarray:
    """pmf of Binom(n, p) on 0..n, computed in log space then exponentiated."""
    r = np.arange(n + 1)
    if p == 0.0:
        out = np.zeros(n + 1)
        out[0] = 1.0
        return out
    if p == 1.0:
        out = np.zeros(n + 1)
        out[n] = 1.0
        return out
    logpmf = (
        gammaln(n + 1)
        - gammaln(r + 1)
        - gammaln(n - r + 1)
        + r * math.log(p)
        + (n - r) * math.log1p(-p)
    )
    return np.exp(logpmf)


@dataclass
class _CellTable:
    """Truncated (k_active, collider-count) cells with their joint weights."""

    cells: list[tuple[int, int, float]] = field(default_factory=list)
    retained_mass: float = 0.0


def _collision_cells(k: int, p_a: float, tau_p: int) -> _CellTable:
    """Enumerate (K_a, c) cells with joint pmf above the truncation threshold.

    K_a ~ Binom(k, p_a) restricted to K_a >= 1 (inactive slots carry no
    rate), c | K_a ~ Binom(K_a - 1, 1/tau_p).  The retained-mass accounting
    includes the exactly-handled K_a = 0 atom, and the total must exceed
    MIN_RETAINED_MASS.
    """
    pmf_ka = _binom_pmf_row(k, p_a)
    tol_ka = PMF_REL_TOL * pmf_ka.max()
    table = _CellTable()
    mass = pmf_ka[0]  # k_active = 0 contributes zero rate, exactly
    for ka in range(1, k + 1):
        if pmf_ka[ka] < tol_ka:
            continue
        pmf_c = _binom_pmf_row(ka - 1, 1.0 / tau_p)
        tol_c = PMF_REL_TOL * pmf_c.max()
        for c in range(ka):
            if pmf_c[c] < tol_c:
                continue
            table.cells.append((ka, c, float(pmf_ka[ka] * pmf_c[c])))
            mass += pmf_ka[ka] * pmf_c[c]
    table.retained_mass = float(mass)
    if mass < MIN_RETAINED_MASS:
        raise RuntimeError(
            f"binomial truncation retained only {mass!r} of the probability mass"
        )
    return table


# ---------------------------------------------------------------------------
# R1: Monte-Carlo bound conditioned on the collision pattern
# ---------------------------------------------------------------------------


def _sinr1_kernel(
    beta_0: np.ndarray,
    collider_betas: np.ndarray,
    other_sum: np.ndarray,
    tau_p: int,
    m: int,
) -> np.ndarray:
    """Vectorized conditional SINR from the explicit large-scale coefficients.

    beta_0: (n,), collider_betas: (n, c), other_sum: (n,).  The pilot group
    {reference} + colliders shares one pilot, so the collider set of each
    group member is the rest of the group; the middle denominator term
    telescopes to S + tau_p*S^2 - tau_p*sum(group beta^2) with S the group
    total.
    """
    if collider_betas.shape[-1]:
        sum_c2 = np.sum(collider_betas * collider_betas, axis=-1)
        group_sum = beta_0 + np.sum(collider_betas, axis=-1)
    else:
        sum_c2 = np.zeros_like(beta_0)
        group_sum = beta_0
    sum_g2 = beta_0 * beta_0 + sum_c2
    num = tau_p * (m - 1) * beta_0 * beta_0
    den = (
        tau_p * (m - 1) * sum_c2
        + group_sum
        + tau_p * group_sum * group_sum
        - tau_p * sum_g2
        + (1.0 + other_sum) * (1.0 + tau_p * group_sum)
    )
    return num / den


def sinr1(scenario: CollisionScenario, params: SystemParams) -> float:
    """Conditional use-and-forget SINR of the reference terminal.

    Explicit in the large-scale coefficients of the realized scenario; the
    estimation-variance route :func:`ramimo.channel_model.sinr_from_estimation`
    must reproduce it identically.
    """
    b0 = np.array([scenario.beta_0])
    bc = np.array([scenario.collider_betas], dtype=float).reshape(1, -1)
    bo = np.array([sum(scenario.other_betas)])
    return float(_sinr1_kernel(b0, bc, bo, params.tau_p, params.m)[0])


def rate1_mc(
    params: SystemParams,
    dist: BetaDistribution,
    n_samples: int,
    seed: int,
) -> RateReport:
    """Monte-Carlo sum-rate bound R1.

    Stratifies over the truncated (K_a, c) cells: each cell receives a share
    of the sample budget proportional to its probability mass (at least two
    draws, so a variance estimate always exists), and its beta expectation
    is estimated from fresh i.i.d. draws of all K_a coefficients.  Cell
    substreams are derived from the master seed by cell index, so the result
    is reproducible regardless of evaluation order.
    """
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    table = _collision_cells(params.k, params.p_a, params.tau_p)
    weight_sum = sum(w for _, _, w in table.cells)
    prelog = params.prelog
    total = 0.0
    variance = 0.0
    used = 0
    for ka, c, w in table.cells:
        n_cell = max(2, round(n_samples * w / weight_sum))
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=seed, spawn_key=(ka, c))
        )
        betas = sample_betas(dist, rng, (n_cell, ka))
        vals = prelog * np.log2(
            1.0
            + _sinr1_kernel(
                betas[:, 0],
                betas[:, 1 : 1 + c],
                betas[:, 1 + c :].sum(axis=1),
                params.tau_p,
                params.m,
            )
        )
        coeff = ka * w
        total += coeff * float(vals.mean())
        variance += coeff * coeff * float(vals.var(ddof=1)) / n_cell
        used += n_cell
    return RateReport(
        bound_id=BOUND_R1,
        value=total,
        std_error=math.sqrt(variance),
        params=params,
        n_samples=used,
    )


# ---------------------------------------------------------------------------
# R2: fading parameters averaged out, collisions kept explicit
# ---------------------------------------------------------------------------


def sinr2(c, k_active, params: SystemParams, moments: BetaMoments):
    """Conditional SINR with the fading parameters replaced by their moments.

    Valid for 0 <= c <= k_active - 1; c and k_active may be numpy arrays
    (broadcasting applies).  The denominator averages the explicit form of
    :func:`sinr1` over the interferers' coefficients and the inverse
    moments of the reference coefficient:

        tau_p (m-1) c E[b^2] E[b^-2]
        + E[b^-1] (1 + tau_p c E[b])
        + c E[b] (E[b^-2] + tau_p E[b^-1] + tau_p E[b^-2] E[b] (c-1))
        + (1 + (k_active-c-1) E[b]) (E[b^-2] + tau_p E[b^-1] + tau_p c E[b] E[b^-2])
    """
    c = np.asarray(c, dtype=float)
    ka = np.asarray(k_active, dtype=float)
    if np.any(c < 0) or np.any(c > ka - 1):
        raise ValueError("need 0 <= c <= k_active - 1")
    m1, m2 = moments.mean, moments.mean_sq
    i1, i2 = moments.inv_mean, moments.inv_sq_mean
    tp = params.tau_p
    den = (
        tp * (params.m - 1) * c * m2 * i2
        + i1 * (1.0 + tp * c * m1)
        + c * m1 * (i2 + tp * i1 + tp * i2 * m1 * (c - 1.0))
        + (1.0 + (ka - c - 1.0) * m1) * (i2 + tp * i1 + tp * c * m1 * i2)
    )
    out = tp * (params.m - 1) / den
    return float(out) if out.ndim == 0 else out


def rate2(params: SystemParams, moments: BetaMoments) -> RateReport:
    """Semi-analytic sum-rate bound R2: deterministic double binomial sum."""
    table = _collision_cells(params.k, params.p_a, params.tau_p)
    prelog = params.prelog
    ka_arr = np.array([ka for ka, _, _ in table.cells], dtype=float)
    c_arr = np.array([c for _, c, _ in table.cells], dtype=float)
    w_arr = np.array([w for _, _, w in table.cells])
    rates = prelog * np.log2(1.0 + sinr2(c_arr, ka_arr, params, moments))
    value = float(np.sum(w_arr * ka_arr * rates))
    return RateReport(
        bound_id=BOUND_R2, value=value, std_error=0.0, params=params, n_samples=0
    )


# ---------------------------------------------------------------------------
# R3: collision process averaged inside the SINR denominator
# ---------------------------------------------------------------------------


def sinr3_value(tau_p, p_a, k: int, m: int, moments: BetaMoments):
    """Closed-form SINR with collisions and activity averaged in the denominator.

    Array-polymorphic in tau_p and p_a (used for grid sweeps).  Requires the
    expected number of active terminals p_a*k >= 1 so that the mean collider
    count (p_a*k - 1)/tau_p is nonnegative.
    """
    tau_p = np.asarray(tau_p, dtype=float)
    p_a = np.asarray(p_a, dtype=float)
    if np.any(p_a * k < 1.0):
        raise ValueError("sinr3 requires p_a * k >= 1 (nonnegative mean collider count)")
    m1, m2 = moments.mean, moments.mean_sq
    i1, i2 = moments.inv_mean, moments.inv_sq_mean
    kappa = p_a * k - 1.0
    den = (
        i2
        + (m - 1) * kappa * m2 * i2
        + 2.0 * kappa * m1 * i2 * (1.0 - m1 * (1.0 - 1.0 / tau_p))
        + m1 * m1 * i2 * p_a * p_a * k * (k - 1.0)
        + (1.0 + kappa * m1 * i1) * (1.0 + tau_p)
    )
    out = tau_p * (m - 1) / den
    return float(out) if out.ndim == 0 else out


def sinr3(params: SystemParams, moments: BetaMoments) -> float:
    return sinr3_value(params.tau_p, params.p_a, params.k, params.m, moments)


def rate3_value(tau_p, p_a, k: int, tau_u: int, m: int, moments: BetaMoments):
    """Closed-form sum rate p_a k (tau_u - tau_p)/tau_u log2(1 + sinr3)."""
    tau_p = np.asarray(tau_p, dtype=float)
    p_a = np.asarray(p_a, dtype=float)
    out = (
        p_a
        * k
        * (tau_u - tau_p)
        / tau_u
        * np.log2(1.0 + sinr3_value(tau_p, p_a, k, m, moments))
    )
    return float(out) if out.ndim == 0 else out


def rate3(params: SystemParams, moments: BetaMoments) -> RateReport:
    value = rate3_value(
        params.tau_p, params.p_a, params.k, params.tau_u, params.m, moments
    )
    return RateReport(
        bound_id=BOUND_R3, value=value, std_error=0.0, params=params, n_samples=0
    )


# ---------------------------------------------------------------------------
# Asymptotic SINR: dominant terms of sinr3 for large m, tau, and load
# ---------------------------------------------------------------------------


def sinr_asym_value(tau_p, p_a, k: int, m: int, moments: BetaMoments):
    """Dominant-term approximation of :func:`sinr3_value`.

        m tau_p / ( E[b^2] E[b^-2] m k p_a
                    + E[b]^2 E[b^-2] p_a^2 k^2
                    + E[b] E[b^-1] p_a k tau_p )

    Accurate in the regime of many antennas, long slots, and p_a*k >> 1.
    """
    tau_p = np.asarray(tau_p, dtype=float)
    p_a = np.asarray(p_a, dtype=float)
    m1, m2 = moments.mean, moments.mean_sq
    i1, i2 = moments.inv_mean, moments.inv_sq_mean
    pak = p_a * k
    den = m2 * i2 * m * pak + m1 * m1 * i2 * pak * pak + m1 * i1 * pak * tau_p
    out = m * tau_p / den
    return float(out) if out.ndim == 0 else out


def sinr_asym(params: SystemParams, moments: BetaMoments) -> float:
    return sinr_asym_value(params.tau_p, params.p_a, params.k, params.m, moments)
