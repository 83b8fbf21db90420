"""First-principles slot-level Monte-Carlo simulation.

Each slot draws terminal activity (Bernoulli p_a per terminal), a uniform
pilot index per active terminal, a large-scale coefficient per active
terminal, i.i.d. complex-Gaussian channel vectors, and the noisy pilot
observations from which the base station forms MMSE channel estimates.
Pilots enter only through their index: the sequences are orthogonal by
assumption, so correlating the received pilot block against pilot t yields
the sufficient statistic

    y_t = sqrt(tau_p) * sum_{j chose t} h_j + n,   n ~ CN(0, I_m),

and no waveforms need to be simulated.  Noise is normalized to unit
variance per antenna; the coefficients beta absorb transmit power.

Two SINRs are attached to every active terminal:

* sinr_realized — computed from the realized estimate norm, with the
  interference and estimation-error powers at their conditional means given
  the estimate.  Random through the estimate; its spread shrinks as
  1/sqrt(m) by channel hardening.
* sinr_effective — the use-and-forget SINR of the realized scenario
  (activity, pilot choices, coefficients), with the deterministic combining
  gain in the numerator.  This is exactly the quantity the analytic bound
  R1 averages, so slot averages of the resulting rate estimate the same
  target as :func:`ramimo.bounds.rate1_mc`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel_model import (
    BetaDistribution,
    SystemParams,
    sample_betas,
    sinr_from_estimation,
)

__all__ = [
    "SlotRealization",
    "EmpiricalRate",
    "CollisionStats",
    "simulate_slot",
    "effective_sinrs",
    "empirical_rate",
    "collision_stats",
    "channel_hardening_stat",
]

_BATCH_SLOTS = 20000


@dataclass(frozen=True)
class SlotRealization:
    """Full physical-layer realization of one uplink slot.

    Arrays indexed by active terminal (in ascending terminal order):
    pilot_index in 0..tau_p-1, betas, channels (k_active, m) complex,
    estimates (k_active, m) complex MMSE estimates, and the two SINR
    conventions described in the module docstring.
    """

    active_flags: np.ndarray
    pilot_index: np.ndarray
    betas: np.ndarray
    channels: np.ndarray
    estimates: np.ndarray
    sinr_realized: np.ndarray
    sinr_effective: np.ndarray

    @property
    def k_active(self) -> int:
        return int(self.active_flags.sum())


@dataclass(frozen=True)
class EmpiricalRate:
    """Slot-averaged sum rate with its Monte-Carlo standard error."""

    value: float
    std_error: float
    n_slots: int


@dataclass(frozen=True)
class CollisionStats:
    """Per-slot activity and collision counts for distribution tests.

    k_active: active count per slot.  ref_colliders: number of same-pilot
    partners of the lowest-indexed active terminal, -1 for empty slots (the
    reference rule is independent of the pilot draws, so the conditional law
    of ref_colliders given k_active is Binom(k_active - 1, 1/tau_p)).
    pilot_counts: histogram of all pilot choices over the run.
    """

    k_active: np.ndarray
    ref_colliders: np.ndarray
    pilot_counts: np.ndarray


def _complex_gaussian(rng: np.random.Generator, shape, variance) -> np.ndarray:
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return np.sqrt(np.asarray(variance) / 2.0) * (re + 1j * im)


def effective_sinrs(betas: np.ndarray, pilots: np.ndarray, m: int, tau_p: int) -> np.ndarray:
    """Use-and-forget SINR of every active terminal in one slot.

    betas and pilots are aligned arrays over the slot's active terminals.
    """
    betas = np.asarray(betas, dtype=float)
    pilots = np.asarray(pilots)
    out = np.empty(betas.size)
    total = float(betas.sum())
    for i in range(betas.size):
        same = (pilots == pilots[i]) & (np.arange(betas.size) != i)
        colliders = betas[same]
        group_sum = betas[i] + float(colliders.sum())
        out[i] = sinr_from_estimation(
            betas[i], colliders, total - group_sum, m, tau_p
        )
    return out


def simulate_slot(
    params: SystemParams, dist: BetaDistribution, rng: np.random.Generator
) -> SlotRealization:
    """Draw one slot end to end and attach per-terminal SINRs."""
    active = rng.random(params.k) < params.p_a
    n_act = int(active.sum())
    pilots = rng.integers(0, params.tau_p, size=n_act)
    betas = sample_betas(dist, rng, n_act)
    channels = _complex_gaussian(rng, (n_act, params.m), betas[:, None])
    noise = _complex_gaussian(rng, (params.tau_p, params.m), 1.0)

    # sufficient statistic per pilot, then per-terminal MMSE scaling of it
    y = noise.copy()
    for t in range(params.tau_p):
        sel = pilots == t
        if sel.any():
            y[t] += math.sqrt(params.tau_p) * channels[sel].sum(axis=0)

    estimates = np.zeros_like(channels)
    sinr_realized = np.empty(n_act)
    for i in range(n_act):
        same = pilots == pilots[i]
        group = betas[same]
        group_sum = float(group.sum())
        scale = math.sqrt(params.tau_p) * betas[i] / (1.0 + params.tau_p * group_sum)
        estimates[i] = scale * y[pilots[i]]
        # realized combining gain with conditional-mean interference powers
        nrm2 = float(np.sum(np.abs(estimates[i]) ** 2))
        err_sum = group_sum - params.tau_p * float(np.sum(group * group)) / (
            1.0 + params.tau_p * group_sum
        )
        const = err_sum + (float(betas.sum()) - group_sum) + 1.0
        leak = (float(np.sum(group * group)) - betas[i] ** 2) / betas[i] ** 2
        sinr_realized[i] = nrm2 / (const + nrm2 * leak)

    sinr_eff = effective_sinrs(betas, pilots, params.m, params.tau_p)
    return SlotRealization(
        active_flags=active,
        pilot_index=pilots,
        betas=betas,
        channels=channels,
        estimates=estimates,
        sinr_realized=sinr_realized,
        sinr_effective=sinr_eff,
    )


def _draw_scenario_batch(
    params: SystemParams, dist: BetaDistribution, n: int, rng: np.random.Generator
):
    """Activity, pilot, and beta draws for n slots, flattened over active terminals.

    Returns (slot_idx, betas, pilots) for the active terminals plus the
    per-slot active counts.  Terminal order within a slot is ascending
    index, matching :func:`simulate_slot`.
    """
    active = rng.random((n, params.k)) < params.p_a
    pilots_all = rng.integers(0, params.tau_p, size=(n, params.k))
    betas_all = sample_betas(dist, rng, (n, params.k))
    slot_idx, term_idx = np.nonzero(active)
    return (
        slot_idx,
        betas_all[slot_idx, term_idx],
        pilots_all[slot_idx, term_idx],
        active.sum(axis=1),
    )


def _batch_slot_rates(
    slot_idx: np.ndarray,
    betas: np.ndarray,
    pilots: np.ndarray,
    n_slots: int,
    params: SystemParams,
) -> np.ndarray:
    """Per-slot sum rates from flattened active-terminal arrays.

    Vectorized equivalent of summing prelog*log2(1 + effective_sinrs(...))
    within each slot: pilot-group aggregates are gathered with bincount over
    a combined (slot, pilot) id.
    """
    tp, m = params.tau_p, params.m
    gid = slot_idx * tp + pilots
    size = n_slots * tp
    group_sum = np.bincount(gid, weights=betas, minlength=size)
    group_sq = np.bincount(gid, weights=betas * betas, minlength=size)
    slot_total = np.bincount(slot_idx, weights=betas, minlength=n_slots)

    s = group_sum[gid]
    s2 = group_sq[gid]
    var_est = tp * betas * betas / (1.0 + tp * s)
    err_sum = s - tp * s2 / (1.0 + tp * s)
    other = slot_total[slot_idx] - s
    num = (m - 1) * var_est * betas * betas
    den = (m - 1) * var_est * (s2 - betas * betas) + betas * betas * (
        err_sum + other + 1.0
    )
    rates = params.prelog * np.log2(1.0 + num / den)
    return np.bincount(slot_idx, weights=rates, minlength=n_slots)


def empirical_rate(
    params: SystemParams, dist: BetaDistribution, n_slots: int, seed: int
) -> EmpiricalRate:
    """Slot-averaged empirical sum rate.

    Estimates the ergodic average that the analytic bounds sit under by
    direct simulation of the activity/pilot/fading-parameter process; the
    per-terminal rate uses the use-and-forget effective SINR, so the
    expectation coincides with the Monte-Carlo bound R1's target.  Slots are
    processed in fixed-size batches with per-batch substreams derived from
    the master seed, making the result independent of batching.
    """
    if n_slots < 1:
        raise ValueError(f"n_slots must be >= 1, got {n_slots}")
    slot_rates = np.empty(n_slots)
    done = 0
    batch_index = 0
    while done < n_slots:
        n = min(_BATCH_SLOTS, n_slots - done)
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=seed, spawn_key=(batch_index,))
        )
        slot_idx, betas, pilots, _ = _draw_scenario_batch(params, dist, n, rng)
        slot_rates[done : done + n] = _batch_slot_rates(
            slot_idx, betas, pilots, n, params
        )
        done += n
        batch_index += 1
    std_error = (
        float(slot_rates.std(ddof=1)) / math.sqrt(n_slots) if n_slots > 1 else 0.0
    )
    return EmpiricalRate(
        value=float(slot_rates.mean()), std_error=std_error, n_slots=n_slots
    )


def collision_stats(
    params: SystemParams, dist: BetaDistribution, n_slots: int, seed: int
) -> CollisionStats:
    """Activity and collision counts over n_slots simulated slots."""
    if n_slots < 1:
        raise ValueError(f"n_slots must be >= 1, got {n_slots}")
    ka = np.empty(n_slots, dtype=int)
    ref_c = np.empty(n_slots, dtype=int)
    pilot_counts = np.zeros(params.tau_p, dtype=np.int64)
    done = 0
    batch_index = 0
    while done < n_slots:
        n = min(_BATCH_SLOTS, n_slots - done)
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=seed, spawn_key=(batch_index,))
        )
        slot_idx, _, pilots, k_active = _draw_scenario_batch(params, dist, n, rng)
        ka[done : done + n] = k_active
        pilot_counts += np.bincount(pilots, minlength=params.tau_p)

        c = np.full(n, -1)
        if slot_idx.size:
            # lowest-indexed active terminal is first within its slot run
            first = np.unique(slot_idx, return_index=True)[1]
            ref_pilot = np.full(n, -1)
            ref_pilot[slot_idx[first]] = pilots[first]
            same = pilots == ref_pilot[slot_idx]
            c_counts = np.bincount(slot_idx[same], minlength=n) - 1
            c[k_active > 0] = c_counts[k_active > 0]
        ref_c[done : done + n] = c
        done += n
        batch_index += 1
    return CollisionStats(k_active=ka, ref_colliders=ref_c, pilot_counts=pilot_counts)


def channel_hardening_stat(m: int, beta: float, n_samples: int, seed: int) -> float:
    """Relative standard deviation of |h|^2 / (m*beta) for h ~ CN(0, beta I_m).

    Equals 1/sqrt(m) in expectation; the concentration is what makes
    per-realization rates stable at large antenna counts.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    if n_samples < 2:
        raise ValueError(f"n_samples must be >= 2, got {n_samples}")
    rng = np.random.default_rng(seed)
    h = _complex_gaussian(rng, (n_samples, m), beta)
    g = np.sum(np.abs(h) ** 2, axis=1) / (m * beta)
    return float(g.std(ddof=1) / g.mean())
