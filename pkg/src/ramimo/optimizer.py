"""Pilot-length and activation-probability selection.

Two routes to the operating point:

* exhaustive grid search of the closed-form bound R3 over integer pilot
  lengths and a 1/K-spaced activation grid (expected active terminals in
  integer steps), and
* a heuristic from the stationarity system of the asymptotic rate, which
  lands on tau_p = tau_u/3 and an expected active count proportional to
  sqrt(tau_u * m), with the proportionality constant set by the root of
  ln(1+x) = 2x/(1+x).

A scaling probe evaluates the heuristic along growing (m, tau_u) series to
exhibit its three asymptotic regimes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .bounds import rate3_value, sinr_asym_value
from .channel_model import BetaMoments

__all__ = [
    "HeuristicSolution",
    "OptimumPoint",
    "ScalingRow",
    "SCALING_REGIMES",
    "solve_s0",
    "heuristic_params",
    "grid_optimize_r3",
    "scaling_probe",
]

# regime -> (which of (m, tau_u) grows, SINR scaling exponent description)
SCALING_REGIMES = ("m_dominant", "tau_dominant", "balanced")


@dataclass(frozen=True)
class HeuristicSolution:
    """Closed-form operating point from the asymptotic stationarity system.

    pa_k is the raw heuristic value of the expected active count (before any
    feasibility clamping); pa_h is the activation probability actually
    usable, min(pa_k / k, 1).  clamped flags pa_k > k.  rate_h evaluates the
    asymptotic sum rate at the (possibly clamped) operating point with the
    fixed prelog 2/3.
    """

    s0: float
    tau_p_h: float
    pa_k: float
    pa_h: float
    rate_h: float
    clamped: bool


@dataclass(frozen=True)
class OptimumPoint:
    """Grid-certified maximizer of the closed-form bound R3."""

    tau_p_opt: int
    pa_opt: float
    pa_k_opt: int
    rate_opt: float
    grid_spec: str


@dataclass(frozen=True)
class ScalingRow:
    """Heuristic evaluated at one (m, tau_u) point of a scaling series.

    sinr_scaled and rate_scaled are normalized per the regime's asymptotic
    law so that both tend to constants along the series.
    """

    m: int
    tau_u: int
    pa_k: float
    sinr_h: float
    rate_h: float
    sinr_scaled: float
    rate_scaled: float


@lru_cache(maxsize=None)
def solve_s0(tolerance: float = 1e-12) -> float:
    """Root of f(x) = ln(1+x) - 2x/(1+x) on [1, 10] by bisection.

    f(1) = ln 2 - 1 < 0 and f(10) = ln 11 - 20/11 > 0 bracket the unique
    positive root (~3.92); bisection runs until the bracket width falls
    below the tolerance.
    """
    if not tolerance > 0:
        raise ValueError(f"tolerance must be positive, got {tolerance}")

    def f(x: float) -> float:
        return math.log1p(x) - 2.0 * x / (1.0 + x)

    lo, hi = 1.0, 10.0
    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:  # bracket at float resolution
            break
        if f(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def heuristic_params(
    tau_u: int, m: int, k: int, moments: BetaMoments
) -> HeuristicSolution:
    """Heuristic operating point: tau_p = tau_u/3, pa*k = sqrt(tau_u*m / (3 s0 E[b]^2 E[b^-2])).

    At this point the asymptotic SINR equals s0 exactly, which makes both
    stationarity residuals of the reduced rate function vanish.  When the
    raw pa*k exceeds k the activation probability is clamped to 1 and the
    solution flagged infeasible; the reported rate then uses the clamped
    point.
    """
    if tau_u < 3:
        raise ValueError(f"tau_u must be >= 3, got {tau_u}")
    if m < 2:
        raise ValueError(f"m must be >= 2, got {m}")
    s0 = solve_s0()
    b2_i2 = moments.mean**2 * moments.inv_sq_mean
    tau_p_h = tau_u / 3.0
    pa_k = math.sqrt(tau_u * m / (3.0 * s0 * b2_i2))
    clamped = pa_k > k
    pa_h = min(pa_k / k, 1.0)
    eff_pa_k = pa_h * k
    sinr_h = sinr_asym_value(tau_p_h, pa_h, k, m, moments)
    rate_h = eff_pa_k * (2.0 / 3.0) * math.log2(1.0 + sinr_h)
    return HeuristicSolution(
        s0=s0,
        tau_p_h=tau_p_h,
        pa_k=pa_k,
        pa_h=pa_h,
        rate_h=rate_h,
        clamped=clamped,
    )


def grid_optimize_r3(
    tau_u: int,
    m: int,
    k: int,
    moments: BetaMoments,
    tau_p_values: Sequence[int] | None = None,
    pa_k_values: Sequence[int] | None = None,
) -> OptimumPoint:
    """Exhaustive maximization of R3 over the (tau_p, pa*k) grid.

    Defaults to tau_p in 1..tau_u-1 and pa*k in 1..k; ties break to the
    first point in lexicographic (tau_p, pa) order.  The returned rate is
    certified to be the maximum over every evaluated point.
    """
    tau_p_grid = (
        np.arange(1, tau_u) if tau_p_values is None else np.asarray(tau_p_values, dtype=int)
    )
    pa_k_grid = (
        np.arange(1, k + 1) if pa_k_values is None else np.asarray(pa_k_values, dtype=int)
    )
    if tau_p_grid.size == 0 or pa_k_grid.size == 0:
        raise ValueError("empty optimization grid")
    if tau_p_grid.min() < 1 or tau_p_grid.max() >= tau_u:
        raise ValueError("tau_p grid must lie within 1..tau_u-1")
    if pa_k_grid.min() < 1 or pa_k_grid.max() > k:
        raise ValueError("pa*k grid must lie within 1..k")

    # tau_p on the slow axis so that flat argmax realizes the lexicographic
    # (tau_p, pa) first-found tie-break
    tp_mesh, pak_mesh = np.meshgrid(tau_p_grid, pa_k_grid, indexing="ij")
    rates = rate3_value(tp_mesh, pak_mesh / k, k, tau_u, m, moments)
    flat = int(np.argmax(rates))
    i, j = np.unravel_index(flat, rates.shape)
    rate_opt = float(rates[i, j])
    if rate_opt < float(rates.max()):
        raise AssertionError("grid search lost its optimality certificate")
    spec = (
        f"tau_p in {{{tau_p_grid.min()}..{tau_p_grid.max()}}}, "
        f"pa*k in {{{pa_k_grid.min()}..{pa_k_grid.max()}}}, integer steps"
    )
    return OptimumPoint(
        tau_p_opt=int(tau_p_grid[i]),
        pa_opt=float(pa_k_grid[j] / k),
        pa_k_opt=int(pa_k_grid[j]),
        rate_opt=rate_opt,
        grid_spec=spec,
    )


def scaling_probe(
    regime: str,
    series: Sequence[tuple[int, int]],
    k: int,
    moments: BetaMoments,
) -> list[ScalingRow]:
    """Evaluate the heuristic along a growing (m, tau_u) series.

    regime selects the normalization under which sinr_scaled and
    rate_scaled converge to constants:

    * "m_dominant"  (m >> tau_u): SINR falls as sqrt(tau_u/m), rate grows as tau_u;
    * "tau_dominant" (m << tau_u): SINR falls as sqrt(m/tau_u), rate grows as m;
    * "balanced"    (m ~ tau_u): SINR is flat, rate grows as sqrt(tau_u*m).

    The series must be ordered by growing scale, and k must be large enough
    that the heuristic activation never clamps (otherwise the laws break).
    """
    if regime not in SCALING_REGIMES:
        raise ValueError(f"regime must be one of {SCALING_REGIMES}, got {regime!r}")
    if len(series) < 2:
        raise ValueError("series must contain at least two (m, tau_u) points")
    scales = [m * tau_u for m, tau_u in series]
    if any(b <= a for a, b in zip(scales, scales[1:])):
        raise ValueError("series must be ordered by strictly growing scale")

    rows = []
    for m, tau_u in series:
        sol = heuristic_params(tau_u, m, k, moments)
        if sol.clamped:
            raise ValueError(
                f"heuristic activation clamped at (m={m}, tau_u={tau_u}); "
                "increase k for scaling probes"
            )
        sinr_h = sinr_asym_value(sol.tau_p_h, sol.pa_h, k, m, moments)
        if regime == "m_dominant":
            sinr_scaled = sinr_h * math.sqrt(m / tau_u)
            rate_scaled = sol.rate_h / tau_u
        elif regime == "tau_dominant":
            sinr_scaled = sinr_h * math.sqrt(tau_u / m)
            rate_scaled = sol.rate_h / m
        else:
            sinr_scaled = sinr_h
            rate_scaled = sol.rate_h / math.sqrt(tau_u * m)
        rows.append(
            ScalingRow(
                m=m,
                tau_u=tau_u,
                pa_k=sol.pa_k,
                sinr_h=sinr_h,
                rate_h=sol.rate_h,
                sinr_scaled=sinr_scaled,
                rate_scaled=rate_scaled,
            )
        )
    return rows
