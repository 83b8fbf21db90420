"""Sum-rate bounds, parameter optimization, and slot-level simulation for
random-access massive MIMO uplinks with intra-cell pilot collisions."""

from .bounds import (
    BOUND_ASYM,
    BOUND_R1,
    BOUND_R2,
    BOUND_R3,
    BinomialSpec,
    CollisionScenario,
    RateReport,
    binom_log_pmf,
    rate1_mc,
    rate2,
    rate3,
    sinr1,
    sinr2,
    sinr3,
    sinr_asym,
)
from .channel_model import (
    BetaDistribution,
    BetaMoments,
    EstimationStats,
    SystemParams,
    analytic_moments,
    mmse_variances,
    numeric_moments,
    sample_beta,
    sample_betas,
    sinr_from_estimation,
)
from .optimizer import (
    HeuristicSolution,
    OptimumPoint,
    ScalingRow,
    grid_optimize_r3,
    heuristic_params,
    scaling_probe,
    solve_s0,
)
from .slot_sim import (
    CollisionStats,
    EmpiricalRate,
    SlotRealization,
    channel_hardening_stat,
    collision_stats,
    effective_sinrs,
    empirical_rate,
    simulate_slot,
)

__version__ = "0.1.0"

__all__ = [
    "BOUND_ASYM",
    "BOUND_R1",
    "BOUND_R2",
    "BOUND_R3",
    "BetaDistribution",
    "BetaMoments",
    "BinomialSpec",
    "CollisionScenario",
    "CollisionStats",
    "EmpiricalRate",
    "EstimationStats",
    "HeuristicSolution",
    "OptimumPoint",
    "RateReport",
    "ScalingRow",
    "SlotRealization",
    "SystemParams",
    "analytic_moments",
    "binom_log_pmf",
    "channel_hardening_stat",
    "collision_stats",
    "effective_sinrs",
    "empirical_rate",
    "grid_optimize_r3",
    "heuristic_params",
    "mmse_variances",
    "numeric_moments",
    "rate1_mc",
    "rate2",
    "rate3",
    "sample_beta",
    "sample_betas",
    "scaling_probe",
    "simulate_slot",
    "sinr1",
    "sinr2",
    "sinr3",
    "sinr_asym",
    "sinr_from_estimation",
    "solve_s0",
]
