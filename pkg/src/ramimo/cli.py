"""Experiment runner: parameter sweeps, validation suites, CSV and plot output.

Subcommands
-----------
fig1     optimal vs heuristic (tau_p, pa*K) as a function of tau_u
fig2     bounds R1/R2/R3 evaluated at the optimal and heuristic points
sweep    bounds on a (tau_u, M) grid at a fixed or heuristic operating point
validate cross-module invariant suite; nonzero exit on any failure
scaling  heuristic scaling-law probe along three (M, tau_u) regimes
plot     render PNGs from previously written CSV files

Configs are flat ``key = value`` text files ('#' starts a comment); every
run has embedded desk-scale defaults, and --full-scale switches to the
K=800 / M in {100,400} setup.  CSV files are the contract: UTF-8, header
row, comma-separated, '.' decimal, full round-trip float precision.

Exit codes: 0 success, 1 invariant/runtime failure, 2 config error.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.stats import chisquare

from . import bounds, channel_model, optimizer, slot_sim
from .channel_model import BetaDistribution, SystemParams, analytic_moments

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "parse_config_file",
    "default_config",
    "load_config",
    "run_fig1",
    "run_fig2",
    "run_sweep",
    "run_scaling",
    "run_validate",
    "write_csv",
    "main",
]

EXPERIMENT_IDS = ("fig1", "fig2", "bounds-sweep", "validate", "scaling")
_SUBCOMMAND_TO_ID = {
    "fig1": "fig1",
    "fig2": "fig2",
    "sweep": "bounds-sweep",
    "validate": "validate",
    "scaling": "scaling",
}
CHI2_LEVEL = 0.01


class ConfigError(Exception):
    """Invalid configuration file or parameter combination."""


@dataclass(frozen=True)
class ExperimentConfig:
    experiment_id: str
    k: int
    snr_db: float
    alpha: float
    m_list: tuple[int, ...]
    tau_u_list: tuple[int, ...]
    mc_samples: int
    seed: int
    output_dir: str
    tau_p: Optional[int] = None
    pa: Optional[float] = None
    n_slots: int = 100000

    def __post_init__(self) -> None:
        if self.experiment_id not in EXPERIMENT_IDS:
            raise ConfigError(
                f"experiment_id must be one of {EXPERIMENT_IDS}, got {self.experiment_id!r}"
            )
        if not self.m_list or not self.tau_u_list:
            raise ConfigError("m and tau_u lists must be nonempty")
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        try:
            for m in self.m_list:
                for tau_u in self.tau_u_list:
                    SystemParams(
                        m=m, k=self.k, tau_u=tau_u,
                        tau_p=self.tau_p if self.tau_p is not None else 1,
                        p_a=self.pa if self.pa is not None else min(1.0, 1.0 / self.k),
                    )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.mc_samples < 1 or self.n_slots < 1:
            raise ConfigError("mc_samples and n_slots must be >= 1")

    @property
    def beta_dist(self) -> BetaDistribution:
        return BetaDistribution.from_snr_db(self.snr_db, self.alpha)


_DESK_DEFAULTS = {
    "fig1": dict(k=50, m_list=(16, 32), tau_u_list=(60, 120, 180, 240)),
    "fig2": dict(k=50, m_list=(16, 32), tau_u_list=(60, 120, 240)),
    "bounds-sweep": dict(k=50, m_list=(16, 32, 64), tau_u_list=(60, 120, 240)),
    "validate": dict(k=50, m_list=(32,), tau_u_list=(60,), tau_p=10, pa=0.2),
    "scaling": dict(k=10000, m_list=(256,), tau_u_list=(256,)),
}
_FULL_SWEEP = tuple(range(100, 1001, 100))
_FULL_DEFAULTS = {
    "fig1": dict(k=800, m_list=(100, 400), tau_u_list=_FULL_SWEEP),
    "fig2": dict(k=800, m_list=(100, 400), tau_u_list=_FULL_SWEEP),
    "bounds-sweep": dict(k=800, m_list=(100, 400), tau_u_list=_FULL_SWEEP),
    "validate": dict(k=800, m_list=(100,), tau_u_list=(300,), tau_p=100, pa=0.0625),
    "scaling": dict(k=10000, m_list=(256,), tau_u_list=(256,)),
}


def default_config(experiment_id: str, full_scale: bool = False) -> ExperimentConfig:
    if experiment_id not in EXPERIMENT_IDS:
        raise ConfigError(f"unknown experiment_id {experiment_id!r}")
    table = _FULL_DEFAULTS if full_scale else _DESK_DEFAULTS
    return ExperimentConfig(
        experiment_id=experiment_id,
        snr_db=10.0,
        alpha=0.25,
        mc_samples=20000,
        seed=1,
        output_dir="out",
        **table[experiment_id],
    )


_INT_KEYS = {"k", "mc_samples", "seed", "tau_p", "n_slots"}
_FLOAT_KEYS = {"snr_db", "alpha", "pa"}
_LIST_KEYS = {"m": "m_list", "tau_u": "tau_u_list"}
_STR_KEYS = {"experiment_id", "output_dir"}


def parse_config_file(path: str | Path) -> dict:
    """Flat key = value format; '#' comments and blank lines ignored."""
    raw: dict = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        try:
            if key in _INT_KEYS:
                raw[key] = int(value)
            elif key in _FLOAT_KEYS:
                raw[key] = float(value)
            elif key in _LIST_KEYS:
                raw[_LIST_KEYS[key]] = tuple(int(v.strip()) for v in value.split(","))
            elif key in _STR_KEYS:
                raw[key] = value
            else:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {value!r}") from exc
    return raw


def load_config(
    experiment_id: str,
    config_path: Optional[str] = None,
    seed: Optional[int] = None,
    output_dir: Optional[str] = None,
    full_scale: bool = False,
) -> ExperimentConfig:
    """Defaults, overlaid with the config file, overlaid with CLI flags."""
    cfg = default_config(experiment_id, full_scale)
    if config_path is not None:
        raw = parse_config_file(config_path)
        file_id = raw.pop("experiment_id", experiment_id)
        if file_id != experiment_id:
            raise ConfigError(
                f"config declares experiment_id={file_id!r} but the "
                f"{experiment_id!r} run was requested"
            )
        try:
            cfg = replace(cfg, **raw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
    if seed is not None:
        cfg = replace(cfg, seed=seed)
    if output_dir is not None:
        cfg = replace(cfg, output_dir=output_dir)
    return cfg


# ---------------------------------------------------------------------------
# CSV helpers
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))  # shortest round-trip decimal
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def _row_seed(seed: int, *tags: int) -> int:
    """Deterministic per-row sub-seed independent of evaluation order."""
    return int(np.random.SeedSequence([seed, *tags]).generate_state(1, np.uint64)[0])


def _heuristic_tau_p(tau_u: int) -> int:
    return max(1, round(tau_u / 3.0))


# ---------------------------------------------------------------------------
# experiment runners
# ---------------------------------------------------------------------------

FIG1_HEADER = ("tau_u", "M", "tau_p_opt", "paK_opt", "tau_p_h", "paK_h")
FIG2_HEADER = ("tau_u", "M", "point", "R1", "R1_stderr", "R2", "R3")
SWEEP_HEADER = ("tau_u", "M", "tau_p", "pa", "R1", "R1_stderr", "R2", "R3", "n_samples")
SCALING_HEADER = (
    "regime", "M", "tau_u", "paK_h", "sinr_h", "rate_h", "sinr_scaled", "rate_scaled",
)


def run_fig1(config: ExperimentConfig) -> list[tuple]:
    moments = analytic_moments(config.beta_dist)
    rows = []
    for tau_u in config.tau_u_list:
        for m in config.m_list:
            opt = optimizer.grid_optimize_r3(tau_u, m, config.k, moments)
            heur = optimizer.heuristic_params(tau_u, m, config.k, moments)
            rows.append((tau_u, m, opt.tau_p_opt, opt.pa_k_opt, heur.tau_p_h, heur.pa_k))
    rows.sort(key=lambda r: (r[0], r[1]))
    return rows


def _bounds_at(
    config: ExperimentConfig, m: int, tau_u: int, tau_p: int, p_a: float, *seed_tags: int
) -> tuple[bounds.RateReport, bounds.RateReport, bounds.RateReport]:
    params = SystemParams(m=m, k=config.k, tau_u=tau_u, tau_p=tau_p, p_a=p_a)
    moments = analytic_moments(config.beta_dist)
    r1 = bounds.rate1_mc(
        params, config.beta_dist, config.mc_samples, _row_seed(config.seed, *seed_tags)
    )
    r2 = bounds.rate2(params, moments)
    r3 = bounds.rate3(params, moments)
    return r1, r2, r3


def run_fig2(config: ExperimentConfig) -> list[tuple]:
    moments = analytic_moments(config.beta_dist)
    rows = []
    for tau_u in config.tau_u_list:
        for m in config.m_list:
            opt = optimizer.grid_optimize_r3(tau_u, m, config.k, moments)
            heur = optimizer.heuristic_params(tau_u, m, config.k, moments)
            points = {
                "opt": (opt.tau_p_opt, opt.pa_opt),
                "heur": (_heuristic_tau_p(tau_u), heur.pa_h),
            }
            for idx, (label, (tau_p, p_a)) in enumerate(sorted(points.items())):
                r1, r2, r3 = _bounds_at(config, m, tau_u, tau_p, p_a, tau_u, m, idx)
                rows.append((tau_u, m, label, r1.value, r1.std_error, r2.value, r3.value))
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    return rows


def run_sweep(config: ExperimentConfig) -> list[tuple]:
    moments = analytic_moments(config.beta_dist)
    rows = []
    for tau_u in config.tau_u_list:
        for m in config.m_list:
            if config.tau_p is not None and config.pa is not None:
                tau_p, p_a = config.tau_p, config.pa
            else:
                heur = optimizer.heuristic_params(tau_u, m, config.k, moments)
                tau_p, p_a = _heuristic_tau_p(tau_u), heur.pa_h
            r1, r2, r3 = _bounds_at(config, m, tau_u, tau_p, p_a, tau_u, m)
            rows.append(
                (tau_u, m, tau_p, p_a, r1.value, r1.std_error, r2.value, r3.value,
                 r1.n_samples)
            )
    rows.sort(key=lambda r: (r[0], r[1]))
    return rows


_SCALING_SERIES = {
    "m_dominant": [(1000, 100), (10000, 100), (100000, 100)],
    "tau_dominant": [(100, 10000), (100, 100000), (100, 1000000)],
    "balanced": [(256, 256), (1024, 1024), (4096, 4096)],
}


def run_scaling(config: ExperimentConfig) -> list[tuple]:
    moments = analytic_moments(config.beta_dist)
    rows = []
    for regime, series in _SCALING_SERIES.items():
        for row in optimizer.scaling_probe(regime, series, config.k, moments):
            rows.append(
                (regime, row.m, row.tau_u, row.pa_k, row.sinr_h, row.rate_h,
                 row.sinr_scaled, row.rate_scaled)
            )
    rows.sort(key=lambda r: (r[0], r[1] * r[2]))
    return rows


# ---------------------------------------------------------------------------
# validation suite
# ---------------------------------------------------------------------------


def chi2_gof(observed: np.ndarray, expected: np.ndarray, min_expected: float = 5.0) -> float:
    """Goodness-of-fit p-value with low-expectation bins pooled from the tails."""
    observed = np.asarray(observed, dtype=float)
    expected = np.asarray(expected, dtype=float)
    # pool from the right, then from the left, until every bin is populated
    obs, exp = list(observed), list(expected)
    while len(exp) > 1 and exp[-1] < min_expected:
        tail_e, tail_o = exp.pop(), obs.pop()
        exp[-1] += tail_e
        obs[-1] += tail_o
    while len(exp) > 1 and exp[0] < min_expected:
        head_e, head_o = exp.pop(0), obs.pop(0)
        exp[0] += head_e
        obs[0] += head_o
    if len(exp) < 2:
        return 1.0
    obs_arr, exp_arr = np.array(obs), np.array(exp)
    exp_arr *= obs_arr.sum() / exp_arr.sum()
    return float(chisquare(obs_arr, exp_arr).pvalue)


def _check_moment_oracle(config: ExperimentConfig) -> tuple[bool, str]:
    worst = 0.0
    for beta_bar in (0.1, 1.0, 10.0):
        for alpha in (0.0, 0.25, 0.5, 0.9):
            dist = BetaDistribution(beta_bar, alpha)
            a = channel_model.analytic_moments(dist)
            q = channel_model.numeric_moments(dist, 10**6)
            for name in ("mean", "mean_sq", "inv_mean", "inv_sq_mean"):
                rel = abs(getattr(a, name) - getattr(q, name)) / getattr(a, name)
                worst = max(worst, rel)
    return worst <= 1e-6, f"max moment deviation {worst:.3e} (limit 1e-06)"


def _check_substitution_identity(config: ExperimentConfig) -> tuple[bool, str]:
    rng = np.random.default_rng(config.seed)
    worst = 0.0
    for _ in range(100):
        c = int(rng.integers(0, 5))
        n_other = int(rng.integers(0, 8))
        tau_p = int(rng.integers(1, 40))
        m = int(rng.integers(2, 300))
        betas = rng.uniform(0.5, 20.0, size=1 + c + n_other)
        tau_u = tau_p + 1 + int(rng.integers(1, 50))
        scenario = bounds.CollisionScenario(
            k_active=1 + c + n_other,
            beta_0=float(betas[0]),
            collider_betas=tuple(betas[1 : 1 + c]),
            other_betas=tuple(betas[1 + c :]),
        )
        params = SystemParams(m=m, k=scenario.k_active, tau_u=tau_u, tau_p=tau_p, p_a=1.0)
        explicit = bounds.sinr1(scenario, params)
        mmse_form = channel_model.sinr_from_estimation(
            scenario.beta_0, scenario.collider_betas, sum(scenario.other_betas), m, tau_p
        )
        worst = max(worst, abs(explicit - mmse_form) / explicit)
    return worst <= 1e-10, f"max relative mismatch {worst:.3e} (limit 1e-10)"


def _check_mmse_decomposition(config: ExperimentConfig) -> tuple[bool, str]:
    rng = np.random.default_rng(config.seed + 1)
    worst = 0.0
    for _ in range(200):
        beta_0 = float(rng.uniform(0.05, 30.0))
        colliders = rng.uniform(0.05, 30.0, size=int(rng.integers(0, 6)))
        tau_p = int(rng.integers(1, 50))
        est = channel_model.mmse_variances(beta_0, colliders, tau_p)
        worst = max(worst, abs(est.var_est + est.var_err - beta_0) / beta_0)
        more_pilots = channel_model.mmse_variances(beta_0, colliders, tau_p + 1)
        if more_pilots.var_est < est.var_est:
            return False, "var_est decreased when tau_p grew"
        stronger = channel_model.mmse_variances(
            beta_0, np.append(colliders, 1.0), tau_p
        )
        if stronger.var_est > est.var_est:
            return False, "var_est increased when a collider was added"
    return worst <= 1e-12, f"max orthogonality defect {worst:.3e} (limit 1e-12)"


def _check_bound_ordering(config: ExperimentConfig) -> tuple[bool, str]:
    moments = analytic_moments(config.beta_dist)
    details = []
    ok = True
    for tau_u in config.tau_u_list:
        for m in config.m_list:
            heur = optimizer.heuristic_params(tau_u, m, config.k, moments)
            tau_p, p_a = _heuristic_tau_p(tau_u), heur.pa_h
            r1, r2, r3 = _bounds_at(config, m, tau_u, tau_p, p_a, tau_u, m, 7)
            if not (r3.value <= r2.value <= r1.value + 3.0 * r1.std_error):
                ok = False
                details.append(
                    f"violated at (tau_u={tau_u}, m={m}): "
                    f"R3={r3.value:.6g} R2={r2.value:.6g} "
                    f"R1={r1.value:.6g}±{r1.std_error:.2g}"
                )
    return ok, "; ".join(details) if details else "R3 <= R2 <= R1 + 3se at every point"


def _validation_params(config: ExperimentConfig) -> SystemParams:
    return SystemParams(
        m=config.m_list[0],
        k=config.k,
        tau_u=config.tau_u_list[0],
        tau_p=config.tau_p if config.tau_p is not None else _heuristic_tau_p(config.tau_u_list[0]),
        p_a=config.pa if config.pa is not None else min(1.0, 10.0 / config.k),
    )


def _check_collision_stats(config: ExperimentConfig) -> tuple[bool, str]:
    params = _validation_params(config)
    stats = slot_sim.collision_stats(
        params, config.beta_dist, config.n_slots, config.seed + 2
    )
    obs_ka = np.bincount(stats.k_active, minlength=params.k + 1)
    exp_ka = bounds._binom_pmf_row(params.k, params.p_a) * config.n_slots
    p_ka = chi2_gof(obs_ka, exp_ka)

    vals, counts = np.unique(stats.k_active, return_counts=True)
    modal_ka = int(vals[np.argmax(counts[vals > 0])])
    sel = stats.k_active == modal_ka
    obs_c = np.bincount(stats.ref_colliders[sel], minlength=modal_ka)
    exp_c = bounds._binom_pmf_row(modal_ka - 1, 1.0 / params.tau_p) * sel.sum()
    p_c = chi2_gof(obs_c, exp_c)

    exp_pilot = np.full(params.tau_p, stats.pilot_counts.sum() / params.tau_p)
    p_pilot = chi2_gof(stats.pilot_counts, exp_pilot)

    ok = min(p_ka, p_c, p_pilot) >= CHI2_LEVEL
    return ok, (
        f"chi2 p-values: activity {p_ka:.4f}, colliders|K_a={modal_ka} {p_c:.4f}, "
        f"pilot uniformity {p_pilot:.4f} (level {CHI2_LEVEL})"
    )


def _check_hardening(config: ExperimentConfig) -> tuple[bool, str]:
    details = []
    ok = True
    for m in (100, 400):
        stat = slot_sim.channel_hardening_stat(
            m, config.beta_dist.beta_bar, 20000, config.seed + 3
        )
        rel = abs(stat - 1.0 / math.sqrt(m)) * math.sqrt(m)
        details.append(f"M={m}: rel std {stat:.5f} vs {1.0 / math.sqrt(m):.5f}")
        ok = ok and rel <= 0.10
    return ok, "; ".join(details)


def _check_determinism(config: ExperimentConfig) -> tuple[bool, str]:
    params = _validation_params(config)
    a = slot_sim.empirical_rate(params, config.beta_dist, 2000, config.seed + 4)
    b = slot_sim.empirical_rate(params, config.beta_dist, 2000, config.seed + 4)
    r1a = bounds.rate1_mc(params, config.beta_dist, 2000, config.seed + 5)
    r1b = bounds.rate1_mc(params, config.beta_dist, 2000, config.seed + 5)
    ok = a == b and (r1a.value, r1a.std_error) == (r1b.value, r1b.std_error)
    return ok, "seeded reruns bitwise identical" if ok else "seeded reruns differ"


def _check_empirical_vs_bounds(config: ExperimentConfig) -> tuple[bool, str]:
    params = _validation_params(config)
    moments = analytic_moments(config.beta_dist)
    emp = slot_sim.empirical_rate(params, config.beta_dist, config.n_slots, config.seed + 6)
    r1 = bounds.rate1_mc(params, config.beta_dist, config.mc_samples, config.seed + 7)
    r2 = bounds.rate2(params, moments)
    r3 = bounds.rate3(params, moments)
    combined = math.hypot(emp.std_error, r1.std_error)
    ok = (
        abs(emp.value - r1.value) <= 3.0 * combined
        and emp.value >= r2.value - 3.0 * emp.std_error
        and emp.value >= r3.value - 3.0 * emp.std_error
    )
    return ok, (
        f"empirical {emp.value:.6g}±{emp.std_error:.2g} vs R1 {r1.value:.6g}±"
        f"{r1.std_error:.2g}, R2 {r2.value:.6g}, R3 {r3.value:.6g}"
    )


_VALIDATION_CHECKS = (
    ("moment-oracle-agreement", _check_moment_oracle),
    ("substitution-identity", _check_substitution_identity),
    ("mmse-decomposition", _check_mmse_decomposition),
    ("bound-ordering", _check_bound_ordering),
    ("collision-statistics", _check_collision_stats),
    ("channel-hardening", _check_hardening),
    ("determinism", _check_determinism),
    ("empirical-vs-bounds", _check_empirical_vs_bounds),
)


def run_validate(config: ExperimentConfig) -> tuple[bool, list[str]]:
    """Run every invariant check; returns overall pass and the report lines."""
    lines = []
    all_ok = True
    for name, check in _VALIDATION_CHECKS:
        ok, detail = check(config)
        all_ok = all_ok and ok
        lines.append(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    lines.append(f"{'OK' if all_ok else 'FAILED'} ({len(_VALIDATION_CHECKS)} checks)")
    return all_ok, lines


# ---------------------------------------------------------------------------
# plotting (optional post-processing over the CSV contract)
# ---------------------------------------------------------------------------


def _read_csv(path: Path) -> list[dict]:
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            return list(csv.DictReader(fh))
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc


def run_plot(out_dir: Path) -> list[Path]:
    try:
        import matplotlib
    except ImportError as exc:  # pragma: no cover - depends on environment
        raise RuntimeError(
            "plotting requires matplotlib (install the 'plot' extra)"
        ) from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    written = []
    fig1_csv = out_dir / "fig1.csv"
    if fig1_csv.exists():
        rows = _read_csv(fig1_csv)
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
        for m in sorted({int(r["M"]) for r in rows}):
            sub = [r for r in rows if int(r["M"]) == m]
            tau = [int(r["tau_u"]) for r in sub]
            ax1.plot(tau, [int(r["tau_p_opt"]) for r in sub], "o-", label=f"opt M={m}")
            ax1.plot(tau, [float(r["tau_p_h"]) for r in sub], "--", label=f"heur M={m}")
            ax2.plot(tau, [int(r["paK_opt"]) for r in sub], "o-", label=f"opt M={m}")
            ax2.plot(tau, [float(r["paK_h"]) for r in sub], "--", label=f"heur M={m}")
        ax1.set_xlabel("tau_u"); ax1.set_ylabel("pilot length"); ax1.legend()
        ax2.set_xlabel("tau_u"); ax2.set_ylabel("expected active terminals"); ax2.legend()
        fig.tight_layout()
        target = out_dir / "fig1.png"
        fig.savefig(target, dpi=120)
        plt.close(fig)
        written.append(target)

    fig2_csv = out_dir / "fig2.csv"
    if fig2_csv.exists():
        rows = _read_csv(fig2_csv)
        fig, ax = plt.subplots(figsize=(6, 4))
        for m in sorted({int(r["M"]) for r in rows}):
            for point in ("opt", "heur"):
                sub = [r for r in rows if int(r["M"]) == m and r["point"] == point]
                if not sub:
                    continue
                tau = [int(r["tau_u"]) for r in sub]
                for name, style in (("R1", "o-"), ("R2", "s--"), ("R3", "^:")):
                    ax.plot(tau, [float(r[name]) for r in sub], style,
                            label=f"{name} {point} M={m}")
        ax.set_xlabel("tau_u"); ax.set_ylabel("sum rate [bit/symbol]")
        ax.legend(fontsize=7)
        fig.tight_layout()
        target = out_dir / "fig2.png"
        fig.savefig(target, dpi=120)
        plt.close(fig)
        written.append(target)

    if not written:
        raise RuntimeError(f"no fig1.csv or fig2.csv found under {out_dir}")
    return written


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ramimo",
        description="Sum-rate bounds and simulations for random-access massive MIMO uplinks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("fig1", "fig2", "sweep", "validate", "scaling", "plot"):
        p = sub.add_parser(name)
        p.add_argument("--config", type=str, default=None, help="flat key=value config file")
        p.add_argument("--seed", type=int, default=None, help="master seed override")
        p.add_argument("--out", type=str, default=None, help="output directory override")
        p.add_argument(
            "--full-scale",
            action="store_true",
            help="use the K=800 / M in {100,400} defaults instead of desk scale",
        )
    return parser


_RUNNERS = {
    "fig1": (run_fig1, FIG1_HEADER, "fig1.csv"),
    "fig2": (run_fig2, FIG2_HEADER, "fig2.csv"),
    "sweep": (run_sweep, SWEEP_HEADER, "sweep.csv"),
    "scaling": (run_scaling, SCALING_HEADER, "scaling.csv"),
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "plot":
            out_dir = Path(args.out if args.out is not None else "out")
            for path in run_plot(out_dir):
                print(f"wrote {path}")
            return 0

        config = load_config(
            _SUBCOMMAND_TO_ID[args.command],
            config_path=args.config,
            seed=args.seed,
            output_dir=args.out,
            full_scale=args.full_scale,
        )
        out_dir = Path(config.output_dir)

        if args.command == "validate":
            ok, lines = run_validate(config)
            report = "\n".join(lines) + "\n"
            sys.stdout.write(report)
            write_path = out_dir / "validate_report.txt"
            write_path.parent.mkdir(parents=True, exist_ok=True)
            write_path.write_text(report, encoding="utf-8")
            return 0 if ok else 1

        runner, header, filename = _RUNNERS[args.command]
        rows = runner(config)
        target = out_dir / filename
        write_csv(target, header, rows)
        print(f"wrote {target} ({len(rows)} rows)")
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (OSError, RuntimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
