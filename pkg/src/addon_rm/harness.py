"""Experiment orchestration: benchmarks, seed batches, regret and gap reports, CSV output."""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from . import __version__
from .demand import EFFECT_MULTIPLIERS, Instance, bundled_scenario, load_scenario
from .fptas import error_bound, fptas_solve, resolution_for_epsilon
from .learner import DEFAULT_K_CAP, Trajectory, run_learning
from .oracle import DEFAULT_ENUMERATION_CAP, brute_force_solve, exact_policy_revenue

CHECKPOINTS = (168, 672, 2016, 8760)  # one week, one month, three months, one year of hours
BEAT_WINDOW = 168
BENCHMARK_EPSILON = 1e-3
BENCHMARK_K_CAP = 100_000

LEARNING_COLUMNS = ("period", "seed", "episode", "expected_revenue", "realized_revenue",
                    "cumulative_regret")
TABLE1_COLUMNS = ("effect", "S", "regret_1w", "regret_1m", "regret_3m", "regret_1y",
                  "gap_pct", "beat_period")

MODES = ("solve-offline", "solve-oracle", "learn", "gap", "table1")


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class ExperimentConfig:
    scenario: str = "bundled:medium:6"
    mode: str = "learn"
    horizon: int = 8760
    replications: int = 1
    base_seed: int = 0
    epsilon: float = 0.1
    ucb_scale: float = 1.0
    output_path: Optional[str] = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.horizon < 1:
            raise ConfigError("horizon must be >= 1")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if not 0 < self.epsilon < 1:
            raise ConfigError("epsilon must lie in (0, 1)")
        if not self.ucb_scale > 0:
            raise ConfigError("ucb_scale must be positive")


def resolve_scenario(selector: str) -> Instance:
    """A scenario file path, or ``bundled[:effect[:S]]``."""
    if selector == "bundled" or selector.startswith("bundled:"):
        parts = selector.split(":")[1:]
        effect = parts[0] if parts else "medium"
        if effect not in EFFECT_MULTIPLIERS:
            raise ConfigError(f"unknown effect level {effect!r}")
        try:
            space = int(parts[1]) if len(parts) > 1 else 6
        except ValueError:
            raise ConfigError(f"bad space limit in {selector!r}") from None
        if not 0 <= space <= 20:
            raise ConfigError("bundled space limit must lie in [0, 20]")
        return bundled_scenario(effect, space)
    if not os.path.exists(selector):
        raise ConfigError(f"scenario file {selector!r} not found")
    return load_scenario(selector)


@dataclass(frozen=True)
class Benchmark:
    revenue: float
    method: str  # "oracle" or "fptas-with-bound"
    bound: float  # 0 for the oracle; otherwise true optimum <= revenue + bound


def benchmark(instance: Instance, cap: int = DEFAULT_ENUMERATION_CAP) -> Benchmark:
    """Optimal one-period revenue, exact when enumeration is affordable."""
    n_vectors = instance.grid.core_prices.size ** instance.n_core
    if n_vectors <= cap:
        return Benchmark(brute_force_solve(instance, cap)[1], "oracle", 0.0)
    coarse, _ = fptas_solve(instance, 1)
    lower = exact_policy_revenue(instance, coarse)
    if lower <= 0:
        return Benchmark(0.0, "fptas-with-bound", error_bound(instance, 1))
    k = min(resolution_for_epsilon(instance, BENCHMARK_EPSILON, lower), BENCHMARK_K_CAP)
    policy, _ = fptas_solve(instance, k)
    return Benchmark(exact_policy_revenue(instance, policy), "fptas-with-bound",
                     error_bound(instance, k))


@dataclass
class RegretReport:
    checkpoints: list[tuple[int, float, float]]  # (period, mean regret %, standard error)
    per_seed_final: list[float]
    r_star: float
    r_star_method: str = "oracle"

    def at(self, period: int) -> float:
        for t, pct, _ in self.checkpoints:
            if t == period:
                return pct
        raise KeyError(period)


def compute_regret_percentage(trajectories: Trajectory | Sequence[Trajectory], r_star: float,
                              checkpoints: Iterable[int] = CHECKPOINTS,
                              r_star_method: str = "oracle") -> RegretReport:
    """Regret percentage 1 - sum_t R(Pi_t) / (R* T) at each checkpoint, averaged over runs.

    Checkpoints beyond the shortest trajectory are dropped.
    """
    if isinstance(trajectories, Trajectory):
        trajectories = [trajectories]
    if not trajectories or any(len(tr) == 0 for tr in trajectories):
        raise ValueError("need at least one nonempty trajectory")
    if not r_star > 0:
        raise ValueError("r_star must be positive")
    horizon = min(len(tr) for tr in trajectories)
    cum = np.array([np.cumsum(tr.expected_revenue[:horizon]) for tr in trajectories])
    rows = []
    for t in checkpoints:
        if t > horizon:
            continue
        pct = 100.0 * (1.0 - cum[:, t - 1] / (r_star * t))
        se = float(pct.std(ddof=1) / np.sqrt(pct.size)) if pct.size > 1 else 0.0
        rows.append((int(t), float(pct.mean()), se))
    final = [float(r_star * horizon - c) for c in cum[:, -1]]
    return RegretReport(rows, final, float(r_star), r_star_method)


def optimality_gap(instance: Instance,
                   cap: int = DEFAULT_ENUMERATION_CAP) -> tuple[float, float, float]:
    """(R*, R*_0, gap %) where R*_0 is the optimum with add-on discounts disabled."""
    r_star = benchmark(instance, cap).revenue
    r_zero = benchmark(instance.with_space_limit(0), cap).revenue
    if r_zero <= 0:
        return r_star, r_zero, 0.0
    return r_star, r_zero, 100.0 * (r_star / r_zero - 1.0)


def beat_period(expected_revenue: np.ndarray, r_zero: float,
                window: int = BEAT_WINDOW) -> Optional[int]:
    """First period whose trailing ``window``-period mean revenue exceeds ``r_zero``.

    Early periods use every period seen so far.
    """
    cum = np.concatenate([[0.0], np.cumsum(expected_revenue)])
    t = np.arange(1, expected_revenue.size + 1)
    lo = np.maximum(t - window, 0)
    trailing = (cum[t] - cum[lo]) / (t - lo)
    hits = np.flatnonzero(trailing > r_zero)
    return int(hits[0]) + 1 if hits.size else None


def _run_one(args) -> Trajectory:
    instance, horizon, epsilon, ucb_scale, seed, k_cap = args
    return run_learning(instance, horizon, epsilon, ucb_scale, seed, k_cap)


def run_replications(instance: Instance, horizon: int, seeds: Sequence[int],
                     epsilon: float = 0.1, ucb_scale: float = 1.0,
                     k_cap: int = DEFAULT_K_CAP,
                     workers: Optional[int] = None) -> list[Trajectory]:
    """Independent learning runs, one per seed, returned sorted by seed."""
    jobs = [(instance, horizon, epsilon, ucb_scale, int(s), k_cap) for s in seeds]
    workers = workers or os.cpu_count() or 1
    if workers <= 1 or len(jobs) <= 1:
        results = [_run_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, jobs))
    return sorted(results, key=lambda tr: tr.seed)


@dataclass
class Table1Row:
    effect: str
    S: int
    regret: dict[int, float] = field(default_factory=dict)
    gap_pct: float = 0.0
    beat_period: Optional[int] = None


def run_table1_suite(effect_levels: Sequence[str] = ("low", "medium", "high"),
                     space_limits: Sequence[int] = (4, 6, 8), replications: int = 100,
                     seed: int = 0, horizon: int = 8760, epsilon: float = 0.1,
                     ucb_scale: float = 0.125, workers: Optional[int] = None,
                     learn: bool = True) -> list[Table1Row]:
    """Regret percentages, optimality gaps and time-to-beat for each (effect, S) cell.

    With ``learn=False`` only the deterministic gap column is filled.
    """
    rows = []
    seeds = [seed + r for r in range(replications)]
    for effect in effect_levels:
        for s in space_limits:
            instance = bundled_scenario(effect, s)
            r_star, r_zero, gap = optimality_gap(instance)
            row = Table1Row(effect, int(s), gap_pct=gap)
            if learn and r_star > 0:
                runs = run_replications(instance, horizon, seeds, epsilon, ucb_scale,
                                        workers=workers)
                report = compute_regret_percentage(runs, r_star)
                row.regret = {t: pct for t, pct, _ in report.checkpoints}
                mean_path = np.mean([tr.expected_revenue for tr in runs], axis=0)
                row.beat_period = beat_period(mean_path, r_zero)
            rows.append(row)
    return rows


def write_learning_csv(path: str | Path, trajectories: Sequence[Trajectory],
                       r_star: float) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(LEARNING_COLUMNS)
        for tr in sorted(trajectories, key=lambda tr: tr.seed):
            regret = np.cumsum(r_star - tr.expected_revenue)
            for i in range(len(tr)):
                writer.writerow((int(tr.period[i]), tr.seed, int(tr.episode[i]),
                                 repr(float(tr.expected_revenue[i])),
                                 repr(float(tr.realized_revenue[i])),
                                 repr(float(regret[i]))))


def _fmt(x: Optional[float]) -> str:
    return "" if x is None else f"{x:.4f}"


def write_table1_csv(path: str | Path, rows: Sequence[Table1Row]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TABLE1_COLUMNS)
        for row in rows:
            writer.writerow([row.effect, row.S]
                            + [_fmt(row.regret.get(t)) for t in CHECKPOINTS]
                            + [_fmt(row.gap_pct),
                               "" if row.beat_period is None else row.beat_period])


def write_meta(output_path: str | Path, config: ExperimentConfig, **extra) -> Path:
    """Sidecar ``<basename>.meta`` with config, code version and run details."""
    meta_path = Path(output_path).with_suffix(".meta")
    payload = {"config": asdict(config), "code_version": __version__, **extra}
    with open(meta_path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return meta_path
