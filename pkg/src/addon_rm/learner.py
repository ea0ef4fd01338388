"""Episodic UCB learning of add-on discount policies.

At the start of every episode the learner builds an optimistic demand table
(empirical mean plus a truncated confidence bonus), solves it with the FPTAS
at resolution ceil(sqrt(t) / epsilon), and then plays that policy until one of
the counters the policy touches has doubled since the episode began.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .demand import DemandTable, Instance, PriceGrid
from .fptas import fptas_solve
from .oracle import exact_policy_revenue
from .policy import Policy, PolicyIndices
from .sim import PeriodObservation, PeriodStreams, PolicyProbabilities, observe

# 1e-4 gamma spacing; finer grids cost memory without measurable benefit
DEFAULT_K_CAP = 10_000

CORE, SUPP, ADDON_DISCOUNT, ADDON_ORIGINAL = "core", "supp", "addon_discount", "addon_original"
_KINDS = (CORE, SUPP, ADDON_DISCOUNT, ADDON_ORIGINAL)


@dataclass
class LearnerState:
    """Running sums and counters for every (product, price, demand type) cell.

    Means are kept as exact integer sums over integer counts.
    """

    n_core: int
    n_supportive: int
    space_limit: int
    grid: PriceGrid
    sums: dict[str, np.ndarray] = field(default_factory=dict)
    counts: dict[str, np.ndarray] = field(default_factory=dict)
    period: int = 1
    episode: int = 0

    @classmethod
    def fresh(cls, instance: Instance) -> "LearnerState":
        """Zeroed state for the structure (grids, sizes, space limit) of ``instance``."""
        n, m, g = instance.n_core, instance.n_supportive, instance.grid
        shapes = {
            CORE: (n, g.core_prices.size),
            SUPP: (m, g.supportive_prices.size),
            ADDON_DISCOUNT: (m, g.addon_prices.size),
            ADDON_ORIGINAL: (m, g.supportive_prices.size),
        }
        return cls(n, m, instance.space_limit, g,
                   sums={k: np.zeros(s, dtype=np.int64) for k, s in shapes.items()},
                   counts={k: np.zeros(s, dtype=np.int64) for k, s in shapes.items()})

    def mean(self, kind: str) -> np.ndarray:
        c = self.counts[kind]
        return np.divide(self.sums[kind], c, out=np.zeros(c.shape), where=c > 0)

    @property
    def mean_alpha_core(self) -> np.ndarray:
        return self.mean(CORE)

    @property
    def mean_alpha_supp(self) -> np.ndarray:
        return self.mean(SUPP)

    @property
    def mean_beta_discount(self) -> np.ndarray:
        return self.mean(ADDON_DISCOUNT)

    @property
    def mean_beta_original(self) -> np.ndarray:
        return self.mean(ADDON_ORIGINAL)

    def structure(self, demand: DemandTable) -> Instance:
        return Instance(self.n_core, self.n_supportive, self.space_limit, self.grid, demand)


@dataclass(frozen=True)
class EpisodeSnapshot:
    start_period: int
    policy: Policy
    resolution: int
    k_capped: bool
    watched: tuple[tuple[str, int, int, int], ...]  # (kind, product, price index, start value)
    indices: PolicyIndices

    def thresholds(self) -> list[tuple[str, int, int, int]]:
        # a counter starting at 0 counts as doubled once it reaches 1
        return [(kind, r, c, max(2 * start, 1)) for kind, r, c, start in self.watched]


def ucb_bonus_cells(mean: np.ndarray, count: np.ndarray, t: int, ucb_scale: float) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        bonus = ucb_scale * np.sqrt(2.0 * math.log(t) / count)
    return np.where(count > 0, np.minimum(1.0, mean + bonus), 1.0)


def ucb_demand_table(state: LearnerState, ucb_scale: float = 1.0) -> DemandTable:
    """Optimistic demand: min(1, mean + scale * sqrt(2 ln t / count)); 1 for unsampled cells."""
    t = state.period
    if t < 1:
        raise ValueError("period must be >= 1")
    cells = {k: ucb_bonus_cells(state.mean(k), state.counts[k], t, ucb_scale) for k in _KINDS}
    return DemandTable(cells[CORE], cells[SUPP], cells[ADDON_DISCOUNT], cells[ADDON_ORIGINAL])


def episode_resolution(t: int, epsilon: float, k_cap: int = DEFAULT_K_CAP) -> tuple[int, bool]:
    """ceil(sqrt(t) / epsilon), capped; returns (K, whether the cap applied)."""
    k = math.ceil(round(math.sqrt(t) / epsilon, 9))
    if k > k_cap:
        return k_cap, True
    return k, False


def begin_episode(state: LearnerState, epsilon: float = 0.1, ucb_scale: float = 1.0,
                  k_cap: int = DEFAULT_K_CAP) -> EpisodeSnapshot:
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    resolution, capped = episode_resolution(state.period, epsilon, k_cap)
    optimistic = state.structure(ucb_demand_table(state, ucb_scale))
    policy, _ = fptas_solve(optimistic, resolution)
    idx = policy.validate(optimistic)
    watched = [(CORE, n, int(i), int(state.counts[CORE][n, i])) for n, i in enumerate(idx.core)]
    watched += [(SUPP, m, int(i), int(state.counts[SUPP][m, i]))
                for m, i in enumerate(idx.supportive)]
    for m in range(state.n_supportive):
        if idx.flags[m]:
            kind, col = ADDON_DISCOUNT, int(idx.addon[m])
        else:
            kind, col = ADDON_ORIGINAL, int(idx.supportive[m])
        watched.append((kind, m, col, int(state.counts[kind][m, col])))
    state.episode += 1
    return EpisodeSnapshot(state.period, policy, resolution, capped, tuple(watched), idx)


def record_observation(state: LearnerState, snapshot: EpisodeSnapshot,
                       obs: PeriodObservation) -> bool:
    """Fold one period into the state; True when the episode should end."""
    idx = snapshot.indices
    n, m = state.n_core, state.n_supportive
    d = obs.n_core_purchases
    if (obs.core_purchases.shape != (n,) or obs.supportive_primary_purchases.shape != (m,)
            or obs.addon_trials.shape != (m, d)):
        raise ValueError("observation dimensions do not match the policy")
    rows_n, rows_m = np.arange(n), np.arange(m)
    state.counts[CORE][rows_n, idx.core] += 1
    state.sums[CORE][rows_n, idx.core] += obs.core_purchases
    state.counts[SUPP][rows_m, idx.supportive] += 1
    state.sums[SUPP][rows_m, idx.supportive] += obs.supportive_primary_purchases
    if d > 0:
        successes = obs.addon_trials.sum(axis=1)
        flagged = idx.flags
        disc_rows, orig_rows = rows_m[flagged], rows_m[~flagged]
        state.counts[ADDON_DISCOUNT][disc_rows, idx.addon[flagged]] += d
        state.sums[ADDON_DISCOUNT][disc_rows, idx.addon[flagged]] += successes[flagged]
        state.counts[ADDON_ORIGINAL][orig_rows, idx.supportive[~flagged]] += d
        state.sums[ADDON_ORIGINAL][orig_rows, idx.supportive[~flagged]] += successes[~flagged]
    state.period += 1
    return any(state.counts[kind][r, c] >= limit for kind, r, c, limit in snapshot.thresholds())


@dataclass
class Trajectory:
    period: np.ndarray
    episode: np.ndarray
    expected_revenue: np.ndarray
    realized_revenue: np.ndarray
    policies: list[Policy]
    resolutions: list[int]
    k_capped: bool
    seed: int
    final_state: Optional[LearnerState] = None

    def __len__(self) -> int:
        return self.period.size


def run_learning(ground_truth: Instance, horizon: int, epsilon: float = 0.1,
                 ucb_scale: float = 1.0, seed: int = 0, k_cap: int = DEFAULT_K_CAP,
                 chunk: int = 256) -> Trajectory:
    """Play ``horizon`` periods against ``ground_truth``.

    ``expected_revenue[t]`` is the exact expected revenue of the policy used in
    period t, so regret can be computed without simulation noise.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    state = LearnerState.fresh(ground_truth)
    streams = PeriodStreams(seed, ground_truth.n_core, ground_truth.n_supportive)
    episode = np.empty(horizon, dtype=np.int64)
    expected = np.empty(horizon)
    realized = np.empty(horizon)
    policies: list[Policy] = []
    resolutions: list[int] = []
    capped = False

    snapshot = None
    probs = None
    value = 0.0
    block = None
    block_start = 0
    for t in range(1, horizon + 1):
        if snapshot is None:
            snapshot = begin_episode(state, epsilon, ucb_scale, k_cap)
            policies.append(snapshot.policy)
            resolutions.append(snapshot.resolution)
            capped |= snapshot.k_capped
            probs = PolicyProbabilities.build(ground_truth, snapshot.policy)
            value = exact_policy_revenue(ground_truth, snapshot.policy)
        if block is None or t - block_start >= block.shape[0]:
            block_start = t
            block = streams.uniforms(t, min(chunk, horizon - t + 1))
        obs = observe(probs, block[t - block_start])
        episode[t - 1] = state.episode
        expected[t - 1] = value
        realized[t - 1] = obs.revenue
        if record_observation(state, snapshot, obs):
            snapshot = None

    return Trajectory(np.arange(1, horizon + 1), episode, expected, realized,
                      policies, resolutions, capped, int(seed), state)
