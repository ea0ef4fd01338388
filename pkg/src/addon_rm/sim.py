"""Bernoulli purchase simulation under a fixed policy.

Random numbers come from a counter-based generator (Philox) keyed by the run
seed. Period ``t`` owns a fixed block of counters, and inside that block the
uniforms are laid out as::

    [core 1..N | supportive 1..M | add-on trials (m, j) for m in 1..M, j in 1..N]

so every draw is addressed by (seed, period, product, trial) and does not
depend on how many periods were simulated before it or in what batch size.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .demand import Instance
from .policy import Policy

_WORDS_PER_COUNTER = 4  # Philox4x64 emits four 64-bit words per counter value
_TO_UNIT = 1.0 / (1 << 53)


class PeriodStreams:
    """Deterministic uniform draws addressed by period."""

    def __init__(self, seed: int, n_core: int, n_supportive: int):
        self.seed = int(seed)
        self.n_core = n_core
        self.n_supportive = n_supportive
        self.width = n_core + n_supportive + n_core * n_supportive
        self.blocks = -(-self.width // _WORDS_PER_COUNTER)
        self._key = np.random.SeedSequence(self.seed).generate_state(2, np.uint64)

    def uniforms(self, first_period: int, n_periods: int = 1) -> np.ndarray:
        """Uniforms in [0, 1) for periods ``first_period .. first_period + n_periods - 1``.

        Shape ``(n_periods, width)``. Periods are 1-based.
        """
        if first_period < 1:
            raise ValueError("periods are 1-based")
        counter = (first_period - 1) * self.blocks
        bitgen = np.random.Philox(key=self._key, counter=[counter, 0, 0, 0])
        raw = bitgen.random_raw(n_periods * self.blocks * _WORDS_PER_COUNTER)
        raw = raw.reshape(n_periods, self.blocks * _WORDS_PER_COUNTER)[:, :self.width]
        return (raw >> np.uint64(11)).astype(np.float64) * _TO_UNIT


@dataclass(frozen=True)
class PeriodObservation:
    core_purchases: np.ndarray               # (N,) bool
    supportive_primary_purchases: np.ndarray  # (M,) bool
    addon_trials: np.ndarray                 # (M, D) bool, D = core purchases this period
    revenue: float

    @property
    def n_core_purchases(self) -> int:
        return int(self.core_purchases.sum())


@dataclass(frozen=True)
class PolicyProbabilities:
    """Purchase probabilities and prices implied by a policy, flattened for simulation."""

    core_prob: np.ndarray
    core_price: np.ndarray
    supp_prob: np.ndarray
    supp_price: np.ndarray
    addon_prob: np.ndarray
    addon_price: np.ndarray

    @classmethod
    def build(cls, instance: Instance, policy: Policy) -> "PolicyProbabilities":
        idx = policy.validate(instance)
        d = instance.demand
        n, m = instance.n_core, instance.n_supportive
        supp_price = np.asarray(policy.supportive_prices, dtype=float)
        addon_prob = np.empty(m)
        addon_price = np.empty(m)
        for j in range(m):
            if idx.flags[j]:
                addon_prob[j] = d.beta_addon_discount[j, idx.addon[j]]
                addon_price[j] = policy.addon_prices[j]
            else:
                addon_prob[j] = d.beta_addon_original[j, idx.supportive[j]]
                addon_price[j] = supp_price[j]
        return cls(
            core_prob=d.alpha_core[np.arange(n), idx.core],
            core_price=np.asarray(policy.core_prices, dtype=float),
            supp_prob=d.alpha_supportive[np.arange(m), idx.supportive],
            supp_price=supp_price,
            addon_prob=addon_prob,
            addon_price=addon_price,
        )


def observe(probs: PolicyProbabilities, u: np.ndarray) -> PeriodObservation:
    """Turn one period's uniforms into purchases."""
    n = probs.core_prob.size
    m = probs.supp_prob.size
    core = u[:n] < probs.core_prob
    supp = u[n:n + m] < probs.supp_prob
    d = int(core.sum())
    trials = u[n + m:].reshape(m, n)[:, :d] < probs.addon_prob[:, None]
    revenue = (float(probs.core_price @ core) + float(probs.supp_price @ supp)
               + float(probs.addon_price @ trials.sum(axis=1)))
    return PeriodObservation(core, supp, trials, revenue)


def simulate_period(ground_truth: Instance, policy: Policy, streams: PeriodStreams,
                    period: int) -> PeriodObservation:
    probs = PolicyProbabilities.build(ground_truth, policy)
    return observe(probs, streams.uniforms(period)[0])


@dataclass(frozen=True)
class PeriodBatch:
    """Outcomes of consecutive periods under one policy."""

    core_purchases: np.ndarray   # (T, N) bool
    supportive_purchases: np.ndarray  # (T, M) bool
    addon_successes: np.ndarray  # (T, M) successful add-on trials
    revenue: np.ndarray          # (T,)

    @property
    def n_core_purchases(self) -> np.ndarray:
        return self.core_purchases.sum(axis=1)


def observe_batch(probs: PolicyProbabilities, u: np.ndarray) -> PeriodBatch:
    """Vectorized :func:`observe` over rows of uniforms."""
    n = probs.core_prob.size
    m = probs.supp_prob.size
    core = u[:, :n] < probs.core_prob
    supp = u[:, n:n + m] < probs.supp_prob
    d = core.sum(axis=1)
    trials = u[:, n + m:].reshape(-1, m, n) < probs.addon_prob[None, :, None]
    active = np.arange(n)[None, None, :] < d[:, None, None]
    successes = (trials & active).sum(axis=2)
    revenue = core @ probs.core_price + supp @ probs.supp_price + successes @ probs.addon_price
    return PeriodBatch(core, supp, successes, revenue)


def simulate_batch(ground_truth: Instance, policy: Policy, streams: PeriodStreams,
                   first_period: int, n_periods: int) -> PeriodBatch:
    """Outcomes for a run of consecutive periods; same draws as :func:`simulate_period`."""
    probs = PolicyProbabilities.build(ground_truth, policy)
    return observe_batch(probs, streams.uniforms(first_period, n_periods))


def simulate_revenues(ground_truth: Instance, policy: Policy, streams: PeriodStreams,
                      first_period: int, n_periods: int, batch: int = 65536) -> np.ndarray:
    """Realized revenue for a run of consecutive periods, in memory-bounded batches."""
    probs = PolicyProbabilities.build(ground_truth, policy)
    out = np.empty(n_periods)
    for start in range(0, n_periods, batch):
        k = min(batch, n_periods - start)
        out[start:start + k] = observe_batch(probs, streams.uniforms(first_period + start, k)).revenue
    return out
