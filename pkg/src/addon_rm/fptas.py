"""Approximation scheme for the add-on discount pricing problem.

The supportive-product revenue depends on core prices only through the
expected number of core purchases per period, gamma. We tabulate the optimal
supportive revenue on the grid gamma = 0, 1/K, ..., N (greedy top-S add-on
selection at each point) and then choose core prices by backward induction
over rounded gamma. Gamma is carried as an integer grid index throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .demand import Instance
from .policy import Policy


@dataclass(frozen=True)
class SubproblemGrid:
    """Optimal supportive revenue and decisions at every gamma grid point.

    Decision arrays have shape ``(M, N*K + 1)``; ``addon_idx`` is -1 where
    the product carries no discount.
    """

    resolution: int
    gamma_points: np.ndarray
    values: np.ndarray
    supportive_idx: np.ndarray
    addon_flags: np.ndarray
    addon_idx: np.ndarray

    def decision(self, point: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(supportive price indices, flags, add-on price indices) at grid index ``point``."""
        return (self.supportive_idx[:, point], self.addon_flags[:, point],
                self.addon_idx[:, point])


def _discount_lookup(instance: Instance) -> tuple[np.ndarray, np.ndarray]:
    """Best discounted add-on revenue attainable below each supportive price.

    Returns ``(best, arg)`` of shape ``(M, |supportive grid|)``: the largest
    beta'(p') * p' over add-on prices p' strictly below p, and the first index
    attaining it. ``best`` is -inf and ``arg`` is -1 where no such p' exists.
    """
    grid = instance.grid
    m = instance.n_supportive
    unit = instance.demand.beta_addon_discount * grid.addon_prices  # M x A
    n_s = grid.supportive_prices.size
    best = np.full((m, n_s), -np.inf)
    arg = np.full((m, n_s), -1, dtype=np.int64)
    for j, p in enumerate(grid.supportive_prices):
        feasible = np.flatnonzero(grid.addon_prices < p)
        if feasible.size == 0 or m == 0:
            continue
        sub = unit[:, feasible]
        k = np.argmax(sub, axis=1)
        best[:, j] = sub[np.arange(m), k]
        arg[:, j] = feasible[k]
    return best, arg


def solve_subproblem_grid(instance: Instance, resolution: int) -> SubproblemGrid:
    if resolution < 1:
        raise ValueError("resolution must be a positive integer")
    K = int(resolution)
    n, m, S = instance.n_core, instance.n_supportive, instance.space_limit
    n_points = n * K + 1
    gammas = np.arange(n_points) / K
    grid = instance.grid
    d = instance.demand

    if m == 0:
        empty_i = np.zeros((0, n_points), dtype=np.int64)
        return SubproblemGrid(K, gammas, np.zeros(n_points), empty_i,
                              np.zeros((0, n_points), dtype=bool), empty_i)

    primary = d.alpha_supportive * grid.supportive_prices  # M x S_grid
    addon_orig = d.beta_addon_original * grid.supportive_prices
    addon_disc, addon_arg = _discount_lookup(instance)

    # step a: no discount
    plain = primary[:, None, :] + gammas[None, :, None] * addon_orig[:, None, :]
    plain_arg = np.argmax(plain, axis=2)
    r_plain = np.take_along_axis(plain, plain_arg[:, :, None], axis=2)[:, :, 0]

    # step b: discounted add-on at some p' < p; gamma >= 0 so the best p' for
    # a fixed p does not depend on gamma
    with np.errstate(invalid="ignore"):
        disc = primary[:, None, :] + gammas[None, :, None] * addon_disc[:, None, :]
    disc = np.where(np.isfinite(addon_disc)[:, None, :], disc, -np.inf)
    disc_arg = np.argmax(disc, axis=2)
    r_disc = np.take_along_axis(disc, disc_arg[:, :, None], axis=2)[:, :, 0]

    # step c: top-S strictly positive gains, ties to the lower product index
    gain = r_disc - r_plain
    order = np.argsort(-gain, axis=0, kind="stable")
    rank = np.empty_like(order)
    np.put_along_axis(rank, order, np.arange(m)[:, None].repeat(n_points, axis=1), axis=0)
    flags = (rank < S) & (gain > 0)

    # step d
    values = r_plain.sum(axis=0) + np.where(flags, gain, 0.0).sum(axis=0)

    supp_idx = np.where(flags, disc_arg, plain_arg)
    chosen_addon = np.take_along_axis(addon_arg, disc_arg, axis=1)
    addon_idx = np.where(flags, chosen_addon, -1)
    return SubproblemGrid(K, gammas, values, supp_idx, flags, addon_idx)


def rounded_demand_index(alpha: np.ndarray, resolution: int) -> np.ndarray:
    """alpha rounded to the nearest multiple of 1/K, as an integer count of 1/K steps.

    Halves round away from zero.
    """
    return np.floor(np.asarray(alpha, dtype=float) * resolution + 0.5).astype(np.int64)


def solve_master_dp(instance: Instance, subgrid: SubproblemGrid) -> tuple[Policy, float]:
    """Backward induction over core products with the tabulated supportive revenue as boundary."""
    K = subgrid.resolution
    n = instance.n_core
    n_points = n * K + 1
    if subgrid.values.size != n_points:
        raise ValueError("subproblem grid does not match the instance size")
    prices = instance.grid.core_prices
    alpha = instance.demand.alpha_core
    reward = alpha * prices  # N x C
    step = rounded_demand_index(alpha, K)

    value_next = subgrid.values.astype(float)
    choices = np.empty((n, n_points), dtype=np.int64)
    points = np.arange(n_points)
    for k in range(n - 1, -1, -1):
        target = points[None, :] + step[k][:, None]  # C x G
        reachable = target < n_points
        cont = np.where(reachable, value_next[np.minimum(target, n_points - 1)], -np.inf)
        cand = reward[k][:, None] + cont
        choices[k] = np.argmax(cand, axis=0)
        value_next = cand[choices[k], points]

    approx_revenue = float(value_next[0])
    core_idx = np.empty(n, dtype=np.int64)
    g = 0
    for k in range(n):
        core_idx[k] = choices[k, g]
        g += int(step[k, core_idx[k]])
    supp, flags, addon = subgrid.decision(g)
    policy = Policy.from_indices(instance.grid, core_idx, supp, flags, addon)
    return policy, approx_revenue


def fptas_solve(instance: Instance, resolution: int) -> tuple[Policy, float]:
    """Approximately optimal policy and its approximate revenue V_1(0)."""
    return solve_master_dp(instance, solve_subproblem_grid(instance, resolution))


def _ceil(x: float) -> int:
    # guard against 48000.000000000004-style float noise
    return math.ceil(round(x, 9))


def resolution_for_epsilon(instance: Instance, epsilon: float, revenue_lower_bound: float) -> int:
    """Grid resolution that makes the scheme (1 - epsilon)-optimal given OPT >= lower bound."""
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if not revenue_lower_bound > 0:
        raise ValueError("revenue lower bound must be positive")
    scale = instance.max_price * instance.n_supportive * instance.n_core
    return max(1, _ceil(scale / (revenue_lower_bound * epsilon)))


def error_bound(instance: Instance, resolution: int) -> float:
    """Worst-case revenue loss p_max * M * N / K of the scheme at this resolution."""
    return instance.max_price * instance.n_supportive * instance.n_core / resolution
