"""Exact revenue evaluation and brute-force optimization for small instances.

Written independently of :mod:`addon_rm.fptas` so that it can serve as the
reference the approximation scheme is checked against.
"""

from __future__ import annotations

import itertools

import numpy as np

from .demand import Instance
from .policy import Policy

DEFAULT_ENUMERATION_CAP = 10**6
_CHUNK = 4096


class EnumerationTooLarge(ValueError):
    """The core-price enumeration exceeds the configured cap."""


def exact_policy_revenue(instance: Instance, policy: Policy) -> float:
    """Expected one-period revenue of ``policy`` under the instance's demand."""
    idx = policy.validate(instance)
    d = instance.demand
    cores = np.arange(instance.n_core)
    supps = np.arange(instance.n_supportive)
    core_alpha = d.alpha_core[cores, idx.core]
    revenue = float(np.dot(core_alpha, policy.core_prices))
    gamma = float(core_alpha.sum())
    if instance.n_supportive == 0:
        return revenue
    p = np.asarray(policy.supportive_prices)
    revenue += float(np.dot(d.alpha_supportive[supps, idx.supportive], p))
    addon = 0.0
    for j in range(instance.n_supportive):
        if idx.flags[j]:
            addon += d.beta_addon_discount[j, idx.addon[j]] * policy.addon_prices[j]
        else:
            addon += d.beta_addon_original[j, idx.supportive[j]] * p[j]
    return revenue + gamma * addon


def _discount_pairs(instance: Instance) -> list[tuple[int, int]]:
    grid = instance.grid
    return [(i, a) for i, p in enumerate(grid.supportive_prices)
            for a, q in enumerate(grid.addon_prices) if q < p]


def _supportive_exact(instance: Instance, gammas: np.ndarray):
    """Exact subproblem for each gamma in ``gammas``.

    Returns revenue (G,) and decisions (supportive idx, flags, add-on idx),
    each of shape (G, M).
    """
    G = gammas.size
    m, S = instance.n_supportive, instance.space_limit
    if m == 0:
        z = np.zeros((G, 0), dtype=np.int64)
        return np.zeros(G), z, z.astype(bool), z
    grid = instance.grid
    d = instance.demand
    ps, pa = grid.supportive_prices, grid.addon_prices

    # every (product, price) option without a discount
    plain = (d.alpha_supportive * ps)[None] + gammas[:, None, None] * (d.beta_addon_original * ps)[None]
    plain_arg = plain.argmax(axis=2)
    plain_val = np.take_along_axis(plain, plain_arg[..., None], axis=2)[..., 0]

    pairs = _discount_pairs(instance)
    if pairs:
        pi = np.array([i for i, _ in pairs])
        ai = np.array([a for _, a in pairs])
        disc = ((d.alpha_supportive * ps)[:, pi])[None] \
            + gammas[:, None, None] * (d.beta_addon_discount[:, ai] * pa[ai])[None]
        pair_arg = disc.argmax(axis=2)
        disc_val = np.take_along_axis(disc, pair_arg[..., None], axis=2)[..., 0]
        disc_supp, disc_addon = pi[pair_arg], ai[pair_arg]
    else:
        disc_val = np.full((G, m), -np.inf)
        disc_supp = np.zeros((G, m), dtype=np.int64)
        disc_addon = np.full((G, m), -1, dtype=np.int64)

    gain = disc_val - plain_val
    flags = np.zeros((G, m), dtype=bool)
    if S > 0:
        order = np.argsort(-gain, axis=1, kind="stable")[:, :S]
        top = np.take_along_axis(gain, order, axis=1)
        rows = np.repeat(np.arange(G), order.shape[1])
        flags[rows, order.ravel()] = (top > 0).ravel()
    revenue = plain_val.sum(axis=1) + np.where(flags, gain, 0.0).sum(axis=1)
    supp = np.where(flags, disc_supp, plain_arg)
    addon = np.where(flags, disc_addon, -1)
    return revenue, supp, flags, addon


def brute_force_solve(instance: Instance,
                      enumeration_cap: int = DEFAULT_ENUMERATION_CAP) -> tuple[Policy, float]:
    """Exact optimum by enumerating every core price vector.

    Given the core prices, gamma is known exactly and the supportive side
    separates into per-product maxima plus a top-S choice of positive gains.
    Ties go to the lexicographically smallest core index vector.
    """
    n = instance.n_core
    n_c = instance.grid.core_prices.size
    total = n_c ** n
    if total > enumeration_cap:
        raise EnumerationTooLarge(
            f"{total} core price vectors exceed the cap {enumeration_cap}; use the FPTAS instead")
    alpha = instance.demand.alpha_core
    reward = alpha * instance.grid.core_prices
    rows = np.arange(n)

    best_val = -np.inf
    best = None
    candidates = itertools.product(range(n_c), repeat=n)
    while True:
        chunk = np.array(list(itertools.islice(candidates, _CHUNK)), dtype=np.int64)
        if chunk.size == 0:
            break
        gammas = alpha[rows, chunk].sum(axis=1)
        core_rev = reward[rows, chunk].sum(axis=1)
        supp_rev, supp, flags, addon = _supportive_exact(instance, gammas)
        total_rev = core_rev + supp_rev
        k = int(np.argmax(total_rev))
        if total_rev[k] > best_val:
            best_val = float(total_rev[k])
            best = (chunk[k], supp[k], flags[k], addon[k])

    core_idx, supp_idx, flag_row, addon_idx = best
    policy = Policy.from_indices(instance.grid, core_idx, supp_idx, flag_row, addon_idx)
    return policy, best_val
