"""Random instances and a fully naive enumerator used only by the tests."""

import itertools

import numpy as np

from addon_rm.demand import DemandTable, Instance, PriceGrid


def random_prices(rng, size, low=1.0, high=100.0):
    while True:
        prices = np.sort(np.round(rng.uniform(low, high, size), 2))
        if np.all(np.diff(prices) > 0):
            return prices


def random_instance(rng, max_core=3, max_supp=4, max_grid=4, min_supp=0):
    n = int(rng.integers(1, max_core + 1))
    m = int(rng.integers(min_supp, max_supp + 1))
    grid = PriceGrid(random_prices(rng, rng.integers(1, max_grid + 1)),
                     random_prices(rng, rng.integers(1, max_grid + 1)),
                     random_prices(rng, rng.integers(1, max_grid + 1)))
    c, s, a = grid.core_prices.size, grid.supportive_prices.size, grid.addon_prices.size
    table = DemandTable(rng.uniform(0, 1, (n, c)), rng.uniform(0, 1, (m, s)),
                        rng.uniform(0, 1, (m, a)), rng.uniform(0, 1, (m, s)))
    return Instance(n, m, int(rng.integers(0, m + 1)), grid, table)


def direct_revenue(instance, core_idx, options):
    """Revenue straight from the objective; ``options`` holds (p idx, flag, p' idx) per product."""
    d, g = instance.demand, instance.grid
    gamma = sum(d.alpha_core[n, i] for n, i in enumerate(core_idx))
    total = sum(d.alpha_core[n, i] * g.core_prices[i] for n, i in enumerate(core_idx))
    for m, (i, flag, a) in enumerate(options):
        p = g.supportive_prices[i]
        total += d.alpha_supportive[m, i] * p
        if flag:
            total += gamma * d.beta_addon_discount[m, a] * g.addon_prices[a]
        else:
            total += gamma * d.beta_addon_original[m, i] * p
    return total


def naive_optimum(instance):
    """Maximum revenue over every feasible assignment of every decision variable."""
    g = instance.grid
    options = [(i, False, -1) for i in range(g.supportive_prices.size)]
    options += [(i, True, a) for i, p in enumerate(g.supportive_prices)
                for a, q in enumerate(g.addon_prices) if q < p]
    best = -np.inf
    for core in itertools.product(range(g.core_prices.size), repeat=instance.n_core):
        for combo in itertools.product(options, repeat=instance.n_supportive):
            if sum(o[1] for o in combo) > instance.space_limit:
                continue
            best = max(best, direct_revenue(instance, core, combo))
    return best
