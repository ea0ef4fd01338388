import numpy as np
import pytest

from addon_rm.demand import DemandTable, Instance, PriceGrid
from addon_rm.oracle import brute_force_solve, exact_policy_revenue
from addon_rm.policy import Policy
from addon_rm.sim import (PeriodStreams, PolicyProbabilities, observe, simulate_batch,
                          simulate_period, simulate_revenues)


def _const_instance(p, n=2, m=1):
    grid = PriceGrid([300], [100], [60])
    table = DemandTable(np.full((n, 1), p), np.full((m, 1), p), np.full((m, 1), p),
                        np.full((m, 1), p))
    return Instance(n, m, m, grid, table)


def test_zero_demand_observation():
    inst = _const_instance(0.0)
    policy = Policy([300, 300], [100], [True], [60])
    obs = simulate_period(inst, policy, PeriodStreams(1, 2, 1), 1)
    assert not obs.core_purchases.any()
    assert not obs.supportive_primary_purchases.any()
    assert obs.addon_trials.shape == (1, 0)
    assert obs.revenue == 0.0


def test_certain_demand_observation():
    inst = _const_instance(1.0)
    policy = Policy([300, 300], [100], [True], [60])
    obs = simulate_period(inst, policy, PeriodStreams(1, 2, 1), 5)
    assert obs.n_core_purchases == 2
    assert obs.addon_trials.tolist() == [[True, True]]
    assert obs.revenue == 300 + 300 + 100 + 2 * 60


def test_observation_invariants(medium6):
    policy, _ = brute_force_solve(medium6)
    probs = PolicyProbabilities.build(medium6, policy)
    streams = PeriodStreams(3, 3, 20)
    u = streams.uniforms(1, 300)
    for row in u:
        obs = observe(probs, row)
        d = obs.n_core_purchases
        assert obs.addon_trials.shape == (20, d)
        expected = (probs.core_price @ obs.core_purchases
                    + probs.supp_price @ obs.supportive_primary_purchases
                    + probs.addon_price @ obs.addon_trials.sum(axis=1))
        assert obs.revenue == pytest.approx(expected)


def test_golden_stream_values():
    streams = PeriodStreams(0, 3, 20)
    assert streams.width == 83
    assert streams.uniforms(1)[0, :4].tolist() == [
        0.014067035665647709, 0.2577672456246177, 0.47156538101528966, 0.0914196711073687]
    assert streams.uniforms(8760)[0, -2:].tolist() == [0.2575579146567404, 0.29774536747393743]


def test_draws_are_addressed_by_period():
    streams = PeriodStreams(11, 3, 20)
    block = streams.uniforms(40, 25)
    for i in (0, 7, 24):
        np.testing.assert_array_equal(block[i], streams.uniforms(40 + i)[0])
    assert not np.array_equal(streams.uniforms(1), PeriodStreams(12, 3, 20).uniforms(1))


def test_batch_matches_single_periods(medium6):
    policy, _ = brute_force_solve(medium6)
    streams = PeriodStreams(5, 3, 20)
    batch = simulate_batch(medium6, policy, streams, 10, 50)
    revenues = simulate_revenues(medium6, policy, streams, 10, 50, batch=7)
    for i in range(50):
        obs = simulate_period(medium6, policy, streams, 10 + i)
        assert batch.revenue[i] == pytest.approx(obs.revenue, abs=1e-9)
        assert revenues[i] == pytest.approx(obs.revenue, abs=1e-9)
        np.testing.assert_array_equal(batch.addon_successes[i], obs.addon_trials.sum(axis=1))


def test_periods_are_one_based():
    with pytest.raises(ValueError):
        PeriodStreams(0, 1, 1).uniforms(0)


def test_cell_frequencies_converge():
    grid = PriceGrid([10, 20], [5, 7], [3, 4])
    rng = np.random.default_rng(99)
    table = DemandTable(rng.uniform(0, 1, (2, 2)), rng.uniform(0, 1, (2, 2)),
                        rng.uniform(0, 1, (2, 2)), rng.uniform(0, 1, (2, 2)))
    inst = Instance(2, 2, 1, grid, table)
    policy = Policy([10, 20], [7, 5], [True, False], [4, None])
    probs = PolicyProbabilities.build(inst, policy)
    n_periods = 10**6
    batch = simulate_batch(inst, policy, PeriodStreams(2024, 2, 2), 1, n_periods)

    def within_3se(hits, trials, p):
        se = np.sqrt(p * (1 - p) / trials)
        return abs(hits / trials - p) <= 3 * se

    for n in range(2):
        assert within_3se(batch.core_purchases[:, n].sum(), n_periods, probs.core_prob[n])
    for m in range(2):
        assert within_3se(batch.supportive_purchases[:, m].sum(), n_periods, probs.supp_prob[m])
        trials = batch.n_core_purchases.sum()
        assert within_3se(batch.addon_successes[:, m].sum(), trials, probs.addon_prob[m])


def test_mean_revenue_is_unbiased(medium6):
    policy, value = brute_force_solve(medium6)
    revenue = simulate_revenues(medium6, policy, PeriodStreams(8, 3, 20), 1, 200_000)
    se = revenue.std(ddof=1) / np.sqrt(revenue.size)
    assert abs(revenue.mean() - exact_policy_revenue(medium6, policy)) <= 3 * se
