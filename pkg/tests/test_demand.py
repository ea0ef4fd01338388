import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from addon_rm.demand import (DemandTable, Instance, LinearDemandParams, PriceGrid, ScenarioError,
                             bundled_scenario, bundled_scenario_data, instance_from_dict,
                             load_scenario, save_scenario, tabulate)

GRID = PriceGrid([200, 400, 600, 800], [80, 100, 120, 140, 160], [80, 100, 120, 140])


def _bundled_params():
    data = bundled_scenario_data()
    as_params = lambda rows: [LinearDemandParams(r["intercept"], r["slope"]) for r in rows]
    return (as_params(data["core_demand"]), as_params(data["supportive_demand"]),
            as_params(data["addon_demand"]))


def test_appendix_console_one():
    inst = bundled_scenario("medium", 6)
    assert inst.demand.alpha_core[0, 0] == pytest.approx(0.830, abs=1e-12)


def test_appendix_game_one():
    inst = bundled_scenario("medium", 6)
    assert inst.demand.alpha_supportive[0, 1] == pytest.approx(0.0412, abs=1e-12)


def test_game_two_high_effect_discount():
    inst = bundled_scenario("high", 8)
    assert inst.demand.beta_addon_discount[1, 0] == pytest.approx(0.4992, abs=1e-12)


def test_identity_multiplier_copies_beta():
    core, supp, addon = _bundled_params()
    table = tabulate(core, supp, addon, GRID, 1.0)
    for m, p in enumerate(addon):
        np.testing.assert_allclose(table.beta_addon_discount[m], p.evaluate(GRID.addon_prices))
        np.testing.assert_allclose(table.beta_addon_original[m], p.evaluate(GRID.supportive_prices))


def test_bundled_shapes_and_grids():
    inst = bundled_scenario("medium", 6)
    assert (inst.n_core, inst.n_supportive, inst.space_limit) == (3, 20, 6)
    assert inst.grid == GRID
    assert inst.max_price == 800


def test_no_addon_baseline():
    assert bundled_scenario("low", 0).space_limit == 0


@pytest.mark.parametrize("effect,k", [("low", 2), ("medium", 3), ("high", 4)])
def test_effect_levels_scale_beta(effect, k):
    inst = bundled_scenario(effect, 8)
    _, _, addon = _bundled_params()
    for m, p in enumerate(addon):
        expected = np.minimum(1.0, k * p.evaluate(GRID.addon_prices))
        np.testing.assert_allclose(inst.demand.beta_addon_discount[m], expected)


def test_bundled_is_deterministic():
    a, b = bundled_scenario("high", 4), bundled_scenario("high", 4)
    for f in ("alpha_core", "alpha_supportive", "beta_addon_discount", "beta_addon_original"):
        assert getattr(a.demand, f).tobytes() == getattr(b.demand, f).tobytes()


def test_multiplier_is_clamped():
    table = tabulate([LinearDemandParams(0.5, 0.0)], [LinearDemandParams(0.1, 0.0)],
                     [LinearDemandParams(0.6, 0.0)], PriceGrid([1], [2], [1]), 4.0)
    assert table.beta_addon_discount[0, 0] == 1.0


def test_rejects_primary_demand_outside_unit_interval():
    with pytest.raises(ScenarioError):
        tabulate([LinearDemandParams(1.2, -1e-4)], [], [], GRID, 2.0)
    with pytest.raises(ScenarioError):
        tabulate([LinearDemandParams(0.5, 0.0)], [LinearDemandParams(0.05, -1e-3)],
                 [LinearDemandParams(0.05, 0.0)], GRID, 2.0)


def test_rejects_nonpositive_multiplier():
    with pytest.raises(ScenarioError):
        tabulate([LinearDemandParams(0.5, 0.0)], [], [], GRID, 0.0)


@pytest.mark.parametrize("prices", [[], [3, 2], [1, 1], [0, 1], [-5]])
def test_price_grid_validation(prices):
    with pytest.raises(ScenarioError):
        PriceGrid(prices, [1], [1])


def test_instance_validation():
    table = bundled_scenario("low", 4).demand
    with pytest.raises(ScenarioError):
        Instance(3, 20, 21, GRID, table)
    with pytest.raises(ScenarioError):
        Instance(2, 20, 4, GRID, table)


def test_demand_table_rejects_out_of_range():
    with pytest.raises(ScenarioError):
        DemandTable([[1.5]], np.zeros((0, 1)), np.zeros((0, 1)), np.zeros((0, 1)))


def test_tables_are_immutable():
    inst = bundled_scenario("low", 4)
    with pytest.raises(ValueError):
        inst.demand.alpha_core[0, 0] = 0.5


@given(intercept=st.floats(0.5, 1.0), slope_frac=st.floats(0.0, 1.0),
       multiplier=st.floats(0.1, 5.0))
def test_tabulate_in_range_and_monotone(intercept, slope_frac, multiplier):
    # slope chosen so the line stays in [0, 1] on the whole grid
    slope = -slope_frac * intercept / 800
    p = LinearDemandParams(intercept, slope)
    q = LinearDemandParams(intercept / 2, slope / 2)
    table = tabulate([p], [q], [q], GRID, multiplier)
    for f in ("alpha_core", "alpha_supportive", "beta_addon_discount", "beta_addon_original"):
        values = getattr(table, f)
        assert np.all((values >= 0) & (values <= 1))
        assert np.all(np.diff(values, axis=1) <= 0)


def test_scenario_round_trip(tmp_path):
    inst = bundled_scenario("medium", 6)
    path = tmp_path / "scenario.json"
    save_scenario(inst, path)
    again = load_scenario(path)
    assert again.demand == inst.demand
    assert again.grid == inst.grid
    assert again.space_limit == 6


def test_coefficient_scenario_file(tmp_path):
    data = bundled_scenario_data()
    path = tmp_path / "coeffs.json"
    path.write_text(json.dumps(data))
    assert load_scenario(path).demand == bundled_scenario("medium", 6).demand


def test_scenario_missing_field():
    data = bundled_scenario_data()
    del data["addon_prices"]
    with pytest.raises(ScenarioError):
        instance_from_dict(data)
