"""Tabulated demand over finite price grids.

Every demand quantity in the model is a Bernoulli mean evaluated on a finite
price grid, so both the ground truth and the learner's optimistic estimates
are stored as plain probability matrices.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

EFFECT_MULTIPLIERS = {"low": 2.0, "medium": 3.0, "high": 4.0}

_PROB_TOL = 1e-12


class ScenarioError(ValueError):
    """Raised for a scenario that cannot describe a valid instance."""


def _frozen(values: Any, dtype: Any = float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PriceGrid:
    core_prices: np.ndarray
    supportive_prices: np.ndarray
    addon_prices: np.ndarray

    def __init__(self, core_prices: Sequence[float], supportive_prices: Sequence[float],
                 addon_prices: Sequence[float]):
        for name, values in (("core_prices", core_prices),
                             ("supportive_prices", supportive_prices),
                             ("addon_prices", addon_prices)):
            arr = _frozen(values)
            if arr.ndim != 1 or arr.size == 0:
                raise ScenarioError(f"{name} must be a non-empty list")
            if np.any(arr <= 0):
                raise ScenarioError(f"{name} must be positive")
            if np.any(np.diff(arr) <= 0):
                raise ScenarioError(f"{name} must be strictly increasing")
            object.__setattr__(self, name, arr)

    @property
    def max_price(self) -> float:
        """The largest price on any grid."""
        return float(max(self.core_prices[-1], self.supportive_prices[-1], self.addon_prices[-1]))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PriceGrid):
            return NotImplemented
        return (np.array_equal(self.core_prices, other.core_prices)
                and np.array_equal(self.supportive_prices, other.supportive_prices)
                and np.array_equal(self.addon_prices, other.addon_prices))

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class LinearDemandParams:
    intercept: float
    slope: float

    def evaluate(self, prices: np.ndarray) -> np.ndarray:
        return self.intercept + self.slope * np.asarray(prices, dtype=float)


@dataclass(frozen=True)
class DemandTable:
    alpha_core: np.ndarray           # N x |core grid|
    alpha_supportive: np.ndarray     # M x |supportive grid|
    beta_addon_discount: np.ndarray  # M x |add-on grid|
    beta_addon_original: np.ndarray  # M x |supportive grid|

    def __init__(self, alpha_core, alpha_supportive, beta_addon_discount, beta_addon_original):
        for name, values in (("alpha_core", alpha_core),
                             ("alpha_supportive", alpha_supportive),
                             ("beta_addon_discount", beta_addon_discount),
                             ("beta_addon_original", beta_addon_original)):
            arr = np.array(values, dtype=float)
            if arr.ndim == 1 and arr.size == 0:
                arr = arr.reshape(0, 0)
            if arr.ndim != 2:
                raise ScenarioError(f"{name} must be a matrix")
            if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
                raise ScenarioError(f"{name} entries must lie in [0, 1]")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DemandTable):
            return NotImplemented
        return all(np.array_equal(getattr(self, f), getattr(other, f))
                   for f in ("alpha_core", "alpha_supportive",
                             "beta_addon_discount", "beta_addon_original"))

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class Instance:
    n_core: int
    n_supportive: int
    space_limit: int
    grid: PriceGrid
    demand: DemandTable

    def __post_init__(self):
        if self.n_core < 1:
            raise ScenarioError("need at least one core product")
        if self.n_supportive < 0:
            raise ScenarioError("n_supportive must be nonnegative")
        if not 0 <= self.space_limit <= self.n_supportive:
            raise ScenarioError("space_limit must lie in [0, n_supportive]")
        n, m = self.n_core, self.n_supportive
        g = self.grid
        expected = {
            "alpha_core": (n, g.core_prices.size),
            "alpha_supportive": (m, g.supportive_prices.size),
            "beta_addon_discount": (m, g.addon_prices.size),
            "beta_addon_original": (m, g.supportive_prices.size),
        }
        for name, shape in expected.items():
            actual = getattr(self.demand, name).shape
            # an empty M=0 matrix may come in as (0, 0)
            if actual != shape and not (shape[0] == 0 and actual[0] == 0):
                raise ScenarioError(f"{name} has shape {actual}, expected {shape}")

    @property
    def max_price(self) -> float:
        return self.grid.max_price

    def with_space_limit(self, space_limit: int) -> "Instance":
        return Instance(self.n_core, self.n_supportive, space_limit, self.grid, self.demand)

    def with_demand(self, demand: DemandTable) -> "Instance":
        return Instance(self.n_core, self.n_supportive, self.space_limit, self.grid, demand)


def _primary_row(params: LinearDemandParams, prices: np.ndarray, label: str) -> np.ndarray:
    values = params.evaluate(prices)
    if np.any(values < -_PROB_TOL) or np.any(values > 1.0 + _PROB_TOL):
        raise ScenarioError(
            f"{label}: linear demand {params.intercept} + {params.slope}*p leaves [0, 1] on its grid")
    return np.clip(values, 0.0, 1.0)


def tabulate(core_params: Sequence[LinearDemandParams],
             supportive_params: Sequence[LinearDemandParams],
             addon_params: Sequence[LinearDemandParams],
             grid: PriceGrid,
             effect_multiplier: float) -> DemandTable:
    """Evaluate linear demand curves on the price grids.

    ``addon_params`` describe the add-on purchase probability at the original
    price. The discounted add-on probability is that same line scaled by
    ``effect_multiplier`` and evaluated on the add-on grid, capped at 1.
    """
    if not effect_multiplier > 0:
        raise ScenarioError("effect_multiplier must be positive")
    if len(supportive_params) != len(addon_params):
        raise ScenarioError("need one add-on demand line per supportive product")
    n_s = grid.supportive_prices.size
    n_a = grid.addon_prices.size
    alpha_core = [_primary_row(p, grid.core_prices, f"core {i + 1}")
                  for i, p in enumerate(core_params)]
    alpha_supp = [_primary_row(p, grid.supportive_prices, f"supportive {i + 1}")
                  for i, p in enumerate(supportive_params)]
    beta_orig = [_primary_row(p, grid.supportive_prices, f"add-on {i + 1}")
                 for i, p in enumerate(addon_params)]
    beta_disc = []
    for i, p in enumerate(addon_params):
        base = _primary_row(p, grid.addon_prices, f"add-on {i + 1}")
        beta_disc.append(np.minimum(1.0, effect_multiplier * base))
    m = len(supportive_params)
    return DemandTable(
        alpha_core,
        np.reshape(alpha_supp, (m, n_s)),
        np.reshape(beta_disc, (m, n_a)),
        np.reshape(beta_orig, (m, n_s)),
    )


def _params_list(raw: Any, label: str) -> list[LinearDemandParams]:
    try:
        return [LinearDemandParams(float(r["intercept"]), float(r["slope"])) for r in raw]
    except (TypeError, KeyError) as exc:
        raise ScenarioError(f"malformed {label} coefficients") from exc


def instance_from_dict(data: Mapping[str, Any]) -> Instance:
    """Build an instance from the scenario-file mapping.

    Demand is given either as linear coefficients (``core_demand``,
    ``supportive_demand``, ``addon_demand`` plus ``effect_multiplier``) or
    as explicit matrices under ``demand``.
    """
    try:
        n_core = int(data["n_core"])
        n_supp = int(data["n_supportive"])
        space_limit = int(data["space_limit"])
        grid = PriceGrid(data["core_prices"], data["supportive_prices"], data["addon_prices"])
    except KeyError as exc:
        raise ScenarioError(f"scenario is missing field {exc}") from exc

    if "demand" in data:
        d = data["demand"]
        try:
            table = DemandTable(d["alpha_core"], d["alpha_supportive"],
                                d["beta_addon_discount"], d["beta_addon_original"])
        except KeyError as exc:
            raise ScenarioError(f"explicit demand is missing {exc}") from exc
    else:
        try:
            core = _params_list(data["core_demand"], "core")
            supp = _params_list(data["supportive_demand"], "supportive")
            addon = _params_list(data["addon_demand"], "add-on")
            multiplier = float(data["effect_multiplier"])
        except KeyError as exc:
            raise ScenarioError(f"scenario is missing field {exc}") from exc
        if len(core) != n_core or len(supp) != n_supp:
            raise ScenarioError("coefficient counts do not match n_core / n_supportive")
        table = tabulate(core, supp, addon, grid, multiplier)
    return Instance(n_core, n_supp, space_limit, grid, table)


def instance_to_dict(instance: Instance) -> dict[str, Any]:
    """Serialize with explicit demand matrices."""
    d = instance.demand
    return {
        "n_core": instance.n_core,
        "n_supportive": instance.n_supportive,
        "space_limit": instance.space_limit,
        "core_prices": instance.grid.core_prices.tolist(),
        "supportive_prices": instance.grid.supportive_prices.tolist(),
        "addon_prices": instance.grid.addon_prices.tolist(),
        "demand": {
            "alpha_core": d.alpha_core.tolist(),
            "alpha_supportive": d.alpha_supportive.tolist(),
            "beta_addon_discount": d.beta_addon_discount.tolist(),
            "beta_addon_original": d.beta_addon_original.tolist(),
        },
    }


def load_scenario(path: str | Path) -> Instance:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: not valid JSON ({exc})") from exc
    return instance_from_dict(data)


def save_scenario(instance: Instance, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(instance_to_dict(instance), fh, indent=2)
        fh.write("\n")


def bundled_scenario_data() -> dict[str, Any]:
    """Raw mapping of the bundled console/video-game scenario."""
    text = resources.files("addon_rm").joinpath("data/tmall_scenario.json").read_text()
    return json.loads(text)


def bundled_scenario(effect_level: str, space_limit: int) -> Instance:
    """The 3-console, 20-game experiment instance at a given add-on effect.

    ``effect_level`` is one of ``low``, ``medium``, ``high`` (discounted add-on
    demand 2x, 3x, 4x the original-price add-on demand).
    """
    if effect_level not in EFFECT_MULTIPLIERS:
        raise ScenarioError(f"unknown effect level {effect_level!r}")
    data = bundled_scenario_data()
    data["effect_multiplier"] = EFFECT_MULTIPLIERS[effect_level]
    data["space_limit"] = space_limit
    return instance_from_dict(data)
