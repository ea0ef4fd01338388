"""Pricing and add-on selection decisions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .demand import Instance, PriceGrid


class PolicyError(ValueError):
    """Raised for a policy that is infeasible for its instance."""


@dataclass(frozen=True)
class PolicyIndices:
    """A policy expressed as grid indices; ``addon`` is -1 where no discount is offered."""

    core: np.ndarray
    supportive: np.ndarray
    flags: np.ndarray
    addon: np.ndarray


@dataclass(frozen=True)
class Policy:
    core_prices: tuple[float, ...]
    supportive_prices: tuple[float, ...]
    addon_flags: tuple[bool, ...]
    addon_prices: tuple[Optional[float], ...]

    def __post_init__(self):
        object.__setattr__(self, "core_prices", tuple(float(p) for p in self.core_prices))
        object.__setattr__(self, "supportive_prices",
                           tuple(float(p) for p in self.supportive_prices))
        object.__setattr__(self, "addon_flags", tuple(bool(f) for f in self.addon_flags))
        object.__setattr__(self, "addon_prices",
                           tuple(None if p is None else float(p) for p in self.addon_prices))

    @classmethod
    def from_indices(cls, grid: PriceGrid, core: Sequence[int], supportive: Sequence[int],
                     flags: Sequence[bool], addon: Sequence[int]) -> "Policy":
        return cls(
            core_prices=tuple(grid.core_prices[i] for i in core),
            supportive_prices=tuple(grid.supportive_prices[i] for i in supportive),
            addon_flags=tuple(bool(f) for f in flags),
            addon_prices=tuple(grid.addon_prices[a] if f else None
                               for f, a in zip(flags, addon)),
        )

    @property
    def n_addons(self) -> int:
        return sum(self.addon_flags)

    def validate(self, instance: Instance) -> PolicyIndices:
        """Check feasibility for ``instance`` and return the index form."""
        n, m = instance.n_core, instance.n_supportive
        if len(self.core_prices) != n:
            raise PolicyError(f"expected {n} core prices, got {len(self.core_prices)}")
        if not (len(self.supportive_prices) == len(self.addon_flags)
                == len(self.addon_prices) == m):
            raise PolicyError(f"expected {m} supportive decisions")
        if self.n_addons > instance.space_limit:
            raise PolicyError(
                f"{self.n_addons} add-on discounts exceed the space limit {instance.space_limit}")
        grid = instance.grid
        core = _lookup(grid.core_prices, self.core_prices, "core")
        supp = _lookup(grid.supportive_prices, self.supportive_prices, "supportive")
        addon = np.full(m, -1, dtype=np.int64)
        for j, (flag, price, p) in enumerate(zip(self.addon_flags, self.addon_prices,
                                                 self.supportive_prices)):
            if flag:
                if price is None:
                    raise PolicyError(f"supportive product {j + 1} is flagged without a discount price")
                if not price < p:
                    raise PolicyError(
                        f"discount price {price} is not below original price {p} for product {j + 1}")
                addon[j] = _lookup(grid.addon_prices, (price,), "add-on")[0]
            elif price is not None:
                raise PolicyError(f"supportive product {j + 1} has a discount price but no flag")
        return PolicyIndices(core, supp, np.array(self.addon_flags, dtype=bool), addon)

    def to_dict(self) -> dict:
        return {
            "core_prices": list(self.core_prices),
            "supportive_prices": list(self.supportive_prices),
            "addon_flags": list(self.addon_flags),
            "addon_prices": list(self.addon_prices),
        }


def _lookup(grid_prices: np.ndarray, prices: Sequence[float], label: str) -> np.ndarray:
    out = np.empty(len(prices), dtype=np.int64)
    for i, p in enumerate(prices):
        hits = np.flatnonzero(grid_prices == p)
        if hits.size == 0:
            raise PolicyError(f"{label} price {p} is not on the grid")
        out[i] = hits[0]
    return out
