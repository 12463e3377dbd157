"""Per-trial trust series with aligned experimental factors."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from ..design import ExperimentPlan, Group
from ..sim import Capability, Strategy

CAPABILITY_COLUMNS = ("cap20", "cap50", "cap100")
STRATEGY_COLUMNS = ("lawnmower", "random", "omniscient")
EXOG_COLUMNS = CAPABILITY_COLUMNS + STRATEGY_COLUMNS

_CAP_INDEX = {c: i for i, c in enumerate(Capability)}
_STRAT_INDEX = {s: i for i, s in enumerate(Strategy)}

Selector = Union[str, Sequence[str]]


@dataclass
class TrustSeries:
    """Group-mean trust per main trial plus the factor one-hot design.

    ``exog`` columns follow EXOG_COLUMNS: capability one-hot then strategy
    one-hot; every row sums to 1 within each factor.
    """

    values: np.ndarray
    exog: np.ndarray
    group: Optional[Group] = None

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        self.exog = np.asarray(self.exog, dtype=np.float64)
        if self.exog.shape != (len(self.values), len(EXOG_COLUMNS)):
            raise ValueError(
                f"exog must be ({len(self.values)}, {len(EXOG_COLUMNS)}), got {self.exog.shape}"
            )

    def __len__(self) -> int:
        return len(self.values)

    def select_exog(self, selector: Selector = "capability") -> tuple[np.ndarray, tuple[str, ...]]:
        """Pick design columns: 'capability', 'strategy', 'both', 'none', or
        an explicit list of column names."""
        if isinstance(selector, str):
            if selector == "capability":
                names: tuple[str, ...] = CAPABILITY_COLUMNS
            elif selector == "strategy":
                names = STRATEGY_COLUMNS
            elif selector == "both":
                names = EXOG_COLUMNS
            elif selector == "none":
                names = ()
            else:
                raise ValueError(f"unknown exog selector {selector!r}")
        else:
            unknown = [n for n in selector if n not in EXOG_COLUMNS]
            if unknown:
                raise ValueError(f"unknown exog columns {unknown}")
            names = tuple(selector)
        idx = [EXOG_COLUMNS.index(n) for n in names]
        return self.exog[:, idx], names

    def to_dict(self) -> dict:
        return {
            "values": self.values.tolist(),
            "exog": self.exog.tolist(),
            "group": self.group.name if self.group is not None else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrustSeries":
        return cls(
            values=np.array(d["values"]),
            exog=np.array(d["exog"]),
            group=Group[d["group"]] if d.get("group") else None,
        )


def plan_exog(plan: ExperimentPlan, n: Optional[int] = None) -> np.ndarray:
    """One-hot factor matrix for a plan's main trials, tiled out to n rows
    (tiling repeats the 63-trial schedule, used for long synthetic runs)."""
    rows = []
    for t in plan.main_trials:
        row = np.zeros(len(EXOG_COLUMNS))
        row[_CAP_INDEX[t.capability]] = 1.0
        row[3 + _STRAT_INDEX[t.strategy]] = 1.0
        rows.append(row)
    base = np.array(rows)
    if n is None or n == len(base):
        return base
    reps = -(-n // len(base))
    return np.tile(base, (reps, 1))[:n]
