"""Value objects returned by the analytic and direct solvers."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .walkmodel import MethodTag


@dataclass(frozen=True, eq=False)
class ArrivalVector:
    """Expected occupancy counts ``x[j]`` of every state for one start.

    Time zero counts, so ``x[start] >= 1``.
    """

    start: int
    x: np.ndarray
    method: MethodTag


@dataclass(frozen=True, eq=False)
class TimeVector:
    """Expected number of moves before absorption or exit, per start state."""

    m: np.ndarray
    method: MethodTag
    anchor: Optional[int] = None


@dataclass(frozen=True, eq=False)
class AbsorptionReport:
    start: int
    g: np.ndarray          # in-place absorption probability per state
    leak_left: float       # exit through -1
    leak_right: float      # exit through N+1
    u: float               # total in-interval absorption
    method: MethodTag
