from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class Trajectory:
    """Deterministic solution on an output grid.

    ``parts`` carries named breakdowns of ``f`` (``f1``/``f2`` for two groups,
    ``f_1..f_M`` per node); ``states`` optionally holds the full solver state
    with one row per grid time.
    """

    t: np.ndarray
    f: np.ndarray
    parts: dict = field(default_factory=dict)
    states: np.ndarray | None = None
    label: str = ""

    def columns(self) -> dict:
        cols = {"t": self.t, "f": self.f}
        cols.update(self.parts)
        return cols


# the infinite-population solvers return the same container
LimitResult = Trajectory
