from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def disagreement(x, m=None) -> float:
    """Largest pairwise gap ``max(x) - min(x)``; zero exactly at consensus.

    ``m`` (a GraphMatrices) is optional and only used to check the length
    of ``x``; the gap is taken over all pairs, not just neighbours.
    """
    x = np.asarray(x, dtype=float)
    if m is not None and x.shape != (m.n,):
        raise ValueError(f"x must have length {m.n}, got shape {x.shape}")
    return float(x.max() - x.min())


@dataclass(frozen=True)
class SimulationTrace:
    """Sampled closed-loop trajectory on a uniform output grid.

    Inputs are stored right-continuous: at a sampling instant ``inputs`` holds
    the value for the interval that starts there, and ``inputs_left`` the
    limit from the interval that ends there (``None`` when u is continuous).
    ``sample_indices[k]`` is the grid index of the k-th sampling instant and
    ``time_scale`` the shortest time constant the grid must resolve.
    """

    times: np.ndarray
    states: np.ndarray
    inputs: np.ndarray
    sample_states: np.ndarray
    sample_indices: np.ndarray
    time_scale: float
    inputs_left: np.ndarray | None = None
    disagreement: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.disagreement is None:
            d = self.states.max(axis=1) - self.states.min(axis=1)
            object.__setattr__(self, "disagreement", d)

    @property
    def dt(self) -> float:
        if len(self.times) < 2:
            return 0.0
        return float(self.times[1] - self.times[0])

    @property
    def n_agents(self) -> int:
        return self.states.shape[1]

    def time_to_tolerance(self, tol: float = 1e-3) -> float | None:
        """First grid time at which disagreement drops below ``tol``."""
        hit = np.flatnonzero(self.disagreement < tol)
        return float(self.times[hit[0]]) if hit.size else None
