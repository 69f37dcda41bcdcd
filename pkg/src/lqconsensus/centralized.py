"""Centralized optimal diffusive gain for ``u = -g L x``.

Along ``x(t) = exp(-g L t) x0`` the cost collapses to

    J(g) = x0' X0 x0 / g + g x0' Y0 x0,

with X0 and Y0 the kernel-constrained Lyapunov solutions for ``L W L`` and
``L R L``.  The minimiser needs the full Laplacian and the full initial
state, which is what makes this gain a centralized quantity.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .costs import CostSpec
from .errors import NonPositiveGainError
from .graph import GraphMatrices
from .numerics import kernel_lyapunov, sym_eigen
from .trace import SimulationTrace

ZERO_FORM_RTOL = 1e-12


class Outcome(enum.Enum):
    ANY_GAIN_OPTIMAL = "AnyGainOptimal"
    NO_OPTIMUM_EXISTS = "NoOptimumExists"
    OPTIMAL = "Optimal"


@dataclass(frozen=True)
class CentralizedSolution:
    x0_matrix: np.ndarray
    y0_matrix: np.ndarray
    outcome: Outcome
    gain: float | None
    x_form: float
    y_form: float
    note: str = ""

    @property
    def optimal_cost(self) -> float:
        """J at the optimum, or the infimum 0 when no optimum exists."""
        if self.outcome is Outcome.OPTIMAL:
            return 2.0 * math.sqrt(self.x_form * self.y_form)
        return 0.0


def solve_centralized(m: GraphMatrices, spec: CostSpec, x0) -> CentralizedSolution:
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (m.n,):
        raise ValueError(f"x0 must have length {m.n}, got shape {x0.shape}")
    lap = np.asarray(m.laplacian)
    x_mat = kernel_lyapunov(lap, spec.state_weight)
    y_mat = kernel_lyapunov(lap, spec.input_weight_on_laplacian)
    xf = float(x0 @ x_mat @ x0)
    yf = float(x0 @ y_mat @ x0)
    zero = ZERO_FORM_RTOL * float(x0 @ x0)

    if yf <= zero:
        return CentralizedSolution(
            x_mat, y_mat, Outcome.ANY_GAIN_OPTIMAL, None, xf, yf,
            note="x0 is a consensus state: J(g) = 0 for every g > 0",
        )
    if xf <= zero:
        return CentralizedSolution(
            x_mat, y_mat, Outcome.NO_OPTIMUM_EXISTS, None, xf, yf,
            note="x0' X0 x0 = 0: J(g) -> 0 as g -> 0+ but no g > 0 attains it",
        )
    return CentralizedSolution(x_mat, y_mat, Outcome.OPTIMAL, math.sqrt(xf / yf), xf, yf)


def cost_of_gain(g: float, x0, sol: CentralizedSolution) -> float:
    if not g > 0:
        raise NonPositiveGainError(f"gain must be positive, got {g}")
    x0 = np.asarray(x0, dtype=float)
    return float(x0 @ sol.x0_matrix @ x0) / g + g * float(x0 @ sol.y0_matrix @ x0)


def centralized_trajectory(g: float, m: GraphMatrices, x0, times) -> SimulationTrace:
    """Exact ``x(t) = exp(-g L t) x0`` and ``u = -g L x`` on the given grid."""
    if not g > 0:
        raise NonPositiveGainError(f"gain must be positive, got {g}")
    x0 = np.asarray(x0, dtype=float)
    times = np.asarray(times, dtype=float)
    lap = np.asarray(m.laplacian)
    eig = sym_eigen(lap)
    coeff = eig.vectors.T @ x0
    states = (np.exp(-g * np.outer(times, eig.values)) * coeff) @ eig.vectors.T
    states[times == 0.0] = x0
    inputs = -g * states @ lap.T
    return SimulationTrace(
        times=times,
        states=states,
        inputs=inputs,
        sample_states=x0[None, :].copy(),
        sample_indices=np.array([0]),
        time_scale=1.0 / (g * eig.values[-1]),
    )
