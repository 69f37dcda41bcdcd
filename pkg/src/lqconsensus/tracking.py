"""Discounted LQ tracking of a constant reference.

Scaling state, reference and input by ``exp(-alpha t)`` turns the
discounted tracking problem into a standard free-endpoint LQ problem on
the stacked state ``(z, z_r)`` with

    A_e = [[A - alpha I, 0], [0, -alpha I]],  B_e = [[B], [0]],
    Q_e = [[Q, -Q], [-Q, Q]].

Because A_e is block diagonal, its Riccati equation splits into a standard
ARE for the top-left block, a Sylvester equation for the coupling block
and an explicit formula for the reference block.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .costs import ScalarWeights
from .errors import ConfigError, ResidualTooLargeError
from .numerics import are_residual, check_symmetric, solve_sylvester, stabilizing_are

ARE_CHECK_RTOL = 1e-9


@dataclass(frozen=True)
class TrackingProblem:
    a: np.ndarray
    b: np.ndarray
    q: np.ndarray
    r: np.ndarray
    alpha: float

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.a, dtype=float))
        n = a.shape[0]
        b = np.asarray(self.b, dtype=float)
        b = b.reshape(-1, 1) if b.ndim == 1 else b
        if b.ndim != 2 or b.shape[0] != n:
            raise ConfigError("inconsistent tracking problem dimensions")
        q = np.atleast_2d(np.asarray(self.q, dtype=float))
        r = np.atleast_2d(np.asarray(self.r, dtype=float))
        if a.shape != (n, n) or q.shape != (n, n) or r.shape != (b.shape[1],) * 2:
            raise ConfigError("inconsistent tracking problem dimensions")
        check_symmetric(q)
        check_symmetric(r)
        if np.linalg.eigvalsh(q)[0] <= 0:
            raise ConfigError("Q must be positive definite")
        if np.linalg.eigvalsh(r)[0] <= 0:
            raise ConfigError("R must be positive definite")
        if not self.alpha > 0:
            raise ConfigError(f"alpha must be positive, got {self.alpha}")
        for name, v in (("a", a), ("b", b), ("q", q), ("r", r)):
            object.__setattr__(self, name, v)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    def extended(self):
        """The stacked ``(A_e, B_e, Q_e)`` of the transformed problem."""
        n, a, b, q = self.n, self.a, self.b, self.q
        a_e = np.zeros((2 * n, 2 * n))
        a_e[:n, :n] = a
        a_e[np.arange(2 * n), np.arange(2 * n)] -= self.alpha
        b_e = np.zeros((2 * n, b.shape[1]))
        b_e[:n] = b
        q_e = np.empty((2 * n, 2 * n))
        q_e[:n, :n], q_e[:n, n:], q_e[n:, :n], q_e[n:, n:] = q, -q, -q, q
        return a_e, b_e, q_e


@dataclass(frozen=True)
class TrackingSolution:
    p1: np.ndarray
    p12: np.ndarray
    p2: np.ndarray
    k1: np.ndarray
    k2: np.ndarray

    def assembled(self) -> np.ndarray:
        n = self.p1.shape[0]
        out = np.empty((2 * n, 2 * n))
        out[:n, :n], out[:n, n:], out[n:, :n], out[n:, n:] = self.p1, self.p12, self.p12.T, self.p2
        return out


@dataclass(frozen=True)
class AgentGains:
    """Feedback ``u = g x + g_prime a`` shared by every agent and interval."""

    g: float
    g_prime: float


def solve_tracking(p: TrackingProblem) -> TrackingSolution:
    """Block solution of the extended Riccati equation and the optimal gains.

    Raises
    ------
    NotStabilizableError
        If ``(A, B)`` is not stabilizable.
    ResidualTooLargeError
        If the assembled solution misses the full extended equation.
    """
    n, b, q, r, alpha = p.n, p.b, p.q, p.r, p.alpha
    eye = np.eye(n)
    s = b @ np.linalg.solve(r, b.T)
    p1 = stabilizing_are(p.a - alpha * eye, b, q, r)
    closed = p.a - alpha * eye - s @ p1
    # top-right block: closed^T P12 - alpha P12 - Q = 0
    p12 = solve_sylvester(closed.T, -alpha * eye, q)
    p2 = (q - p12.T @ s @ p12) / (2.0 * alpha)
    p2 = 0.5 * (p2 + p2.T)
    k1, k2 = _gains(p1, p12, b, r)
    sol = TrackingSolution(p1=p1, p12=p12, p2=p2, k1=k1, k2=k2)

    a_e, b_e, q_e = p.extended()
    res = float(np.max(np.abs(are_residual(a_e, b_e, q_e, r, sol.assembled()))))
    tol = ARE_CHECK_RTOL * max(1.0, float(np.max(np.abs(q_e))))
    if res > tol:
        raise ResidualTooLargeError(f"extended ARE residual {res:.3e} above {tol:.3e}")
    return sol


def _gains(p1, p12, b, r):
    return -np.linalg.solve(r, b.T @ p1), -np.linalg.solve(r, b.T @ p12)


def tracking_gains(sol: TrackingSolution, p: TrackingProblem) -> tuple[np.ndarray, np.ndarray]:
    """``(K1, K2)`` of the optimal law ``u = K1 x + K2 r_ref``."""
    return _gains(sol.p1, sol.p12, p.b, p.r)


def scalar_problem(w: ScalarWeights) -> TrackingProblem:
    """A single integrator ``x' = u`` tracking its held neighbourhood average."""
    return TrackingProblem(a=[[0.0]], b=[[1.0]], q=[[w.q]], r=[[w.r]], alpha=w.alpha)


def scalar_agent_gains(w: ScalarWeights) -> AgentGains:
    """Gains ``g = -p1 / r`` and ``g' = -p12 / r`` from the 2x2 Riccati solution."""
    sol = solve_tracking(scalar_problem(w))
    g = -float(sol.p1[0, 0]) / w.r
    g_prime = -float(sol.p12[0, 0]) / w.r
    if not g < 0:
        raise ResidualTooLargeError(f"state gain must be negative, got {g}")
    if abs(g_prime + g) > 1e-12 * max(1.0, abs(g)):
        raise ResidualTooLargeError(f"g' = {g_prime} differs from -g = {-g}")
    return AgentGains(g=g, g_prime=g_prime)
