"""Distributed LQ cost functionals ``int x^T L W L x + u^T R u dt``.

Only state weights of the form ``L W L`` give finite cost under diffusive
feedback, so a :class:`CostSpec` stores the factor W together with the
Laplacian it is sandwiched by.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .errors import ConfigError, GridTooCoarseError
from .graph import GraphMatrices, laplacian_pseudoinverse
from .numerics import check_symmetric, psd_pseudoinverse, sym_eigen
from .trace import SimulationTrace

PSD_RTOL = 1e-10


@dataclass(frozen=True)
class ScalarWeights:
    """Per-agent weights: state weight q, input weight r, discount alpha (1/time)."""

    q: float
    r: float
    alpha: float

    def __post_init__(self):
        for name in ("q", "r", "alpha"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                raise ConfigError(f"{name} must be a positive real, got {v}")


@dataclass(frozen=True)
class CostSpec:
    w: np.ndarray
    r_matrix: np.ndarray
    laplacian: np.ndarray

    def __post_init__(self):
        n = self.laplacian.shape[0]
        if self.w.shape != (n, n) or self.r_matrix.shape != (n, n):
            raise ConfigError("W and R must both be N x N")
        check_symmetric(self.w)
        check_symmetric(self.r_matrix)
        wv = sym_eigen(self.w).values
        if wv[0] < -PSD_RTOL * max(1.0, abs(wv[-1])):
            raise ConfigError(f"W is not positive semi-definite (min eigenvalue {wv[0]:.3e})")
        if sym_eigen(self.r_matrix).values[0] <= 0:
            raise ConfigError("R is not positive definite")

    @property
    def state_weight(self) -> np.ndarray:
        """Q = L W L."""
        q = self.laplacian @ self.w @ self.laplacian
        return 0.5 * (q + q.T)

    @property
    def input_weight_on_laplacian(self) -> np.ndarray:
        """L R L, the input-side weight of the centralized problem."""
        q = self.laplacian @ self.r_matrix @ self.laplacian
        return 0.5 * (q + q.T)


def cost_relative_disagreement(g: GraphMatrices, q: float, r: float) -> CostSpec:
    """Sum over agents and neighbours of ``q (x_i - x_j)^2 + r u_i^2``; W = 2q L+."""
    return CostSpec(
        w=2.0 * q * laplacian_pseudoinverse(g),
        r_matrix=r * np.eye(g.n),
        laplacian=np.array(g.laplacian),
    )


def cost_neighbor_average(g: GraphMatrices, q: float, r: float) -> CostSpec:
    """Sum over agents of ``q (x_i - a_i)^2 + r u_i^2``, a = G x; W = q (D+I)^-2."""
    return CostSpec(
        w=np.diag(q / (g.degrees + 1.0) ** 2),
        r_matrix=r * np.eye(g.n),
        laplacian=np.array(g.laplacian),
    )


@dataclass(frozen=True)
class WeightCheck:
    accepted: bool
    witness: np.ndarray | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.accepted


def validate_state_weight(q_matrix, l) -> WeightCheck:
    """Decide whether Q can be written ``L W L`` with W PSD.

    For a connected graph this holds iff ``Q 1 = 0``. On acceptance the
    minimum-norm witness ``W = L+ Q L+`` is returned.
    """
    q_matrix = np.asarray(q_matrix, dtype=float)
    l = np.asarray(l, dtype=float)
    scale = max(1.0, float(np.max(np.abs(q_matrix))))
    if np.max(np.abs(q_matrix - q_matrix.T)) > 1e-12 * scale:
        return WeightCheck(False, reason="Q is not symmetric")
    if sym_eigen(q_matrix).values[0] < -PSD_RTOL * scale:
        return WeightCheck(False, reason="Q is not positive semi-definite")
    ones = np.ones(l.shape[0])
    resid = float(np.max(np.abs(q_matrix @ ones)))
    if resid > 1e-9 * scale:
        return WeightCheck(False, reason=f"Q 1 != 0 (max |Q 1| = {resid:.3e}); range(Q) not in range(L)")
    lpinv = psd_pseudoinverse(l)
    w = lpinv @ q_matrix @ lpinv
    w = 0.5 * (w + w.T)
    err = float(np.max(np.abs(l @ w @ l - q_matrix)))
    if err > 1e-9 * scale:
        return WeightCheck(False, reason=f"round-trip L W L - Q error {err:.3e}")
    return WeightCheck(True, witness=w)


def _check_grid(trace: SimulationTrace) -> None:
    if len(trace.times) < 3:
        raise GridTooCoarseError("trace needs at least 3 grid points")
    if trace.dt > trace.time_scale / 100.0 * (1 + 1e-9):
        raise GridTooCoarseError(
            f"grid spacing {trace.dt:g} exceeds time_scale/100 = {trace.time_scale / 100.0:g}"
        )


def _segments(trace: SimulationTrace):
    """Index ranges [i0, i1] between consecutive kinks of the integrand."""
    last = len(trace.times) - 1
    cuts = np.unique(np.concatenate([[0], trace.sample_indices, [last]]))
    return list(zip(cuts[:-1], cuts[1:]))


def _integrate(trace: SimulationTrace, integrand) -> np.ndarray:
    """Simpson quadrature per smooth segment of ``integrand(t, x, u, k)``.

    Segments of equal length are stacked so ``t`` has shape (S, M+1), ``x``
    and ``u`` shape (S, M+1, N), and ``k`` (S, 1) holds each segment's
    sampling-interval index. The segment's right endpoint uses the
    left-limit input. Returns the total over segments.
    """
    segs = np.array(_segments(trace))
    lengths = segs[:, 1] - segs[:, 0]
    total = 0.0
    for length in np.unique(lengths):
        which = np.flatnonzero(lengths == length)
        rows = segs[which, 0][:, None] + np.arange(length + 1)
        u = trace.inputs[rows]
        if trace.inputs_left is not None:
            u[:, -1] = trace.inputs_left[segs[which, 1]]
        y = integrand(trace.times[rows], trace.states[rows], u, which[:, None])
        total = total + simpson(y, dx=trace.dt, axis=1).sum(axis=0)
    return total


def evaluate_trajectory_cost(trace: SimulationTrace, spec: CostSpec, alpha: float = 0.0) -> float:
    """Truncated ``int_0^H exp(-2 alpha t) (x^T L W L x + u^T R u) dt`` over the trace.

    This approximates the infinite-horizon cost; see :func:`cost_tail_estimate`
    for the neglected remainder.
    """
    _check_grid(trace)
    if alpha < 0:
        raise ConfigError("alpha must be nonnegative")
    qm, rm = spec.state_weight, spec.r_matrix

    def f(t, x, u, k):
        return np.exp(-2.0 * alpha * t) * (
            np.einsum("...i,ij,...j->...", x, qm, x) + np.einsum("...i,ij,...j->...", u, rm, u)
        )

    return float(_integrate(trace, f))


def evaluate_local_costs(trace: SimulationTrace, m: GraphMatrices, w: ScalarWeights, alpha: float | None = None) -> np.ndarray:
    """Per-agent discounted tracking costs with the sampled neighbour average held.

    Agent i accrues ``exp(-2 alpha t) (q (x_i - a_i(kT))^2 + r u_i^2)`` on every
    interval ``[kT, (k+1)T)``, time measured from 0.
    """
    _check_grid(trace)
    alpha = w.alpha if alpha is None else alpha
    refs = trace.sample_states @ np.asarray(m.averaging).T

    def f(t, x, u, k):
        ref = refs[np.minimum(k, len(refs) - 1)]
        return np.exp(-2.0 * alpha * t)[..., None] * (w.q * (x - ref) ** 2 + w.r * u**2)

    return np.asarray(_integrate(trace, f))


def cost_tail_estimate(trace: SimulationTrace, spec: CostSpec, alpha: float = 0.0) -> float:
    """Rough size of the cost beyond the horizon.

    Fits an exponential to the integrand over the last tenth of the horizon
    and integrates it to infinity. Returns ``inf`` when no decay is visible.
    """
    qm, rm = spec.state_weight, spec.r_matrix
    idx_b = len(trace.times) - 1
    idx_a = int(round(0.9 * idx_b))
    if len(trace.sample_indices) >= 3:
        # sample instants avoid the intra-period oscillation of the integrand
        s = trace.sample_indices
        idx_b = int(s[-1])
        idx_a = int(s[max(0, int(round(0.9 * (len(s) - 1))))])
        if idx_a == idx_b:
            idx_a = int(s[-2])

    def f(i):
        x, u, t = trace.states[i], trace.inputs[i], trace.times[i]
        return float(np.exp(-2.0 * alpha * t) * (x @ qm @ x + u @ rm @ u))

    fa, fb = f(idx_a), f(idx_b)
    if fb <= 0.0:
        return 0.0
    span = trace.times[idx_b] - trace.times[idx_a]
    if fa <= fb or span <= 0:
        return float("inf")
    rate = np.log(fa / fb) / span
    return fb / rate
