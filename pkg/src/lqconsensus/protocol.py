"""Decentralized sampled-data consensus protocol.

On every interval ``[kT, (k+1)T)`` each agent applies

    u_i(t) = g x_i(t) - g a_i(kT),    a(kT) = G x(kT),

so the network obeys ``x' = g x - g G x(kT)``.  Per interval this is a
scalar linear ODE with a constant forcing term, solved exactly by

    x(t) = G x(kT) + exp(g (t - kT)) (x(kT) - G x(kT)),

and the sampled states follow ``x((k+1)T) = Gamma x(kT)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .costs import ScalarWeights
from .errors import ConfigError, NonNegativeGainError
from .graph import GraphMatrices
from .numerics import sym_eigen
from .tracking import AgentGains, scalar_agent_gains
from .trace import SimulationTrace, disagreement

__all__ = [
    "ConsensusCertificate",
    "ProtocolConfig",
    "consensus_certificate",
    "disagreement",
    "discrete_iterate",
    "gamma_matrix",
    "interval_state",
    "simulate_protocol",
]

GRID_RTOL = 1e-9


@dataclass(frozen=True)
class ProtocolConfig:
    weights: ScalarWeights
    sample_period: float
    horizon: float
    output_dt: float

    def __post_init__(self):
        t, h, dt = self.sample_period, self.horizon, self.output_dt
        if not (t > 0 and h > 0 and dt > 0):
            raise ConfigError("sample_period, horizon and output_dt must be positive")
        if dt > t * (1 + GRID_RTOL):
            raise ConfigError(f"output_dt {dt} exceeds sample_period {t}")
        if h < t * (1 - GRID_RTOL):
            raise ConfigError(f"horizon {h} is shorter than sample_period {t}")
        _integer_ratio(t, dt, "sample_period / output_dt")
        _integer_ratio(h, dt, "horizon / output_dt")

    @property
    def steps_per_period(self) -> int:
        return _integer_ratio(self.sample_period, self.output_dt, "")

    @property
    def n_steps(self) -> int:
        return _integer_ratio(self.horizon, self.output_dt, "")


def _integer_ratio(num: float, den: float, what: str) -> int:
    ratio = num / den
    k = round(ratio)
    if k < 1 or abs(ratio - k) > GRID_RTOL * max(1.0, ratio):
        raise ConfigError(f"{what} must be an integer, got {ratio!r}")
    return int(k)


@dataclass(frozen=True)
class ConsensusCertificate:
    gamma_eigenvalues: np.ndarray
    is_consensus: bool
    spectral_gap: float

    def summary(self) -> dict:
        return {
            "is_consensus": bool(self.is_consensus),
            "spectral_gap": float(self.spectral_gap),
            "gamma_eigenvalues": [float(v) for v in self.gamma_eigenvalues],
        }


def gamma_matrix(g: float, sample_period: float, m: GraphMatrices) -> np.ndarray:
    """One-period map ``Gamma = e^{gT} I - (e^{gT} - 1) G``."""
    if not g < 0:
        raise NonNegativeGainError(f"protocol gain must be negative, got {g}")
    if not sample_period > 0:
        raise ConfigError(f"sample_period must be positive, got {sample_period}")
    e = math.exp(g * sample_period)
    return e * np.eye(m.n) - math.expm1(g * sample_period) * np.asarray(m.averaging)


def _symmetric_conjugate(gamma: np.ndarray, m: GraphMatrices) -> np.ndarray:
    # (D+I)^{1/2} Gamma (D+I)^{-1/2} is symmetric because G is.
    root = np.sqrt(m.degrees + 1.0)
    s = root[:, None] * gamma / root[None, :]
    return 0.5 * (s + s.T)


def consensus_certificate(gamma, m: GraphMatrices, tol: float = 1e-9) -> ConsensusCertificate:
    """Certify that Gamma's only non-decaying mode is the consensus direction.

    Consensus holds iff the sole eigenvalue with ``|mu| >= 1`` is a simple
    ``mu = 1`` whose eigenvector is the all-ones vector.
    """
    gamma = np.asarray(gamma, dtype=float)
    eig = sym_eigen(_symmetric_conjugate(gamma, m))
    mu = eig.values
    mags = np.abs(mu)
    top = int(np.argmax(mu))
    others = np.delete(mags, top)
    vec = eig.vectors[:, top] / np.sqrt(m.degrees + 1.0)
    vec = vec / vec[np.argmax(np.abs(vec))]
    ok = (
        abs(mu[top] - 1.0) <= tol
        and np.max(np.abs(vec - 1.0)) <= 1e-8
        and (others.size == 0 or np.max(others) < 1.0 - tol)
    )
    gap = 1.0 - (float(np.max(others)) if others.size else 0.0)
    return ConsensusCertificate(gamma_eigenvalues=mu, is_consensus=bool(ok), spectral_gap=gap)


def interval_state(x_k, averaged_k, g: float, s) -> np.ndarray:
    """State at offset(s) ``s`` into an interval that started at ``x_k``."""
    s = np.asarray(s, dtype=float)
    decay = np.exp(g * s)
    return averaged_k + decay[..., None] * (x_k - averaged_k)


def simulate_protocol(
    m: GraphMatrices, x0, cfg: ProtocolConfig, gains: AgentGains | None = None
) -> SimulationTrace:
    """Exact closed-loop trajectory of the sampled protocol on the output grid."""
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (m.n,):
        raise ConfigError(f"x0 must have length {m.n}, got shape {x0.shape}")
    gains = scalar_agent_gains(cfg.weights) if gains is None else gains
    g = gains.g
    big_g = np.asarray(m.averaging)
    spp, n_steps = cfg.steps_per_period, cfg.n_steps
    n_samples = n_steps // spp + 1
    decay_period = math.exp(g * cfg.sample_period)

    samples = np.empty((n_samples, m.n))
    samples[0] = x0
    for k in range(1, n_samples):
        avg = big_g @ samples[k - 1]
        samples[k] = avg + decay_period * (samples[k - 1] - avg)
    averaged = samples @ big_g.T
    deviation = samples - averaged

    idx = np.arange(n_steps + 1)
    times = idx * cfg.output_dt
    k_of = np.minimum(idx // spp, n_samples - 1)
    offset = (idx - k_of * spp) * cfg.output_dt
    decay = np.exp(g * offset)[:, None]
    states = averaged[k_of] + decay * deviation[k_of]
    inputs = g * decay * deviation[k_of]

    sample_idx = np.arange(n_samples) * spp
    states[sample_idx] = samples
    inputs_left = inputs.copy()
    inputs_left[sample_idx[1:]] = g * decay_period * deviation[:-1]

    return SimulationTrace(
        times=times,
        states=states,
        inputs=inputs,
        sample_states=samples,
        sample_indices=sample_idx,
        time_scale=cfg.sample_period,
        inputs_left=inputs_left,
    )


def discrete_iterate(gamma, x0, steps: int) -> np.ndarray:
    """Rows ``Gamma^k x0`` for ``k = 0..steps``."""
    gamma = np.asarray(gamma, dtype=float)
    out = np.empty((steps + 1, len(x0)))
    out[0] = x0
    for k in range(steps):
        out[k + 1] = gamma @ out[k]
    return out
