"""CSV serialisation of simulation traces.

Columns are ``t,x1..xN,u1..uN,disagreement``, one row per grid point,
written with 17 significant digits so a read-back is bit-exact.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import ConfigError
from .graph import GraphMatrices
from .trace import SimulationTrace


def trace_header(n: int) -> list[str]:
    return ["t"] + [f"x{i}" for i in range(1, n + 1)] + [f"u{i}" for i in range(1, n + 1)] + ["disagreement"]


def emit_trace(trace: SimulationTrace, path: str | Path) -> None:
    n = trace.n_agents
    data = np.column_stack([trace.times, trace.states, trace.inputs, trace.disagreement])
    row = ",".join(["%.17g"] * data.shape[1]) + "\n"
    with open(path, "w") as fh:
        fh.write(",".join(trace_header(n)) + "\n")
        fh.writelines(row % tuple(r) for r in data.tolist())


def read_trace_csv(path: str | Path) -> dict[str, np.ndarray]:
    """Raw columns of a trace file: ``times``, ``states``, ``inputs``, ``disagreement``."""
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip().split(",")
    n = (len(header) - 2) // 2
    if header != trace_header(n):
        raise ConfigError(f"{path}: unexpected trace header {header[:4]}...")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {
        "times": data[:, 0],
        "states": data[:, 1 : n + 1],
        "inputs": data[:, n + 1 : 2 * n + 1],
        "disagreement": data[:, -1],
    }


def load_protocol_trace(path: str | Path, m: GraphMatrices, g: float, sample_period: float) -> SimulationTrace:
    """Rebuild a protocol trace from CSV, restoring the left-limit inputs.

    The file stores one input per grid point (the right-continuous value);
    the limit at ``(k+1)T`` from the left is ``g (x((k+1)T) - G x(kT))``.
    """
    cols = read_trace_csv(path)
    times, states = cols["times"], cols["states"]
    dt = times[1] - times[0]
    spp = int(round(sample_period / dt))
    sample_idx = np.arange(0, len(times), spp)
    samples = states[sample_idx]
    left = cols["inputs"].copy()
    big_g = np.asarray(m.averaging)
    left[sample_idx[1:]] = g * (samples[1:] - samples[:-1] @ big_g.T)
    return SimulationTrace(
        times=times,
        states=states,
        inputs=cols["inputs"],
        sample_states=samples,
        sample_indices=sample_idx,
        time_scale=sample_period,
        inputs_left=left,
        disagreement=cols["disagreement"],
    )


def load_centralized_trace(path: str | Path, time_scale: float) -> SimulationTrace:
    cols = read_trace_csv(path)
    return SimulationTrace(
        times=cols["times"],
        states=cols["states"],
        inputs=cols["inputs"],
        sample_states=cols["states"][:1],
        sample_indices=np.array([0]),
        time_scale=time_scale,
        disagreement=cols["disagreement"],
    )
