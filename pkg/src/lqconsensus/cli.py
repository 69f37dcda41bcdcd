"""Command-line front end.

    lqconsensus run SCENARIO [--out-dir DIR] [--quiet]
    lqconsensus preset {paper-fig1,paper-fig2} [--out-dir DIR] [--quiet]

A scenario file is a flat ``key = value`` list (``#`` comments allowed)
with keys ``graph``, ``x0``, ``q``, ``r``, ``alpha``, ``T``, ``horizon``,
``dt``, ``mode`` and optionally ``cost``.  ``graph`` is an edge-list path
relative to the scenario file.  Each run writes trace CSVs, a copy of the
graph and ``report.json`` into the output directory.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .centralized import Outcome, centralized_trajectory, solve_centralized
from .costs import (
    ScalarWeights,
    cost_neighbor_average,
    cost_relative_disagreement,
    cost_tail_estimate,
    evaluate_local_costs,
    evaluate_trajectory_cost,
)
from .errors import ConfigError, ConsensusError
from .graph import Graph, cycle_graph, derive_matrices, format_edge_list, read_edge_list
from .numerics import sym_eigen
from .protocol import ProtocolConfig, consensus_certificate, gamma_matrix, simulate_protocol
from .traceio import emit_trace
from .tracking import scalar_agent_gains

MODES = ("centralized", "decentralized", "compare")
COSTS = {"neighbor_average": cost_neighbor_average, "relative_disagreement": cost_relative_disagreement}
CONSENSUS_TOL = 1e-3

REFERENCE_X0 = (1.0, 2.0, -1.0, -2.0, 1.0, 3.0)


@dataclass(frozen=True)
class Scenario:
    graph: Graph
    x0: tuple
    weights: ScalarWeights
    sample_period: float | None
    horizon: float
    output_dt: float
    mode: str = "decentralized"
    cost: str = "neighbor_average"
    name: str = "scenario"
    graph_path: str | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.cost not in COSTS:
            raise ConfigError(f"cost must be one of {tuple(COSTS)}, got {self.cost!r}")
        if len(self.x0) != self.graph.n:
            raise ConfigError(f"x0 has {len(self.x0)} entries but the graph has {self.graph.n} nodes")
        if self.mode != "centralized" and self.sample_period is None:
            raise ConfigError(f"mode {self.mode!r} needs a sampling period T")

    def protocol_config(self) -> ProtocolConfig:
        return ProtocolConfig(self.weights, self.sample_period, self.horizon, self.output_dt)


PRESETS = {
    "paper-fig1": dict(sample_period=10.0, horizon=500.0, output_dt=0.1),
    "paper-fig2": dict(sample_period=0.1, horizon=40.0, output_dt=0.001),
}


def preset(name: str) -> Scenario:
    """Six agents on a cycle, q = 2, r = 1, alpha = 0.01."""
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return Scenario(
        graph=cycle_graph(6),
        x0=REFERENCE_X0,
        weights=ScalarWeights(q=2.0, r=1.0, alpha=0.01),
        mode="decentralized",
        name=name,
        **PRESETS[name],
    )


def parse_scenario(text: str, base_dir: str | Path = ".") -> Scenario:
    kv = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        kv[key] = value
    known = {"graph", "x0", "q", "r", "alpha", "T", "horizon", "dt", "mode", "cost", "name"}
    unknown = set(kv) - known
    if unknown:
        raise ConfigError(f"unknown scenario keys: {sorted(unknown)}")
    missing = {"graph", "x0", "q", "r", "alpha", "horizon", "dt"} - set(kv)
    if missing:
        raise ConfigError(f"missing scenario keys: {sorted(missing)}")

    def num(key):
        try:
            return float(kv[key])
        except ValueError:
            raise ConfigError(f"{key}: not a number: {kv[key]!r}") from None

    graph_path = Path(base_dir) / kv["graph"]
    try:
        x0 = tuple(float(v) for v in kv["x0"].replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"x0: not a list of numbers: {kv['x0']!r}") from None
    return Scenario(
        graph=read_edge_list(graph_path),
        x0=x0,
        weights=ScalarWeights(q=num("q"), r=num("r"), alpha=num("alpha")),
        sample_period=num("T") if "T" in kv else None,
        horizon=num("horizon"),
        output_dt=num("dt"),
        mode=kv.get("mode", "decentralized"),
        cost=kv.get("cost", "neighbor_average"),
        name=kv.get("name", graph_path.stem),
        graph_path=str(graph_path),
    )


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    return parse_scenario(path.read_text(), base_dir=path.parent)


@dataclass
class RunReport:
    scenario: dict
    decentralized: dict | None = None
    centralized: dict | None = None
    comparison: dict | None = None
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {"scenario": self.scenario}
        for key in ("decentralized", "centralized", "comparison"):
            if getattr(self, key) is not None:
                out[key] = getattr(self, key)
        out["notes"] = list(self.notes)
        return out


def _finite(v):
    return None if v is None or not math.isfinite(v) else float(v)


def _run_decentralized(sc: Scenario, m, spec, out_dir: Path | None) -> dict:
    gains = scalar_agent_gains(sc.weights)
    trace = simulate_protocol(m, sc.x0, sc.protocol_config(), gains=gains)
    cert = consensus_certificate(gamma_matrix(gains.g, sc.sample_period, m), m)
    local = evaluate_local_costs(trace, m, sc.weights)
    section = {
        "g": gains.g,
        "g_prime": gains.g_prime,
        "sample_period": sc.sample_period,
        "final_disagreement": float(trace.disagreement[-1]),
        "time_to_tolerance": trace.time_to_tolerance(CONSENSUS_TOL),
        "final_state": [float(v) for v in trace.states[-1]],
        "cost_global": evaluate_trajectory_cost(trace, spec, alpha=0.0),
        "cost_global_tail_estimate": _finite(cost_tail_estimate(trace, spec, alpha=0.0)),
        "cost_local_discounted": float(local.sum()),
        "cost_local_per_agent": [float(v) for v in local],
        "certificate": cert.summary(),
    }
    if out_dir is not None:
        emit_trace(trace, out_dir / "trace_decentralized.csv")
        section["trace_file"] = "trace_decentralized.csv"
    return section


def _centralized_dt(sc: Scenario, time_scale: float) -> float:
    # cost quadrature needs dt <= time_scale / 100 and the grid must end on the horizon
    dt = min(sc.output_dt, time_scale / 100.0)
    return sc.horizon / math.ceil(sc.horizon / dt - 1e-9)


def _run_centralized(sc: Scenario, m, spec, out_dir: Path | None, notes: list) -> dict:
    sol = solve_centralized(m, spec, sc.x0)
    lam = sym_eigen(m.laplacian).values
    section = {
        "outcome": sol.outcome.value,
        "g_star": sol.gain,
        "x0_X0_x0": sol.x_form,
        "x0_Y0_x0": sol.y_form,
        "optimal_cost": sol.optimal_cost,
        "algebraic_connectivity": float(lam[1]),
    }
    if sol.note:
        notes.append(f"centralized: {sol.note}")
    if sol.outcome is not Outcome.OPTIMAL:
        x0 = np.asarray(sc.x0)
        section["final_disagreement"] = float(x0.max() - x0.min())
        section["cost_global"] = sol.optimal_cost
        return section
    dt = _centralized_dt(sc, 1.0 / (sol.gain * lam[-1]))
    times = np.arange(int(round(sc.horizon / dt)) + 1) * dt
    trace = centralized_trajectory(sol.gain, m, sc.x0, times)
    section.update(
        {
            "output_dt": dt,
            "final_disagreement": float(trace.disagreement[-1]),
            "time_to_tolerance": trace.time_to_tolerance(CONSENSUS_TOL),
            "final_state": [float(v) for v in trace.states[-1]],
            "cost_global": evaluate_trajectory_cost(trace, spec, alpha=0.0),
            "cost_global_tail_estimate": _finite(cost_tail_estimate(trace, spec, alpha=0.0)),
        }
    )
    if out_dir is not None:
        emit_trace(trace, out_dir / "trace_centralized.csv")
        section["trace_file"] = "trace_centralized.csv"
    return section


def run(sc: Scenario, out_dir: str | Path | None = None) -> RunReport:
    """Execute a scenario; write traces and ``report.json`` when ``out_dir`` is given."""
    m = derive_matrices(sc.graph)
    spec = COSTS[sc.cost](m, sc.weights.q, sc.weights.r)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "graph.txt").write_text(format_edge_list(sc.graph))
    report = RunReport(
        scenario={
            "name": sc.name,
            "mode": sc.mode,
            "cost": sc.cost,
            "n_agents": sc.graph.n,
            "x0": list(sc.x0),
            "q": sc.weights.q,
            "r": sc.weights.r,
            "alpha": sc.weights.alpha,
            "T": sc.sample_period,
            "horizon": sc.horizon,
            "dt": sc.output_dt,
            "consensus_tolerance": CONSENSUS_TOL,
        }
    )
    if sc.mode in ("decentralized", "compare"):
        report.decentralized = _run_decentralized(sc, m, spec, out_dir)
    if sc.mode in ("centralized", "compare"):
        report.centralized = _run_centralized(sc, m, spec, out_dir, report.notes)
    if sc.mode == "compare":
        dec, cen = report.decentralized["cost_global"], report.centralized["cost_global"]
        report.comparison = {
            "cost_global_decentralized": dec,
            "cost_global_centralized": cen,
            "suboptimality_gap": dec - cen,
            "ratio": dec / cen if cen > 0 else None,
        }
        if report.centralized["outcome"] != Outcome.OPTIMAL.value:
            report.notes.append("compare: no centralized optimum, gap measured against the infimum")
    if out_dir is not None:
        (out_dir / "report.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    return report


def format_report(report: RunReport) -> str:
    lines = [f"scenario {report.scenario['name']} ({report.scenario['mode']})"]
    for key in ("decentralized", "centralized"):
        sec = getattr(report, key)
        if sec is None:
            continue
        if "g" in sec:
            lines.append(f"  {key}: g = {sec['g']:.4f}, g' = {sec['g_prime']:.4f}")
            cert = sec["certificate"]
            lines.append(
                f"  {key}: consensus certified = {cert['is_consensus']}, spectral gap = {cert['spectral_gap']:.6g}"
            )
        else:
            gs = sec["g_star"]
            lines.append(f"  {key}: outcome = {sec['outcome']}, g* = {'n/a' if gs is None else f'{gs:.6g}'}")
        ttt = sec.get("time_to_tolerance")
        lines.append(
            f"  {key}: final disagreement = {sec['final_disagreement']:.3e}, "
            f"time to {CONSENSUS_TOL:g} = {'not reached' if ttt is None else f'{ttt:g}'}"
        )
        lines.append(f"  {key}: truncated global cost = {sec['cost_global']:.6g}")
        if "cost_local_discounted" in sec:
            lines.append(f"  {key}: discounted local cost sum = {sec['cost_local_discounted']:.6g}")
    if report.comparison:
        lines.append(f"  suboptimality gap = {report.comparison['suboptimality_gap']:.6g}")
    lines.extend(f"  note: {n}" for n in report.notes)
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lqconsensus", description="Distributed LQ consensus experiments")
    sub = ap.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run a scenario file")
    p_run.add_argument("scenario")
    p_pre = sub.add_parser("preset", help="run a built-in scenario")
    p_pre.add_argument("name", choices=sorted(PRESETS))
    for p in (p_run, p_pre):
        p.add_argument("--out-dir", default=None, help="output directory (default: out/<name>)")
        p.add_argument("--quiet", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        sc = load_scenario(args.scenario) if args.command == "run" else preset(args.name)
        out_dir = Path(args.out_dir) if args.out_dir else Path("out") / sc.name
        report = run(sc, out_dir)
    except (ConsensusError, OSError) as exc:
        print(f"lqconsensus: error: {exc}", file=sys.stderr)
        return 2
    if not args.quiet:
        print(format_report(report))
        print(f"  wrote {out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
