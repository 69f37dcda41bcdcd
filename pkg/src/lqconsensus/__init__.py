"""Distributed linear-quadratic consensus for single-integrator networks."""

from .centralized import CentralizedSolution, Outcome, cost_of_gain, centralized_trajectory, solve_centralized
from .costs import (
    CostSpec,
    ScalarWeights,
    cost_neighbor_average,
    cost_relative_disagreement,
    evaluate_local_costs,
    evaluate_trajectory_cost,
    validate_state_weight,
)
from .graph import Graph, GraphMatrices, build_graph, cycle_graph, derive_matrices, is_connected, laplacian_pseudoinverse
from .protocol import (
    ConsensusCertificate,
    ProtocolConfig,
    consensus_certificate,
    discrete_iterate,
    gamma_matrix,
    simulate_protocol,
)
from .trace import SimulationTrace, disagreement
from .tracking import AgentGains, TrackingProblem, TrackingSolution, scalar_agent_gains, solve_tracking, tracking_gains

__version__ = "0.1.0"
