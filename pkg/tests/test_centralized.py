import numpy as np
import pytest

from lqconsensus.centralized import (
    Outcome,
    centralized_trajectory,
    cost_of_gain,
    solve_centralized,
)
from lqconsensus.costs import CostSpec, cost_neighbor_average, cost_relative_disagreement, evaluate_trajectory_cost
from lqconsensus.errors import NonPositiveGainError
from lqconsensus.graph import derive_matrices

from conftest import REFERENCE_X0
from oracles import lyapunov_quadrature, random_connected_graph

LOG_GRID = np.logspace(-2, 1, 1000)


def identity_spec(m):
    return CostSpec(w=np.eye(m.n), r_matrix=np.eye(m.n), laplacian=np.array(m.laplacian))


class TestSolveCentralized:
    @pytest.mark.parametrize("c", [0.0, 1.0, -3.5])
    def test_consensus_initial_state(self, cycle6, c):
        sol = solve_centralized(cycle6, cost_relative_disagreement(cycle6, 2, 1), np.full(6, c))
        assert sol.outcome is Outcome.ANY_GAIN_OPTIMAL
        assert sol.gain is None and sol.optimal_cost == 0.0

    def test_p2_unit_gain(self, p2):
        x0 = np.array([1.0, -1.0])
        sol = solve_centralized(p2, identity_spec(p2), x0)
        half = np.array([[0.5, -0.5], [-0.5, 0.5]])
        np.testing.assert_allclose(sol.x0_matrix, half, atol=1e-15)
        np.testing.assert_allclose(sol.y0_matrix, half, atol=1e-15)
        assert sol.outcome is Outcome.OPTIMAL
        assert sol.gain == pytest.approx(1.0, abs=1e-14)
        grid = [cost_of_gain(g, x0, sol) for g in LOG_GRID]
        assert cost_of_gain(1.0, x0, sol) <= min(grid) + 1e-12

    def test_cycle6_against_grid_oracle(self, cycle6):
        spec = cost_relative_disagreement(cycle6, q=2, r=1)
        sol = solve_centralized(cycle6, spec, REFERENCE_X0)
        lap = np.array(cycle6.laplacian)
        # independent X0, Y0 from quadrature
        xq = lyapunov_quadrature(lap, spec.state_weight)
        yq = lyapunov_quadrature(lap, spec.input_weight_on_laplacian)
        j_oracle = REFERENCE_X0 @ xq @ REFERENCE_X0 / LOG_GRID + LOG_GRID * (REFERENCE_X0 @ yq @ REFERENCE_X0)
        assert cost_of_gain(sol.gain, REFERENCE_X0, sol) <= j_oracle.min() + 1e-9
        assert abs(LOG_GRID[np.argmin(j_oracle)] - sol.gain) < 0.01 * sol.gain

    def test_no_optimum(self, p2):
        # W = 0 makes the state cost vanish; J(g) = g x0'Y0x0 has infimum 0 at g -> 0+
        spec = CostSpec(w=np.zeros((2, 2)), r_matrix=np.eye(2), laplacian=np.array(p2.laplacian))
        sol = solve_centralized(p2, spec, [1.0, 0.0])
        assert sol.outcome is Outcome.NO_OPTIMUM_EXISTS
        assert sol.gain is None and sol.optimal_cost == 0.0 and sol.note

    def test_kernel_properties(self, rng):
        for _ in range(10):
            m = derive_matrices(random_connected_graph(rng, int(rng.integers(2, 10))))
            sol = solve_centralized(m, cost_neighbor_average(m, 1.0, 2.0), rng.normal(size=m.n))
            ones = np.ones(m.n)
            np.testing.assert_allclose(sol.x0_matrix @ ones, 0.0, atol=1e-10)
            np.testing.assert_allclose(sol.y0_matrix @ ones, 0.0, atol=1e-10)
            lam = np.linalg.eigvalsh(sol.y0_matrix)
            # ker(Y0) is exactly the consensus line
            assert abs(lam[0]) < 1e-10 and lam[1] > 1e-8

    def test_general_r_matrix(self, cycle6, rng):
        r = np.diag(rng.uniform(0.5, 2.0, size=6))
        spec = CostSpec(w=np.eye(6), r_matrix=r, laplacian=np.array(cycle6.laplacian))
        sol = solve_centralized(cycle6, spec, REFERENCE_X0)
        grid = [cost_of_gain(g, REFERENCE_X0, sol) for g in LOG_GRID]
        assert cost_of_gain(sol.gain, REFERENCE_X0, sol) <= min(grid) + 1e-9

    def test_gain_depends_on_initial_state(self, cycle6):
        spec = cost_relative_disagreement(cycle6, q=2, r=1)
        # frozen from a quadrature + bounded-minimisation oracle
        a = solve_centralized(cycle6, spec, REFERENCE_X0).gain
        b = solve_centralized(cycle6, spec, [1, 0, 0, 0, 0, 0]).gain
        c = solve_centralized(cycle6, spec, [1, -1, 1, -1, 1, -1]).gain
        assert a == pytest.approx(1.5735916, abs=1e-6)
        assert b == pytest.approx(1.2909944, abs=1e-6)
        assert c == pytest.approx(1.0, abs=1e-6)


class TestCostOfGain:
    def test_consensus_state_free(self, cycle6):
        sol = solve_centralized(cycle6, cost_relative_disagreement(cycle6, 1, 1), REFERENCE_X0)
        for g in (0.1, 1.0, 10.0):
            assert cost_of_gain(g, np.ones(6), sol) == pytest.approx(0.0, abs=1e-12)

    def test_am_gm_at_optimum(self, cycle6):
        sol = solve_centralized(cycle6, cost_neighbor_average(cycle6, 2, 1), REFERENCE_X0)
        expect = 2 * np.sqrt(sol.x_form * sol.y_form)
        assert cost_of_gain(sol.gain, REFERENCE_X0, sol) == pytest.approx(expect, rel=1e-14)
        assert sol.optimal_cost == pytest.approx(expect, rel=1e-14)

    @pytest.mark.parametrize("g", [0.0, -1.0])
    def test_nonpositive(self, cycle6, g):
        sol = solve_centralized(cycle6, cost_neighbor_average(cycle6, 2, 1), REFERENCE_X0)
        with pytest.raises(NonPositiveGainError):
            cost_of_gain(g, REFERENCE_X0, sol)

    @pytest.mark.parametrize("g", [0.3, 1.0, 2.5])
    def test_matches_simulated_cost(self, cycle6, g):
        spec = cost_relative_disagreement(cycle6, q=2, r=1)
        sol = solve_centralized(cycle6, spec, REFERENCE_X0)
        time_scale = 1.0 / (4.0 * g)
        horizon = 40.0 / g
        times = np.linspace(0.0, horizon, int(np.ceil(horizon / (time_scale / 200))) + 1)
        trace = centralized_trajectory(g, cycle6, REFERENCE_X0, times)
        simulated = evaluate_trajectory_cost(trace, spec)
        assert simulated == pytest.approx(cost_of_gain(g, REFERENCE_X0, sol), rel=1e-4)


class TestCentralizedTrajectory:
    def test_initial(self, cycle6):
        trace = centralized_trajectory(0.7, cycle6, REFERENCE_X0, [0.0, 1.0])
        np.testing.assert_array_equal(trace.states[0], REFERENCE_X0)

    def test_p2_closed_form(self, p2):
        t = np.linspace(0, 3, 31)
        trace = centralized_trajectory(1.0, p2, [1.0, -1.0], t)
        e = np.exp(-2 * t)
        np.testing.assert_allclose(trace.states, np.column_stack([e, -e]), atol=1e-14)
        np.testing.assert_allclose(trace.inputs, np.column_stack([-2 * e, 2 * e]), atol=1e-14)

    def test_consensus_limit(self, rng):
        m = derive_matrices(random_connected_graph(rng, 7))
        x0 = rng.normal(size=7)
        trace = centralized_trajectory(1.0, m, x0, [0.0, 500.0])
        np.testing.assert_allclose(trace.states[-1], np.full(7, x0.mean()), atol=1e-10)

    def test_nonpositive_gain(self, p2):
        with pytest.raises(NonPositiveGainError):
            centralized_trajectory(0.0, p2, [1.0, 0.0], [0.0])
