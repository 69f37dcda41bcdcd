import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from lqconsensus.costs import ScalarWeights
from lqconsensus.errors import ConfigError, NonNegativeGainError
from lqconsensus.graph import derive_matrices
from lqconsensus.protocol import (
    ProtocolConfig,
    consensus_certificate,
    disagreement,
    discrete_iterate,
    gamma_matrix,
    interval_state,
    simulate_protocol,
)
from lqconsensus.tracking import AgentGains, scalar_agent_gains

from conftest import REFERENCE_X0
from oracles import random_connected_graph

W = ScalarWeights(q=2.0, r=1.0, alpha=0.01)


class TestGamma:
    def test_tiny_period_is_identity(self, cycle6):
        np.testing.assert_allclose(gamma_matrix(-1.4, 1e-12, cycle6), np.eye(6), atol=1e-11)

    def test_p2_half_decay(self, p2):
        gam = gamma_matrix(-1.0, math.log(2.0), p2)
        np.testing.assert_allclose(gam, [[0.75, 0.25], [0.25, 0.75]], atol=1e-15)
        np.testing.assert_allclose(np.sort(np.linalg.eigvals(gam).real), [0.5, 1.0], atol=1e-15)

    def test_row_stochastic(self, rng):
        m = derive_matrices(random_connected_graph(rng, 9))
        gam = gamma_matrix(-0.8, 2.0, m)
        np.testing.assert_allclose(gam.sum(axis=1), 1.0, atol=1e-14)

    @pytest.mark.parametrize("g", [0.0, 0.5])
    def test_rejects_nonnegative_gain(self, p2, g):
        with pytest.raises(NonNegativeGainError):
            gamma_matrix(g, 1.0, p2)

    def test_eigenvalue_map(self, rng):
        # mu = e^{gT} - lambda (e^{gT} - 1) for every eigenvalue lambda of G
        m = derive_matrices(random_connected_graph(rng, 8))
        g, t = -1.3, 0.7
        lam = np.sort(np.linalg.eigvals(np.asarray(m.averaging)).real)
        mu = np.sort(np.linalg.eigvals(gamma_matrix(g, t, m)).real)
        e = math.exp(g * t)
        np.testing.assert_allclose(mu, np.sort(e - lam * (e - 1.0)), atol=1e-9)


class TestCertificate:
    @settings(max_examples=40, deadline=None)
    @given(
        seed=st.integers(0, 2**31 - 1),
        n=st.integers(2, 12),
        g=st.floats(-5.0, -0.01),
        t=st.floats(0.01, 20.0),
    )
    def test_random_instances_certified(self, seed, n, g, t):
        m = derive_matrices(random_connected_graph(np.random.default_rng(seed), n))
        cert = consensus_certificate(gamma_matrix(g, t, m), m)
        assert cert.is_consensus
        assert np.all(cert.gamma_eigenvalues > -1.0) and np.all(cert.gamma_eigenvalues <= 1.0 + 1e-12)
        assert 0.0 < cert.spectral_gap <= 1.0

    def test_identity_not_certified(self, cycle6):
        assert not consensus_certificate(np.eye(6), cycle6).is_consensus

    def test_p2_gap(self, p2):
        cert = consensus_certificate(gamma_matrix(-1.0, math.log(2.0), p2), p2)
        assert cert.is_consensus
        assert cert.spectral_gap == pytest.approx(0.5, abs=1e-14)
        assert set(cert.summary()) == {"is_consensus", "spectral_gap", "gamma_eigenvalues"}

    def test_gap_grows_with_period(self, cycle6):
        gaps = [consensus_certificate(gamma_matrix(-1.4, t, cycle6), cycle6).spectral_gap for t in (0.01, 0.1, 1, 10)]
        assert np.all(np.diff(gaps) > 0)


class TestSimulation:
    def cfg(self, t=1.0, horizon=10.0, dt=0.1):
        return ProtocolConfig(weights=W, sample_period=t, horizon=horizon, output_dt=dt)

    def test_consensus_state_is_fixed(self, cycle6):
        tr = simulate_protocol(cycle6, np.full(6, 2.5), self.cfg())
        np.testing.assert_allclose(tr.states, 2.5, atol=1e-15)
        np.testing.assert_allclose(tr.inputs, 0.0, atol=1e-15)

    def test_cycle6_limit(self, cycle6):
        tr = simulate_protocol(cycle6, REFERENCE_X0, self.cfg(t=10.0, horizon=500.0, dt=0.5))
        fixed = discrete_iterate(gamma_matrix(scalar_agent_gains(W).g, 10.0, cycle6), REFERENCE_X0, 200)[-1]
        np.testing.assert_allclose(fixed, 2.0 / 3.0, atol=1e-12)
        np.testing.assert_allclose(tr.states[-1], 2.0 / 3.0, atol=1e-6)

    def test_faster_sampling_reaches_consensus_sooner(self, cycle6):
        slow = simulate_protocol(cycle6, REFERENCE_X0, self.cfg(t=10.0, horizon=30.0, dt=0.1))
        fast = simulate_protocol(cycle6, REFERENCE_X0, self.cfg(t=0.1, horizon=30.0, dt=0.1))
        assert fast.disagreement[-1] < slow.disagreement[-1]

    def test_samples_match_discrete_iteration(self, rng):
        m = derive_matrices(random_connected_graph(rng, 7))
        x0 = rng.normal(size=7)
        tr = simulate_protocol(m, x0, self.cfg(t=0.5, horizon=20.0, dt=0.05))
        g = scalar_agent_gains(W).g
        ref = discrete_iterate(gamma_matrix(g, 0.5, m), x0, len(tr.sample_states) - 1)
        np.testing.assert_allclose(tr.sample_states, ref, atol=1e-10)
        np.testing.assert_array_equal(tr.states[tr.sample_indices], tr.sample_states)

    def test_discrete_iterate_zero_steps(self):
        out = discrete_iterate(np.eye(3), [1.0, 2.0, 3.0], 0)
        np.testing.assert_array_equal(out, [[1.0, 2.0, 3.0]])

    def test_explicit_solution_matches_variation_of_constants(self, triangle):
        g, t = -0.9, 1.0
        x0 = np.array([1.0, -2.0, 0.5])
        avg = np.asarray(triangle.averaging) @ x0
        for s in (0.0, 0.3, 0.99):
            got = interval_state(x0, avg, g, s)
            # x(s) = e^{gs} x0 - g int_0^s e^{g(s - tau)} dtau * avg
            integral = quad(lambda tau: math.exp(g * (s - tau)), 0.0, s)[0]
            np.testing.assert_allclose(got, math.exp(g * s) * x0 - g * integral * avg, atol=1e-12)

    def test_state_continuity_across_samples(self, cycle6):
        cfg = self.cfg(t=1.0, horizon=5.0, dt=0.25)
        tr = simulate_protocol(cycle6, REFERENCE_X0, cfg)
        g = scalar_agent_gains(W).g
        big_g = np.asarray(cycle6.averaging)
        for k in range(1, len(tr.sample_states)):
            prev = tr.sample_states[k - 1]
            end = interval_state(prev, big_g @ prev, g, cfg.sample_period)
            assert np.max(np.abs(end - tr.sample_states[k])) < 1e-12

    def test_left_limit_inputs(self, cycle6):
        tr = simulate_protocol(cycle6, REFERENCE_X0, self.cfg(t=1.0, horizon=3.0, dt=0.5))
        g = scalar_agent_gains(W).g
        big_g = np.asarray(cycle6.averaging)
        k = tr.sample_indices[1]
        np.testing.assert_allclose(tr.inputs_left[k], g * (tr.states[k] - big_g @ tr.sample_states[0]), atol=1e-14)
        np.testing.assert_allclose(tr.inputs[k], g * (tr.states[k] - big_g @ tr.states[k]), atol=1e-14)

    def test_custom_gains(self, p2):
        tr = simulate_protocol(p2, [1.0, -1.0], self.cfg(t=math.log(2.0), horizon=math.log(2.0), dt=math.log(2.0)), gains=AgentGains(-1.0, 1.0))
        np.testing.assert_allclose(tr.states[-1], [0.5, -0.5], atol=1e-15)

    @settings(max_examples=15, deadline=None)
    @given(seed=st.integers(0, 2**31 - 1), n=st.integers(2, 9))
    def test_random_consensus(self, seed, n):
        rng = np.random.default_rng(seed)
        m = derive_matrices(random_connected_graph(rng, n))
        x0 = rng.normal(size=n)
        g = scalar_agent_gains(W).g
        gam = gamma_matrix(g, 1.0, m)
        gap = consensus_certificate(gam, m).spectral_gap
        steps = int(math.ceil(40.0 / gap))
        tr = simulate_protocol(m, x0, self.cfg(t=1.0, horizon=float(steps), dt=1.0))
        assert tr.disagreement[-1] < 1e-6 * max(disagreement(x0), 1e-300) + 1e-15

    def test_shape_mismatch(self, cycle6):
        with pytest.raises(ConfigError):
            simulate_protocol(cycle6, [1.0, 2.0], self.cfg())


class TestConfig:
    @pytest.mark.parametrize(
        "t,h,dt",
        [(1.0, 10.0, 0.0), (1.0, 10.0, 2.0), (1.0, 0.5, 0.1), (1.0, 10.0, 0.3), (1.0, 10.05, 0.1), (-1.0, 10.0, 0.1)],
    )
    def test_invalid(self, t, h, dt):
        with pytest.raises(ConfigError):
            ProtocolConfig(weights=W, sample_period=t, horizon=h, output_dt=dt)

    def test_counts(self):
        cfg = ProtocolConfig(weights=W, sample_period=0.1, horizon=40.0, output_dt=0.001)
        assert cfg.steps_per_period == 100 and cfg.n_steps == 40000


class TestDisagreement:
    @pytest.mark.parametrize(
        "x,expect",
        [(REFERENCE_X0, 5.0), ([1.0], 0.0), ([2.0, 2.0], 0.0), ([-1.0, 4.0, 0.0], 5.0), ([0.1, 0.2], 0.1)],
    )
    def test_examples(self, x, expect):
        assert disagreement(np.asarray(x)) == pytest.approx(expect, abs=1e-15)

    def test_graph_argument(self, cycle6):
        assert disagreement(REFERENCE_X0, cycle6) == 5.0
        with pytest.raises(ValueError):
            disagreement([1.0, 2.0], cycle6)

    def test_matches_trace_column(self, cycle6):
        cfg = ProtocolConfig(weights=W, sample_period=1.0, horizon=4.0, output_dt=0.5)
        tr = simulate_protocol(cycle6, REFERENCE_X0, cfg)
        np.testing.assert_array_equal(tr.disagreement, [disagreement(row) for row in tr.states])
