"""
Unit tests for the Metropolis samplers

Tests acceptance probabilities, the four step functions, the chain driver,
frozen-kernel stationarity and the evaluation economy of two-stage kernels.
"""

import math

import numpy as np
import pytest

from core.adaptation import AdaptationConfig, default_config, init_state
from core.errors import SolverFailure, TargetEvaluationError
from core.linalg import cholesky, log_mvn_density
from core.samplers import (
    ChainState,
    ChainStreams,
    Kernel,
    SamplerConfig,
    am_step,
    assemble_frozen_kernel,
    discrete_proposal_matrix,
    initial_state,
    make_streams,
    mh_step,
    run_chain,
    stage1_accept_prob,
    stage2_accept_prob,
    surrogate_mode,
    tsam_step,
    tsmh_step,
)
from core.targets import Box, TwoLevelTarget, benchmark_t_target


class GaussianTarget(TwoLevelTarget):
    """Box-truncated Gaussian whose surrogate is another Gaussian (or itself)"""

    name = "gaussian"

    def __init__(self, d=2, surrogate_shift=0.0, halfwidth=10.0):
        self._d = d
        self._box = Box(-halfwidth * np.ones(d), halfwidth * np.ones(d))
        self.shift = surrogate_shift
        self.pi_calls = 0
        self.star_calls = 0

    @property
    def dim(self):
        return self._d

    @property
    def support(self):
        return self._box

    def log_pi(self, x):
        self.pi_calls += 1
        if not self._box.contains(x):
            return -math.inf
        return -0.5 * float(np.sum(np.asarray(x) ** 2))

    def log_pi_star(self, x):
        self.star_calls += 1
        if not self._box.contains(x):
            return -math.inf
        if self.shift == 0.0:
            return -0.5 * float(np.sum(np.asarray(x) ** 2))
        return -0.5 * float(np.sum((np.asarray(x) - self.shift) ** 2)) / 1.5


class FailingTarget(GaussianTarget):
    """Gaussian whose expensive density fails on half of the plane"""

    def log_pi(self, x):
        if x[0] > 1.0:
            raise SolverFailure("left the positive orthant", time=1.0)
        return super().log_pi(x)


def scripted_streams(mocker, normals, uniform=0.5):
    """Streams whose proposal normals and uniforms are fixed"""
    streams = ChainStreams(proposal=mocker.Mock(), stage1=mocker.Mock(), stage2=mocker.Mock(), init=mocker.Mock())
    streams.proposal.standard_normal.return_value = np.asarray(normals, dtype=float)
    streams.stage1.random.return_value = uniform
    streams.stage2.random.return_value = uniform
    return streams


def sampler(kernel, d=2, n_iters=2000, seed=3, **kwargs):
    return SamplerConfig(
        adaptation=default_config(d, t0=50, epsilon=1e-6),
        n_iters=n_iters,
        burn_in_fraction=kwargs.pop("burn_in_fraction", 0.0),
        seed=seed,
        kernel=kernel,
        **kwargs,
    )


class TestAcceptanceProbabilities:
    """Test stage1_accept_prob() and stage2_accept_prob()"""

    def test_stage1_equal_values(self):
        """Test that equal log values give 1"""
        assert stage1_accept_prob(-3.0, -3.0) == 1.0

    def test_stage1_half(self):
        """Test a log ratio of ln(0.5)"""
        assert stage1_accept_prob(0.0, math.log(0.5)) == pytest.approx(0.5)

    def test_stage1_outside_support(self):
        """Test that -inf proposals are rejected"""
        assert stage1_accept_prob(0.0, -math.inf) == 0.0

    def test_stage2_surrogate_equals_target(self):
        """Test that consistent values give exactly 1"""
        assert stage2_accept_prob(-1.3, -7.9, -1.3, -7.9) == 1.0

    def test_stage2_ratios_cancel(self):
        """Test pi ratio 2 and pi* ratio 2"""
        assert stage2_accept_prob(0.0, math.log(2.0), 0.0, math.log(2.0)) == 1.0

    def test_stage2_direct_formula(self):
        """Test pi ratio 1 and pi* ratio 4"""
        assert stage2_accept_prob(0.0, 0.0, 0.0, math.log(4.0)) == pytest.approx(0.25)

    def test_stage2_exactly_one_for_random_inputs(self):
        """Test that identical target and surrogate values never give less than 1"""
        rng = np.random.default_rng(0)
        for a, b in rng.normal(scale=50.0, size=(1000, 2)):
            assert stage2_accept_prob(a, b, a, b) == 1.0


class TestSteps:
    """Test the four single-step transition functions"""

    def test_stage1_rejection_skips_expensive(self, mocker):
        """Test that a proposal outside the box is rejected without evaluating pi"""
        target = GaussianTarget(halfwidth=1.0)
        rng = scripted_streams(mocker, [50.0, 0.0])
        config = default_config(2)
        state = ChainState(np.zeros(2), 0.0, 0.0)

        outcome, _ = tsam_step(state, init_state(config), target, config, rng)

        assert not outcome.stage1_accepted
        assert outcome.expensive_evals == 0
        assert target.pi_calls == 0
        rng.stage2.random.assert_not_called()
        assert np.array_equal(outcome.next.x, state.x)
        assert outcome.next.t == 1

    def test_uphill_always_accepted(self, mocker):
        """Test that an uphill proposal is accepted by am_step"""
        target = GaussianTarget()
        rng = scripted_streams(mocker, [-0.5, 0.0], uniform=0.999999)
        config = AdaptationConfig(C0=np.eye(2), t0=10, s_d=1.0, epsilon=1e-6)
        x = np.array([1.0, 0.0])
        state = ChainState(x, target.log_pi(x), None)

        outcome, adapt = am_step(state, init_state(config), target, config, rng)

        assert outcome.accepted
        assert np.allclose(outcome.next.x, [0.5, 0.0])
        assert outcome.expensive_evals == 1
        assert outcome.cheap_evals == 0
        assert adapt.t == 1
        rng.stage2.random.assert_not_called()

    def test_rejected_state_is_absorbed(self, mocker):
        """Test that a rejection still absorbs the repeated state"""
        target = GaussianTarget()
        rng = scripted_streams(mocker, [0.3, 0.3], uniform=1.0)
        config = default_config(2)
        x = np.array([0.2, -0.1])
        state = ChainState(x, target.log_pi(x), None)

        outcome, adapt = am_step(state, init_state(config), target, config, rng)

        assert not outcome.accepted
        assert adapt.t == 1
        assert np.array_equal(adapt.mean, x)

    def test_fixed_factor_steps(self):
        """Test that mh_step and tsmh_step agree when the surrogate equals the target"""
        target = GaussianTarget()
        R = cholesky(0.5 * np.eye(2))
        a, b = make_streams(11), make_streams(11)
        s_mh = ChainState(np.zeros(2), 0.0, None)
        s_ts = ChainState(np.zeros(2), 0.0, 0.0)
        for _ in range(500):
            o_mh = mh_step(s_mh, R, target, a)
            o_ts = tsmh_step(s_ts, R, target, b)
            assert o_mh.accepted == o_ts.accepted
            s_mh, s_ts = o_mh.next, o_ts.next
            assert np.array_equal(s_mh.x, s_ts.x)

    def test_two_point_acceptance_product(self, mocker):
        """Test the overall acceptance against alpha1 * alpha2 computed by hand"""
        target = GaussianTarget(d=1, surrogate_shift=0.1)
        x, y = np.array([0.0]), np.array([0.8])
        lp = [target.log_pi(x), target.log_pi(y)]
        ls = [target.log_pi_star(x), target.log_pi_star(y)]
        a1 = min(1.0, math.exp(ls[1] - ls[0]))
        a2 = min(1.0, math.exp((lp[1] - lp[0]) + (ls[0] - ls[1])))
        expected = a1 * a2

        rng = ChainStreams(
            proposal=mocker.Mock(),
            stage1=np.random.default_rng(1),
            stage2=np.random.default_rng(2),
            init=np.random.default_rng(3),
        )
        rng.proposal.standard_normal.return_value = np.array([0.8])
        state = ChainState(x, lp[0], ls[0])
        trials = 20000
        accepted = sum(tsmh_step(state, np.eye(1), target, rng).accepted for _ in range(trials))
        assert accepted / trials == pytest.approx(expected, abs=4 * math.sqrt(expected * (1 - expected) / trials))

    def test_evaluation_failure_is_rejection(self, mocker):
        """Test that SolverFailure becomes a counted rejection"""
        target = FailingTarget()
        rng = scripted_streams(mocker, [3.0, 0.0])
        state = ChainState(np.zeros(2), 0.0, None)

        outcome = mh_step(state, np.eye(2), target, rng)

        assert not outcome.accepted
        assert outcome.evaluation_failures == 1
        assert np.array_equal(outcome.next.x, state.x)


class TestInitialState:
    """Test initial_state()"""

    def test_draw_inside_support(self):
        """Test that the uniform draw lies in the box and caches both densities"""
        target = GaussianTarget()
        state, expensive, cheap = initial_state(target, make_streams(2), two_stage=True)
        assert target.in_support(state.x)
        assert state.log_pi_star_x is not None
        assert (expensive, cheap) == (1, 1)

    def test_single_stage_skips_surrogate(self):
        """Test that single-stage kernels do not evaluate pi*"""
        state, expensive, cheap = initial_state(GaussianTarget(), make_streams(2), two_stage=False)
        assert state.log_pi_star_x is None
        assert cheap == 0

    def test_override_outside_support(self):
        """Test that an explicit start outside the box is rejected"""
        with pytest.raises(ValueError):
            initial_state(GaussianTarget(halfwidth=1.0), make_streams(0), override=[5.0, 0.0])

    def test_no_finite_draw(self):
        """Test that a target with no finite density raises"""
        class Empty(GaussianTarget):
            def log_pi(self, x):
                return -math.inf

        with pytest.raises(TargetEvaluationError):
            initial_state(Empty(), make_streams(0))


class TestRunChain:
    """Test run_chain()"""

    def test_same_seed_identical(self):
        """Test bitwise reproducibility"""
        a = run_chain(GaussianTarget(surrogate_shift=0.3), sampler(Kernel.TSAM))
        b = run_chain(GaussianTarget(surrogate_shift=0.3), sampler(Kernel.TSAM))
        assert np.array_equal(a.states, b.states)
        assert np.array_equal(a.log_pi, b.log_pi)
        assert a.counters == b.counters

    def test_burn_in_and_thinning(self):
        """Test 1000 iterations, burn-in 0.5 and thinning 10 keep 50 states"""
        config = sampler(Kernel.MH, n_iters=1000, burn_in_fraction=0.5, thinning=10)
        trace = run_chain(GaussianTarget(), config)
        assert trace.n == 50 == config.retained
        assert trace.iterations[0] == 501
        assert trace.iterations[-1] == 991

    def test_degeneracy_tsam_equals_am(self):
        """Test identical state sequences over 10^4 steps when pi* equals pi"""
        target = GaussianTarget(d=3)
        tsam = run_chain(target, sampler(Kernel.TSAM, d=3, n_iters=10000))
        am = run_chain(target, sampler(Kernel.AM, d=3, n_iters=10000))
        assert np.array_equal(tsam.states, am.states)
        assert np.array_equal(tsam.stage2_accept, am.stage2_accept)
        assert np.all(tsam.stage1_accept[tsam.stage2_accept])
        # every stage-1 acceptance passed stage 2, so alpha2 was exactly 1
        assert tsam.counters["stage1_accepts"] == tsam.counters["stage2_accepts"]

    def test_degeneracy_tsmh_equals_mh(self):
        """Test identical state sequences for the fixed-proposal kernels"""
        target = GaussianTarget(d=2)
        assert np.array_equal(
            run_chain(target, sampler(Kernel.TSMH, n_iters=3000)).states,
            run_chain(target, sampler(Kernel.MH, n_iters=3000)).states,
        )

    def test_evaluation_economy(self):
        """Test expensive evaluations = stage-1 acceptances + 1 over 10^4 TSAM steps"""
        trace = run_chain(GaussianTarget(surrogate_shift=0.5), sampler(Kernel.TSAM, n_iters=10000))
        counters = trace.counters
        assert counters["expensive_evals"] == counters["stage1_accepts"] + 1
        assert counters["cheap_evals"] == counters["n_iters"] + 1
        assert counters["stage2_accepts"] <= counters["stage1_accepts"]

    def test_am_evaluates_every_step(self):
        """Test that AM evaluates pi once per step plus the initial state"""
        trace = run_chain(GaussianTarget(), sampler(Kernel.AM, n_iters=500))
        assert trace.counters["expensive_evals"] == 501
        assert trace.counters["cheap_evals"] == 0

    def test_am_mean_near_target_mean(self):
        """Test the long-run mean of a symmetric target within a 3-sigma band"""
        trace = run_chain(GaussianTarget(d=2), sampler(Kernel.AM, n_iters=40000, burn_in_fraction=0.1))
        se = 1.0 / math.sqrt(trace.n / 50.0)
        assert np.all(np.abs(trace.states.mean(axis=0)) < 3 * se)

    def test_failures_counted(self):
        """Test that solver failures are rejections and are counted"""
        trace = run_chain(FailingTarget(), sampler(Kernel.AM, n_iters=2000, initial_state=[0.0, 0.0]))
        assert trace.counters["evaluation_failures"] > 0
        assert np.all(trace.states[:, 0] <= 1.0)

    def test_t_target_stays_in_box(self):
        """Test that TSAM on the 8-d t target never leaves the truncation box"""
        target = benchmark_t_target()
        config = SamplerConfig(
            adaptation=default_config(8, support=target.support), n_iters=10000, burn_in_fraction=0.0, seed=1,
        )
        trace = run_chain(target, config)
        assert np.all(target.support.contains_rows(trace.states))
        assert np.all(np.isfinite(trace.log_pi))

    def test_dimension_mismatch(self):
        """Test that adaptation and target dimensions must agree"""
        with pytest.raises(ValueError):
            run_chain(GaussianTarget(d=2), sampler(Kernel.AM, d=3))

    def test_invalid_settings(self):
        """Test SamplerConfig validation"""
        with pytest.raises(ValueError):
            sampler(Kernel.AM, n_iters=0)
        with pytest.raises(ValueError):
            sampler(Kernel.AM, burn_in_fraction=1.0)
        with pytest.raises(ValueError):
            sampler(Kernel.AM, thinning=0)

    def test_thinned_trace(self):
        """Test post-hoc thinning keeps counters and wall time"""
        trace = run_chain(GaussianTarget(), sampler(Kernel.MH, n_iters=100))
        thin = trace.thinned(10)
        assert thin.n == 10
        assert thin.wall_seconds == trace.wall_seconds
        assert thin.counters == trace.counters


class TestFrozenKernel:
    """Test assemble_frozen_kernel() on a discretized 1-D target"""

    @pytest.fixture
    def grid(self):
        points = np.linspace(-4.0, 4.0, 101)
        log_pi = -0.5 * points ** 2 + 0.3 * np.sin(3 * points)
        log_pi_star = -0.5 * ((points - 0.7) / 1.3) ** 2
        return points, log_pi, log_pi_star

    def test_stationarity(self, grid):
        """Test pi Q = pi despite a mismatched surrogate"""
        points, log_pi, log_pi_star = grid
        Q = assemble_frozen_kernel(log_pi, log_pi_star, discrete_proposal_matrix(points, 0.5))
        pi = np.exp(log_pi - log_pi.max())
        pi /= pi.sum()
        assert np.allclose(Q.sum(axis=1), 1.0, atol=1e-12)
        assert np.all(Q >= 0.0)
        assert np.sum(np.abs(pi @ Q - pi)) < 1e-10

    def test_detailed_balance(self, grid):
        """Test pi(i) Q(i,j) = pi(j) Q(j,i)"""
        points, log_pi, log_pi_star = grid
        Q = assemble_frozen_kernel(log_pi, log_pi_star, discrete_proposal_matrix(points, 0.5))
        pi = np.exp(log_pi - log_pi.max())
        pi /= pi.sum()
        flow = pi[:, None] * Q
        assert np.max(np.abs(flow - flow.T)) < 1e-10

    def test_built_from_kernel_acceptance_rules(self, grid, mocker):
        """Test a second stage without the surrogate correction no longer leaves pi invariant"""
        points, log_pi, log_pi_star = grid
        mocker.patch(
            "core.samplers.stage2_accept_prob",
            side_effect=lambda lp_cur, lp_prop, ls_cur, ls_prop: min(1.0, math.exp(lp_prop - lp_cur)),
        )
        Q = assemble_frozen_kernel(log_pi, log_pi_star, discrete_proposal_matrix(points, 0.5))
        pi = np.exp(log_pi - log_pi.max())
        pi /= pi.sum()
        assert np.sum(np.abs(pi @ Q - pi)) > 1e-4

    @pytest.mark.parametrize("i, j", [(6, 9), (9, 6), (2, 4), (11, 12)])
    def test_matches_tsmh_step_acceptance(self, i, j, mocker):
        """Test Q(i,j) / P(i,j) equals the acceptance frequency of tsmh_step from point i to point j"""
        target = GaussianTarget(d=1, surrogate_shift=0.7)
        points = np.linspace(-3.0, 3.0, 13)
        lp = np.array([target.log_pi([p]) for p in points])
        ls = np.array([target.log_pi_star([p]) for p in points])
        P = discrete_proposal_matrix(points, 1.0)
        expected = assemble_frozen_kernel(lp, ls, P)[i, j] / P[i, j]

        rng = ChainStreams(
            proposal=mocker.Mock(),
            stage1=np.random.default_rng(10 + i),
            stage2=np.random.default_rng(20 + j),
            init=np.random.default_rng(0),
        )
        rng.proposal.standard_normal.return_value = np.array([points[j] - points[i]])
        state = ChainState(np.array([points[i]]), lp[i], ls[i])
        trials = 20000
        accepted = sum(tsmh_step(state, np.eye(1), target, rng).accepted for _ in range(trials))

        tolerance = 4 * math.sqrt(expected * (1 - expected) / trials) + 1e-12
        assert accepted / trials == pytest.approx(expected, abs=tolerance)

    def test_asymmetric_proposal_rejected(self):
        """Test that the proposal must be symmetric"""
        with pytest.raises(ValueError):
            assemble_frozen_kernel([0.0, 0.0], [0.0, 0.0], [[0.5, 0.5], [0.1, 0.9]])


class TestSurrogateMode:
    """Test surrogate_mode()"""

    def test_finds_surrogate_maximum(self):
        """Test that the search lands on the surrogate mode, not the target mode"""
        target = GaussianTarget(d=2, surrogate_shift=1.0)
        mode = surrogate_mode(target, x0=[0.0, 0.0])
        assert np.allclose(mode, [1.0, 1.0], atol=1e-3)

    def test_t_target_mode(self):
        """Test the Gaussian surrogate of the t target peaks at its location"""
        target = benchmark_t_target()
        mode = surrogate_mode(target)
        assert target.in_support(mode)
        assert log_mvn_density(mode, target.mu, target.Sigma) > log_mvn_density(target.mu, target.mu, target.Sigma) - 1e-3
