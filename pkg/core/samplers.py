"""
Metropolis Samplers

Four random-walk transition kernels sharing one chain driver:
- MH: Metropolis with a fixed Gaussian proposal
- TSMH: two-stage (delayed acceptance) Metropolis with a fixed proposal
- AM: adaptive Metropolis
- TSAM: two-stage adaptive Metropolis

Two-stage kernels screen every proposal with the cheap surrogate density
and evaluate the expensive density only when the screen passes. Each chain
draws from independent sub-streams (proposal normals, stage-1 uniforms,
stage-2 uniforms, initial state) so a two-stage chain whose surrogate equals
the target reproduces its single-stage counterpart exactly.
"""

import logging
import math
import time
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np
from scipy.optimize import minimize

from core.adaptation import AdaptationConfig, AdaptationState, absorb, init_state, proposal_factor
from core.errors import TargetEvaluationError
from core.linalg import as_vector, cholesky, mvn_sample
from core.targets import TwoLevelTarget

logger = logging.getLogger(__name__)

MAX_INIT_ATTEMPTS = 1000
FROZEN_KERNEL_TOLERANCE = 1e-12


class Kernel(str, Enum):
    """Transition kernel selector"""
    MH = "MH"
    TSMH = "TSMH"
    AM = "AM"
    TSAM = "TSAM"

    @property
    def two_stage(self) -> bool:
        return self in (Kernel.TSMH, Kernel.TSAM)

    @property
    def adaptive(self) -> bool:
        return self in (Kernel.AM, Kernel.TSAM)


@dataclass(frozen=True, eq=False)
class ChainState:
    """
    Current chain position with cached densities

    log_pi_star_x is None for single-stage kernels, which never evaluate
    the surrogate.
    """
    x: np.ndarray
    log_pi_x: float
    log_pi_star_x: Optional[float]
    t: int = 0


@dataclass
class StepOutcome:
    """Result of one transition"""
    next: ChainState
    stage1_accepted: bool
    stage2_accepted: bool
    expensive_evals: int
    cheap_evals: int
    evaluation_failures: int = 0

    @property
    def accepted(self) -> bool:
        return self.stage1_accepted and self.stage2_accepted


@dataclass
class SamplerConfig:
    """
    Settings of one chain

    For MH and TSMH the proposal covariance is fixed at adaptation.C0.
    """
    adaptation: AdaptationConfig
    n_iters: int
    burn_in_fraction: float = 0.5
    thinning: int = 1
    seed: int = 0
    kernel: Kernel = Kernel.TSAM
    initial_state: Optional[np.ndarray] = None

    def __post_init__(self):
        self.kernel = Kernel(self.kernel)
        if self.n_iters <= 0:
            raise ValueError(f"n_iters must be positive, got {self.n_iters}")
        if not 0 <= self.burn_in_fraction < 1:
            raise ValueError(f"burn_in_fraction must lie in [0, 1), got {self.burn_in_fraction}")
        if self.thinning < 1:
            raise ValueError(f"thinning must be at least 1, got {self.thinning}")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError(f"seed must be a 64-bit nonnegative integer, got {self.seed}")

    @property
    def burn_in(self) -> int:
        return int(math.floor(self.burn_in_fraction * self.n_iters))

    @property
    def retained(self) -> int:
        """Number of states kept after burn-in and thinning"""
        remaining = self.n_iters - self.burn_in
        return (remaining + self.thinning - 1) // self.thinning

    def snapshot(self) -> Dict[str, Any]:
        return {
            "kernel": self.kernel.value,
            "n_iters": self.n_iters,
            "burn_in_fraction": self.burn_in_fraction,
            "thinning": self.thinning,
            "seed": self.seed,
            "t0": self.adaptation.t0,
            "s_d": self.adaptation.s_d,
            "epsilon": self.adaptation.epsilon,
            "K": self.adaptation.K,
        }


@dataclass
class ChainStreams:
    """Independent random sub-streams of one chain"""
    proposal: np.random.Generator
    stage1: np.random.Generator
    stage2: np.random.Generator
    init: np.random.Generator


def make_streams(seed: int) -> ChainStreams:
    """Spawn the four sub-streams of a chain from its seed"""
    children = np.random.SeedSequence(seed).spawn(4)
    proposal, stage1, stage2, init = (np.random.default_rng(child) for child in children)
    return ChainStreams(proposal=proposal, stage1=stage1, stage2=stage2, init=init)


@dataclass
class Trace:
    """
    Retained output of one chain

    Row i of every per-row array describes the state after iteration
    iterations[i] (1-based). Counters cover the whole run, burn-in included.
    """
    states: np.ndarray
    log_pi: np.ndarray
    iterations: np.ndarray
    stage1_accept: np.ndarray
    stage2_accept: np.ndarray
    expensive_eval: np.ndarray
    wall_seconds: float
    counters: Dict[str, int] = field(default_factory=dict)
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        n = self.states.shape[0]
        for name in ("log_pi", "iterations", "stage1_accept", "stage2_accept", "expensive_eval"):
            if getattr(self, name).shape[0] != n:
                raise ValueError(f"Trace column '{name}' does not have {n} rows")

    @property
    def n(self) -> int:
        return self.states.shape[0]

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @property
    def wall_minutes(self) -> float:
        return self.wall_seconds / 60.0

    def acceptance_rate(self) -> float:
        n_iters = self.counters.get("n_iters", 0)
        return self.counters.get("stage2_accepts", 0) / n_iters if n_iters else 0.0

    def stage1_rate(self) -> float:
        n_iters = self.counters.get("n_iters", 0)
        return self.counters.get("stage1_accepts", 0) / n_iters if n_iters else 0.0

    def thinned(self, k: int) -> "Trace":
        """Every k-th retained row; wall time and counters are unchanged"""
        if k < 1:
            raise ValueError(f"Thinning must be at least 1, got {k}")
        rows = slice(None, None, k)
        return replace(
            self,
            states=self.states[rows],
            log_pi=self.log_pi[rows],
            iterations=self.iterations[rows],
            stage1_accept=self.stage1_accept[rows],
            stage2_accept=self.stage2_accept[rows],
            expensive_eval=self.expensive_eval[rows],
            meta={**self.meta, "post_thinning": k},
        )


def stage1_accept_prob(log_pi_star_current: float, log_pi_star_proposal: float) -> float:
    """min(1, pi*(proposal) / pi*(current)); 0 for proposals outside the support"""
    if math.isnan(log_pi_star_proposal) or log_pi_star_proposal == -math.inf:
        return 0.0
    diff = log_pi_star_proposal - log_pi_star_current
    return 1.0 if diff >= 0.0 else math.exp(diff)


def stage2_accept_prob(
    log_pi_current: float,
    log_pi_proposal: float,
    log_pi_star_current: float,
    log_pi_star_proposal: float,
) -> float:
    """
    Second-stage acceptance probability

    min(1, [pi(x) / pi(x_prev)] * [pi*(x_prev) / pi*(x)]). When pi* equals
    pi the two log differences cancel exactly and the result is 1.
    """
    if math.isnan(log_pi_proposal) or log_pi_proposal == -math.inf:
        return 0.0
    diff = (log_pi_proposal - log_pi_current) + (log_pi_star_current - log_pi_star_proposal)
    if math.isnan(diff):
        return 0.0
    return 1.0 if diff >= 0.0 else math.exp(diff)


def _evaluate(density: Callable[[np.ndarray], float], x: np.ndarray) -> Tuple[float, int]:
    """Evaluate a log-density; failures and NaN become -inf and are counted"""
    try:
        value = float(density(x))
    except TargetEvaluationError as e:
        logger.debug(f"Target evaluation failed: {e}")
        return -math.inf, 1
    if math.isnan(value):
        return -math.inf, 1
    return value, 0


def _two_stage_transition(state: ChainState, factor: np.ndarray, target: TwoLevelTarget, rng: ChainStreams) -> StepOutcome:
    proposal = mvn_sample(state.x, factor, rng.proposal)
    log_star, failures = _evaluate(target.log_pi_star, proposal)

    alpha1 = stage1_accept_prob(state.log_pi_star_x, log_star)
    if not rng.stage1.random() < alpha1:
        return StepOutcome(replace(state, t=state.t + 1), False, False, 0, 1, failures)

    log_pi, failed = _evaluate(target.log_pi, proposal)
    failures += failed
    alpha2 = stage2_accept_prob(state.log_pi_x, log_pi, state.log_pi_star_x, log_star)
    if rng.stage2.random() < alpha2:
        return StepOutcome(ChainState(proposal, log_pi, log_star, state.t + 1), True, True, 1, 1, failures)
    return StepOutcome(replace(state, t=state.t + 1), True, False, 1, 1, failures)


def _single_stage_transition(state: ChainState, factor: np.ndarray, target: TwoLevelTarget, rng: ChainStreams) -> StepOutcome:
    proposal = mvn_sample(state.x, factor, rng.proposal)
    log_pi, failures = _evaluate(target.log_pi, proposal)

    if rng.stage1.random() < stage1_accept_prob(state.log_pi_x, log_pi):
        return StepOutcome(ChainState(proposal, log_pi, None, state.t + 1), True, True, 1, 0, failures)
    return StepOutcome(replace(state, t=state.t + 1), False, False, 1, 0, failures)


def tsam_step(
    state: ChainState,
    adapt: AdaptationState,
    target: TwoLevelTarget,
    config: AdaptationConfig,
    rng: ChainStreams,
) -> Tuple[StepOutcome, AdaptationState]:
    """
    One two-stage adaptive Metropolis transition

    The proposal uses the current adaptive factor. On stage-1 rejection the
    expensive density is not evaluated and no stage-2 uniform is drawn. The
    realized next state is absorbed into the adaptation state whether or not
    the proposal was accepted.

    Args:
        state: Current chain state (both densities cached)
        adapt: Adaptation state consistent with the chain history
        target: Two-level target
        config: Adaptation tunables
        rng: Chain sub-streams

    Returns:
        Tuple of (StepOutcome, updated AdaptationState)
    """
    outcome = _two_stage_transition(state, proposal_factor(adapt), target, rng)
    absorb(adapt, outcome.next.x, config)
    return outcome, adapt


def tsmh_step(state: ChainState, fixed_factor: np.ndarray, target: TwoLevelTarget, rng: ChainStreams) -> StepOutcome:
    """Two-stage Metropolis transition with a fixed proposal factor"""
    return _two_stage_transition(state, fixed_factor, target, rng)


def am_step(
    state: ChainState,
    adapt: AdaptationState,
    target: TwoLevelTarget,
    config: AdaptationConfig,
    rng: ChainStreams,
) -> Tuple[StepOutcome, AdaptationState]:
    """Adaptive Metropolis transition: one expensive evaluation per step"""
    outcome = _single_stage_transition(state, proposal_factor(adapt), target, rng)
    absorb(adapt, outcome.next.x, config)
    return outcome, adapt


def mh_step(state: ChainState, fixed_factor: np.ndarray, target: TwoLevelTarget, rng: ChainStreams) -> StepOutcome:
    """Random-walk Metropolis transition with a fixed proposal factor"""
    return _single_stage_transition(state, fixed_factor, target, rng)


def initial_state(
    target: TwoLevelTarget,
    rng: ChainStreams,
    two_stage: bool = True,
    override=None,
) -> Tuple[ChainState, int, int]:
    """
    Starting state of a chain

    Draws uniformly from the support box until the densities are finite.

    Args:
        target: Target to sample
        rng: Chain sub-streams (only the init stream is used)
        two_stage: Whether the surrogate density must be cached as well
        override: Explicit starting point (validated against the box)

    Returns:
        Tuple of (ChainState, expensive evaluations used, cheap evaluations used)

    Raises:
        ValueError: If the override lies outside the support or has zero density
        TargetEvaluationError: If no finite-density draw is found
    """
    expensive = cheap = 0

    def evaluate(x):
        nonlocal expensive, cheap
        log_star = None
        if two_stage:
            log_star, _ = _evaluate(target.log_pi_star, x)
            cheap += 1
        log_pi, _ = _evaluate(target.log_pi, x)
        expensive += 1
        return log_pi, log_star

    if override is not None:
        x = as_vector(override, target.dim)
        if not target.in_support(x):
            raise ValueError("Initial state lies outside the target support")
        log_pi, log_star = evaluate(x)
        if not math.isfinite(log_pi) or (two_stage and not math.isfinite(log_star)):
            raise ValueError("Target density is zero at the initial state")
        return ChainState(x, log_pi, log_star, 0), expensive, cheap

    for attempt in range(1, MAX_INIT_ATTEMPTS + 1):
        x = target.support.sample_uniform(rng.init)
        log_pi, log_star = evaluate(x)
        if math.isfinite(log_pi) and (not two_stage or math.isfinite(log_star)):
            if attempt > 1:
                logger.warning(f"Initial state found after {attempt} draws")
            return ChainState(x, log_pi, log_star, 0), expensive, cheap

    raise TargetEvaluationError(f"No initial state with finite density in {MAX_INIT_ATTEMPTS} uniform draws")


def run_chain(target: TwoLevelTarget, config: SamplerConfig) -> Trace:
    """
    Run one chain and return its retained output

    Deterministic given config.seed. Burn-in and thinning are applied to
    the output; the counters and the wall time cover the whole run.

    Args:
        target: Target to sample
        config: Chain settings

    Returns:
        Trace
    """
    kernel = config.kernel
    adaptation = config.adaptation
    if adaptation.dim != target.dim:
        raise ValueError(f"Adaptation dimension {adaptation.dim} does not match target dimension {target.dim}")

    rng = make_streams(config.seed)
    n, d = config.n_iters, target.dim
    states = np.empty((n, d))
    log_pi = np.empty(n)
    stage1 = np.zeros(n, dtype=bool)
    stage2 = np.zeros(n, dtype=bool)
    expensive_flag = np.zeros(n, dtype=bool)
    failures = 0

    started = time.perf_counter()
    state, expensive, cheap = initial_state(target, rng, kernel.two_stage, config.initial_state)

    adapt = None
    fixed_factor = None
    if kernel.adaptive:
        adapt = init_state(adaptation)
        absorb(adapt, state.x, adaptation)
    else:
        fixed_factor = cholesky(adaptation.C0)

    for i in range(n):
        if kernel is Kernel.TSAM:
            outcome, adapt = tsam_step(state, adapt, target, adaptation, rng)
        elif kernel is Kernel.AM:
            outcome, adapt = am_step(state, adapt, target, adaptation, rng)
        elif kernel is Kernel.TSMH:
            outcome = tsmh_step(state, fixed_factor, target, rng)
        else:
            outcome = mh_step(state, fixed_factor, target, rng)

        state = outcome.next
        states[i] = state.x
        log_pi[i] = state.log_pi_x
        stage1[i] = outcome.stage1_accepted
        stage2[i] = outcome.stage2_accepted
        expensive_flag[i] = outcome.expensive_evals > 0
        expensive += outcome.expensive_evals
        cheap += outcome.cheap_evals
        failures += outcome.evaluation_failures

    wall_seconds = max(time.perf_counter() - started, 1e-9)

    counters = {
        "n_iters": n,
        "stage1_accepts": int(stage1.sum()),
        "stage2_accepts": int(stage2.sum()),
        "expensive_evals": expensive,
        "cheap_evals": cheap,
        "evaluation_failures": failures,
    }
    if failures:
        logger.warning(f"{kernel.value}: {failures} target evaluations failed and were treated as rejections")
    logger.info(
        f"{kernel.value} finished {n} iterations in {wall_seconds:.2f}s "
        f"(stage-1 rate {counters['stage1_accepts'] / n:.3f}, "
        f"acceptance {counters['stage2_accepts'] / n:.3f}, expensive evals {expensive})"
    )

    rows = slice(config.burn_in, None, config.thinning)
    return Trace(
        states=states[rows],
        log_pi=log_pi[rows],
        iterations=np.arange(1, n + 1)[rows],
        stage1_accept=stage1[rows],
        stage2_accept=stage2[rows],
        expensive_eval=expensive_flag[rows],
        wall_seconds=wall_seconds,
        counters=counters,
        meta={**config.snapshot(), "target": target.describe()},
    )


def discrete_proposal_matrix(points, scale: float) -> np.ndarray:
    """
    Symmetric sub-stochastic Gaussian random-walk proposal on a finite grid

    Weights exp(-(x_i - x_j)^2 / (2 scale^2)) are divided by the largest row
    sum, so every row sums to at most 1.
    """
    x = as_vector(points)
    if not scale > 0:
        raise ValueError(f"Proposal scale must be positive, got {scale}")
    W = np.exp(-0.5 * ((x[:, None] - x[None, :]) / scale) ** 2)
    return W / W.sum(axis=1).max()


def assemble_frozen_kernel(log_pi, log_pi_star, proposal) -> np.ndarray:
    """
    Transition matrix of the two-stage Metropolis kernel on a finite state space

    Q_ij = P_ij * a1(i, j) * a2(i, j) for j != i, and the diagonal takes the
    remaining mass, including proposal mass that leaves the grid. a1 and a2
    are stage1_accept_prob and stage2_accept_prob, the rules the sampling
    kernels apply.

    Args:
        log_pi: Target log-density at each state (m,)
        log_pi_star: Surrogate log-density at each state (m,)
        proposal: Symmetric sub-stochastic proposal matrix (m, m)

    Returns:
        Row-stochastic matrix Q (m, m)
    """
    lp = as_vector(log_pi)
    ls = as_vector(log_pi_star, lp.size)
    P = np.asarray(proposal, dtype=float)
    if P.shape != (lp.size, lp.size):
        raise ValueError(f"Proposal must have shape ({lp.size}, {lp.size}), got {P.shape}")
    if np.any(P < 0) or not np.allclose(P, P.T, atol=FROZEN_KERNEL_TOLERANCE, rtol=0.0):
        raise ValueError("Proposal must be nonnegative and symmetric")
    if np.any(P.sum(axis=1) > 1.0 + FROZEN_KERNEL_TOLERANCE):
        raise ValueError("Proposal rows must sum to at most 1")

    m = lp.size
    Q = np.zeros((m, m))
    for i in range(m):
        for j in range(m):
            if i == j or P[i, j] == 0.0:
                continue
            a1 = stage1_accept_prob(ls[i], ls[j])
            a2 = stage2_accept_prob(lp[i], lp[j], ls[i], ls[j])
            Q[i, j] = P[i, j] * a1 * a2
    np.fill_diagonal(Q, 1.0 - Q.sum(axis=1))
    return Q


def surrogate_mode(target: TwoLevelTarget, x0=None, max_iter: Optional[int] = None) -> np.ndarray:
    """
    Approximate maximizer of the surrogate density inside the support box

    Bounded Nelder-Mead on -log pi*, started from x0 (default: box centre).
    Used to start chains of high-dimensional or strongly scaled targets
    near the posterior bulk.
    """
    box = target.support
    start = as_vector(x0, target.dim) if x0 is not None else 0.5 * (box.lower + box.upper)

    def objective(x):
        value, _ = _evaluate(target.log_pi_star, x)
        return -value if math.isfinite(value) else 1e300

    result = minimize(
        objective,
        start,
        method="Nelder-Mead",
        bounds=list(zip(box.lower, box.upper)),
        options={"maxiter": max_iter or 400 * target.dim, "xatol": 1e-8, "fatol": 1e-8},
    )
    logger.info(f"Surrogate mode search: {result.nit} iterations, log pi* = {-result.fun:.6g}")
    return np.clip(result.x, box.lower, box.upper)
