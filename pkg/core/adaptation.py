"""
Adaptive Proposal Covariance

Maintains the running mean, the empirical covariance of the chain history
and the Cholesky factor of the adaptive proposal covariance

    C_t = C0                                   if t < t0
    C_t = s_d * cov(x_0..x_{t-1}) + s_d * eps * I   otherwise

The empirical covariance uses divisor (n - 1). Mean and scatter are updated
with Welford's recursion at every absorb; the proposal covariance and its
factor are refreshed every K-th absorb, by rank-one updates when K <= d and
by a fresh factorization otherwise. The jitter s_d * eps * I shrinks
relative to the scatter at every refresh, so an incremental refresh applies
K deviation updates plus d diagonal updates and costs O((K + d) d^2).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from core.linalg import add_to_diagonal, as_vector, cholesky, rank_one_update, symmetrize

logger = logging.getLogger(__name__)

DEFAULT_T0 = 100
DEFAULT_EPSILON_SCALE = 1e-6


@dataclass
class AdaptationConfig:
    """Tunables of the adaptive proposal"""
    C0: np.ndarray
    t0: int
    s_d: float
    epsilon: float
    K: int = 1

    def __post_init__(self):
        self.C0 = symmetrize(self.C0)
        if self.t0 <= 0:
            raise ValueError(f"t0 must be positive, got {self.t0}")
        if not self.s_d > 0:
            raise ValueError(f"s_d must be positive, got {self.s_d}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.K < 1:
            raise ValueError(f"K must be at least 1, got {self.K}")

    @property
    def dim(self) -> int:
        return self.C0.shape[0]


@dataclass
class AdaptationState:
    """
    Running statistics of one chain

    `pending` holds the weighted deviation vectors of states absorbed since
    the last refresh; `refreshed_at` is the count t at that refresh.
    """
    t: int
    mean: np.ndarray
    scatter: np.ndarray
    factor: np.ndarray
    covariance: np.ndarray
    pending: List[np.ndarray] = field(default_factory=list)
    adaptive: bool = False
    refreshed_at: int = 0

    @property
    def raw_cov(self) -> np.ndarray:
        """Unscaled empirical covariance (divisor n - 1) of all absorbed states"""
        if self.t < 2:
            return np.zeros_like(self.scatter)
        return self.scatter / (self.t - 1)


def default_config(
    d: int,
    support=None,
    c: float = 1.0,
    t0: int = DEFAULT_T0,
    K: int = 1,
    epsilon: Optional[float] = None,
    scale_epsilon: bool = True,
) -> AdaptationConfig:
    """
    Default tunables: s_d = 2.4^2/d, C0 = c * s_d * I

    Args:
        d: Dimension
        support: Box with `lower`/`upper` used to scale epsilon (optional)
        c: Initial covariance multiplier, c <= 1
        t0: Length of the non-adaptive initial period
        K: Update period
        epsilon: Explicit epsilon (overrides the default)
        scale_epsilon: Scale the default epsilon by the squared support diameter

    Returns:
        AdaptationConfig
    """
    if d < 1:
        raise ValueError(f"Dimension must be at least 1, got {d}")
    if not 0 < c <= 1:
        raise ValueError(f"C0 multiplier c must lie in (0, 1], got {c}")

    s_d = 2.4 ** 2 / d
    if epsilon is None:
        epsilon = DEFAULT_EPSILON_SCALE
        if scale_epsilon and support is not None:
            diameter = float(np.linalg.norm(np.asarray(support.upper) - np.asarray(support.lower)))
            epsilon *= diameter ** 2

    return AdaptationConfig(C0=c * s_d * np.eye(d), t0=t0, s_d=s_d, epsilon=epsilon, K=K)


def init_state(config: AdaptationConfig) -> AdaptationState:
    """Empty state whose proposal is C0"""
    d = config.dim
    return AdaptationState(
        t=0,
        mean=np.zeros(d),
        scatter=np.zeros((d, d)),
        factor=cholesky(config.C0),
        covariance=config.C0.copy(),
    )


def direct_covariance(states, config: AdaptationConfig) -> np.ndarray:
    """
    Proposal covariance computed from the full history in one pass

    Args:
        states: Array of shape (n, d) with the absorbed states in order
        config: Adaptation tunables

    Returns:
        C0 when n < t0, else s_d * cov + s_d * eps * I
    """
    X = np.atleast_2d(np.asarray(states, dtype=float))
    n, d = X.shape
    if n < config.t0:
        return config.C0.copy()
    raw = np.cov(X, rowvar=False, ddof=1).reshape(d, d) if n >= 2 else np.zeros((d, d))
    return config.s_d * raw + config.s_d * config.epsilon * np.eye(d)


def absorb(state: AdaptationState, x_new, config: AdaptationConfig) -> AdaptationState:
    """
    Absorb one chain state

    The state is updated in place and returned. Mean and scatter always
    match the batch statistics of everything absorbed; the proposal factor
    is refreshed on every K-th absorb.

    Args:
        state: Adaptation state of the chain
        x_new: Realized chain state
        config: Adaptation tunables

    Returns:
        The updated state
    """
    x = as_vector(x_new, config.dim)
    t = state.t + 1

    if state.t == 0:
        state.mean = x.copy()
        state.scatter = np.zeros((config.dim, config.dim))
    else:
        delta = x - state.mean
        state.mean = state.mean + delta / t
        weight = (t - 1) / t
        state.scatter = state.scatter + weight * np.outer(delta, delta)
        state.pending.append(math.sqrt(weight) * delta)

    state.t = t
    if t % config.K == 0:
        _refresh(state, config)
    return state


def _refresh(state: AdaptationState, config: AdaptationConfig) -> None:
    """Bring covariance and factor up to date with the absorbed history"""
    n = state.t
    d = config.dim

    if n < config.t0:
        if state.adaptive:
            state.factor = cholesky(config.C0)
            state.covariance = config.C0.copy()
            state.adaptive = False
        state.pending.clear()
        state.refreshed_at = n
        return

    covariance = config.s_d * state.raw_cov + config.s_d * config.epsilon * np.eye(d)

    if not state.adaptive or state.refreshed_at < 2 or config.K > d:
        state.factor = cholesky(covariance)
        logger.debug(f"Full factor refresh at t={n}")
    else:
        # C_n = c * C_m + s_d*eps*(1-c)*I + sum_i s_d/(n-1) v_i v_i^T with c = (m-1)/(n-1)
        m = state.refreshed_at
        c = (m - 1) / (n - 1)
        factor = math.sqrt(c) * state.factor
        scale = math.sqrt(config.s_d / (n - 1))
        for v in state.pending:
            factor = rank_one_update(factor, scale * v)
        state.factor = add_to_diagonal(factor, config.s_d * config.epsilon * (1.0 - c))

    state.covariance = covariance
    state.adaptive = True
    state.pending.clear()
    state.refreshed_at = n


def proposal_factor(state: AdaptationState) -> np.ndarray:
    """Cholesky factor of the current proposal covariance"""
    return state.factor


def proposal_covariance(state: AdaptationState) -> np.ndarray:
    """Current proposal covariance"""
    return state.covariance
