"""
Two-Level Targets

A two-level target exposes a cheap surrogate log-density (log pi*) used to
screen proposals and the expensive log-density (log pi) used to accept
them, both on a bounded support box. Densities are returned in log space
and need only be correct up to an additive constant; both return -inf
outside the box.

Concrete targets:
- ShiftedTTarget: truncated multivariate shifted t, Gaussian surrogate
- BananaTarget: twisted ("banana") Gaussian, untwisted Gaussian surrogate
- LogisticTarget: Bayesian logistic regression, subsampled zero-response sum
- LotkaVolterraTarget: predator-prey calibration, monthly-grid surrogate
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import gammaln
from scipy.stats import chi2

from core.datasets import ObservationSet
from core.errors import DataShapeError
from core.linalg import LOG_2PI, as_vector, cholesky, log_mvn_density_chol, mahalanobis_squared
from core.ode import LVParams, SolverGrid, solve_lv

logger = logging.getLogger(__name__)

NEG_INF = float("-inf")

BENCHMARK_T_VARIANCES = (1.0, 1.0, 1.0, 1.0, 1.0, 2.0, 4.0, 6.0)


@dataclass(frozen=True, eq=False)
class Box:
    """Axis-aligned support box, lower < upper componentwise"""
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = as_vector(self.lower)
        upper = as_vector(self.upper, lower.size)
        if not np.all(lower < upper):
            raise ValueError("Box requires lower < upper in every coordinate")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.upper - self.lower))

    def contains(self, x) -> bool:
        """Whether x lies in the closed box"""
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    def contains_rows(self, X) -> np.ndarray:
        """Boolean mask of the rows of X inside the box"""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.all((X >= self.lower) & (X <= self.upper), axis=1)

    def sample_uniform(self, rng: np.random.Generator) -> np.ndarray:
        return self.lower + (self.upper - self.lower) * rng.random(self.dim)


class TwoLevelTarget(ABC):
    """
    Base class for all two-level targets

    Subclasses must implement:
    - dim: Dimension of the state space
    - support: Bounded support Box
    - log_pi(): Expensive log-density
    - log_pi_star(): Cheap surrogate log-density

    Instances are immutable after construction, so one target may be shared
    by concurrently running chains.
    """

    name: str = "target"

    @property
    @abstractmethod
    def dim(self) -> int:
        """State-space dimension"""
        pass

    @property
    @abstractmethod
    def support(self) -> Box:
        """Bounded support box"""
        pass

    @abstractmethod
    def log_pi(self, x: np.ndarray) -> float:
        """Expensive log-density, -inf outside the support"""
        pass

    @abstractmethod
    def log_pi_star(self, x: np.ndarray) -> float:
        """Cheap surrogate log-density, -inf outside the support"""
        pass

    def in_support(self, x) -> bool:
        return self.support.contains(x)

    def sample_exact(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Independent exact draws from pi, where available"""
        raise NotImplementedError(f"{self.name} has no exact sampler")

    def describe(self) -> dict:
        return {"name": self.name, "dim": self.dim}


def shape_matrix(variances: Sequence[float], rho: float) -> np.ndarray:
    """Sigma_ij = sigma_i * sigma_j * rho^|i-j|"""
    sd = np.sqrt(as_vector(variances))
    idx = np.arange(sd.size)
    return np.outer(sd, sd) * rho ** np.abs(idx[:, None] - idx[None, :])


class ShiftedTTarget(TwoLevelTarget):
    """Multivariate shifted t truncated to a box of marginal standard deviations"""

    name = "shifted_t"

    def __init__(self, mu, Sigma, nu: float, truncation_sd: float = 5.0):
        """
        Initialize truncated t target

        Args:
            mu: Location vector
            Sigma: Shape matrix (SPD)
            nu: Degrees of freedom, > 0
            truncation_sd: Half-width of the box in marginal standard deviations

        Raises:
            NotPositiveDefiniteError: If Sigma is not SPD
        """
        if not nu > 0:
            raise ValueError(f"Degrees of freedom must be positive, got {nu}")
        self.mu = as_vector(mu)
        self.Sigma = np.asarray(Sigma, dtype=float)
        self.nu = float(nu)
        self.truncation_sd = float(truncation_sd)
        self._R = cholesky(self.Sigma)
        if self._R.shape[0] != self.mu.size:
            raise DataShapeError("Sigma does not match the dimension of mu")

        d = self.mu.size
        marginal_sd = np.sqrt(np.diag(self.Sigma))
        if self.nu > 2:
            marginal_sd = marginal_sd * math.sqrt(self.nu / (self.nu - 2.0))
        self._support = Box(self.mu - truncation_sd * marginal_sd, self.mu + truncation_sd * marginal_sd)

        log_det = 2.0 * float(np.sum(np.log(np.diag(self._R))))
        self._log_norm = (
            gammaln(0.5 * (self.nu + d)) - gammaln(0.5 * self.nu)
            - 0.5 * d * math.log(self.nu * math.pi) - 0.5 * log_det
        )

    @property
    def dim(self) -> int:
        return self.mu.size

    @property
    def support(self) -> Box:
        return self._support

    def log_pi(self, x) -> float:
        if not self._support.contains(x):
            return NEG_INF
        q = mahalanobis_squared(x, self.mu, self._R)
        return self._log_norm - 0.5 * (self.nu + self.dim) * math.log1p(q / self.nu)

    def log_pi_star(self, x) -> float:
        if not self._support.contains(x):
            return NEG_INF
        return log_mvn_density_chol(x, self.mu, self._R)

    def principal_covariance(self) -> np.ndarray:
        """Covariance of the untruncated t (nu/(nu-2) * Sigma), or Sigma when nu <= 2"""
        if self.nu > 2:
            return self.nu / (self.nu - 2.0) * self.Sigma
        return self.Sigma.copy()

    def sample_exact(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Rejection sampling: multivariate t draws kept when inside the box"""
        out = []
        kept = 0
        while kept < n:
            batch = max(1024, int(1.2 * (n - kept)))
            z = rng.standard_normal((batch, self.dim)) @ self._R.T
            w = rng.chisquare(self.nu, batch)
            draws = self.mu + z / np.sqrt(w / self.nu)[:, None]
            draws = draws[self._support.contains_rows(draws)]
            out.append(draws)
            kept += draws.shape[0]
        return np.vstack(out)[:n]

    def describe(self) -> dict:
        return {"name": self.name, "dim": self.dim, "nu": self.nu, "truncation_sd": self.truncation_sd}


def shifted_t_target(mu, Sigma, nu: float, truncation_sd: float = 5.0) -> ShiftedTTarget:
    """Shifted t with shape Sigma and nu degrees of freedom, truncated at truncation_sd marginal SDs"""
    return ShiftedTTarget(mu, Sigma, nu, truncation_sd)


def benchmark_t_target() -> ShiftedTTarget:
    """d=8, nu=10, mu=(0..7), variances (1,1,1,1,1,2,4,6), rho=0.4"""
    return ShiftedTTarget(np.arange(8.0), shape_matrix(BENCHMARK_T_VARIANCES, 0.4), nu=10.0)


def banana_twist(x, a: float, b: float) -> np.ndarray:
    """phi(x) = (a*x1, x2/a + b*a^2*(x1^2 + 1), x3, ..., xd); works on rows of a 2-D array"""
    y = np.array(x, dtype=float, copy=True)
    x1 = y[..., 0].copy()
    y[..., 0] = a * x1
    y[..., 1] = y[..., 1] / a + b * a ** 2 * (x1 ** 2 + 1.0)
    return y


def banana_untwist(y, a: float, b: float) -> np.ndarray:
    """Inverse of banana_twist"""
    x = np.array(y, dtype=float, copy=True)
    x1 = x[..., 0] / a
    x[..., 0] = x1
    x[..., 1] = a * (x[..., 1] - b * a ** 2 * (x1 ** 2 + 1.0))
    return x


class BananaTarget(TwoLevelTarget):
    """Gaussian composed with the unit-Jacobian twist map"""

    name = "banana"

    def __init__(self, mu, Sigma, a: float, b: float, truncation_sd: float = 5.0):
        """
        Initialize twisted Gaussian target

        Args:
            mu: Mean of the underlying Gaussian
            Sigma: Covariance of the underlying Gaussian
            a: Twist scale, nonzero
            b: Twist curvature
            truncation_sd: Half-width of the box in marginal standard deviations
        """
        if a == 0:
            raise ValueError("Twist parameter a must be nonzero")
        self.mu = as_vector(mu)
        if self.mu.size < 2:
            raise DataShapeError("The twisted Gaussian needs at least two dimensions")
        self.Sigma = np.asarray(Sigma, dtype=float)
        self.a = float(a)
        self.b = float(b)
        self.truncation_sd = float(truncation_sd)
        self._R = cholesky(self.Sigma)
        if self._R.shape[0] != self.mu.size:
            raise DataShapeError("Sigma does not match the dimension of mu")

        center, sd = self.marginal_moments()
        self._support = Box(center - truncation_sd * sd, center + truncation_sd * sd)

    @property
    def dim(self) -> int:
        return self.mu.size

    @property
    def support(self) -> Box:
        return self._support

    def marginal_moments(self):
        """Analytic marginal means and standard deviations of the twisted distribution"""
        a, b = self.a, self.b
        m0, m1 = self.mu[0], self.mu[1]
        s00, s01, s11 = self.Sigma[0, 0], self.Sigma[0, 1], self.Sigma[1, 1]

        mean = self.mu.copy()
        sd = np.sqrt(np.diag(self.Sigma)).copy()
        mean[0] = m0 / a
        sd[0] = math.sqrt(s00) / abs(a)

        # x2 = a*(y2 - b*(y1^2 + a^2)) with y ~ N(mu, Sigma)
        var_y1_sq = 2.0 * s00 ** 2 + 4.0 * m0 ** 2 * s00
        cov_y2_y1_sq = 2.0 * m0 * s01
        mean[1] = a * (m1 - b * (m0 ** 2 + s00 + a ** 2))
        sd[1] = abs(a) * math.sqrt(s11 + b ** 2 * var_y1_sq - 2.0 * b * cov_y2_y1_sq)
        return mean, sd

    def twist(self, x) -> np.ndarray:
        return banana_twist(x, self.a, self.b)

    def untwist(self, y) -> np.ndarray:
        return banana_untwist(y, self.a, self.b)

    def log_pi(self, x) -> float:
        if not self._support.contains(x):
            return NEG_INF
        return log_mvn_density_chol(self.twist(x), self.mu, self._R)

    def log_pi_star(self, x) -> float:
        if not self._support.contains(x):
            return NEG_INF
        return log_mvn_density_chol(np.asarray(x, dtype=float), self.mu, self._R)

    def region_statistic(self, X) -> np.ndarray:
        """Mahalanobis distance of phi(x) for each row of X"""
        Y = np.atleast_2d(self.twist(np.atleast_2d(X))) - self.mu
        W = np.linalg.solve(self._R, Y.T)
        return np.sum(W * W, axis=0)

    def sample_exact(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Gaussian draws mapped through the inverse twist, kept when inside the box"""
        out = []
        kept = 0
        while kept < n:
            batch = max(1024, int(1.1 * (n - kept)))
            y = self.mu + rng.standard_normal((batch, self.dim)) @ self._R.T
            draws = self.untwist(y)
            draws = draws[self._support.contains_rows(draws)]
            out.append(draws)
            kept += draws.shape[0]
        return np.vstack(out)[:n]

    def describe(self) -> dict:
        return {"name": self.name, "dim": self.dim, "a": self.a, "b": self.b, "truncation_sd": self.truncation_sd}


def banana_target(mu, Sigma, a: float, b: float, truncation_sd: float = 5.0) -> BananaTarget:
    """Twisted Gaussian with twist parameters (a, b), truncated at truncation_sd marginal SDs"""
    return BananaTarget(mu, Sigma, a, b, truncation_sd)


def benchmark_banana_target() -> BananaTarget:
    """d=8, a=1, b=0.05, mu=0, Sigma=diag(10, 1, ..., 1)"""
    variances = np.ones(8)
    variances[0] = 10.0
    return BananaTarget(np.zeros(8), np.diag(variances), a=1.0, b=0.05)


def banana_region_indicator(x, p: float, target: BananaTarget) -> bool:
    """
    Whether x lies in the twisted p-probability region

    Args:
        x: Point
        p: Probability level in (0, 1)
        target: Banana target providing mu, Sigma, a, b

    Returns:
        True iff the Mahalanobis distance of phi(x) is within the chi-square_d p-quantile
    """
    if not 0 < p < 1:
        raise ValueError(f"Probability level must lie in (0, 1), got {p}")
    return bool(target.region_statistic(x)[0] <= chi2.ppf(p, target.dim))


class LogisticTarget(TwoLevelTarget):
    """
    Bayesian logistic regression with a subsampled surrogate

    log pi(beta)  = l(beta)  + log N(beta; 0, Sigma0)
    log pi*(beta) = l*(beta) + log N(beta; 0, Sigma0)

    where l* keeps every one-response term and replaces the zero-response
    sum by N0/n0 times its sum over the subsample.
    """

    name = "logistic"

    def __init__(self, X, y, subsample_indices, Sigma0=None, box_halfwidth: float = 20.0):
        """
        Initialize logistic regression target

        Args:
            X: Design matrix (N, d) with full column rank
            y: Binary responses (N,)
            subsample_indices: Row indices of zero responses used by the surrogate
            Sigma0: Prior covariance (default 100 * I)
            box_halfwidth: Support half-width per coefficient

        Raises:
            DataShapeError: On dimension mismatch or rank deficiency
        """
        X = np.asarray(X, dtype=float)
        y = np.asarray(y)
        if X.ndim != 2:
            raise DataShapeError(f"Design matrix must be 2-D, got shape {X.shape}")
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise DataShapeError(f"Response length {y.shape} does not match design rows {X.shape[0]}")
        if not np.all((y == 0) | (y == 1)):
            raise DataShapeError("Responses must be 0 or 1")
        d = X.shape[1]
        if np.linalg.matrix_rank(X) < d:
            raise DataShapeError(f"Design matrix does not have full column rank {d}")

        zero_rows = np.flatnonzero(y == 0)
        sub = np.unique(np.asarray(subsample_indices, dtype=int))
        if sub.size == 0:
            raise DataShapeError("Subsample must contain at least one zero-response row")
        if sub.size != len(subsample_indices) or not np.all(np.isin(sub, zero_rows)):
            raise DataShapeError("Subsample indices must be distinct zero-response rows")

        if Sigma0 is None:
            Sigma0 = 100.0 * np.eye(d)
        self.Sigma0 = np.asarray(Sigma0, dtype=float)
        self._prior_R = cholesky(self.Sigma0)
        if self._prior_R.shape[0] != d:
            raise DataShapeError("Prior covariance does not match the number of coefficients")

        self._X1 = X[y == 1]
        self._X0 = X[zero_rows]
        self._Xs = X[sub]
        self.n_total = X.shape[0]
        self.n_zero = zero_rows.size
        self.n_subsample = sub.size
        self._scale = self.n_zero / self.n_subsample
        self._d = d
        self._support = Box(-box_halfwidth * np.ones(d), box_halfwidth * np.ones(d))
        logger.info(
            f"Logistic target: N={self.n_total}, N0={self.n_zero}, n0={self.n_subsample}, d={d}"
        )

    @property
    def dim(self) -> int:
        return self._d

    @property
    def support(self) -> Box:
        return self._support

    def _ones_term(self, beta) -> float:
        # x'b - log(1 + e^{x'b}) = -log(1 + e^{-x'b})
        return -float(np.sum(np.logaddexp(0.0, -(self._X1 @ beta))))

    @staticmethod
    def _zeros_term(X0, beta) -> float:
        return -float(np.sum(np.logaddexp(0.0, X0 @ beta)))

    def log_likelihood(self, beta) -> float:
        beta = np.asarray(beta, dtype=float)
        return self._ones_term(beta) + self._zeros_term(self._X0, beta)

    def approximate_log_likelihood(self, beta) -> float:
        beta = np.asarray(beta, dtype=float)
        return self._ones_term(beta) + self._scale * self._zeros_term(self._Xs, beta)

    def log_prior(self, beta) -> float:
        return log_mvn_density_chol(beta, np.zeros(self._d), self._prior_R)

    def log_pi(self, beta) -> float:
        if not self._support.contains(beta):
            return NEG_INF
        return self.log_likelihood(beta) + self.log_prior(beta)

    def log_pi_star(self, beta) -> float:
        if not self._support.contains(beta):
            return NEG_INF
        return self.approximate_log_likelihood(beta) + self.log_prior(beta)

    def describe(self) -> dict:
        return {
            "name": self.name,
            "dim": self.dim,
            "n_total": self.n_total,
            "n_zero": self.n_zero,
            "n_subsample": self.n_subsample,
        }


def logistic_target(X, y, subsample_indices, Sigma0=None, box_halfwidth: float = 20.0) -> LogisticTarget:
    """
    Logistic regression posterior with a subsampled surrogate

    Args:
        X: Design matrix with intercept column
        y: Binary responses
        subsample_indices: Rows with y = 0 used by the surrogate likelihood
        Sigma0: Gaussian prior covariance (default 100 I)
        box_halfwidth: Half-width of the support box around 0
    """
    return LogisticTarget(X, y, subsample_indices, Sigma0, box_halfwidth)


def choose_subsample(y, n0: int, rng: np.random.Generator) -> np.ndarray:
    """Random subsample of n0 zero-response rows (all of them when n0 >= N0)"""
    zero_rows = np.flatnonzero(np.asarray(y) == 0)
    if n0 >= zero_rows.size:
        return zero_rows
    return np.sort(rng.choice(zero_rows, size=n0, replace=False))


def _lognormal_logpdf(x, log_mean, log_sd):
    """Log-density of LogNormal(log_mean, log_sd^2) on the scale of x"""
    z = (np.log(x) - log_mean) / log_sd
    return -np.log(x) - np.log(log_sd) - 0.5 * LOG_2PI - 0.5 * z * z


@dataclass(frozen=True)
class LVPriors:
    """
    Independent priors of the predator-prey calibration

    Rates are uniform on [0, max]. Noise SDs and initial populations are
    lognormal, truncated to +/- truncation_log_sd on the log scale.
    """
    alpha_max: float = 0.1
    beta_max: float = 0.01
    gamma_max: float = 0.1
    delta_max: float = 0.01
    sigma_log_mean: float = -1.0
    sigma_log_sd: float = 1.0
    y0_log_mean: float = math.log(10.0)
    y0_log_sd: float = 1.0
    truncation_log_sd: float = 4.0

    def box(self) -> Box:
        k = self.truncation_log_sd
        s_lo = math.exp(self.sigma_log_mean - k * self.sigma_log_sd)
        s_hi = math.exp(self.sigma_log_mean + k * self.sigma_log_sd)
        y_lo = math.exp(self.y0_log_mean - k * self.y0_log_sd)
        y_hi = math.exp(self.y0_log_mean + k * self.y0_log_sd)
        lower = np.array([0.0, 0.0, 0.0, 0.0, s_lo, s_lo, y_lo, y_lo])
        upper = np.array([self.alpha_max, self.beta_max, self.gamma_max, self.delta_max, s_hi, s_hi, y_hi, y_hi])
        return Box(lower, upper)

    def log_density(self, theta) -> float:
        """Log prior inside the box (uniform parts contribute their normalizing constants)"""
        uniform = -math.log(self.alpha_max * self.beta_max * self.gamma_max * self.delta_max)
        sig = _lognormal_logpdf(theta[4:6], self.sigma_log_mean, self.sigma_log_sd)
        init = _lognormal_logpdf(theta[6:8], self.y0_log_mean, self.y0_log_sd)
        return uniform + float(np.sum(sig) + np.sum(init))


class LotkaVolterraTarget(TwoLevelTarget):
    """
    Posterior of the predator-prey calibration

    theta = (alpha, beta, gamma, delta, sigma_1, sigma_2, y1_0, y2_0). log pi
    solves the ODE on the fine grid, log pi* on the coarse grid. A solver
    failure raises SolverFailure; the samplers turn it into a rejection.
    """

    name = "lotka_volterra"

    def __init__(
        self,
        data: ObservationSet,
        fine_grid: SolverGrid,
        coarse_grid: SolverGrid,
        priors: Optional[LVPriors] = None,
        method: str = "rk4",
    ):
        """
        Initialize predator-prey posterior

        Args:
            data: Observed (prey, predator) counts
            fine_grid: Grid of the expensive solve
            coarse_grid: Grid of the surrogate solve
            priors: Prior specification (defaults to LVPriors())
            method: Integrator name passed to solve_lv
        """
        for label, grid in (("fine", fine_grid), ("coarse", coarse_grid)):
            if len(grid.observation_times) != data.n_obs or not np.allclose(grid.observation_times, data.times):
                raise DataShapeError(f"The {label} grid observation times do not match the data")
            if not math.isclose(grid.t_start, data.times[0]):
                raise DataShapeError(f"The {label} grid must start at the first observation time")

        self.data = data
        self.fine_grid = fine_grid
        self.coarse_grid = coarse_grid
        self.priors = priors or LVPriors()
        self.method = method
        self._support = self.priors.box()
        self._log_z = np.log(data.counts)  # (2, N)
        self._sum_log_z = self._log_z.sum(axis=1)

    @property
    def dim(self) -> int:
        return 8

    @property
    def support(self) -> Box:
        return self._support

    @staticmethod
    def split(theta):
        theta = np.asarray(theta, dtype=float)
        params = LVParams(*theta[:4])
        return params, theta[4:6], (theta[6], theta[7])

    def solve(self, theta, fine: bool = True) -> np.ndarray:
        """Trajectory (N, 2) at the observation times"""
        params, _, y0 = self.split(theta)
        grid = self.fine_grid if fine else self.coarse_grid
        return solve_lv(params, y0, grid, self.method)

    def log_likelihood(self, trajectory, sigma) -> float:
        """
        Lognormal observation log-likelihood

        Args:
            trajectory: Model populations (N, 2)
            sigma: Per-species noise SDs on the log scale

        Returns:
            sum_j sum_i log LogNormal(z_ji; log y_ji, sigma_j^2)
        """
        sigma = np.asarray(sigma, dtype=float)
        resid = self._log_z - np.log(np.asarray(trajectory, dtype=float).T)
        n = self.data.n_obs
        per_species = (
            -self._sum_log_z - n * np.log(sigma) - 0.5 * n * LOG_2PI
            - 0.5 * np.sum(resid * resid, axis=1) / sigma ** 2
        )
        return float(np.sum(per_species))

    def _log_posterior(self, theta, fine: bool) -> float:
        if not self._support.contains(theta):
            return NEG_INF
        theta = np.asarray(theta, dtype=float)
        trajectory = self.solve(theta, fine=fine)
        return self.log_likelihood(trajectory, theta[4:6]) + self.priors.log_density(theta)

    def log_pi(self, theta) -> float:
        return self._log_posterior(theta, fine=True)

    def log_pi_star(self, theta) -> float:
        return self._log_posterior(theta, fine=False)

    def describe(self) -> dict:
        return {
            "name": self.name,
            "dim": self.dim,
            "n_obs": self.data.n_obs,
            "fine_steps": self.fine_grid.n_steps,
            "coarse_steps": self.coarse_grid.n_steps,
            "method": self.method,
        }


def lotka_volterra_target(
    data: ObservationSet,
    fine_grid: Optional[SolverGrid] = None,
    coarse_grid: Optional[SolverGrid] = None,
    priors: Optional[LVPriors] = None,
    method: str = "rk4",
) -> LotkaVolterraTarget:
    """Build the calibration posterior; grids default to daily/monthly over the data span"""
    if fine_grid is None or coarse_grid is None:
        fine_grid, coarse_grid = observation_grids(data)
    return LotkaVolterraTarget(data, fine_grid, coarse_grid, priors, method)


def observation_grids(data: ObservationSet, fine_per_year: int = 365, coarse_per_year: int = 12):
    """Fine and coarse grids spanning the observation times"""
    t_start, t_end = float(data.times[0]), float(data.times[-1])
    fine = SolverGrid(t_start, t_end, 1.0 / fine_per_year, tuple(data.times))
    coarse = SolverGrid(t_start, t_end, 1.0 / coarse_per_year, tuple(data.times))
    return fine, coarse
