"""
Chain Diagnostics and Replicated Experiments

Autocorrelation, effective sample size and effective draws per minute
(EDPM), plus the replicate experiments used to compare kernels:
Monte Carlo estimate convergence, coverage-probability convergence,
autocorrelation along principal directions, REDPM tables under thinning
and posterior predictive bands for the predator-prey calibration.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import fft
from scipy.stats import chi2

from core.datasets import SPECIES
from core.errors import DataShapeError, DegenerateSeriesError, TargetEvaluationError
from core.samplers import SamplerConfig, Trace, run_chain
from core.targets import BananaTarget, LotkaVolterraTarget, TwoLevelTarget

logger = logging.getLogger(__name__)

Projection = Union[str, int, np.ndarray]
BoundedFunction = Callable[[np.ndarray], np.ndarray]
ChainRunner = Callable[[TwoLevelTarget, SamplerConfig], Trace]

LOG_POSTERIOR = "log_pi"
DEFAULT_THINNINGS = (1, 10, 20)
DEFAULT_CONTOUR_LEVELS = (0.5, 0.683, 0.95)


def autocorrelation(series, max_lag: int) -> np.ndarray:
    """
    Sample autocorrelation with biased normalization

    rho_k = sum_{t<n-k} (x_t - m)(x_{t+k} - m) / sum_t (x_t - m)^2

    Args:
        series: Real sequence of length n > max_lag
        max_lag: Largest lag returned

    Returns:
        Array rho_0..rho_max_lag with rho_0 = 1

    Raises:
        DegenerateSeriesError: If the series has zero variance
    """
    x = np.asarray(series, dtype=float).ravel()
    n = x.size
    if max_lag < 0 or n <= max_lag:
        raise ValueError(f"Series of length {n} is too short for max_lag={max_lag}")

    centered = x - x.mean()
    denom = float(centered @ centered)
    if denom <= 0.0 or not math.isfinite(denom):
        raise DegenerateSeriesError("Series has zero variance")

    size = fft.next_fast_len(2 * n)
    spectrum = fft.rfft(centered, size)
    acov = fft.irfft(spectrum * np.conj(spectrum), size)[: max_lag + 1]
    return acov / denom


def ess(series) -> float:
    """
    Effective sample size n / (1 + 2 sum rho_k)

    The sum is truncated with Geyer's initial positive sequence: pairs
    rho_{2m} + rho_{2m+1} are accumulated while positive. The result is
    capped at n.

    Raises:
        DegenerateSeriesError: If the series has zero variance
    """
    x = np.asarray(series, dtype=float).ravel()
    n = x.size
    if n < 2:
        raise DegenerateSeriesError("ESS needs at least two values")
    rho = autocorrelation(x, n - 1)

    n_pairs = n // 2
    pairs = rho[: 2 * n_pairs].reshape(n_pairs, 2).sum(axis=1)
    nonpositive = np.flatnonzero(pairs <= 0.0)
    stop = nonpositive[0] if nonpositive.size else n_pairs
    if stop == 0:
        return float(n)

    # sum_{k>=1} rho_k = (sum of positive pairs) - rho_0
    tail = float(pairs[:stop].sum()) - 1.0
    tau = 1.0 + 2.0 * tail
    return float(n) if tau <= 1.0 else n / tau


def project(trace: Trace, projection: Projection) -> np.ndarray:
    """
    One-dimensional series of a trace

    Args:
        trace: Chain output
        projection: "log_pi", a coordinate index or a direction vector

    Returns:
        Series of length trace.n
    """
    if isinstance(projection, str):
        if projection != LOG_POSTERIOR:
            raise ValueError(f"Unknown projection '{projection}'")
        return trace.log_pi
    if isinstance(projection, (int, np.integer)):
        if not 0 <= projection < trace.dim:
            raise ValueError(f"Coordinate {projection} out of range for dimension {trace.dim}")
        return trace.states[:, projection]
    direction = np.asarray(projection, dtype=float)
    if direction.shape != (trace.dim,):
        raise DataShapeError(f"Direction of shape {direction.shape} does not match dimension {trace.dim}")
    return trace.states @ direction


def edpm(trace: Trace, projection: Projection = LOG_POSTERIOR) -> float:
    """Effective draws per minute: ESS of the projected series over wall minutes"""
    if trace.n == 0:
        raise ValueError("EDPM of an empty trace")
    return ess(project(trace, projection)) / trace.wall_minutes


def redpm(trace_a: Trace, trace_b: Trace, projection: Projection = LOG_POSTERIOR) -> float:
    """Relative EDPM of trace_a over trace_b"""
    return edpm(trace_a, projection) / edpm(trace_b, projection)


def principal_projection(source) -> Tuple[np.ndarray, np.ndarray]:
    """
    First principal direction and a deterministic orthogonal direction

    The first direction is the leading eigenvector, signed so that its
    largest-magnitude entry is positive. The second is the unit vector
    along the coordinate axis least aligned with it, made orthogonal by
    one Gram-Schmidt step.

    Args:
        source: Trace (its sample covariance is used) or a covariance matrix

    Returns:
        Tuple of two orthonormal vectors

    Raises:
        DegenerateSeriesError: If the covariance is zero
    """
    if isinstance(source, Trace):
        if source.n < 2:
            raise DegenerateSeriesError("Need at least two states for a covariance")
        cov = np.atleast_2d(np.cov(source.states, rowvar=False))
    else:
        cov = np.asarray(source, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise DataShapeError(f"Expected a square covariance, got shape {cov.shape}")
    d = cov.shape[0]
    if d < 2:
        raise DataShapeError("An orthogonal direction needs dimension of at least 2")
    if not np.any(cov):
        raise DegenerateSeriesError("Covariance is zero")

    _, vectors = np.linalg.eigh(0.5 * (cov + cov.T))
    first = vectors[:, -1]
    if first[np.argmax(np.abs(first))] < 0:
        first = -first

    k = int(np.argmin(np.abs(first)))
    other = -first[k] * first
    other[k] += 1.0
    other /= np.linalg.norm(other)
    return first, other


def exp_sum_function(scale: float = 10.0, rate: float = 0.1) -> BoundedFunction:
    """f(x) = scale * exp(-rate * sum_i x_i), applied row-wise"""
    def f(X):
        return scale * np.exp(-rate * np.sum(np.atleast_2d(X), axis=1))
    return f


def constant_function(c: float) -> BoundedFunction:
    def f(X):
        return np.full(np.atleast_2d(X).shape[0], float(c))
    return f


def oracle_expectation(target: TwoLevelTarget, f: BoundedFunction, n: int, rng: np.random.Generator) -> float:
    """E(f) under the target from n exact draws"""
    return float(np.mean(f(target.sample_exact(n, rng))))


@dataclass
class ReplicateSummary:
    """Mean and SD across replicates of a per-chain statistic"""
    n: int
    mean: float
    sd: float
    values: List[float] = field(default_factory=list)

    def as_row(self) -> Dict[str, float]:
        return {"n": self.n, "mean": self.mean, "sd": self.sd}


def summarize_replicates(n: int, values: Sequence[float]) -> ReplicateSummary:
    v = np.asarray(values, dtype=float)
    sd = float(np.std(v, ddof=1)) if v.size > 1 else 0.0
    return ReplicateSummary(n=n, mean=float(np.mean(v)), sd=sd, values=v.tolist())


def chain_length_for(n: int, config: SamplerConfig) -> int:
    """Chain length that keeps at least n states after burn-in and thinning"""
    return int(math.ceil(n * config.thinning / (1.0 - config.burn_in_fraction)))


def replicate_config(config: SamplerConfig, n: int, k: int) -> SamplerConfig:
    """Settings of replicate k for n retained states; seed = base seed + k"""
    return replace(config, n_iters=chain_length_for(n, config), seed=config.seed + k)


def retained_states(trace: Trace, n: int) -> np.ndarray:
    return trace.states[:n]


def replicate_statistic(
    target: TwoLevelTarget,
    config: SamplerConfig,
    statistic: Callable[[np.ndarray], float],
    n: int,
    k: int,
    runner: ChainRunner = run_chain,
) -> float:
    """Statistic of the first n retained states of replicate k"""
    trace = runner(target, replicate_config(config, n, k))
    value = statistic(retained_states(trace, n))
    logger.debug(f"n={n} replicate {k + 1}: {value:.6g}")
    return value


def mean_statistic(f: BoundedFunction) -> Callable[[np.ndarray], float]:
    """Chain average of f"""
    return lambda X: float(np.mean(f(X)))


def coverage_statistic(target: BananaTarget, p: float) -> Callable[[np.ndarray], float]:
    """Share of states inside the twisted p-region"""
    return lambda X: region_fraction(X, target, p)


def _run_replicates(
    target: TwoLevelTarget,
    config: SamplerConfig,
    statistic: Callable[[np.ndarray], float],
    m: int,
    n_list: Sequence[int],
    runner: ChainRunner,
) -> List[ReplicateSummary]:
    if m < 2:
        raise ValueError(f"Need at least two replicates, got m={m}")
    summaries = []
    for n in n_list:
        values = [replicate_statistic(target, config, statistic, n, k, runner) for k in range(m)]
        summary = summarize_replicates(n, values)
        logger.info(f"n={n}: mean={summary.mean:.6g} sd={summary.sd:.3g} over {m} replicates")
        summaries.append(summary)
    return summaries


def mc_estimate_experiment(
    target: TwoLevelTarget,
    sampler_config: SamplerConfig,
    f: BoundedFunction,
    m: int,
    n_list: Sequence[int],
    runner: ChainRunner = run_chain,
) -> List[ReplicateSummary]:
    """
    Convergence of Monte Carlo averages of a bounded function

    For each n, runs m chains seeded base_seed + k and averages f over
    their n retained states.

    Returns:
        One ReplicateSummary per n, in n_list order
    """
    return _run_replicates(target, sampler_config, mean_statistic(f), m, n_list, runner)


def region_fraction(states: np.ndarray, target: BananaTarget, p: float) -> float:
    """Fraction of states inside the twisted p-probability region"""
    if not 0 < p < 1:
        raise ValueError(f"Probability level must lie in (0, 1), got {p}")
    if states.shape[0] == 0:
        return float("nan")
    return float(np.mean(target.region_statistic(states) <= chi2.ppf(p, target.dim)))


def coverage_experiment(
    target: BananaTarget,
    sampler_config: SamplerConfig,
    p: float,
    m: int,
    n_list: Sequence[int],
    runner: ChainRunner = run_chain,
) -> List[ReplicateSummary]:
    """Convergence of the estimated coverage of the twisted p-region"""
    return _run_replicates(target, sampler_config, coverage_statistic(target, p), m, n_list, runner)


def banana_contour_coverage(
    trace: Trace,
    target: BananaTarget,
    levels: Sequence[float] = DEFAULT_CONTOUR_LEVELS,
) -> Dict[float, float]:
    """Fraction of retained states inside each twisted probability region"""
    return {float(p): region_fraction(trace.states, target, p) for p in levels}


def acf_comparison(
    traces: Dict[str, Trace],
    directions: Dict[str, np.ndarray],
    max_lag: int,
) -> pd.DataFrame:
    """
    Autocorrelation curves of several chains along shared directions

    Args:
        traces: Chain output keyed by kernel label
        directions: Unit directions keyed by name (e.g. first principal component)
        max_lag: Largest lag

    Returns:
        Long-format frame with columns kernel, direction, lag, acf
    """
    rows = []
    for kernel, trace in traces.items():
        for name, direction in directions.items():
            rho = autocorrelation(project(trace, direction), max_lag)
            rows.extend({"kernel": kernel, "direction": name, "lag": lag, "acf": float(r)} for lag, r in enumerate(rho))
    return pd.DataFrame(rows, columns=["kernel", "direction", "lag", "acf"])


def redpm_table(
    trace_a: Trace,
    trace_b: Trace,
    thinnings: Sequence[int] = DEFAULT_THINNINGS,
    projections: Optional[Sequence[Projection]] = None,
) -> pd.DataFrame:
    """
    REDPM of trace_a over trace_b per projection and thinning strategy

    Projections default to every coordinate plus the log posterior. A
    projection whose series is constant in either chain is skipped.

    Returns:
        Frame with columns thinning, projection, edpm_a, edpm_b, redpm
    """
    if projections is None:
        projections = [*range(trace_a.dim), LOG_POSTERIOR]

    rows = []
    for k in thinnings:
        a, b = trace_a.thinned(k), trace_b.thinned(k)
        for projection in projections:
            label = projection if isinstance(projection, str) else f"x_{int(projection) + 1}"
            try:
                edpm_a, edpm_b = edpm(a, projection), edpm(b, projection)
            except DegenerateSeriesError:
                logger.warning(f"Skipping degenerate projection {label} at thinning {k}")
                continue
            rows.append({"thinning": k, "projection": label, "edpm_a": edpm_a, "edpm_b": edpm_b, "redpm": edpm_a / edpm_b})
    return pd.DataFrame(rows, columns=["thinning", "projection", "edpm_a", "edpm_b", "redpm"])


def posterior_predictive(
    trace: Trace,
    target: LotkaVolterraTarget,
    level: float = 0.8,
    max_draws: Optional[int] = 1000,
) -> pd.DataFrame:
    """
    Predictive mean and central credible band of the fitted populations

    Solves the fine-grid ODE at retained posterior draws (evenly subsampled
    to at most max_draws). Draws whose solve fails are skipped.

    Returns:
        Frame with columns time, species, observed, mean, lower, upper
    """
    if not 0 < level < 1:
        raise ValueError(f"Credible level must lie in (0, 1), got {level}")
    draws = trace.states
    if max_draws is not None and draws.shape[0] > max_draws:
        draws = draws[np.linspace(0, draws.shape[0] - 1, max_draws).round().astype(int)]

    solutions = []
    failures = 0
    for theta in draws:
        try:
            solutions.append(target.solve(theta, fine=True))
        except TargetEvaluationError:
            failures += 1
    if failures:
        logger.warning(f"Skipped {failures} posterior draws whose solve failed")
    if not solutions:
        raise DegenerateSeriesError("No posterior draw produced a trajectory")

    paths = np.stack(solutions)  # (draws, N, 2)
    tail = 0.5 * (1.0 - level)
    lower = np.quantile(paths, tail, axis=0)
    upper = np.quantile(paths, 1.0 - tail, axis=0)
    mean = paths.mean(axis=0)

    rows = []
    for j, species in enumerate(SPECIES):
        for i, t in enumerate(target.data.times):
            rows.append({
                "time": float(t),
                "species": species,
                "observed": float(target.data.counts[j, i]),
                "mean": float(mean[i, j]),
                "lower": float(lower[i, j]),
                "upper": float(upper[i, j]),
            })
    logger.info(f"Posterior predictive from {paths.shape[0]} draws at level {level}")
    return pd.DataFrame(rows, columns=["time", "species", "observed", "mean", "lower", "upper"])
