"""
Base Experiment Interface

Defines the standard interface for all benchmark experiments. Each
experiment is a self-contained module with metadata and execution logic;
the shared setup (target construction, sampler resolution, the effective
configuration and the replicate thread fan-out) lives here.
"""

import asyncio
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Sequence, Tuple, TypeVar

import numpy as np

from bench.config import EFFECTIVE_CONFIG_NAME, ConfigValidationError, resolve_adaptation, write_effective_config
from core.datasets import (
    DEFAULT_SYNTHETIC_BETA,
    default_hare_lynx_path,
    generate_synthetic_logistic,
    generate_synthetic_lv,
    load_csv_dataset,
)
from core.errors import DataShapeError
from core.linalg import as_vector
from core.ode import LVParams, standard_grids
from core.samplers import SamplerConfig, surrogate_mode
from core.targets import (
    BananaTarget,
    ShiftedTTarget,
    TwoLevelTarget,
    choose_subsample,
    logistic_target,
    lotka_volterra_target,
    observation_grids,
    benchmark_banana_target,
    benchmark_t_target,
    shape_matrix,
)
from schemas.experiment_config import ExperimentConfig

logger = logging.getLogger(__name__)

T = TypeVar("T")


async def run_in_workers(fn: Callable[..., T], jobs: Sequence[tuple], workers: int = 1) -> List[T]:
    """
    Run fn(*job) for every job on at most `workers` threads

    Results come back in job order regardless of completion order.

    Args:
        fn: Blocking function
        jobs: Argument tuples
        workers: Maximum number of concurrent calls

    Returns:
        List of results aligned with jobs
    """
    if workers < 1:
        raise ValueError(f"workers must be at least 1, got {workers}")
    semaphore = asyncio.Semaphore(workers)

    async def run(job):
        async with semaphore:
            return await asyncio.to_thread(fn, *job)

    logger.debug(f"Running {len(jobs)} jobs on {workers} worker(s)")
    return list(await asyncio.gather(*(run(job) for job in jobs)))


@dataclass
class ExperimentContext:
    """Everything an experiment needs once the configuration is resolved"""
    config: ExperimentConfig
    target: TwoLevelTarget
    samplers: List[SamplerConfig]
    output_dir: Path

    def path(self, name: str) -> Path:
        return self.output_dir / name


def build_target(settings) -> TwoLevelTarget:
    """
    Construct the target described by a target settings model

    Raises:
        SchemaError, DataShapeError, NotPositiveDefiniteError: On bad target parameters
    """
    if settings.kind == "shifted_t":
        if settings.preset == "benchmark":
            return benchmark_t_target()
        Sigma = settings.Sigma if settings.Sigma is not None else shape_matrix(settings.variances, settings.rho)
        return ShiftedTTarget(settings.mu, Sigma, settings.nu, settings.truncation_sd)

    if settings.kind == "banana":
        if settings.preset == "benchmark":
            return benchmark_banana_target()
        Sigma = settings.Sigma if settings.Sigma is not None else np.diag(settings.variances)
        return BananaTarget(settings.mu, Sigma, settings.a, settings.b, settings.truncation_sd)

    if settings.kind == "logistic":
        if settings.synthetic is not None:
            synthetic = settings.synthetic
            beta = synthetic.beta_true if synthetic.beta_true is not None else DEFAULT_SYNTHETIC_BETA
            dataset = generate_synthetic_logistic(synthetic.n, synthetic.zero_fraction, beta, synthetic.seed)
        else:
            dataset = load_csv_dataset(settings.data, "logistic", settings.response, settings.factors)
        subsample = choose_subsample(dataset.y, settings.n0, np.random.default_rng(settings.subsample_seed))
        d = dataset.X.shape[1]
        return logistic_target(
            dataset.X, dataset.y, subsample,
            Sigma0=settings.prior_variance * np.eye(d),
            box_halfwidth=settings.box_halfwidth,
        )

    if settings.kind == "lotka_volterra":
        if settings.synthetic is not None:
            s = settings.synthetic
            fine, _ = standard_grids(s.n_years, s.t_start)
            data = generate_synthetic_lv(LVParams(s.alpha, s.beta, s.gamma, s.delta), tuple(s.y0), tuple(s.sigma), fine, s.seed)
        else:
            data = load_csv_dataset(settings.data or default_hare_lynx_path(), "lotka_volterra")
        fine, coarse = observation_grids(data, settings.fine_per_year, settings.coarse_per_year)
        return lotka_volterra_target(data, fine, coarse, method=settings.method)

    raise ValueError(f"Unknown target kind '{settings.kind}'")


def check_initial_states(config: ExperimentConfig, target: TwoLevelTarget) -> None:
    """
    Reject explicit initial states that do not fit the target

    Raises:
        ConfigValidationError: Listing every sampler whose initial_state has
            the wrong length or lies outside the support box
    """
    violations = []
    for i, settings in enumerate(config.samplers):
        if settings.initial_state is None:
            continue
        location = f"samplers.{i}.initial_state"
        try:
            x = as_vector(settings.initial_state, target.dim)
        except DataShapeError as e:
            violations.append(f"{location}: {e}")
            continue
        if not target.in_support(x):
            violations.append(f"{location}: lies outside the support of {target.name}")
    if violations:
        raise ConfigValidationError(violations)


def resolve_samplers(config: ExperimentConfig, target: TwoLevelTarget) -> Tuple[List[SamplerConfig], ExperimentConfig]:
    """
    Sampler configurations plus the experiment configuration with defaults filled

    A sampler with start "surrogate_mode" and no initial_state starts at the
    surrogate mode; the search runs once and the resolved point is written
    back as initial_state.
    """
    check_initial_states(config, target)
    samplers = []
    resolved_settings = []
    mode = None
    for settings in config.samplers:
        adaptation, resolved = resolve_adaptation(settings.adaptation, target.dim, target.support)
        update: Dict[str, Any] = {"adaptation": resolved}
        if settings.initial_state is not None:
            initial = as_vector(settings.initial_state, target.dim)
        elif settings.start == "surrogate_mode":
            if mode is None:
                mode = surrogate_mode(target)
            initial = mode
            update["initial_state"] = mode.tolist()
        else:
            initial = None
        samplers.append(SamplerConfig(
            adaptation=adaptation,
            n_iters=settings.n_iters,
            burn_in_fraction=settings.burn_in_fraction,
            thinning=settings.thinning,
            seed=config.seed,
            kernel=settings.kernel,
            initial_state=initial,
        ))
        resolved_settings.append(settings.model_copy(update=update))
    return samplers, config.model_copy(update={"samplers": resolved_settings})


def build_context(config: ExperimentConfig) -> ExperimentContext:
    """
    Resolve a configuration and write its effective form

    The effective configuration is written before any sampling starts.
    """
    target = build_target(config.target)
    logger.info(f"Built target {target.describe()}")
    samplers, effective = resolve_samplers(config, target)
    output_dir = Path(effective.output_dir)
    write_effective_config(effective, output_dir / EFFECTIVE_CONFIG_NAME)
    return ExperimentContext(config=effective, target=target, samplers=samplers, output_dir=output_dir)


class BaseExperiment(ABC):
    """
    Base class for all experiments

    Subclasses must implement:
    - experiment_id: Unique identifier (the config's "experiment" value)
    - description: What the experiment does
    - execute(): Async method that runs the experiment

    execute() should not raise; it returns a dict with success/error.
    """

    @property
    @abstractmethod
    def experiment_id(self) -> str:
        """Unique experiment identifier (e.g., 'mc-estimate')"""
        pass

    @property
    @abstractmethod
    def description(self) -> str:
        """Description of what the experiment does"""
        pass

    @abstractmethod
    async def execute(self, context: ExperimentContext) -> Dict[str, Any]:
        """
        Run the experiment

        Args:
            context: Resolved experiment context

        Returns:
            Dictionary with results. Includes:
            - success: bool
            - error / error_type: when success is False
            - files: paths written
        """
        pass

    def failure(self, error: Exception) -> Dict[str, Any]:
        """Standard error result for an exception raised while running"""
        logger.error(f"{self.experiment_id} failed: {error}")
        return {
            "success": False,
            "error": str(error),
            "error_type": "runtime",
            "experiment": self.experiment_id,
        }
