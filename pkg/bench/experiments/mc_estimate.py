"""
Monte Carlo Estimate Experiment

Replicated chains per kernel and chain length n; reports the mean and SD
across replicates of the chain average of a bounded function, together
with an exact-sampling oracle value of its expectation.
"""

import asyncio
import logging
from typing import Any, Dict, List, Sequence

import numpy as np

from bench.experiments.base import BaseExperiment, ExperimentContext, run_in_workers
from core.diagnostics import (
    BoundedFunction,
    ReplicateSummary,
    constant_function,
    exp_sum_function,
    mean_statistic,
    oracle_expectation,
    replicate_statistic,
    summarize_replicates,
)
from core.samplers import SamplerConfig
from core.targets import TwoLevelTarget
from core.trace_io import write_summary_csv

logger = logging.getLogger(__name__)


def make_function(settings) -> BoundedFunction:
    """Bounded test function described by a function settings model"""
    if settings.kind == "constant":
        return constant_function(settings.value)
    return exp_sum_function(settings.scale, settings.rate)


async def replicate_grid(
    target: TwoLevelTarget,
    samplers: Sequence[SamplerConfig],
    statistic,
    m: int,
    n_list: Sequence[int],
    workers: int,
) -> Dict[str, List[ReplicateSummary]]:
    """
    Every (kernel, n, replicate) chain on one worker pool, summarized per n

    Returns:
        Summaries in n_list order, keyed by kernel name in sampler order
    """
    jobs = [(target, sampler, statistic, n, k) for sampler in samplers for n in n_list for k in range(m)]
    values = await run_in_workers(replicate_statistic, jobs, workers)

    summaries: Dict[str, List[ReplicateSummary]] = {}
    offset = 0
    for sampler in samplers:
        kernel = sampler.kernel.value
        rows = []
        for n in n_list:
            summary = summarize_replicates(n, values[offset:offset + m])
            offset += m
            logger.info(f"{kernel} n={n}: mean={summary.mean:.6g} sd={summary.sd:.3g} over {m} replicates")
            rows.append(summary)
        summaries[kernel] = rows
    return summaries


def summary_rows(summaries: Dict[str, List[ReplicateSummary]]) -> List[Dict[str, Any]]:
    return [{"kernel": kernel, **s.as_row()} for kernel, rows in summaries.items() for s in rows]


class MCEstimateExperiment(BaseExperiment):
    """Convergence of Monte Carlo averages across replicated chains"""

    @property
    def experiment_id(self) -> str:
        return "mc-estimate"

    @property
    def description(self) -> str:
        return "Replicate-mean and SD of a bounded function's chain average per kernel and chain length"

    async def execute(self, context: ExperimentContext) -> Dict[str, Any]:
        try:
            settings = context.config.mc_estimate
            f = make_function(settings.function)
            summaries = await replicate_grid(
                context.target, context.samplers, mean_statistic(f),
                settings.m, settings.n_list, context.config.workers,
            )
            rows = summary_rows(summaries)

            files = [str(write_summary_csv(rows, context.path("summary.csv")))]
            oracle = None
            if settings.oracle_draws > 0:
                rng = np.random.default_rng(context.config.seed)
                oracle = await asyncio.to_thread(oracle_expectation, context.target, f, settings.oracle_draws, rng)
                logger.info(f"Oracle E(f) from {settings.oracle_draws} exact draws: {oracle:.6g}")
                files.append(str(write_summary_csv(
                    [{"draws": settings.oracle_draws, "expectation": oracle}], context.path("oracle.csv")
                )))

            return {
                "success": True,
                "experiment": self.experiment_id,
                "kernels": list(summaries),
                "summary": rows,
                "oracle": oracle,
                "files": files,
            }
        except Exception as e:
            return self.failure(e)
