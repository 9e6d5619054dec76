"""
Coverage Experiment

Replicated estimates of the probability of a twisted-Gaussian region,
per kernel and chain length, plus the coverage of several contour levels
from one chain of the longest length per kernel.
"""

import asyncio
import logging
from typing import Any, Dict

from bench.experiments.base import BaseExperiment, ExperimentContext
from bench.experiments.mc_estimate import replicate_grid, summary_rows
from core.diagnostics import banana_contour_coverage, coverage_statistic, replicate_config
from core.samplers import run_chain
from core.trace_io import write_summary_csv

logger = logging.getLogger(__name__)


class CoverageExperiment(BaseExperiment):
    """Convergence of estimated region coverage for the banana target"""

    @property
    def experiment_id(self) -> str:
        return "coverage"

    @property
    def description(self) -> str:
        return "Replicate-mean and SD of the estimated coverage of a twisted probability region per kernel"

    async def execute(self, context: ExperimentContext) -> Dict[str, Any]:
        try:
            settings = context.config.coverage
            summaries = await replicate_grid(
                context.target, context.samplers, coverage_statistic(context.target, settings.p),
                settings.m, settings.n_list, context.config.workers,
            )
            rows = summary_rows(summaries)

            longest = max(settings.n_list)
            contour_rows = []
            for sampler in context.samplers:
                trace = await asyncio.to_thread(run_chain, context.target, replicate_config(sampler, longest, 0))
                contours = banana_contour_coverage(trace, context.target, settings.contour_levels)
                contour_rows.extend({"kernel": sampler.kernel.value, "level": p, "coverage": c} for p, c in contours.items())

            files = [
                str(write_summary_csv(rows, context.path("summary.csv"))),
                str(write_summary_csv(contour_rows, context.path("contours.csv"))),
            ]
            return {
                "success": True,
                "experiment": self.experiment_id,
                "p": settings.p,
                "kernels": list(summaries),
                "summary": rows,
                "contours": contour_rows,
                "files": files,
            }
        except Exception as e:
            return self.failure(e)
