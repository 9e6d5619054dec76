"""
Posterior Predictive Experiment

Calibrates the predator-prey model with one chain and reports the
predictive mean and central credible band of both populations at the
observation times.
"""

import asyncio
import logging
from typing import Any, Dict

from bench.experiments.base import BaseExperiment, ExperimentContext
from bench.experiments.single_run import run_summary
from core.diagnostics import posterior_predictive
from core.samplers import run_chain
from core.trace_io import write_summary_csv, write_trace_csv

logger = logging.getLogger(__name__)


class PredictiveExperiment(BaseExperiment):
    """Posterior predictive band of the calibrated populations"""

    @property
    def experiment_id(self) -> str:
        return "predictive"

    @property
    def description(self) -> str:
        return "Posterior predictive mean and credible band of the predator-prey populations"

    async def execute(self, context: ExperimentContext) -> Dict[str, Any]:
        try:
            settings = context.config.predictive
            trace = await asyncio.to_thread(run_chain, context.target, context.samplers[0])
            band = await asyncio.to_thread(
                posterior_predictive, trace, context.target, settings.level, settings.max_draws
            )

            files = [
                str(write_summary_csv(band, context.path("predictive.csv"))),
                str(write_summary_csv([run_summary(trace)], context.path("summary.csv"))),
            ]
            if context.config.write_traces:
                files.append(str(write_trace_csv(trace, context.path("trace.csv"))))

            inside = (band["observed"] >= band["lower"]) & (band["observed"] <= band["upper"])
            return {
                "success": True,
                "experiment": self.experiment_id,
                "level": settings.level,
                "observed_inside_band": float(inside.mean()),
                "files": files,
            }
        except Exception as e:
            return self.failure(e)
