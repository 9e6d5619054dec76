"""
EDPM Comparison Experiment

Runs two kernels one after the other on the same target and seed and
tabulates their relative effective draws per minute for every coordinate
and the log posterior under each thinning strategy. Chains never run
concurrently here because EDPM is a wall-clock measure.
"""

import asyncio
import logging
from typing import Any, Dict

from bench.experiments.base import BaseExperiment, ExperimentContext
from bench.experiments.single_run import run_summary
from core.diagnostics import LOG_POSTERIOR, redpm_table
from core.samplers import run_chain
from core.trace_io import write_summary_csv, write_trace_csv

logger = logging.getLogger(__name__)


class EDPMCompareExperiment(BaseExperiment):
    """REDPM of the first sampler over the second"""

    @property
    def experiment_id(self) -> str:
        return "edpm-compare"

    @property
    def description(self) -> str:
        return "Relative effective draws per minute of two kernels under several thinnings"

    async def execute(self, context: ExperimentContext) -> Dict[str, Any]:
        try:
            first, second = context.samplers
            trace_a = await asyncio.to_thread(run_chain, context.target, first)
            trace_b = await asyncio.to_thread(run_chain, context.target, second)
            label_a, label_b = first.kernel.value, second.kernel.value

            table = redpm_table(trace_a, trace_b, context.config.edpm.thinnings)
            headline = table[(table["projection"] == LOG_POSTERIOR) & (table["thinning"] == min(context.config.edpm.thinnings))]
            log_pi_redpm = float(headline["redpm"].iloc[0]) if len(headline) else float("nan")
            logger.info(f"REDPM {label_a}/{label_b} on the log posterior: {log_pi_redpm:.3f}")

            files = [str(write_summary_csv(table, context.path("summary.csv")))]
            files.append(str(write_summary_csv([run_summary(trace_a), run_summary(trace_b)], context.path("runs.csv"))))
            if context.config.write_traces:
                files.append(str(write_trace_csv(trace_a, context.path(f"trace_{label_a}.csv"))))
                files.append(str(write_trace_csv(trace_b, context.path(f"trace_{label_b}.csv"))))

            return {
                "success": True,
                "experiment": self.experiment_id,
                "kernels": [label_a, label_b],
                "redpm_log_pi": log_pi_redpm,
                "summary": table.to_dict(orient="records"),
                "files": files,
            }
        except Exception as e:
            return self.failure(e)
