"""
Single-Run Experiment

Runs one chain, writes its trace and a one-row run summary.
"""

import asyncio
import logging
from typing import Any, Dict

from bench.experiments.base import BaseExperiment, ExperimentContext
from core.diagnostics import LOG_POSTERIOR, banana_contour_coverage, edpm, ess
from core.errors import DegenerateSeriesError
from core.samplers import Trace, run_chain
from core.targets import BananaTarget
from core.trace_io import write_summary_csv, write_trace_csv

logger = logging.getLogger(__name__)


def run_summary(trace: Trace) -> Dict[str, Any]:
    """Counters, rates and log-posterior efficiency of one chain"""
    row = {
        "kernel": trace.meta.get("kernel"),
        "seed": trace.meta.get("seed"),
        "n_iters": trace.counters["n_iters"],
        "retained": trace.n,
        "wall_seconds": trace.wall_seconds,
        "stage1_rate": trace.stage1_rate(),
        "acceptance_rate": trace.acceptance_rate(),
        "expensive_evals": trace.counters["expensive_evals"],
        "cheap_evals": trace.counters["cheap_evals"],
        "evaluation_failures": trace.counters["evaluation_failures"],
    }
    try:
        row["ess_log_pi"] = ess(trace.log_pi)
        row["edpm_log_pi"] = edpm(trace, LOG_POSTERIOR)
    except DegenerateSeriesError:
        logger.warning("Log-posterior series is constant; ESS not reported")
        row["ess_log_pi"] = float("nan")
        row["edpm_log_pi"] = float("nan")
    return row


class SingleRunExperiment(BaseExperiment):
    """Run one chain and export it"""

    @property
    def experiment_id(self) -> str:
        return "single-run"

    @property
    def description(self) -> str:
        return "Run one chain and write its trace and run summary"

    async def execute(self, context: ExperimentContext) -> Dict[str, Any]:
        try:
            sampler = context.samplers[0]
            trace = await asyncio.to_thread(run_chain, context.target, sampler)
            summary = run_summary(trace)
            if isinstance(context.target, BananaTarget):
                for p, fraction in banana_contour_coverage(trace, context.target).items():
                    summary[f"coverage_{p:g}"] = fraction

            files = []
            if context.config.write_traces:
                files.append(str(write_trace_csv(trace, context.path("trace.csv"))))
            files.append(str(write_summary_csv([summary], context.path("summary.csv"))))
            return {"success": True, "experiment": self.experiment_id, "summary": summary, "files": files}
        except Exception as e:
            return self.failure(e)
