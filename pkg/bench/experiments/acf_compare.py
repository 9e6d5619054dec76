"""
ACF Comparison Experiment

Autocorrelation of every configured kernel along the first principal
direction of the target and one orthogonal direction, averaged over
replicate seeds.
"""

import logging
from dataclasses import replace
from typing import Any, Dict, List

import numpy as np
import pandas as pd

from bench.experiments.base import BaseExperiment, ExperimentContext, run_in_workers
from core.diagnostics import acf_comparison, principal_projection
from core.samplers import Trace, run_chain
from core.targets import ShiftedTTarget, TwoLevelTarget
from core.trace_io import write_summary_csv

logger = logging.getLogger(__name__)


def reference_covariance(target: TwoLevelTarget, traces: List[Trace]) -> np.ndarray:
    """Known target covariance where available, else the pooled sample covariance"""
    if isinstance(target, ShiftedTTarget):
        return target.principal_covariance()
    return np.cov(np.vstack([t.states for t in traces]), rowvar=False)


def lag_table(frame: pd.DataFrame, lag: int) -> Dict[str, Dict[str, float]]:
    """Mean ACF at one lag, keyed by kernel then direction"""
    at_lag = frame[frame["lag"] == lag]
    table: Dict[str, Dict[str, float]] = {}
    for row in at_lag.itertuples(index=False):
        table.setdefault(row.kernel, {})[row.direction] = float(row.acf)
    return table


class ACFCompareExperiment(BaseExperiment):
    """ACF curves of several kernels along principal directions"""

    @property
    def experiment_id(self) -> str:
        return "acf-compare"

    @property
    def description(self) -> str:
        return "Autocorrelation along the first principal direction and an orthogonal one, per kernel"

    async def execute(self, context: ExperimentContext) -> Dict[str, Any]:
        try:
            settings = context.config.acf
            jobs = []
            for sampler in context.samplers:
                for k in range(settings.replicates):
                    jobs.append((context.target, replace(sampler, seed=sampler.seed + k)))
            traces = await run_in_workers(run_chain, jobs, context.config.workers)

            first, other = principal_projection(reference_covariance(context.target, traces))
            directions = {"principal": first, "orthogonal": other}

            frames = []
            for (_, sampler), trace in zip(jobs, traces):
                frame = acf_comparison({sampler.kernel.value: trace}, directions, settings.max_lag)
                frame["seed"] = sampler.seed
                frames.append(frame)
            curves = (
                pd.concat(frames, ignore_index=True)
                .groupby(["kernel", "direction", "lag"], as_index=False, sort=False)["acf"]
                .mean()
            )

            lag = min(20, settings.max_lag)
            headline = lag_table(curves, lag)
            for kernel, values in headline.items():
                logger.info(f"{kernel}: lag-{lag} ACF principal={values['principal']:.3f} orthogonal={values['orthogonal']:.3f}")

            files = [str(write_summary_csv(curves, context.path("acf.csv")))]
            return {
                "success": True,
                "experiment": self.experiment_id,
                "principal_direction": first.tolist(),
                "lag": lag,
                "acf_at_lag": headline,
                "files": files,
            }
        except Exception as e:
            return self.failure(e)
