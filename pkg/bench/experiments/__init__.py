"""
Benchmark Experiments Package

Contains all experiment implementations. Each module holds one experiment
type; create_registry() registers every one of them.

Experiment types:
- single-run: one chain, trace and run summary
- mc-estimate: Monte Carlo average convergence across replicates
- coverage: twisted-region coverage convergence across replicates
- edpm-compare: relative effective draws per minute of two kernels
- acf-compare: autocorrelation along principal directions
- predictive: predator-prey posterior predictive band
"""

from bench.experiments.acf_compare import ACFCompareExperiment
from bench.experiments.base import BaseExperiment, ExperimentContext, build_context
from bench.experiments.coverage import CoverageExperiment
from bench.experiments.edpm_compare import EDPMCompareExperiment
from bench.experiments.mc_estimate import MCEstimateExperiment
from bench.experiments.predictive import PredictiveExperiment
from bench.experiments.single_run import SingleRunExperiment


def create_registry():
    """Registry with every experiment type registered"""
    from bench.registry import ExperimentRegistry

    registry = ExperimentRegistry()
    for experiment in (
        SingleRunExperiment(),
        MCEstimateExperiment(),
        CoverageExperiment(),
        EDPMCompareExperiment(),
        ACFCompareExperiment(),
        PredictiveExperiment(),
    ):
        registry.register(experiment)
    return registry


__all__ = [
    "BaseExperiment",
    "ExperimentContext",
    "build_context",
    "create_registry",
]
