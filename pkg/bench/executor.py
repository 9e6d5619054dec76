"""
Benchmark Executor

Thin coordinator that delegates experiment execution to the experiment
registry.
"""

import logging
from typing import Any, Dict, List

from bench.registry import ExperimentRegistry
from schemas.experiment_config import ExperimentConfig

logger = logging.getLogger(__name__)


class BenchmarkExecutor:
    """
    Executor for benchmark experiments

    Design Pattern: Coordinator Pattern
    - Executor coordinates (routes requests)
    - Experiments operate (run chains, write results)
    - Registry manages (resolves and invokes experiments)
    """

    def __init__(self, registry: ExperimentRegistry):
        self.registry = registry

    async def execute(self, config: ExperimentConfig) -> Dict[str, Any]:
        """Run the experiment named by config.experiment"""
        logger.debug(f"Routing {config.experiment} experiment")
        return await self.registry.execute_experiment(config)

    def get_available_experiments(self) -> List[str]:
        return self.registry.get_experiment_ids()
