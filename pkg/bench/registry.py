"""
Experiment Registry

Manages experiment registration and routing for the benchmark CLI.
Execution at this boundary never raises: failures come back as result
dicts whose error_type tells the CLI which exit code to use.
"""

import logging
from typing import Any, Dict, List, Optional

from bench.experiments.base import BaseExperiment, build_context
from schemas.experiment_config import ExperimentConfig

logger = logging.getLogger(__name__)

# ConfigValidationError, SchemaError, DataShapeError and NotPositiveDefiniteError
# are ValueErrors; OSError covers unreadable data files
VALIDATION_ERRORS = (ValueError, OSError)


class ExperimentRegistry:
    """Central registry of benchmark experiments, keyed by experiment type"""

    def __init__(self):
        self._experiments: Dict[str, BaseExperiment] = {}

    def register(self, experiment: BaseExperiment) -> None:
        """
        Register an experiment

        Raises:
            ValueError: If the experiment_id is already registered
        """
        if experiment.experiment_id in self._experiments:
            raise ValueError(f"Experiment '{experiment.experiment_id}' is already registered")
        self._experiments[experiment.experiment_id] = experiment

    def get_experiment(self, experiment_id: str) -> Optional[BaseExperiment]:
        """
        Get an experiment by id

        Args:
            experiment_id: Experiment type, e.g. "mc-estimate"

        Returns:
            The experiment, or None if not registered
        """
        return self._experiments.get(experiment_id)

    def get_experiment_ids(self) -> List[str]:
        """Registered experiment ids in registration order"""
        return list(self._experiments.keys())

    async def execute_experiment(self, config: ExperimentConfig) -> Dict[str, Any]:
        """
        Resolve a configuration and run its experiment

        Args:
            config: Validated experiment configuration

        Returns:
            Experiment result, or an error dict with error_type
            "validation" (bad configuration or data) or "runtime"
        """
        experiment = self.get_experiment(config.experiment)
        if not experiment:
            return {
                "success": False,
                "error": f"Unknown experiment: {config.experiment}",
                "error_type": "validation",
                "available_experiments": self.get_experiment_ids(),
            }

        try:
            context = build_context(config)
        except VALIDATION_ERRORS as e:
            logger.error(f"Invalid experiment setup: {e}")
            return {"success": False, "error": str(e), "error_type": "validation", "experiment": config.experiment}
        except Exception as e:
            return experiment.failure(e)

        logger.info(f"Running {experiment.experiment_id}: {experiment.description}")
        try:
            return await experiment.execute(context)
        except Exception as e:
            # Experiments should not raise, but catch just in case
            return experiment.failure(e)

    def __len__(self) -> int:
        return len(self._experiments)

    def __contains__(self, experiment_id: str) -> bool:
        return experiment_id in self._experiments
