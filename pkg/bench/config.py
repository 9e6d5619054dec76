"""
Configuration Management Module

Loads the JSON experiment file into the pydantic schema, applies the
command-line overrides, resolves adaptation defaults against the target
and writes the effective configuration. Environment variables are not
consulted.
"""

import json
import logging
from pathlib import Path
from typing import List, Optional

import numpy as np
from pydantic import ValidationError

from core.adaptation import AdaptationConfig, default_config
from core.targets import Box
from schemas.experiment_config import (
    ACFSettings,
    AdaptationSettings,
    CoverageSettings,
    EDPMSettings,
    ExperimentConfig,
    MCEstimateSettings,
    PredictiveSettings,
)

logger = logging.getLogger(__name__)

EFFECTIVE_CONFIG_NAME = "effective_config.json"

# Experiment type -> (config attribute, settings model)
EXPERIMENT_SECTIONS = {
    "mc-estimate": ("mc_estimate", MCEstimateSettings),
    "coverage": ("coverage", CoverageSettings),
    "edpm-compare": ("edpm", EDPMSettings),
    "acf-compare": ("acf", ACFSettings),
    "predictive": ("predictive", PredictiveSettings),
}


class ConfigParseError(ValueError):
    """Raised when the experiment file is not valid JSON"""

    def __init__(self, message: str, path: str, line: int = 0, column: int = 0):
        super().__init__(f"{path}:{line}:{column}: {message}")
        self.path = path
        self.line = line
        self.column = column


class ConfigValidationError(ValueError):
    """Raised with every violation found in an experiment file"""

    def __init__(self, violations: List[str]):
        super().__init__("Invalid experiment configuration:\n  " + "\n  ".join(violations))
        self.violations = list(violations)


def _format_location(loc) -> str:
    return ".".join(str(part) for part in loc) or "<root>"


def load_config(path) -> ExperimentConfig:
    """
    Load and validate an experiment file

    Args:
        path: Path of the JSON file

    Returns:
        ExperimentConfig with the section of its experiment type filled in

    Raises:
        ConfigParseError: If the file cannot be read or is not valid JSON
        ConfigValidationError: Listing all schema and cross-field violations
    """
    path = str(path)
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigParseError(f"cannot read file ({e.strerror})", path)

    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigParseError(e.msg, path, e.lineno, e.colno)

    try:
        config = ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigValidationError([f"{_format_location(err['loc'])}: {err['msg']}" for err in e.errors()])

    config = fill_sections(config)
    validate_config(config)
    logger.info(f"Loaded {config.experiment} experiment from {path}")
    return config


def fill_sections(config: ExperimentConfig) -> ExperimentConfig:
    """Default settings for the section the experiment type needs"""
    section = EXPERIMENT_SECTIONS.get(config.experiment)
    if section is None:
        return config
    name, model = section
    if getattr(config, name) is not None:
        return config
    return config.model_copy(update={name: model()})


def validate_config(config: ExperimentConfig) -> None:
    """
    Cross-field checks the schema cannot express

    Raises:
        ConfigValidationError: Listing every violation found
    """
    violations = []
    kind = config.target.kind
    kernels = [s.kernel for s in config.samplers]

    if config.experiment == "coverage" and kind != "banana":
        violations.append("coverage experiments need a banana target")
    if config.experiment == "mc-estimate" and kind not in ("shifted_t", "banana"):
        violations.append("mc-estimate experiments need a target with an exact sampler (shifted_t or banana)")
    if config.experiment == "predictive" and kind != "lotka_volterra":
        violations.append("predictive experiments need a lotka_volterra target")
    if config.experiment == "edpm-compare" and len(config.samplers) != 2:
        violations.append("edpm-compare needs exactly two samplers (numerator first)")
    if config.experiment in ("single-run", "predictive") and len(config.samplers) != 1:
        violations.append(f"{config.experiment} needs exactly one sampler")
    if len(set(kernels)) != len(kernels):
        violations.append("sampler kernels must be distinct")

    for name, _ in EXPERIMENT_SECTIONS.values():
        settings = getattr(config, name)
        if settings is not None and hasattr(settings, "n_list"):
            if any(n <= 0 for n in settings.n_list):
                violations.append(f"{name}.n_list: entries must be positive")
    if config.coverage is not None and any(not 0 < p < 1 for p in config.coverage.contour_levels):
        violations.append("coverage.contour_levels: entries must lie in (0, 1)")

    for i, sampler in enumerate(config.samplers):
        C0 = sampler.adaptation.C0
        if C0 is not None and any(len(row) != len(C0) for row in C0):
            violations.append(f"samplers.{i}.adaptation.C0: must be square")

    if violations:
        raise ConfigValidationError(violations)


def apply_overrides(
    config: ExperimentConfig,
    seed: Optional[int] = None,
    output_dir: Optional[str] = None,
) -> ExperimentConfig:
    """Command-line seed and output directory take precedence over the file"""
    update = {}
    if seed is not None:
        if not 0 <= seed < 2 ** 64:
            raise ConfigValidationError([f"seed: must be a 64-bit nonnegative integer, got {seed}"])
        update["seed"] = seed
    if output_dir is not None:
        update["output_dir"] = output_dir
    return config.model_copy(update=update) if update else config


def resolve_adaptation(settings: AdaptationSettings, dim: int, support: Box):
    """
    Fill unset adaptation tunables from the target dimension and support

    Args:
        settings: Adaptation settings from the file
        dim: Target dimension
        support: Target support box (scales the default epsilon)

    Returns:
        Tuple of (AdaptationConfig, settings with every value filled)

    Raises:
        ConfigValidationError: If C0 or C0_sd does not match the dimension
    """
    defaults = default_config(
        dim, support=support, c=settings.c, t0=settings.t0, K=settings.K,
        epsilon=settings.epsilon, scale_epsilon=settings.scale_epsilon,
    )
    s_d = settings.s_d if settings.s_d is not None else defaults.s_d
    if settings.C0 is not None:
        C0 = np.asarray(settings.C0, dtype=float)
        if C0.shape != (dim, dim):
            raise ConfigValidationError([f"adaptation.C0: expected shape ({dim}, {dim}), got {C0.shape}"])
    elif settings.C0_sd is not None:
        sd = np.asarray(settings.C0_sd, dtype=float)
        if sd.shape != (dim,) or np.any(sd <= 0):
            raise ConfigValidationError([f"adaptation.C0_sd: expected {dim} positive values, got {settings.C0_sd}"])
        C0 = settings.c * s_d * np.diag(sd ** 2)
    else:
        C0 = settings.c * s_d * np.eye(dim)

    config = AdaptationConfig(C0=C0, t0=settings.t0, s_d=s_d, epsilon=defaults.epsilon, K=settings.K)
    resolved = settings.model_copy(update={"s_d": s_d, "epsilon": defaults.epsilon, "C0": config.C0.tolist()})
    return config, resolved


def write_effective_config(config: ExperimentConfig, path) -> Path:
    """Write the configuration with every default applied"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(config.model_dump(mode="json"), indent=2) + "\n", encoding="utf-8")
    logger.info(f"Wrote effective configuration to {path}")
    return path
