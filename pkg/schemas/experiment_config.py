"""
Experiment Configuration Schema

Pydantic models of the JSON experiment file. Unknown keys are rejected at
every level; defaults are declared here so the effective configuration
written next to the results records every value that was used.
"""

from typing import Annotated, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

ExperimentType = Literal["single-run", "mc-estimate", "coverage", "edpm-compare", "acf-compare", "predictive"]
KernelName = Literal["MH", "TSMH", "AM", "TSAM"]


class StrictModel(BaseModel):
    """Base model that rejects unknown keys"""
    model_config = ConfigDict(extra="forbid")


class AdaptationSettings(StrictModel):
    """Adaptive proposal tunables; unset values are filled from the target dimension"""
    t0: int = Field(default=100, gt=0)
    K: int = Field(default=1, ge=1)
    c: float = Field(default=1.0, gt=0, le=1)
    s_d: Optional[float] = Field(default=None, gt=0)
    epsilon: Optional[float] = Field(default=None, gt=0)
    scale_epsilon: bool = True
    C0: Optional[List[List[float]]] = None
    C0_sd: Optional[List[float]] = None  # C0 = c * s_d * diag(C0_sd^2) when C0 is unset


class SamplerSettings(StrictModel):
    """One chain configuration"""
    kernel: KernelName = "TSAM"
    n_iters: int = Field(default=10000, gt=0)
    burn_in_fraction: float = Field(default=0.5, ge=0, lt=1)
    thinning: int = Field(default=1, ge=1)
    adaptation: AdaptationSettings = Field(default_factory=AdaptationSettings)
    initial_state: Optional[List[float]] = None
    # Ignored when initial_state is set; the effective config records the resolved state
    start: Literal["box_uniform", "surrogate_mode"] = "box_uniform"


class ShiftedTSettings(StrictModel):
    """Truncated shifted t target; preset "benchmark" gives the standard 8-d setup"""
    kind: Literal["shifted_t"] = "shifted_t"
    preset: Optional[Literal["benchmark"]] = None
    mu: Optional[List[float]] = None
    Sigma: Optional[List[List[float]]] = None
    variances: Optional[List[float]] = None
    rho: float = Field(default=0.0, gt=-1, lt=1)
    nu: Optional[float] = Field(default=None, gt=0)
    truncation_sd: float = Field(default=5.0, gt=0)

    @model_validator(mode="after")
    def check_parameters(self):
        if self.preset is None:
            if self.mu is None or self.nu is None:
                raise ValueError("shifted_t needs 'mu' and 'nu' unless preset is set")
            if self.Sigma is None and self.variances is None:
                raise ValueError("shifted_t needs 'Sigma' or 'variances' unless preset is set")
        return self


class BananaSettings(StrictModel):
    """Twisted Gaussian target; preset "benchmark" gives the standard 8-d setup"""
    kind: Literal["banana"] = "banana"
    preset: Optional[Literal["benchmark"]] = None
    mu: Optional[List[float]] = None
    Sigma: Optional[List[List[float]]] = None
    variances: Optional[List[float]] = None
    a: float = 1.0
    b: float = 0.05
    truncation_sd: float = Field(default=5.0, gt=0)

    @model_validator(mode="after")
    def check_parameters(self):
        if self.a == 0:
            raise ValueError("banana twist parameter 'a' must be nonzero")
        if self.preset is None:
            if self.mu is None:
                raise ValueError("banana needs 'mu' unless preset is set")
            if self.Sigma is None and self.variances is None:
                raise ValueError("banana needs 'Sigma' or 'variances' unless preset is set")
        return self


class SyntheticLogisticSettings(StrictModel):
    n: int = Field(default=41188, gt=0)
    zero_fraction: Optional[float] = Field(default=0.887, gt=0, lt=1)
    beta_true: Optional[List[float]] = None
    seed: int = Field(default=0, ge=0)


class LogisticSettings(StrictModel):
    """Logistic regression target from a CSV file or a synthetic dataset"""
    kind: Literal["logistic"] = "logistic"
    data: Optional[str] = None
    response: str = "y"
    factors: Optional[List[str]] = None
    synthetic: Optional[SyntheticLogisticSettings] = None
    n0: int = Field(default=10000, gt=0)
    subsample_seed: int = Field(default=0, ge=0)
    prior_variance: float = Field(default=100.0, gt=0)
    box_halfwidth: float = Field(default=20.0, gt=0)

    @model_validator(mode="after")
    def check_source(self):
        if (self.data is None) == (self.synthetic is None):
            raise ValueError("logistic needs exactly one of 'data' or 'synthetic'")
        return self


class SyntheticLVSettings(StrictModel):
    alpha: float = Field(default=0.09, ge=0)
    beta: float = Field(default=0.004, ge=0)
    gamma: float = Field(default=0.08, ge=0)
    delta: float = Field(default=0.004, ge=0)
    y0: List[float] = Field(default_factory=lambda: [30.0, 10.0], min_length=2, max_length=2)
    sigma: List[float] = Field(default_factory=lambda: [0.25, 0.25], min_length=2, max_length=2)
    n_years: int = Field(default=20, ge=1)
    t_start: float = 1900.0
    seed: int = Field(default=0, ge=0)


class LotkaVolterraSettings(StrictModel):
    """Predator-prey calibration; data defaults to the bundled hare/lynx table"""
    kind: Literal["lotka_volterra"] = "lotka_volterra"
    data: Optional[str] = None
    synthetic: Optional[SyntheticLVSettings] = None
    method: Literal["rk4", "euler"] = "rk4"
    fine_per_year: int = Field(default=365, ge=1)
    coarse_per_year: int = Field(default=12, ge=1)

    @model_validator(mode="after")
    def check_source(self):
        if self.data is not None and self.synthetic is not None:
            raise ValueError("lotka_volterra takes at most one of 'data' or 'synthetic'")
        return self


TargetSettings = Annotated[
    Union[ShiftedTSettings, BananaSettings, LogisticSettings, LotkaVolterraSettings],
    Field(discriminator="kind"),
]


class FunctionSettings(StrictModel):
    kind: Literal["exp_sum", "constant"] = "exp_sum"
    scale: float = 10.0
    rate: float = 0.1
    value: float = 1.0


class MCEstimateSettings(StrictModel):
    m: int = Field(default=100, ge=2)
    n_list: List[int] = Field(default_factory=lambda: [500, 1000, 2000, 5000, 10000], min_length=1)
    function: FunctionSettings = Field(default_factory=FunctionSettings)
    oracle_draws: int = Field(default=1000000, ge=0)


class CoverageSettings(StrictModel):
    p: float = Field(default=0.683, gt=0, lt=1)
    m: int = Field(default=10, ge=2)
    n_list: List[int] = Field(default_factory=lambda: [500, 1000, 2000, 5000, 10000, 20000], min_length=1)
    contour_levels: List[float] = Field(default_factory=lambda: [0.5, 0.683, 0.95])


class EDPMSettings(StrictModel):
    thinnings: List[int] = Field(default_factory=lambda: [1, 10, 20], min_length=1)


class ACFSettings(StrictModel):
    max_lag: int = Field(default=50, ge=1)
    replicates: int = Field(default=5, ge=1)


class PredictiveSettings(StrictModel):
    level: float = Field(default=0.8, gt=0, lt=1)
    max_draws: int = Field(default=1000, ge=1)


class ExperimentConfig(StrictModel):
    """Top-level experiment file"""
    experiment: ExperimentType
    target: TargetSettings
    samplers: List[SamplerSettings] = Field(min_length=1)
    seed: int = Field(default=0, ge=0, lt=2 ** 64)
    output_dir: str = "results"
    workers: int = Field(default=1, ge=1)
    write_traces: bool = True
    mc_estimate: Optional[MCEstimateSettings] = None
    coverage: Optional[CoverageSettings] = None
    edpm: Optional[EDPMSettings] = None
    acf: Optional[ACFSettings] = None
    predictive: Optional[PredictiveSettings] = None
