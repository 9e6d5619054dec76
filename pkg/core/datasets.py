"""
Dataset Ingestion and Synthetic Generators

Loads the two observed-data formats used by the benchmark targets:
- logistic: a binary response column plus categorical predictors, expanded
  to a reference-cell dummy design matrix with intercept
- lotka_volterra: (year, hare, lynx) rows forming an ObservationSet

and generates reproducible synthetic stand-ins for both.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import brentq
from scipy.special import expit

from core.errors import DataShapeError, SchemaError
from core.ode import LVParams, SolverGrid, solve_lv

logger = logging.getLogger(__name__)

LV_COLUMNS = ("year", "hare", "lynx")
SPECIES = ("hare", "lynx")

# Levels of the categorical predictors of the synthetic marketing dataset
SYNTHETIC_FACTORS: Dict[str, Tuple[str, ...]] = {
    "employees": ("e1", "e2", "e3", "e4"),
    "job": ("admin", "blue_collar", "other"),
    "contact": ("cellular", "telephone"),
    "month": ("spring", "summer", "autumn"),
    "poutcome": ("failure", "nonexistent", "success"),
}

RESPONSE_ALIASES = {"yes": 1, "no": 0, "1": 1, "0": 0, "true": 1, "false": 0}

# Coefficients of the synthetic design, in build_design_matrix column order
DEFAULT_SYNTHETIC_BETA = (0.0, 0.4, -0.3, 0.6, 0.2, -0.5, -0.8, 0.3, -0.2, 0.5, 1.2)


@dataclass(frozen=True, eq=False)
class ObservationSet:
    """
    Observed predator-prey counts

    Attributes:
        times: Observation times in years, strictly increasing (N,)
        counts: Positive counts, row 0 prey (hare), row 1 predator (lynx) (2, N)
    """
    times: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        counts = np.asarray(self.counts, dtype=float)
        if times.ndim != 1 or times.size < 2:
            raise DataShapeError(f"Need at least two observation times, got shape {times.shape}")
        if counts.shape != (2, times.size):
            raise DataShapeError(f"Counts must have shape (2, {times.size}), got {counts.shape}")
        if not np.all(np.diff(times) > 0):
            raise ValueError("Observation times must be strictly increasing")
        if not np.all(np.isfinite(counts)) or not np.all(counts > 0):
            raise ValueError("Counts must be finite and strictly positive")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "counts", counts)

    @property
    def n_obs(self) -> int:
        return self.times.size


@dataclass(frozen=True, eq=False)
class LogisticDataset:
    """Binary-response regression data with its expanded design"""
    frame: pd.DataFrame
    X: np.ndarray
    y: np.ndarray
    column_names: List[str]
    beta_true: Optional[np.ndarray] = None
    offset: float = 0.0

    @property
    def n_total(self) -> int:
        return self.X.shape[0]

    @property
    def n_zero(self) -> int:
        return int(np.sum(self.y == 0))


def _require_columns(frame: pd.DataFrame, columns: Sequence[str], path: str) -> None:
    missing = tuple(c for c in columns if c not in frame.columns)
    if missing:
        raise SchemaError(f"{path}: missing column(s) {', '.join(missing)}", missing=missing)


def build_design_matrix(frame: pd.DataFrame, factors: Sequence[str]) -> Tuple[np.ndarray, List[str]]:
    """
    Reference-cell dummy coding with intercept

    Each factor's levels are sorted; the first level is the reference and
    gets no column.

    Args:
        frame: Data with one column per factor
        factors: Factor column names, in design order

    Returns:
        Tuple of (design matrix (N, 1 + sum(levels - 1)), column names)
    """
    blocks = [np.ones((len(frame), 1))]
    names = ["intercept"]
    for factor in factors:
        levels = sorted(frame[factor].astype(str).unique())
        codes = pd.Categorical(frame[factor].astype(str), categories=levels)
        dummies = pd.get_dummies(codes, prefix=factor, drop_first=True, dtype=float)
        blocks.append(dummies.to_numpy())
        names.extend(dummies.columns.tolist())

    X = np.hstack(blocks)
    rank = int(np.linalg.matrix_rank(X))
    if rank < X.shape[1]:
        logger.warning(f"Design matrix has rank {rank} < {X.shape[1]} columns")
    else:
        logger.info(f"Design matrix: {X.shape[0]} rows, {X.shape[1]} columns, full rank")
    return X, names


def _parse_response(series: pd.Series, path: str) -> np.ndarray:
    values = series.astype(str).str.strip().str.lower().map(RESPONSE_ALIASES)
    if values.isna().any():
        bad = series[values.isna()].iloc[0]
        raise ValueError(f"{path}: response value '{bad}' is not binary")
    return values.to_numpy(dtype=int)


def load_csv_dataset(
    path,
    schema: str,
    response: str = "y",
    factors: Optional[Sequence[str]] = None,
):
    """
    Load a CSV dataset for one of the two observed-data targets

    Args:
        path: CSV file path
        schema: "logistic" or "lotka_volterra"
        response: Response column name (logistic only)
        factors: Predictor columns (logistic only, default: every other column)

    Returns:
        LogisticDataset or ObservationSet

    Raises:
        SchemaError: If a required column is missing
        ValueError: On non-numeric or nonpositive counts, or non-binary responses
    """
    path = str(path)
    frame = pd.read_csv(path, skipinitialspace=True)
    logger.info(f"Loaded {len(frame)} rows from {path}")

    if schema == "lotka_volterra":
        _require_columns(frame, LV_COLUMNS, path)
        numeric = frame[list(LV_COLUMNS)].apply(pd.to_numeric, errors="coerce")
        if numeric.isna().any().any():
            raise ValueError(f"{path}: non-numeric values in {list(LV_COLUMNS)}")
        if (numeric[["hare", "lynx"]] <= 0).any().any():
            raise ValueError(f"{path}: counts must be strictly positive")
        return ObservationSet(
            times=numeric["year"].to_numpy(dtype=float),
            counts=numeric[["hare", "lynx"]].to_numpy(dtype=float).T,
        )

    if schema == "logistic":
        factors = list(factors) if factors is not None else [c for c in frame.columns if c != response]
        _require_columns(frame, [response, *factors], path)
        y = _parse_response(frame[response], path)
        X, names = build_design_matrix(frame, factors)
        logger.info(f"Logistic data: N={y.size}, N0={int(np.sum(y == 0))}")
        return LogisticDataset(frame=frame, X=X, y=y, column_names=names)

    raise ValueError(f"Unknown dataset schema '{schema}', expected 'logistic' or 'lotka_volterra'")


def synthetic_design_size() -> int:
    """Number of coefficients of the synthetic marketing design"""
    return 1 + sum(len(levels) - 1 for levels in SYNTHETIC_FACTORS.values())


def generate_synthetic_logistic(
    n: int,
    zero_fraction: Optional[float],
    beta_true,
    seed: int,
) -> LogisticDataset:
    """
    Reproducible imbalanced binary dataset with known coefficients

    Factor levels are drawn uniformly. When zero_fraction is given, an
    intercept offset is solved for so that the expected fraction of zero
    responses matches it; otherwise responses follow the linear predictor
    unchanged (beta_true = 0 gives Bernoulli(0.5)).

    Args:
        n: Number of rows
        zero_fraction: Target expected share of zero responses, or None
        beta_true: Coefficients, one per design column (synthetic_design_size())
        seed: Seed of the generator

    Returns:
        LogisticDataset with the frame, design, responses and calibration offset
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if zero_fraction is not None and not 0 < zero_fraction < 1:
        raise ValueError(f"zero_fraction must lie in (0, 1), got {zero_fraction}")

    rng = np.random.default_rng(seed)
    frame = pd.DataFrame(
        {name: np.asarray(levels)[rng.integers(0, len(levels), size=n)] for name, levels in SYNTHETIC_FACTORS.items()}
    )
    X, names = build_design_matrix(frame, list(SYNTHETIC_FACTORS))
    beta = np.asarray(beta_true, dtype=float)
    if beta.shape != (X.shape[1],):
        raise DataShapeError(f"beta_true must have {X.shape[1]} entries, got shape {beta.shape}")

    eta = X @ beta
    offset = 0.0
    if zero_fraction is not None:
        target_rate = 1.0 - zero_fraction
        offset = brentq(lambda c: float(np.mean(expit(eta + c))) - target_rate, -50.0, 50.0, xtol=1e-12)

    y = (rng.random(n) < expit(eta + offset)).astype(int)
    frame["y"] = y
    logger.info(f"Synthetic logistic data: N={n}, zeros={int(np.sum(y == 0))}, offset={offset:.4f}")
    return LogisticDataset(frame=frame, X=X, y=y, column_names=names, beta_true=beta, offset=offset)


def generate_synthetic_lv(
    params: LVParams,
    y0: Tuple[float, float],
    sigma: Tuple[float, float],
    grid: SolverGrid,
    seed: int,
) -> ObservationSet:
    """
    Lognormal observations around an ODE solution

    log z_ji = log y_ji + sigma_j * eps_ji with eps standard normal.

    Args:
        params: True system rates
        y0: True initial populations
        sigma: Per-species log-scale noise SDs
        grid: Grid to solve on; its observation times become the data times
        seed: Seed of the noise generator

    Returns:
        ObservationSet
    """
    trajectory = solve_lv(params, y0, grid)
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(trajectory.shape) * np.asarray(sigma, dtype=float)
    counts = (trajectory * np.exp(noise)).T
    return ObservationSet(times=np.asarray(grid.observation_times), counts=counts)


def default_hare_lynx_path() -> Path:
    """Path of the bundled 1900-1920 hare/lynx table"""
    return Path(__file__).resolve().parent.parent / "data" / "hare_lynx.csv"

