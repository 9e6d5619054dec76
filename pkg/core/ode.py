"""
Lotka-Volterra Forward Model

Fixed-step integration of

    dy1/dt = alpha*y1 - beta*y1*y2
    dy2/dt = -gamma*y2 + delta*y1*y2

on a daily (fine) or monthly (coarse) grid. The integrator is pluggable:
classical RK4 by default, forward Euler for fidelity experiments. The step
loops run on Python floats; for a two-species state that is several times
faster than per-step numpy arithmetic.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Tuple

import numpy as np

from core.errors import SolverFailure

logger = logging.getLogger(__name__)

DAYS_PER_YEAR = 365
MONTHS_PER_YEAR = 12
ALIGNMENT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class LVParams:
    """Rates of the predator-prey system (per year, per year per count)"""
    alpha: float
    beta: float
    gamma: float
    delta: float

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "delta"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and nonnegative, got {value}")

    def equilibrium(self) -> Tuple[float, float]:
        """Interior fixed point (gamma/delta, alpha/beta)"""
        return self.gamma / self.delta, self.alpha / self.beta


@dataclass(frozen=True)
class SolverGrid:
    """
    Fixed-step time grid

    Observation times must lie in [t_start, t_end] on grid nodes.
    """
    t_start: float
    t_end: float
    step: float
    observation_times: Tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError(f"Grid step must be positive, got {self.step}")
        if not self.t_end > self.t_start:
            raise ValueError("t_end must be after t_start")
        object.__setattr__(self, "observation_times", tuple(float(t) for t in self.observation_times))
        for t in self.observation_times:
            if t < self.t_start - ALIGNMENT_TOLERANCE or t > self.t_end + ALIGNMENT_TOLERANCE:
                raise ValueError(f"Observation time {t} outside [{self.t_start}, {self.t_end}]")
            offset = (t - self.t_start) / self.step
            if abs(offset - round(offset)) > 1e-6:
                raise ValueError(f"Observation time {t} is not aligned with step {self.step}")

    @property
    def n_steps(self) -> int:
        return int(round((self.t_end - self.t_start) / self.step))

    def observation_indices(self) -> List[int]:
        """Grid node index of every observation time"""
        return [int(round((t - self.t_start) / self.step)) for t in self.observation_times]


def standard_grids(n_years: int, t_start: float = 0.0) -> Tuple[SolverGrid, SolverGrid]:
    """
    Daily (fine) and monthly (coarse) grids with annual observations

    Args:
        n_years: Span of the simulation in years
        t_start: Time of the first observation

    Returns:
        (fine, coarse) grids sharing n_years + 1 observation times
    """
    if n_years < 1:
        raise ValueError(f"n_years must be at least 1, got {n_years}")
    times = tuple(t_start + k for k in range(n_years + 1))
    t_end = t_start + n_years
    fine = SolverGrid(t_start, t_end, 1.0 / DAYS_PER_YEAR, times)
    coarse = SolverGrid(t_start, t_end, 1.0 / MONTHS_PER_YEAR, times)
    return fine, coarse


def _lv_rhs(y1: float, y2: float, a: float, b: float, g: float, d: float) -> Tuple[float, float]:
    return a * y1 - b * y1 * y2, -g * y2 + d * y1 * y2


def _rk4_step(y1, y2, h, a, b, g, d):
    k1a, k1b = _lv_rhs(y1, y2, a, b, g, d)
    k2a, k2b = _lv_rhs(y1 + 0.5 * h * k1a, y2 + 0.5 * h * k1b, a, b, g, d)
    k3a, k3b = _lv_rhs(y1 + 0.5 * h * k2a, y2 + 0.5 * h * k2b, a, b, g, d)
    k4a, k4b = _lv_rhs(y1 + h * k3a, y2 + h * k3b, a, b, g, d)
    return (
        y1 + h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a),
        y2 + h / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b),
    )


def _euler_step(y1, y2, h, a, b, g, d):
    f1, f2 = _lv_rhs(y1, y2, a, b, g, d)
    return y1 + h * f1, y2 + h * f2


INTEGRATORS: Dict[str, Callable] = {
    "rk4": _rk4_step,
    "euler": _euler_step,
}


def solve_lv(params: LVParams, y0: Tuple[float, float], grid: SolverGrid, method: str = "rk4") -> np.ndarray:
    """
    Integrate the Lotka-Volterra system and sample it at the observation times

    Args:
        params: System rates
        y0: Initial (prey, predator) populations at grid.t_start, both > 0
        grid: Time grid
        method: "rk4" or "euler"

    Returns:
        Array of shape (n_obs, 2) with (y1, y2) at each observation time

    Raises:
        SolverFailure: If a state becomes nonpositive or nonfinite
    """
    try:
        stepper = INTEGRATORS[method]
    except KeyError:
        raise ValueError(f"Unknown integrator '{method}', expected one of {sorted(INTEGRATORS)}")

    y1, y2 = float(y0[0]), float(y0[1])
    if not (y1 > 0 and y2 > 0 and math.isfinite(y1) and math.isfinite(y2)):
        raise ValueError(f"Initial populations must be positive and finite, got {y0}")

    a, b, g, d = params.alpha, params.beta, params.gamma, params.delta
    h = grid.step
    obs_idx = grid.observation_indices()
    out = np.empty((len(obs_idx), 2))

    # Observation indices need not be sorted; walk the grid once and record hits
    wanted: Dict[int, List[int]] = {}
    for row, idx in enumerate(obs_idx):
        wanted.setdefault(idx, []).append(row)
    last = max(obs_idx) if obs_idx else 0

    for row in wanted.get(0, []):
        out[row] = (y1, y2)

    for n in range(1, last + 1):
        y1, y2 = stepper(y1, y2, h, a, b, g, d)
        if not (y1 > 0.0 and y2 > 0.0) or not (math.isfinite(y1) and math.isfinite(y2)):
            raise SolverFailure(
                f"Trajectory left the positive orthant at t={grid.t_start + n * h:.4f}",
                time=grid.t_start + n * h,
            )
        rows = wanted.get(n)
        if rows:
            for row in rows:
                out[row] = (y1, y2)

    return out


def lv_conserved_quantity(y1, y2, params: LVParams):
    """V = delta*y1 - gamma*ln(y1) + beta*y2 - alpha*ln(y2), constant along exact trajectories"""
    y1 = np.asarray(y1, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    return params.delta * y1 - params.gamma * np.log(y1) + params.beta * y2 - params.alpha * np.log(y2)
