"""
Dense Linear Algebra

Small-dimension helpers used by the samplers: Cholesky factorization,
rank-one factor updates and multivariate normal sampling/log-density.
Matrices are plain float64 numpy arrays; factors are lower triangular.
"""

import logging
import math
from typing import Optional

import numpy as np
from scipy.linalg import solve_triangular

from core.errors import DataShapeError, NotPositiveDefiniteError

logger = logging.getLogger(__name__)

SYMMETRY_TOLERANCE = 1e-12
LOG_2PI = math.log(2.0 * math.pi)


def as_vector(x, dim: Optional[int] = None) -> np.ndarray:
    """
    Convert input to a 1-D float64 array

    Args:
        x: Sequence or array of reals
        dim: Expected dimension (optional)

    Returns:
        1-D numpy array

    Raises:
        DataShapeError: If the input is not 1-D or has the wrong length
    """
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise DataShapeError(f"Expected a non-empty vector, got shape {v.shape}")
    if dim is not None and v.size != dim:
        raise DataShapeError(f"Expected a vector of length {dim}, got {v.size}")
    return v


def symmetrize(C) -> np.ndarray:
    """
    Return (C + C^T) / 2 after checking C is square and nearly symmetric

    Args:
        C: Square matrix

    Returns:
        Exactly symmetric copy of C

    Raises:
        DataShapeError: If C is not square
        ValueError: If the relative asymmetry exceeds SYMMETRY_TOLERANCE
    """
    A = np.asarray(C, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise DataShapeError(f"Expected a non-empty square matrix, got shape {A.shape}")

    scale = np.linalg.norm(A)
    if scale > 0 and np.linalg.norm(A - A.T) > SYMMETRY_TOLERANCE * scale:
        raise ValueError("Matrix is not symmetric within tolerance")
    return 0.5 * (A + A.T)


def cholesky(C) -> np.ndarray:
    """
    Lower-triangular Cholesky factor R with R R^T = C

    Args:
        C: Symmetric positive definite matrix

    Returns:
        Lower-triangular factor with strictly positive diagonal

    Raises:
        NotPositiveDefiniteError: If a pivot is not strictly positive
    """
    A = symmetrize(C)
    if not np.all(np.isfinite(A)):
        raise NotPositiveDefiniteError("Matrix has nonfinite entries")
    try:
        R = np.linalg.cholesky(A)
    except np.linalg.LinAlgError as e:
        raise NotPositiveDefiniteError(f"Matrix is not positive definite ({e}); add epsilon jitter")

    if not np.all(np.diag(R) > 0.0):
        raise NotPositiveDefiniteError("Cholesky factor has a zero pivot; add epsilon jitter")
    return R


def rank_one_update(R, v) -> np.ndarray:
    """
    Cholesky factor of R R^T + v v^T in O(d^2)

    Uses the classical rotation-based update. The input factor is not
    modified.

    Args:
        R: Lower-triangular Cholesky factor
        v: Update vector

    Returns:
        Updated lower-triangular factor
    """
    L = np.array(R, dtype=float, copy=True)
    _update_in_place(L, as_vector(v, L.shape[0]).copy())
    return L


def _update_in_place(L: np.ndarray, x: np.ndarray) -> None:
    """Rotation-based rank-one update of L; overwrites both L and x"""
    d = L.shape[0]
    for k in range(d):
        if x[k] == 0.0:
            continue
        r = math.hypot(L[k, k], x[k])
        c = r / L[k, k]
        s = x[k] / L[k, k]
        L[k, k] = r
        if k + 1 < d:
            L[k + 1:, k] = (L[k + 1:, k] + s * x[k + 1:]) / c
            x[k + 1:] = c * x[k + 1:] - s * L[k + 1:, k]


def add_to_diagonal(R, delta: float) -> np.ndarray:
    """
    Cholesky factor of R R^T + delta * I via d rank-one updates

    Args:
        R: Lower-triangular Cholesky factor
        delta: Nonnegative diagonal increment

    Returns:
        Updated lower-triangular factor
    """
    if delta < 0:
        raise ValueError("Only nonnegative diagonal increments are supported")
    L = np.array(R, dtype=float, copy=True)
    if delta == 0.0:
        return L

    root = math.sqrt(delta)
    for i in range(L.shape[0]):
        e = np.zeros(L.shape[0])
        e[i] = root
        _update_in_place(L, e)
    return L


def mvn_sample(mean, R, rng: np.random.Generator) -> np.ndarray:
    """
    Draw mean + R z with z standard normal

    Consumes exactly d standard normal draws from rng, in index order.

    Args:
        mean: Mean vector
        R: Lower-triangular factor of the covariance
        rng: numpy Generator

    Returns:
        Sample vector
    """
    mu = np.asarray(mean, dtype=float)
    z = rng.standard_normal(mu.shape[0])
    return mu + np.asarray(R) @ z


def log_mvn_density_chol(x, mean, R) -> float:
    """Gaussian log-density given the Cholesky factor of the covariance"""
    diff = np.asarray(x, dtype=float) - np.asarray(mean, dtype=float)
    w = solve_triangular(R, diff, lower=True, check_finite=False)
    log_det = 2.0 * float(np.sum(np.log(np.diag(R))))
    return -0.5 * (diff.shape[0] * LOG_2PI + log_det + float(w @ w))


def log_mvn_density(x, mean, C) -> float:
    """
    Exact Gaussian log-density including the normalizing constant

    Args:
        x: Evaluation point
        mean: Mean vector
        C: Covariance matrix

    Returns:
        log N(x; mean, C)

    Raises:
        NotPositiveDefiniteError: If C cannot be factorized
    """
    x = as_vector(x)
    mean = as_vector(mean, x.size)
    R = cholesky(C)
    if R.shape[0] != x.size:
        raise DataShapeError(f"Covariance of size {R.shape[0]} does not match dimension {x.size}")
    return log_mvn_density_chol(x, mean, R)


def mahalanobis_squared(x, mean, R) -> float:
    """(x - mean)^T C^{-1} (x - mean) for C = R R^T"""
    diff = np.asarray(x, dtype=float) - np.asarray(mean, dtype=float)
    w = solve_triangular(R, diff, lower=True, check_finite=False)
    return float(w @ w)
