"""Single-batch heuristic robust regression (HRR).

The uncorrupted set of a batch is never given a fixed size. Its size is
re-estimated on every iteration from the shape of the sorted residual
magnitudes. The function :func:`heuristic_size` picks the largest prefix of
sorted residuals whose tail does not grow faster than a reference residual
allows, and :func:`hard_threshold` keeps exactly that many samples.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import linalg

from . import _backend
from .batch_model import (
    MiniBatch,
    ResidualVector,
    as_coefficients,
    full_index_set,
    index_set,
    residual_magnitudes,
)
from .errors import CapabilityError, ContractError, NumericalError

__all__ = [
    "HrrConfig",
    "HrrResult",
    "SubsetFit",
    "tau_o",
    "heuristic_size",
    "hard_threshold",
    "least_squares_subset",
    "hrr_fit",
    "ssc_sss_constants",
]

SSC_MAX_SAMPLES = 25


@dataclass(frozen=True)
class HrrConfig:
    """Stopping rule and conditioning guard for :func:`hrr_fit`.

    ``ridge_fallback=None`` means ``1e-10 * trace(G) / p`` for the Gram
    matrix ``G`` being factorised.
    """

    tolerance_eps: float = 1e-6
    max_iterations: int = 100
    ridge_fallback: float | None = None

    def __post_init__(self):
        if not self.tolerance_eps > 0:
            raise ContractError("tolerance_eps must be positive")
        if int(self.max_iterations) < 1:
            raise ContractError("max_iterations must be at least 1")
        if self.ridge_fallback is not None and not self.ridge_fallback >= 0:
            raise ContractError("ridge_fallback must be non-negative")


@dataclass(frozen=True, eq=False)
class HrrResult:
    beta: np.ndarray
    uncorrupted: np.ndarray
    iterations: int
    converged: bool
    regularized: bool = False


class SubsetFit(NamedTuple):
    beta: np.ndarray
    regularized: bool


def _sorted_residuals(r: ResidualVector) -> np.ndarray:
    if r.n < 2:
        raise ContractError(f"thresholding needs at least 2 residuals, got {r.n}")
    return np.ascontiguousarray(r.sorted)


def tau_o(r: ResidualVector) -> int:
    """Reference position (1-based) for the size estimate.

    Over ``tau`` in ``[ceil(n/2) + 1, n]``, picks the position whose squared
    sorted residual is closest to the mean square of the ``tau - ceil(n/2)``
    smallest residuals. Ties go to the smallest ``tau``.
    """
    return _backend.kernels.threshold_sizes(_sorted_residuals(r))[0]


def heuristic_size(r: ResidualVector) -> int:
    """Largest ``tau`` with ``r_(tau) <= 2 * tau * r_(tau_o) / tau_o``.

    The result always lies in ``[ceil(n/2), n]``.
    """
    return _backend.kernels.threshold_sizes(_sorted_residuals(r))[1]


def hard_threshold(r: ResidualVector) -> np.ndarray:
    """Indices of the ``heuristic_size(r)`` smallest residuals, sorted."""
    h = heuristic_size(r)
    return index_set(r.order[:h], r.n)


def least_squares_subset(batch: MiniBatch, z, ridge_fallback: float | None = None) -> SubsetFit:
    """Solve the normal equations restricted to samples ``z`` by Cholesky.

    A numerically singular Gram matrix is retried once with a ridge term on
    the diagonal; the returned ``regularized`` flag records that.
    """
    z = np.asarray(z, dtype=np.intp)
    if z.size == 0:
        raise ContractError("least squares on an empty sample set")
    xz = batch.x[:, z]
    gram = xz @ xz.T
    rhs = xz @ batch.y[z]
    p = gram.shape[0]
    beta = _cholesky_solve(gram, rhs)
    if beta is not None:
        return SubsetFit(as_coefficients(beta), False)
    ridge = ridge_fallback
    if ridge is None:
        ridge = 1e-10 * np.trace(gram) / p
    if ridge > 0:
        beta = _cholesky_solve(gram + ridge * np.eye(p), rhs)
        if beta is not None:
            return SubsetFit(as_coefficients(beta), True)
    raise NumericalError(
        f"Gram matrix of batch {batch.id} is singular on a {z.size}-sample subset",
        batch_id=batch.id,
    )


def _cholesky_solve(gram, rhs):
    try:
        c, low = linalg.cho_factor(gram, lower=True, check_finite=False)
    except linalg.LinAlgError:
        return None
    diag = np.abs(np.diag(c))
    # squared pivots are the Gram eigen-scale; reject below machine precision
    if diag.min() ** 2 <= np.finfo(float).eps * gram.shape[0] * diag.max() ** 2:
        return None
    beta = linalg.cho_solve((c, low), rhs, check_finite=False)
    if not np.all(np.isfinite(beta)):
        return None
    return beta


def hrr_fit(batch: MiniBatch, cfg: HrrConfig | None = None) -> HrrResult:
    """Alternate subset least squares and heuristic hard thresholding.

    Starts from the full sample set. Stops at an exact fixed point of the
    selected set, or when the norm of the selected residuals changes by less
    than ``tolerance_eps * n`` between iterations.
    """
    cfg = cfg or HrrConfig()
    n, p = batch.n, batch.p
    if n < max(2, p):
        raise ContractError(f"batch {batch.id} has n={n} samples but needs at least max(2, p={p})")

    z = full_index_set(n)
    prev_norm = None
    regularized = False
    beta = None
    for it in range(1, int(cfg.max_iterations) + 1):
        fit = least_squares_subset(batch, z, cfg.ridge_fallback)
        beta = fit.beta
        regularized = regularized or fit.regularized
        r = residual_magnitudes(batch, beta)
        z_next = hard_threshold(r)
        norm = float(np.linalg.norm(r.r[z_next]))
        if np.array_equal(z_next, z):
            return HrrResult(beta, z_next, it, True, regularized)
        if prev_norm is not None and abs(norm - prev_norm) < cfg.tolerance_eps * n:
            return HrrResult(beta, z_next, it, True, regularized)
        z, prev_norm = z_next, norm
    return HrrResult(beta, z_next, int(cfg.max_iterations), False, regularized)


def ssc_sss_constants(batch: MiniBatch, subset_size: int, chunk: int = 8192) -> tuple[float, float]:
    """Extreme subset Gram eigenvalues by exhaustive enumeration.

    Returns the minimum of ``lambda_min(X_S X_S^T)`` and the maximum of
    ``lambda_max(X_S X_S^T)`` over every column subset ``S`` of the given
    size. Only tractable for small batches.
    """
    n = batch.n
    if n > SSC_MAX_SAMPLES:
        raise CapabilityError(
            f"exhaustive subset enumeration is limited to n <= {SSC_MAX_SAMPLES}, got n={n}")
    if not 1 <= subset_size <= n:
        raise ContractError(f"subset_size must be in [1, {n}], got {subset_size}")
    # per-sample outer products; a subset Gram is the sum over its members
    outer = np.einsum("in,jn->nij", batch.x, batch.x)
    lo, hi = math.inf, -math.inf
    combos = itertools.combinations(range(n), subset_size)
    while True:
        block = np.array(list(itertools.islice(combos, chunk)), dtype=np.intp)
        if block.size == 0:
            break
        grams = outer[block].sum(axis=1)
        eig = np.linalg.eigvalsh(grams)
        lo = min(lo, float(eig[:, 0].min()))
        hi = max(hi, float(eig[:, -1].max()))
    return lo, hi
