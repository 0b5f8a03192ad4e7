"""Evaluation metrics and the non-robust averaging baselines."""
from __future__ import annotations

import numpy as np

from .batch_model import as_coefficients, full_index_set
from .consolidation import estimate_distance
from .errors import ContractError
from .hrr import hrr_fit, least_squares_subset

__all__ = ["l2_error", "mae", "baseline_ols_avg", "baseline_hrr_avg"]


def l2_error(estimate, truth) -> float:
    """Euclidean coefficient recovery error."""
    return estimate_distance(estimate, truth)


def mae(pred, truth) -> float:
    pred = np.asarray(pred, dtype=np.float64).reshape(-1)
    truth = np.asarray(truth, dtype=np.float64).reshape(-1)
    if pred.size == 0:
        raise ContractError("mean absolute error of an empty vector")
    if pred.shape != truth.shape:
        raise ContractError(f"length mismatch: {pred.size} predictions vs {truth.size} targets")
    return float(np.mean(np.abs(pred - truth)))


def baseline_ols_avg(batches) -> np.ndarray:
    """Mean of per-batch ordinary least-squares fits (no robustness at all)."""
    fits = []
    for b in batches:
        if b.n < b.p:
            raise ContractError(f"batch {b.id}: OLS needs n >= p (n={b.n}, p={b.p})")
        fits.append(least_squares_subset(b, full_index_set(b.n), ridge_fallback=0.0).beta)
    return as_coefficients(np.mean(fits, axis=0))


def baseline_hrr_avg(batches, hrr_cfg=None) -> np.ndarray:
    """Mean of per-batch HRR fits.

    Robust inside each batch but not across batches: one batch that is
    mostly corrupted drags the mean arbitrarily far.
    """
    return as_coefficients(np.mean([hrr_fit(b, hrr_cfg).beta for b in batches], axis=0))
