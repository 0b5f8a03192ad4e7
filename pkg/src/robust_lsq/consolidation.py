"""Robust consolidation of per-batch coefficient estimates.

Given a pool of ``m`` estimates, the pivot is the estimate whose
``m_tilde``-th nearest neighbour (counting itself at distance zero) is
closest, with ``m_tilde = m // 2 + 1``. The dominating set is the
``m_tilde`` estimates nearest the pivot, and the consolidated estimate is
their geometric median. Because a majority of accurate estimates must
intersect any ``m_tilde``-subset, a minority of arbitrarily bad estimates
cannot pull the result away.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _backend
from .batch_model import as_coefficients
from .errors import ContractError

__all__ = [
    "EstimatePool",
    "DominatingSet",
    "MedianConfig",
    "majority_size",
    "estimate_distance",
    "distance_matrix",
    "pivot_batch",
    "pivot_radius",
    "dominating_set",
    "geometric_median",
    "median_objective",
    "consolidate",
]


def majority_size(m: int) -> int:
    return m // 2 + 1


@dataclass(frozen=True, eq=False)
class EstimatePool:
    """Age-ordered coefficient estimates keyed by strictly increasing batch id."""

    ids: tuple
    estimates: np.ndarray
    capacity: int

    def __post_init__(self):
        ids = tuple(int(i) for i in self.ids)
        est = np.array(self.estimates, dtype=np.float64, copy=True)
        if est.ndim == 1 and est.size == 0:
            est = est.reshape(0, 0)
        if est.ndim != 2 or est.shape[0] != len(ids):
            raise ContractError("need one coefficient row per batch id")
        if any(b <= a for a, b in zip(ids, ids[1:])):
            raise ContractError("batch ids must be strictly increasing")
        if int(self.capacity) < 1:
            raise ContractError("pool capacity must be positive")
        if len(ids) > int(self.capacity):
            raise ContractError(f"pool holds {len(ids)} estimates but capacity is {self.capacity}")
        if not np.all(np.isfinite(est)):
            raise ContractError("pool estimates must be finite")
        est.setflags(write=False)
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "estimates", est)
        object.__setattr__(self, "capacity", int(self.capacity))

    @classmethod
    def from_estimates(cls, estimates: Sequence, ids=None, capacity=None) -> "EstimatePool":
        est = np.array([as_coefficients(b) for b in estimates], dtype=np.float64)
        if est.ndim != 2:
            raise ContractError("all estimates must share one dimension")
        ids = tuple(range(len(est))) if ids is None else tuple(ids)
        return cls(ids, est, capacity or max(len(est), 1))

    def __len__(self):
        return len(self.ids)

    @property
    def p(self) -> int:
        return self.estimates.shape[1]

    def replaced(self, evict: int | None, new_id: int, beta) -> "EstimatePool":
        """New pool without position ``evict`` (if given) and with ``beta`` at the tail."""
        keep = [i for i in range(len(self)) if i != evict]
        beta = as_coefficients(beta, self.p)
        ids = tuple(self.ids[i] for i in keep) + (int(new_id),)
        est = np.vstack([self.estimates[keep], beta[None, :]])
        return EstimatePool(ids, est, self.capacity)


@dataclass(frozen=True)
class DominatingSet:
    members: tuple
    pivot: int


@dataclass(frozen=True)
class MedianConfig:
    max_iterations: int = 1000
    step_tolerance: float = 1e-10
    singularity_epsilon: float = 1e-12

    def __post_init__(self):
        if int(self.max_iterations) < 1 or not self.step_tolerance > 0 \
                or not self.singularity_epsilon > 0:
            raise ContractError("median solver settings must all be positive")


def estimate_distance(a, b) -> float:
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise ContractError(f"cannot compare estimates of length {a.size} and {b.size}")
    return float(np.linalg.norm(a - b))


def distance_matrix(points: np.ndarray) -> np.ndarray:
    """Pairwise Euclidean distances; exactly symmetric with a zero diagonal."""
    diff = points[:, None, :] - points[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def _rank_pool(pool: EstimatePool):
    if len(pool) == 0:
        raise ContractError("pool is empty")
    d = distance_matrix(pool.estimates)
    k = majority_size(len(pool))
    sigma = np.sort(d, axis=1)[:, k - 1]
    pivot = int(np.argmin(sigma))
    return d, k, pivot, sigma


def pivot_batch(pool: EstimatePool) -> int:
    """Pool position whose ``m_tilde``-th smallest distance is least (lowest position on ties)."""
    return _rank_pool(pool)[2]


def pivot_radius(pool: EstimatePool) -> float:
    """The pivot's ``m_tilde``-th smallest distance."""
    _, _, pivot, sigma = _rank_pool(pool)
    return float(sigma[pivot])


def dominating_set(pool: EstimatePool) -> DominatingSet:
    d, k, pivot, _ = _rank_pool(pool)
    nearest = np.argsort(d[pivot], kind="stable")[:k]
    return DominatingSet(tuple(sorted(int(i) for i in nearest)), pivot)


def median_objective(x, points) -> float:
    """Sum of Euclidean distances from ``x`` to each point."""
    diff = np.asarray(points, dtype=np.float64) - np.asarray(x, dtype=np.float64)
    return float(np.sqrt(np.einsum("ij,ij->i", diff, diff)).sum())


def geometric_median(points, cfg: MedianConfig | None = None) -> np.ndarray:
    """Minimiser of the summed Euclidean distance to ``points``.

    Weiszfeld iteration from the coordinate-wise mean. Two points return
    their midpoint. The answer is never worse than the mean or any input point.
    """
    cfg = cfg or MedianConfig()
    pts = np.array([np.asarray(b, dtype=np.float64).reshape(-1) for b in points])
    if pts.size == 0 or pts.ndim != 2:
        raise ContractError("geometric median needs a non-empty list of equal-length vectors")
    if len(pts) == 1:
        return as_coefficients(pts[0])
    mean = pts.mean(axis=0)
    if len(pts) == 2:
        return as_coefficients(mean)

    x, _, _ = _backend.kernels.weiszfeld(
        np.ascontiguousarray(pts), mean, int(cfg.max_iterations),
        float(cfg.step_tolerance), float(cfg.singularity_epsilon))
    best, best_obj = x, median_objective(x, pts)
    for cand in (mean, *pts):
        obj = median_objective(cand, pts)
        if obj < best_obj:
            best, best_obj = cand, obj
    return as_coefficients(best)


def consolidate(pool: EstimatePool, cfg: MedianConfig | None = None):
    """Geometric median over the pool's dominating set. Returns ``(beta, dominating)``."""
    dom = dominating_set(pool)
    beta = geometric_median(pool.estimates[list(dom.members)], cfg)
    return beta, dom
