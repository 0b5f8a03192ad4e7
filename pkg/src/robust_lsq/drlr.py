"""Distributed robust regression: independent HRR fits, then robust consolidation."""
from __future__ import annotations

import logging
import os
import time
from concurrent.futures import Executor, ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .batch_model import MiniBatch
from .consolidation import (
    DominatingSet,
    EstimatePool,
    MedianConfig,
    consolidate,
    majority_size,
)
from .errors import ContractError, NumericalError
from .hrr import HrrConfig, HrrResult, hrr_fit

__all__ = ["DrlrReport", "default_threads", "fit_batches", "drlr_fit"]

log = logging.getLogger(__name__)

THREADS_ENV = "ROBUST_LSQ_THREADS"


def default_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring non-integer %s=%r", THREADS_ENV, env)
    return os.cpu_count() or 1


@dataclass(frozen=True, eq=False)
class DrlrReport:
    consolidated: np.ndarray
    pool: EstimatePool
    dominating: DominatingSet
    per_batch: list
    timings: dict = field(default_factory=dict)

    @property
    def failed(self) -> list:
        return [i for i, r in enumerate(self.per_batch) if r is None]


def _check_batches(batches: Sequence[MiniBatch]) -> int:
    if len(batches) == 0:
        raise ContractError("need at least one batch")
    p = batches[0].p
    for b in batches:
        if b.p != p:
            raise ContractError(f"batch {b.id} has p={b.p}, expected {p}")
    return p


def _safe_fit(batch, cfg):
    try:
        return hrr_fit(batch, cfg)
    except NumericalError as exc:
        log.warning("HRR failed on batch %d: %s", batch.id, exc)
        return exc


def fit_batches(batches, hrr_cfg=None, threads=None, executor: Executor | None = None):
    """HRR on every batch; result slot ``i`` always belongs to ``batches[i]``.

    Failed fits come back as the :class:`NumericalError` they raised.
    """
    hrr_cfg = hrr_cfg or HrrConfig()
    threads = threads or default_threads()
    fn = lambda b: _safe_fit(b, hrr_cfg)  # noqa: E731
    if executor is not None:
        return list(executor.map(fn, batches))
    if threads == 1 or len(batches) == 1:
        return [fn(b) for b in batches]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, batches))


def drlr_fit(batches: Sequence[MiniBatch], hrr_cfg: HrrConfig | None = None,
             med_cfg: MedianConfig | None = None, threads: int | None = None,
             executor: Executor | None = None) -> DrlrReport:
    """Fit each batch with HRR, then consolidate over the dominating set.

    Pool ids are stream positions ``0..m-1``. A batch whose fit fails
    numerically is left out of the pool as long as a majority of batches
    survive; otherwise :class:`NumericalError` is raised naming the failures.
    """
    _check_batches(batches)
    t0 = time.perf_counter()
    results = fit_batches(batches, hrr_cfg, threads, executor)
    t1 = time.perf_counter()

    failed = [i for i, r in enumerate(results) if isinstance(r, NumericalError)]
    if failed:
        if len(batches) - len(failed) < majority_size(len(batches)):
            ids = [batches[i].id for i in failed]
            raise NumericalError(
                f"HRR failed on batches {ids}; too few usable estimates remain",
                batch_id=ids[0])
        results = [None if isinstance(r, NumericalError) else r for r in results]
    kept = [i for i, r in enumerate(results) if r is not None]
    pool = EstimatePool(tuple(kept), np.array([results[i].beta for i in kept]), len(batches))
    beta, dom = consolidate(pool, med_cfg)
    t2 = time.perf_counter()
    return DrlrReport(beta, pool, dom, results,
                      {"fit_seconds": t1 - t0, "consolidate_seconds": t2 - t1})
