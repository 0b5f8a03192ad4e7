"""Online robust regression over a bounded pool of recent batch estimates.

Each new batch is fitted with HRR. The oldest pool member outside the
current dominating set is evicted, the new estimate is appended, and the pool
is re-consolidated. Dominating-set members are never evicted, so an
adversarial estimate that never joins the dominating set ages out first.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

from .batch_model import MiniBatch
from .consolidation import DominatingSet, EstimatePool, MedianConfig, consolidate
from .drlr import drlr_fit
from .errors import ContractError
from .hrr import HrrConfig, hrr_fit

__all__ = ["OrlrState", "orlr_init", "orlr_update", "orlr_push", "eviction_position", "orlr_stream"]


@dataclass(frozen=True, eq=False)
class OrlrState:
    pool: EstimatePool
    dominating: DominatingSet
    next_batch_id: int
    hrr_cfg: HrrConfig = field(default_factory=HrrConfig)
    med_cfg: MedianConfig = field(default_factory=MedianConfig)

    @property
    def capacity(self) -> int:
        return self.pool.capacity


def orlr_init(batches, capacity: int | None = None, hrr_cfg: HrrConfig | None = None,
              med_cfg: MedianConfig | None = None, threads: int | None = None):
    """Seed the online state from a distributed fit of the first batches.

    ``capacity`` defaults to ``len(batches)``. Returns ``(beta, state)``.
    """
    if len(batches) == 0:
        raise ContractError("orlr_init needs at least one batch")
    capacity = len(batches) if capacity is None else int(capacity)
    if len(batches) > capacity:
        raise ContractError(f"{len(batches)} initial batches exceed pool capacity {capacity}")
    hrr_cfg = hrr_cfg or HrrConfig()
    med_cfg = med_cfg or MedianConfig()
    report = drlr_fit(batches, hrr_cfg, med_cfg, threads=threads)
    pool = EstimatePool(report.pool.ids, report.pool.estimates, capacity)
    state = OrlrState(pool, report.dominating, len(batches), hrr_cfg, med_cfg)
    return report.consolidated, state


def eviction_position(state: OrlrState) -> int | None:
    """Pool position to drop before the next append, or ``None`` while filling.

    The oldest member outside the dominating set. When the dominating set
    covers the whole full pool (capacity 1 or 2), the oldest member overall.
    """
    if len(state.pool) < state.capacity:
        return None
    outside = [i for i in range(len(state.pool)) if i not in state.dominating.members]
    return min(outside) if outside else 0


def orlr_push(state: OrlrState, beta):
    """Insert an already-fitted estimate; returns ``(consolidated, new_state)``."""
    evict = eviction_position(state)
    pool = state.pool.replaced(evict, state.next_batch_id, beta)
    consolidated, dom = consolidate(pool, state.med_cfg)
    return consolidated, replace(state, pool=pool, dominating=dom,
                                 next_batch_id=state.next_batch_id + 1)


def orlr_update(state: OrlrState, new_batch: MiniBatch):
    """Fit ``new_batch`` with HRR and fold it into the pool."""
    if new_batch.p != state.pool.p:
        raise ContractError(f"batch {new_batch.id} has p={new_batch.p}, state expects {state.pool.p}")
    return orlr_push(state, hrr_fit(new_batch, state.hrr_cfg).beta)


def orlr_stream(batches, capacity: int, hrr_cfg=None, med_cfg=None, threads=None):
    """Initialise on the first ``capacity`` batches and update with the rest.

    Returns ``(final_beta, final_state)``.
    """
    capacity = max(1, int(capacity))
    head, tail = list(batches[:capacity]), list(batches[capacity:])
    beta, state = orlr_init(head, capacity, hrr_cfg, med_cfg, threads)
    for b in tail:
        beta, state = orlr_update(state, b)
    return beta, state
