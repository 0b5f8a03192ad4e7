"""Value types for mini-batches, coefficients and residuals.

A batch stores its design matrix with features on rows and samples on
columns (``p x n``), held in Fortran order so that each sample's features are
contiguous and restricting to a subset of samples is a cheap column gather.
All arrays handed out by these types are read-only.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ContractError

__all__ = [
    "MiniBatch",
    "ResidualVector",
    "GroundTruth",
    "as_coefficients",
    "index_set",
    "full_index_set",
    "predict",
    "residual_magnitudes",
    "restrict",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def as_coefficients(beta, p: int | None = None) -> np.ndarray:
    """Validate and return a read-only float64 coefficient vector."""
    b = np.array(beta, dtype=np.float64, copy=True).reshape(-1)
    if b.size == 0:
        raise ContractError("coefficient vector is empty")
    if not np.all(np.isfinite(b)):
        raise ContractError("coefficient vector has non-finite entries")
    if p is not None and b.size != p:
        raise ContractError(f"coefficient length {b.size} does not match p={p}")
    return _frozen(b)


def index_set(indices: Iterable[int], n: int) -> np.ndarray:
    """Sorted, duplicate-free array of sample positions in ``[0, n)``."""
    idx = np.asarray(list(indices) if not isinstance(indices, np.ndarray) else indices,
                     dtype=np.intp).reshape(-1)
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise ContractError(f"index out of range for batch of {n} samples")
    uniq = np.unique(idx)
    if uniq.size != idx.size:
        raise ContractError("index set contains duplicates")
    return _frozen(uniq)


def full_index_set(n: int) -> np.ndarray:
    return _frozen(np.arange(n, dtype=np.intp))


@dataclass(frozen=True, eq=False)
class MiniBatch:
    """One block of covariates ``x`` (p x n) with responses ``y`` (length n)."""

    x: np.ndarray
    y: np.ndarray
    id: int = 0

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64).reshape(-1)
        if x.ndim != 2:
            raise ContractError(f"x must be 2-D (p x n), got shape {x.shape}")
        if x.shape[1] != y.size:
            raise ContractError(
                f"x has {x.shape[1]} sample columns but y has length {y.size}")
        if x.shape[0] < 1:
            raise ContractError("batch needs at least one feature")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ContractError("batch contains NaN or Inf")
        if int(self.id) < 0:
            raise ContractError("batch id must be non-negative")
        object.__setattr__(self, "x", _frozen(np.array(x, order="F", copy=True)))
        object.__setattr__(self, "y", _frozen(y.copy()))
        object.__setattr__(self, "id", int(self.id))

    @property
    def p(self) -> int:
        return self.x.shape[0]

    @property
    def n(self) -> int:
        return self.x.shape[1]

    def __eq__(self, other):
        if not isinstance(other, MiniBatch):
            return NotImplemented
        return (self.id == other.id and self.x.shape == other.x.shape
                and np.array_equal(self.x, other.x) and np.array_equal(self.y, other.y))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class ResidualVector:
    """Absolute residuals ``r`` and the stable ascending permutation ``order``."""

    r: np.ndarray
    order: np.ndarray

    @classmethod
    def from_magnitudes(cls, r) -> "ResidualVector":
        r = np.abs(np.asarray(r, dtype=np.float64).reshape(-1))
        if not np.all(np.isfinite(r)):
            raise ContractError("residuals must be finite")
        order = np.argsort(r, kind="stable")
        return cls(_frozen(r), _frozen(order.astype(np.intp, copy=False)))

    @property
    def n(self) -> int:
        return self.r.size

    @property
    def sorted(self) -> np.ndarray:
        return self.r[self.order]


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """True coefficients plus each batch's uncorrupted set and corruption vector."""

    beta_star: np.ndarray
    uncorrupted_sets: Sequence[np.ndarray]
    corruption_vectors: Sequence[np.ndarray]

    def __post_init__(self):
        object.__setattr__(self, "beta_star", as_coefficients(self.beta_star))
        if len(self.uncorrupted_sets) != len(self.corruption_vectors):
            raise ContractError("one uncorrupted set per corruption vector required")
        zs, us = [], []
        for z, u in zip(self.uncorrupted_sets, self.corruption_vectors):
            u = _frozen(np.array(u, dtype=np.float64).reshape(-1))
            z = index_set(z, u.size)
            if not np.array_equal(z, np.flatnonzero(u == 0)):
                raise ContractError("uncorrupted set must be exactly the zero entries of u")
            zs.append(z)
            us.append(u)
        object.__setattr__(self, "uncorrupted_sets", tuple(zs))
        object.__setattr__(self, "corruption_vectors", tuple(us))

    def __eq__(self, other):
        if not isinstance(other, GroundTruth):
            return NotImplemented
        return (np.array_equal(self.beta_star, other.beta_star)
                and len(self.corruption_vectors) == len(other.corruption_vectors)
                and all(np.array_equal(a, b) for a, b in
                        zip(self.corruption_vectors, other.corruption_vectors)))

    __hash__ = None


def _check_beta(batch: MiniBatch, beta) -> np.ndarray:
    b = np.asarray(beta, dtype=np.float64).reshape(-1)
    if b.size != batch.p:
        raise ContractError(f"coefficient length {b.size} does not match batch p={batch.p}")
    return b


def predict(batch: MiniBatch, beta) -> np.ndarray:
    """Fitted responses ``X^T beta``."""
    return batch.x.T @ _check_beta(batch, beta)


def residual_magnitudes(batch: MiniBatch, beta) -> ResidualVector:
    return ResidualVector.from_magnitudes(batch.y - predict(batch, beta))


def restrict(batch: MiniBatch, z) -> MiniBatch:
    """Sub-batch keeping the sample columns listed in ``z`` (in ascending order).

    An empty ``z`` yields an ``n = 0`` batch; solvers reject it.
    """
    z = index_set(z, batch.n)
    if z.size == batch.n:
        return batch
    return MiniBatch(batch.x[:, z], batch.y[z], batch.id)
