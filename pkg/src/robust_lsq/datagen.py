"""Synthetic corrupted regression data.

Every random stream is a Philox counter-based generator keyed by
``SeedSequence(seed, spawn_key=(stream, ...))``:

* stream 0 - ground-truth coefficients
* stream 1 - per-batch corruption counts / heavy-batch placement
* stream (2, i) - covariates, noise and corruption of batch ``i``
* stream 3 - :func:`inject_corruption`

Batch ``i`` depends only on ``(seed, i)`` and the counts, so generation order
never changes the data.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .batch_model import GroundTruth, MiniBatch
from .errors import ConfigError

__all__ = [
    "Layout",
    "SynthSpec",
    "rng_for",
    "gen_ground_truth",
    "corruption_counts",
    "gen_batches",
    "generate",
    "inject_corruption",
]


def rng_for(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=key)))


@dataclass(frozen=True)
class Layout:
    """How the corruption budget is spread over batches.

    ``uniform``: random per-batch ratios that share the total budget.
    ``heavy``: ``k`` randomly placed batches at ``heavy_ratio``, the rest at
    ``light_ratio``.
    """

    kind: str = "uniform"
    k: int = 0
    heavy_ratio: float = 0.9
    light_ratio: float = 0.1

    def __post_init__(self):
        if self.kind not in ("uniform", "heavy"):
            raise ConfigError(f"unknown corruption layout {self.kind!r}")
        if self.kind == "heavy":
            if self.k < 0:
                raise ConfigError("heavy batch count must be non-negative")
            for r in (self.heavy_ratio, self.light_ratio):
                if not 0.0 <= r <= 1.0:
                    raise ConfigError(f"corruption ratio {r} outside [0, 1]")

    @classmethod
    def parse(cls, text: str) -> "Layout":
        """``uniform`` or ``heavy:K:HEAVY:LIGHT`` (e.g. ``heavy:8:0.9:0.1``)."""
        parts = text.strip().split(":")
        if parts[0] == "uniform" and len(parts) == 1:
            return cls()
        if parts[0] == "heavy" and len(parts) == 4:
            try:
                return cls("heavy", int(parts[1]), float(parts[2]), float(parts[3]))
            except ValueError as exc:
                raise ConfigError(f"bad layout {text!r}: {exc}") from None
        raise ConfigError(f"bad layout {text!r}; expected 'uniform' or 'heavy:K:HEAVY:LIGHT'")

    def __str__(self):
        if self.kind == "uniform":
            return "uniform"
        return f"heavy:{self.k}:{self.heavy_ratio:g}:{self.light_ratio:g}"


@dataclass(frozen=True)
class SynthSpec:
    p: int
    n: int
    m: int
    gamma: float = 0.0
    sigma: float = 0.1
    layout: Layout = Layout()
    seed: int = 0

    def __post_init__(self):
        if min(self.p, self.n, self.m) < 1:
            raise ConfigError("p, n and m must be positive")
        if not 0.0 <= self.gamma < 0.5:
            raise ConfigError(f"total corruption ratio must be in [0, 0.5), got {self.gamma}")
        if not self.sigma >= 0:
            raise ConfigError("dense-noise sigma must be non-negative")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ConfigError("seed must fit in an unsigned 64-bit integer")
        if isinstance(self.layout, str):
            object.__setattr__(self, "layout", Layout.parse(self.layout))
        if self.layout.kind == "heavy" and self.layout.k > self.m:
            raise ConfigError(f"{self.layout.k} heavy batches requested but m={self.m}")

    @property
    def budget(self) -> int:
        return int(round(self.gamma * self.m * self.n))


def gen_ground_truth(spec: SynthSpec) -> np.ndarray:
    """Unit-norm coefficient vector ``g / ||g||`` with ``g`` standard normal."""
    g = rng_for(spec.seed, 0).standard_normal(spec.p)
    return g / np.linalg.norm(g)


def _largest_remainder(raw: np.ndarray, total: int) -> np.ndarray:
    base = np.floor(raw).astype(np.int64)
    short = total - int(base.sum())
    if short > 0:
        frac = raw - base
        # stable: equal remainders go to the lower batch index
        order = np.argsort(-frac, kind="stable")
        base[order[:short]] += 1
    return base


def corruption_counts(spec: SynthSpec) -> np.ndarray:
    """Number of corrupted samples in each batch."""
    m, n, budget = spec.m, spec.n, spec.budget
    rng = rng_for(spec.seed, 1)
    if spec.layout.kind == "heavy":
        lay = spec.layout
        counts = np.full(m, math.floor(lay.light_ratio * n), dtype=np.int64)
        heavy = rng.choice(m, size=lay.k, replace=False)
        counts[heavy] = math.floor(lay.heavy_ratio * n)
        if counts.sum() > budget:
            raise ConfigError(
                f"layout {lay} needs {int(counts.sum())} corrupted samples, "
                f"above the budget round(gamma*m*n) = {budget}")
        return counts

    if budget == 0:
        return np.zeros(m, dtype=np.int64)
    w = rng.uniform(0.0, 1.0, size=m)
    if not w.sum() > 0:
        w = np.ones(m)
    # proportional share, capped at n per batch with the excess redistributed
    raw = np.zeros(m)
    free = np.ones(m, dtype=bool)
    left = float(budget)
    while left > 1e-9 and free.any():
        share = left * w * free / (w * free).sum()
        raw = raw + share
        over = raw > n
        left = float((raw[over] - n).sum())
        raw[over] = n
        free &= ~over
    return _largest_remainder(raw, budget)


def _gen_batch(spec: SynthSpec, beta_star: np.ndarray, i: int, count: int):
    rng = rng_for(spec.seed, 2, i)
    x = rng.standard_normal((spec.n, spec.p)).T
    noise = rng.standard_normal(spec.n) * spec.sigma
    y_star = x.T @ beta_star + noise
    u = np.zeros(spec.n)
    if count:
        pos = np.sort(rng.choice(spec.n, size=int(count), replace=False))
        bound = 5.0 * np.max(np.abs(y_star))
        vals = rng.uniform(-bound, bound, size=pos.size)
        while bound > 0 and np.any(vals == 0.0):
            zero = vals == 0.0
            vals[zero] = rng.uniform(-bound, bound, size=int(zero.sum()))
        u[pos] = vals
    return MiniBatch(x, y_star + u, i), np.flatnonzero(u == 0), u


def gen_batches(spec: SynthSpec, beta_star=None, threads: int = 1):
    """Generate ``spec.m`` batches. Returns ``(batches, GroundTruth)``."""
    if beta_star is None:
        beta_star = gen_ground_truth(spec)
    elif isinstance(beta_star, GroundTruth):
        beta_star = beta_star.beta_star
    beta_star = np.asarray(beta_star, dtype=np.float64)
    counts = corruption_counts(spec)
    args = [(spec, beta_star, i, int(c)) for i, c in enumerate(counts)]
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            out = list(ex.map(lambda a: _gen_batch(*a), args))
    else:
        out = [_gen_batch(*a) for a in args]
    batches = [b for b, _, _ in out]
    truth = GroundTruth(beta_star, [z for _, z, _ in out], [u for _, _, u in out])
    return batches, truth


def generate(spec: SynthSpec, threads: int = 1):
    return gen_batches(spec, gen_ground_truth(spec), threads)


def inject_corruption(y, ratio: float, seed: int):
    """Perturb ``floor(ratio * n)`` random entries by ``U(-|y_i|/2, |y_i|/2)``.

    Returns ``(corrupted_copy, sorted_positions)``.
    """
    if not 0.0 <= ratio < 1.0:
        raise ConfigError(f"injection ratio must be in [0, 1), got {ratio}")
    y = np.array(y, dtype=np.float64, copy=True).reshape(-1)
    k = math.floor(ratio * y.size)
    rng = rng_for(seed, 3)
    pos = np.sort(rng.choice(y.size, size=k, replace=False)) if k else np.zeros(0, np.intp)
    half = 0.5 * np.abs(y[pos])
    y[pos] += rng.uniform(-half, half)
    return y, pos
