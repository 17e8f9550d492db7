"""Seed derivation, a deterministic work pool and binomial confidence intervals.

Every random draw in an experiment comes from a generator seeded by
``derive_seed(master_seed, trial_index, role)``. The derived seed is the
first 64 bits of ``numpy.random.SeedSequence([master_seed, trial_index,
crc32(role)])``, so trial ``t`` never depends on how many other trials run
or on which thread runs it.
"""

from __future__ import annotations

import os
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import binomtest

__all__ = [
    "derive_seed",
    "trial_rng",
    "worker_count",
    "parallel_map",
    "wilson_interval",
    "RateEstimate",
    "THREADS_ENV",
]

THREADS_ENV = "GABORCS_THREADS"

_MASK64 = (1 << 64) - 1


def _role_code(role: str) -> int:
    return zlib.crc32(role.encode("utf-8"))


def derive_seed(master_seed: int, trial_index: int, role: str = "") -> int:
    """Stable 64-bit seed for one ``(master_seed, trial_index, role)`` triple."""
    ss = np.random.SeedSequence([int(master_seed) & _MASK64, int(trial_index), _role_code(role)])
    lo, hi = (int(w) for w in ss.generate_state(2, dtype=np.uint32))
    return (hi << 32) | lo


def trial_rng(master_seed: int, trial_index: int, role: str = "") -> np.random.Generator:
    return np.random.default_rng(derive_seed(master_seed, trial_index, role))


def worker_count(threads: int | None = None) -> int:
    """Pool size: explicit argument, else ``$GABORCS_THREADS``, else CPU count."""
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        threads = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(threads))


def parallel_map(fn, items, threads: int | None = None) -> list:
    """``[fn(item) for item in items]`` evaluated on a thread pool, order kept."""
    items = list(items)
    workers = min(worker_count(threads), max(1, len(items)))
    if workers == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        return 0.0, 1.0
    ci = binomtest(int(successes), int(trials)).proportion_ci(
        confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


@dataclass(frozen=True)
class RateEstimate:
    """Monte-Carlo event rate with its 95% Wilson interval."""

    events: int
    trials: int
    wilson_lo: float
    wilson_hi: float

    @classmethod
    def from_counts(cls, events: int, trials: int) -> "RateEstimate":
        lo, hi = wilson_interval(events, trials)
        return cls(int(events), int(trials), lo, hi)

    @property
    def rate(self) -> float:
        return self.events / self.trials

    def __float__(self) -> float:
        return self.rate
