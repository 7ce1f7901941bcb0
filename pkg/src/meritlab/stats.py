"""Shared statistical primitives: seeded substreams, rank correlation, Gini.

Reproducibility contract
------------------------
Every stochastic routine in this package draws from a substream derived
from ``(master_seed, key...)`` via :func:`substream`.  Distinct keys give
statistically independent generators, and the draw order within one
substream is part of each caller's contract.  Because a substream is fully
determined by its key, parallel execution order can never change results.

Reserved top-level key roles (first key element after the master seed):

====  =========================================
key   used by
====  =========================================
1     population skill draws
2     population luck draws
3     vetting outcome draws (second key = grid slot)
4     out-of-sample holding-period draws
5     aggregator item qualities
6     aggregator session draws
7     growth simulators
8     multiplicative-productivity factor draws
9     per-repetition master-seed derivation (cli)
====  =========================================
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

__all__ = [
    "InsufficientDataError",
    "RngStream",
    "substream",
    "standard_normal",
    "spearman_rho",
    "gini",
]

_U64_MAX = 2**64 - 1


class InsufficientDataError(ValueError):
    """Raised when an estimator receives too few observations."""


def substream(master_seed: int, *key: int) -> np.random.Generator:
    """Return the deterministic generator for ``(master_seed, *key)``."""
    if not 0 <= master_seed <= _U64_MAX:
        raise ValueError(f"master_seed must be a 64-bit unsigned integer, got {master_seed}")
    return np.random.default_rng(np.random.SeedSequence([master_seed, *key]))


@dataclass(frozen=True)
class RngStream:
    """Value-type handle for one reproducible random substream.

    ``stream_id`` identifies the substream (agent, run, path, ...) under the
    shared ``master_seed``.  Streams are cheap, hashable, and safe to move
    across threads; all randomness is materialized by :meth:`generator`.
    """

    master_seed: int
    stream_id: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.master_seed <= _U64_MAX:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if not 0 <= self.stream_id <= _U64_MAX:
            raise ValueError("stream_id must be a 64-bit unsigned integer")

    def generator(self) -> np.random.Generator:
        return substream(self.master_seed, self.stream_id)


def standard_normal(stream: RngStream, size: int | None = None):
    """Draw from the stream's reproducible N(0, 1) sequence.

    With ``size=None`` returns the first draw as a float; with an integer
    returns draws at positions ``0..size-1`` as an array.  The same
    ``(master_seed, stream_id, position)`` always yields the same value.
    """
    gen = stream.generator()
    if size is None:
        return float(gen.standard_normal())
    return gen.standard_normal(size)


def spearman_rho(x, y) -> float:
    """Spearman rank correlation: Pearson correlation of average ranks."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or y.ndim != 1 or len(x) != len(y):
        raise ValueError(f"inputs must be equal-length 1-d sequences, got {x.shape} and {y.shape}")
    if len(x) < 2:
        raise ValueError("need at least 2 observations")
    rx = rankdata(x)
    ry = rankdata(y)
    if np.ptp(rx) == 0 or np.ptp(ry) == 0:
        raise ValueError("rank variance is zero (all values tied)")
    rx -= rx.mean()
    ry -= ry.mean()
    return float(np.dot(rx, ry) / np.sqrt(np.dot(rx, rx) * np.dot(ry, ry)))


def gini(values) -> float:
    """Gini coefficient: mean absolute difference over twice the mean.

    Uses the sorted-index formula ``(2*sum(i*x_(i)) / (n*sum(x)) - (n+1)/n``
    with 1-based ascending order statistics.  Values must be non-negative
    with a strictly positive total.
    """
    x = np.asarray(values, dtype=float)
    if x.ndim != 1 or len(x) == 0:
        raise ValueError("values must be a non-empty 1-d sequence")
    if np.any(x < 0):
        raise ValueError("values must be non-negative")
    total = x.sum()
    if total <= 0:
        raise ValueError("sum of values must be positive")
    n = len(x)
    xs = np.sort(x)
    i = np.arange(1, n + 1)
    # clamp: float cancellation can dip a hair below 0 for equal values
    return max(float(2.0 * np.dot(i, xs) / (n * total) - (n + 1) / n), 0.0)
