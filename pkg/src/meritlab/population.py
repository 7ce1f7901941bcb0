"""Heterogeneous agent populations and multiplicative productivity.

Agents carry a per-year drift ``mu`` (skill) and a per-sqrt-year volatility
``sigma`` (luck exposure).  Both are sampled independently from lognormal
distributions parameterized by their arithmetic mean and standard deviation,
so a population is fully characterized by four numbers plus a count.

Productivity is modeled as a product of positive factors; with lognormal
factors the product is itself exactly lognormal.
"""

from __future__ import annotations

import math
from collections.abc import Iterator
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .stats import substream

__all__ = [
    "LognormalMoments",
    "PopulationSpec",
    "Agent",
    "Population",
    "FactorSpec",
    "LogspaceParams",
    "lognormal_from_moments",
    "sample_population",
    "shockley_productivity",
    "sample_shockley",
    "POPULATION_PRESETS",
]

_SKILL_KEY = 1
_LUCK_KEY = 2
_FACTOR_KEY = 8


@dataclass(frozen=True)
class LognormalMoments:
    """Arithmetic mean and standard deviation of a lognormal quantity.

    ``mean == 0`` is allowed only together with ``std_dev == 0``: a point
    mass at zero, used for pure-skill populations with no luck exposure.
    """

    mean: float
    std_dev: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.mean) and self.mean >= 0):
            raise ValueError(f"mean must be non-negative and finite, got {self.mean}")
        if not (math.isfinite(self.std_dev) and self.std_dev >= 0):
            raise ValueError(f"std_dev must be non-negative and finite, got {self.std_dev}")
        if self.mean == 0 and self.std_dev != 0:
            raise ValueError("mean == 0 requires std_dev == 0 (degenerate point mass)")


@dataclass(frozen=True)
class PopulationSpec:
    """Four moment hyper-parameters plus agent count.

    ``skill`` moments are per-year drift units; ``luck`` moments are
    per-sqrt-year volatility units.
    """

    skill: LognormalMoments
    luck: LognormalMoments
    n_agents: int

    def __post_init__(self) -> None:
        if self.n_agents < 1:
            raise ValueError(f"n_agents must be positive, got {self.n_agents}")


@dataclass(frozen=True)
class Agent:
    """One (mu, sigma) pair: drift is skill, volatility is luck exposure."""

    mu: float
    sigma: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.mu):
            raise ValueError(f"mu must be finite, got {self.mu}")
        if not (math.isfinite(self.sigma) and self.sigma >= 0):
            raise ValueError(f"sigma must be non-negative, got {self.sigma}")


@dataclass(frozen=True, eq=False)
class Population:
    """Array-backed sequence of agents (fast path for vectorized studies)."""

    mu: np.ndarray
    sigma: np.ndarray

    def __len__(self) -> int:
        return len(self.mu)

    def __getitem__(self, i: int) -> Agent:
        return Agent(float(self.mu[i]), float(self.sigma[i]))

    def __iter__(self) -> Iterator[Agent]:
        for i in range(len(self)):
            yield self[i]


@dataclass(frozen=True)
class FactorSpec:
    """Number of productivity factors and their common per-factor moments."""

    n_factors: int
    per_factor: LognormalMoments

    def __post_init__(self) -> None:
        if self.n_factors < 1:
            raise ValueError(f"n_factors must be >= 1, got {self.n_factors}")


class LogspaceParams(NamedTuple):
    location: float
    scale: float


def lognormal_from_moments(m: LognormalMoments) -> LogspaceParams:
    """Invert (mean, std_dev) into log-space (location, scale).

    ``scale**2 = ln(1 + std**2/mean**2)`` and
    ``location = ln(mean) - scale**2/2``, so that ``exp(N(location, scale**2))``
    has exactly the given arithmetic moments.
    """
    if m.mean <= 0:
        raise ValueError(f"log-space parameters require a positive mean, got {m.mean}")
    scale_sq = math.log1p((m.std_dev / m.mean) ** 2)
    location = math.log(m.mean) - scale_sq / 2.0
    return LogspaceParams(location, math.sqrt(scale_sq))


def _sample_lognormal(m: LognormalMoments, n: int, gen: np.random.Generator) -> np.ndarray:
    if m.std_dev == 0:
        # degenerate point mass (possibly at 0); skip drawing so the value is exact
        return np.full(n, m.mean)
    loc, scale = lognormal_from_moments(m)
    return gen.lognormal(loc, scale, n)


def sample_population(spec: PopulationSpec, seed: int) -> Population:
    """Sample ``n_agents`` independent (mu_i, sigma_i) pairs.

    Skill and luck use separate substreams of ``seed``, so they are
    independent by construction and the result is bit-reproducible.
    """
    mu = _sample_lognormal(spec.skill, spec.n_agents, substream(seed, _SKILL_KEY))
    sigma = _sample_lognormal(spec.luck, spec.n_agents, substream(seed, _LUCK_KEY))
    return Population(mu=mu, sigma=sigma)


def shockley_productivity(factors) -> float:
    """Productivity of one agent: the product of its positive factors."""
    f = np.asarray(factors, dtype=float)
    if f.ndim != 1 or len(f) == 0:
        raise ValueError("factors must be a non-empty 1-d sequence")
    if np.any(f <= 0) or not np.all(np.isfinite(f)):
        raise ValueError("all factors must be positive and finite")
    return float(np.prod(f))


def sample_shockley(spec: FactorSpec, n_samples: int, seed: int) -> np.ndarray:
    """Sample productivities as products of i.i.d. lognormal factors.

    The log of every sample is a sum of ``n_factors`` independent normals,
    so the output is exactly lognormal.
    """
    if n_samples < 1:
        raise ValueError(f"n_samples must be positive, got {n_samples}")
    gen = substream(seed, _FACTOR_KEY)
    if spec.per_factor.std_dev == 0:
        return np.full(n_samples, spec.per_factor.mean**spec.n_factors)
    loc, scale = lognormal_from_moments(spec.per_factor)
    log_factors = gen.normal(loc, scale, size=(n_samples, spec.n_factors))
    return np.exp(log_factors.sum(axis=1))


# Benchmark populations for the vetting studies.  These are reconstructions
# chosen so that (mean luck / mean skill)^2 is 1, 4, 1, 4 years and relative
# heterogeneity steps up from the first pair to the second; they are config
# defaults, not empirical estimates.
POPULATION_PRESETS: dict[str, PopulationSpec] = {
    "population-1": PopulationSpec(
        skill=LognormalMoments(0.10, 0.06), luck=LognormalMoments(0.10, 0.06), n_agents=100_000
    ),
    "population-2": PopulationSpec(
        skill=LognormalMoments(0.10, 0.06), luck=LognormalMoments(0.20, 0.12), n_agents=100_000
    ),
    "population-3": PopulationSpec(
        skill=LognormalMoments(0.10, 0.08), luck=LognormalMoments(0.10, 0.08), n_agents=100_000
    ),
    "population-4": PopulationSpec(
        skill=LognormalMoments(0.10, 0.08), luck=LognormalMoments(0.20, 0.16), n_agents=100_000
    ),
}
