"""Geometric Brownian motion success engine.

An agent's log-outcome over a horizon ``T`` decomposes into a deterministic
skill term ``(mu - sigma**2/2) * T`` and a luck term ``z * sigma * sqrt(T)``
with ``z`` standard normal.  This module samples terminal outcomes and full
paths, recovers (mu, sigma, Sharpe) estimates from observed increments, and
computes the characteristic horizon ``(sigma/mu)**2`` at which the two terms
contribute equally.

Start levels are normalized to 1 (log-level 0); outcomes are scale-free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .population import Agent
from .stats import InsufficientDataError, RngStream, substream

__all__ = [
    "PERIOD_YEARS",
    "VettingPeriod",
    "Path",
    "RealizedStats",
    "terminal_log_outcome",
    "simulate_path",
    "characteristic_time",
    "estimate_realized_stats",
    "batch_terminal_log_outcomes",
    "batch_increments",
    "batch_realized_stats",
]

# Financial day-count convention for the named vetting periods.  Mutable on
# purpose: callers may override the mapping before constructing periods.
PERIOD_YEARS: dict[str, float] = {
    "1D": 1.0 / 252.0,
    "1W": 1.0 / 52.0,
    "1M": 1.0 / 12.0,
    "1Q": 0.25,
    "1H": 0.5,
    "1Y": 1.0,
    "2Y": 2.0,
    "4Y": 4.0,
}


@dataclass(frozen=True)
class VettingPeriod:
    """Observation window before agents are ranked, in years."""

    label: str
    years: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.years) and self.years > 0):
            raise ValueError(f"years must be positive, got {self.years}")
        if self.label != "custom":
            expected = PERIOD_YEARS.get(self.label)
            if expected is None:
                raise ValueError(f"unknown period label {self.label!r}")
            if expected != self.years:
                raise ValueError(
                    f"label {self.label!r} maps to {expected} years, got {self.years}"
                )

    @classmethod
    def from_label(cls, label: str) -> "VettingPeriod":
        if label not in PERIOD_YEARS:
            raise ValueError(f"unknown period label {label!r}; expected one of {sorted(PERIOD_YEARS)}")
        return cls(label=label, years=PERIOD_YEARS[label])

    @classmethod
    def custom(cls, years: float) -> "VettingPeriod":
        return cls(label="custom", years=float(years))


@dataclass(frozen=True, eq=False)
class Path:
    """Uniformly sampled log-levels of one agent, starting at 0."""

    agent: Agent
    years: float
    log_levels: np.ndarray

    def __post_init__(self) -> None:
        if not (math.isfinite(self.years) and self.years > 0):
            raise ValueError(f"years must be positive, got {self.years}")
        if self.log_levels.ndim != 1 or len(self.log_levels) < 2:
            raise ValueError("log_levels must hold at least the start and one observation")
        if self.log_levels[0] != 0.0:
            raise ValueError("log_levels must start at 0 (normalized start level)")

    @property
    def n_obs(self) -> int:
        return len(self.log_levels) - 1

    @property
    def dt(self) -> float:
        return self.years / self.n_obs

    def increments(self) -> np.ndarray:
        return np.diff(self.log_levels)


@dataclass(frozen=True)
class RealizedStats:
    """Drift/volatility/Sharpe estimates recovered from one path."""

    mu_hat: float
    sigma_hat: float
    sharpe_hat: float
    n_obs: int
    degenerate: bool = False


def batch_terminal_log_outcomes(mu, sigma, years: float, z):
    """Vectorized skill-plus-luck decomposition of terminal log-outcomes."""
    if years <= 0:
        raise ValueError(f"years must be positive, got {years}")
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    z = np.asarray(z, dtype=float)
    return (mu - sigma**2 / 2.0) * years + z * sigma * math.sqrt(years)


def terminal_log_outcome(agent: Agent, years: float, z: float) -> float:
    """Terminal log-outcome for one agent given its standard-normal draw."""
    return float(batch_terminal_log_outcomes(agent.mu, agent.sigma, years, z))


def batch_increments(mu, sigma, years: float, n_obs: int, gen: np.random.Generator) -> np.ndarray:
    """Log-increment matrix of shape (n_agents, n_obs) for uniform sampling."""
    if years <= 0:
        raise ValueError(f"years must be positive, got {years}")
    if n_obs < 1:
        raise ValueError(f"n_obs must be >= 1, got {n_obs}")
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    sigma = np.atleast_1d(np.asarray(sigma, dtype=float))
    dt = years / n_obs
    z = gen.standard_normal((len(mu), n_obs))
    return (mu - sigma**2 / 2.0)[:, None] * dt + (sigma * math.sqrt(dt))[:, None] * z


def simulate_path(agent: Agent, years: float, n_obs: int, seed: int | RngStream) -> Path:
    """Simulate one path with ``n_obs`` uniformly spaced observations."""
    gen = seed.generator() if isinstance(seed, RngStream) else substream(seed)
    inc = batch_increments(agent.mu, agent.sigma, years, n_obs, gen)[0]
    log_levels = np.concatenate([[0.0], np.cumsum(inc)])
    return Path(agent=agent, years=years, log_levels=log_levels)


def characteristic_time(mu: float, sigma: float) -> float:
    """Horizon ``(sigma/mu)**2`` at which skill and luck contribute equally."""
    if not (math.isfinite(mu) and mu > 0):
        raise ValueError(f"mu must be positive, got {mu}")
    if not (math.isfinite(sigma) and sigma > 0):
        raise ValueError(f"sigma must be positive, got {sigma}")
    return (sigma / mu) ** 2


def batch_realized_stats(increments: np.ndarray, dt: float):
    """Per-row (mu_hat, sigma_hat, sharpe_hat) arrays from an increment matrix.

    ``sigma_hat`` is the n-1 sample std of increments rescaled by ``sqrt(dt)``;
    ``mu_hat`` adds back ``sigma_hat**2/2`` so it estimates the drift itself.
    Rows with identical increments get ``sigma_hat = 0`` and a signed-infinity
    Sharpe sentinel.
    """
    increments = np.asarray(increments, dtype=float)
    if increments.ndim != 2 or increments.shape[1] < 2:
        raise InsufficientDataError("need at least 2 increments per path")
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    sigma_hat = increments.std(axis=1, ddof=1) / math.sqrt(dt)
    mu_hat = increments.mean(axis=1) / dt + sigma_hat**2 / 2.0
    with np.errstate(divide="ignore"):
        sharpe_hat = np.where(
            sigma_hat > 0,
            mu_hat / np.where(sigma_hat > 0, sigma_hat, 1.0),
            np.where(mu_hat >= 0, np.inf, -np.inf),
        )
    return mu_hat, sigma_hat, sharpe_hat


def estimate_realized_stats(path: Path) -> RealizedStats:
    """Estimate (mu, sigma, Sharpe) from one path's increments."""
    if path.n_obs < 2:
        raise InsufficientDataError(
            f"need at least 2 observations to estimate volatility, got {path.n_obs}"
        )
    mu_hat, sigma_hat, sharpe_hat = batch_realized_stats(path.increments()[None, :], path.dt)
    return RealizedStats(
        mu_hat=float(mu_hat[0]),
        sigma_hat=float(sigma_hat[0]),
        sharpe_hat=float(sharpe_hat[0]),
        n_obs=path.n_obs,
        degenerate=bool(sigma_hat[0] == 0.0),
    )
