"""Decile vetting studies: rank agents by realized success, report true stats.

Agents are ranked either by a single terminal outcome (raw ranking) or by
the Sharpe ratio estimated from intermediate observations, then split into
deciles (1 = most successful).  Per-decile statistics are computed from the
agents' true parameters, which the ranking itself never sees: skill is the
arithmetic mean of ``mu_i``, luck the root-mean-square of ``sigma_i``, and
Sharpe their ratio.  The population benchmark is computed the same way over
all agents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from collections.abc import Sequence

import numpy as np

from .gbm import (
    VettingPeriod,
    batch_increments,
    batch_realized_stats,
    batch_terminal_log_outcomes,
)
from .population import Agent, Population, PopulationSpec, sample_population
from .stats import substream

__all__ = [
    "RankingStatistic",
    "DecileRow",
    "DecileReport",
    "SweepResult",
    "rank_and_decile",
    "decile_stats",
    "run_vetting_study",
    "vetting_sweep",
    "sharpe_observation_study",
]

_OUTCOME_KEY = 3
_HOLDOUT_KEY = 4
N_DECILES = 10


@dataclass(frozen=True)
class RankingStatistic:
    """How realized success is measured before ranking."""

    kind: str
    n_obs: int = 1

    def __post_init__(self) -> None:
        if self.kind == "raw_outcome":
            if self.n_obs != 1:
                raise ValueError("raw_outcome uses exactly one observation")
        elif self.kind == "realized_sharpe":
            if self.n_obs < 2:
                raise ValueError("realized_sharpe needs n_obs >= 2")
        else:
            raise ValueError(f"unknown ranking statistic {self.kind!r}")

    @classmethod
    def raw(cls) -> "RankingStatistic":
        return cls(kind="raw_outcome", n_obs=1)

    @classmethod
    def realized_sharpe(cls, n_obs: int) -> "RankingStatistic":
        return cls(kind="realized_sharpe", n_obs=n_obs)


@dataclass(frozen=True)
class DecileRow:
    decile: int  # 1..10; 0 marks the population benchmark
    mean_skill: float
    rms_luck: float
    sharpe: float
    n_agents: int


@dataclass(frozen=True)
class DecileReport:
    vetting: VettingPeriod
    statistic: RankingStatistic
    per_decile: tuple[DecileRow, ...]
    benchmark: DecileRow


@dataclass(frozen=True)
class SweepResult:
    spec: PopulationSpec
    reports: tuple[DecileReport, ...]
    optimal_decile: dict[VettingPeriod, int]


def rank_and_decile(values, n_groups: int) -> np.ndarray:
    """Assign each index to a group 1..n_groups by descending value.

    The largest value lands in group 1; ties are broken by original index
    ascending, and group sizes differ by at most one (earlier groups take
    the extras).
    """
    values = np.asarray(values, dtype=float)
    if n_groups < 1:
        raise ValueError(f"n_groups must be positive, got {n_groups}")
    if len(values) < n_groups:
        raise ValueError(f"need at least {n_groups} values, got {len(values)}")
    order = np.argsort(-values, kind="stable")
    assignment = np.empty(len(values), dtype=np.int64)
    for group, idx in enumerate(np.array_split(np.arange(len(values)), n_groups), start=1):
        assignment[order[idx]] = group
    return assignment


def _as_arrays(agents) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(agents, Population):
        return agents.mu, agents.sigma
    mu = np.array([a.mu for a in agents], dtype=float)
    sigma = np.array([a.sigma for a in agents], dtype=float)
    return mu, sigma


def _stats_row(decile: int, mu: np.ndarray, sigma: np.ndarray) -> DecileRow:
    mean_skill = float(mu.mean())
    rms_luck = float(np.sqrt(np.mean(sigma**2)))
    if rms_luck > 0:
        sharpe = mean_skill / rms_luck
    else:
        sharpe = math.inf if mean_skill >= 0 else -math.inf
    return DecileRow(decile=decile, mean_skill=mean_skill, rms_luck=rms_luck,
                     sharpe=sharpe, n_agents=len(mu))


def decile_stats(agents, assignment, n_groups: int = N_DECILES) -> tuple[tuple[DecileRow, ...], DecileRow]:
    """Per-group true statistics plus the whole-population benchmark row."""
    mu, sigma = _as_arrays(agents)
    assignment = np.asarray(assignment)
    if len(assignment) != len(mu):
        raise ValueError("assignment must cover every agent")
    rows = []
    for g in range(1, n_groups + 1):
        mask = assignment == g
        if not mask.any():
            raise ValueError(f"group {g} is empty")
        rows.append(_stats_row(g, mu[mask], sigma[mask]))
    benchmark = _stats_row(0, mu, sigma)
    return tuple(rows), benchmark


def _success_measure(
    pop: Population, period: VettingPeriod, statistic: RankingStatistic, seed: int, slot: int
) -> np.ndarray:
    gen = substream(seed, _OUTCOME_KEY, slot)
    if statistic.kind == "raw_outcome":
        z = gen.standard_normal(len(pop))
        return batch_terminal_log_outcomes(pop.mu, pop.sigma, period.years, z)
    inc = batch_increments(pop.mu, pop.sigma, period.years, statistic.n_obs, gen)
    _, _, sharpe_hat = batch_realized_stats(inc, period.years / statistic.n_obs)
    return sharpe_hat


def _study(pop, period, statistic, seed, slot) -> DecileReport:
    success = _success_measure(pop, period, statistic, seed, slot)
    assignment = rank_and_decile(success, N_DECILES)
    rows, benchmark = decile_stats(pop, assignment)
    return DecileReport(vetting=period, statistic=statistic, per_decile=rows, benchmark=benchmark)


def run_vetting_study(
    spec: PopulationSpec,
    period: VettingPeriod,
    statistic: RankingStatistic,
    seed: int,
) -> DecileReport:
    """Sample a population, vet it over ``period``, and report decile stats.

    Ranking uses only the realized success measure; the true (mu_i, sigma_i)
    enter solely through the reported statistics.
    """
    if spec.n_agents < N_DECILES:
        raise ValueError(f"decile analysis needs at least {N_DECILES} agents")
    pop = sample_population(spec, seed)
    return _study(pop, period, statistic, seed, slot=0)


def _optimal_decile(report: DecileReport) -> int:
    sharpes = [row.sharpe for row in report.per_decile]
    return int(np.argmax(sharpes)) + 1  # argmax takes the lowest index on ties


def _holdout_optimal(pop: Population, assignment: np.ndarray, seed: int, slot: int) -> int:
    # Realized Sharpe of each decile over a fresh one-year holding period.
    z = substream(seed, _HOLDOUT_KEY, slot).standard_normal(len(pop))
    outcome = batch_terminal_log_outcomes(pop.mu, pop.sigma, 1.0, z)
    best_group, best_sharpe = 1, -math.inf
    for g in range(1, N_DECILES + 1):
        sel = outcome[assignment == g]
        spread = sel.std(ddof=1)
        sharpe = sel.mean() / spread if spread > 0 else math.inf
        if sharpe > best_sharpe:
            best_group, best_sharpe = g, sharpe
    return best_group


def vetting_sweep(
    spec: PopulationSpec,
    periods: Sequence[VettingPeriod],
    statistic: RankingStatistic,
    seed: int,
    *,
    optimal_by: str = "true_sharpe",
    resample_population: bool = False,
) -> SweepResult:
    """Run one vetting study per period and locate the winning decile.

    By default the same sampled population is reused across periods (the
    same agents observed longer); ``resample_population=True`` redraws it
    per period instead.  ``optimal_by`` selects how the winning decile is
    scored: ``"true_sharpe"`` takes the argmax of the reported per-decile
    Sharpe, ``"out_of_sample"`` simulates a one-year holding period and
    ranks deciles by its realized Sharpe.
    """
    if len(periods) == 0:
        raise ValueError("periods must be non-empty")
    if optimal_by not in ("true_sharpe", "out_of_sample"):
        raise ValueError(f"unknown optimal_by {optimal_by!r}")
    if spec.n_agents < N_DECILES:
        raise ValueError(f"decile analysis needs at least {N_DECILES} agents")
    pop = sample_population(spec, seed)
    reports = []
    optimal: dict[VettingPeriod, int] = {}
    for slot, period in enumerate(periods):
        if resample_population and slot > 0:
            pop = sample_population(spec, seed + slot)
        success = _success_measure(pop, period, statistic, seed, slot)
        assignment = rank_and_decile(success, N_DECILES)
        rows, benchmark = decile_stats(pop, assignment)
        report = DecileReport(vetting=period, statistic=statistic, per_decile=rows, benchmark=benchmark)
        reports.append(report)
        if optimal_by == "true_sharpe":
            optimal[period] = _optimal_decile(report)
        else:
            optimal[period] = _holdout_optimal(pop, assignment, seed, slot)
    return SweepResult(spec=spec, reports=tuple(reports), optimal_decile=optimal)


def sharpe_observation_study(
    spec: PopulationSpec,
    period: VettingPeriod,
    n_obs_list: Sequence[int],
    seed: int,
) -> list[DecileReport]:
    """Sharpe-ranked reports for a grid of intermediate-observation counts.

    All reports share one population sample; report ``k`` uses the outcome
    substream slot ``k``, so a single-entry grid reproduces
    :func:`run_vetting_study` exactly.
    """
    if len(n_obs_list) == 0:
        raise ValueError("n_obs_list must be non-empty")
    if spec.n_agents < N_DECILES:
        raise ValueError(f"decile analysis needs at least {N_DECILES} agents")
    pop = sample_population(spec, seed)
    return [
        _study(pop, period, RankingStatistic.realized_sharpe(n_obs), seed, slot)
        for slot, n_obs in enumerate(n_obs_list)
    ]
