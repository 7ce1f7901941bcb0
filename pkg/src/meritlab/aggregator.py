"""Compartmentalized content-ranking simulator with a pooled baseline.

Synthetic items carry a latent lognormal quality that the ranking never
observes directly.  Each user session views one item drawn with probability
proportional to ``(score + 1) ** gamma`` inside the session's compartment
(cumulative-advantage exposure; ``gamma = 0`` is unbiased), then up-votes it
with probability ``logistic(beta * (ln q - median ln q))``.  Sessions are
dealt round-robin across compartments, so a K-compartment run consumes
exactly the same session budget as the pooled baseline.

At each vetting boundary, and always at the end, per-compartment scores are
ranked (ties get average ranks), the aggregate score of an item is the
negated mean of its ranks across compartments, and every compartment is
reset to that consensus ordering.  Meritocracy is summarized by the rank
correlation between latent quality and aggregate score, plus concentration
metrics of the attention each item received.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .population import LognormalMoments, lognormal_from_moments
from .stats import gini, spearman_rho, substream

__all__ = [
    "AggregatorConfig",
    "ItemState",
    "RunOutcome",
    "run_pooled",
    "run_compartmentalized",
    "meritocracy_metrics",
]

_QUALITY_KEY = 5
_SESSION_KEY = 6


@dataclass(frozen=True)
class AggregatorConfig:
    n_items: int = 50
    n_compartments: int = 16
    n_sessions: int = 12_000
    quality: LognormalMoments = LognormalMoments(1.0, 1.0)
    exposure_exponent: float = 1.0  # gamma; 0 = unbiased exposure
    vote_noise: float = 1.0  # beta; larger = sharper quality discrimination
    vetting_sessions: int = 0  # 0 = aggregate once at the end

    def __post_init__(self) -> None:
        if self.n_items < 2:
            raise ValueError(f"n_items must be >= 2, got {self.n_items}")
        if self.n_compartments < 1:
            raise ValueError(f"n_compartments must be >= 1, got {self.n_compartments}")
        if self.n_sessions < 1:
            raise ValueError(f"n_sessions must be >= 1, got {self.n_sessions}")
        if not (math.isfinite(self.exposure_exponent) and self.exposure_exponent >= 0):
            raise ValueError(f"exposure_exponent must be >= 0, got {self.exposure_exponent}")
        if not (math.isfinite(self.vote_noise) and self.vote_noise > 0):
            raise ValueError(f"vote_noise must be positive, got {self.vote_noise}")
        if not 0 <= self.vetting_sessions <= self.n_sessions:
            raise ValueError("vetting_sessions must be between 0 and n_sessions")


@dataclass(frozen=True)
class ItemState:
    item_id: int
    quality: float
    per_compartment_score: tuple[int, ...]
    aggregate_score: float


@dataclass(frozen=True)
class RunOutcome:
    variant: str
    final_ranking: tuple[int, ...]  # item ids, best first
    spearman_quality_rank: float
    gini_attention: float
    top1_share: float
    items: tuple[ItemState, ...]
    config: AggregatorConfig
    seed: int


def _aggregate(scores: np.ndarray) -> np.ndarray:
    # negated mean of per-compartment average-tie ranks; higher = better
    ranks = np.stack([rankdata(-scores[c]) for c in range(scores.shape[0])])
    return -ranks.mean(axis=0)


def _consensus_baseline(aggregate: np.ndarray, n_items: int) -> np.ndarray:
    order = np.argsort(-aggregate, kind="stable")
    baseline = np.empty(n_items, dtype=np.int64)
    baseline[order] = n_items - np.arange(n_items)
    return baseline


def _top_share(attention: np.ndarray, fraction: float = 0.01) -> float:
    k = max(1, int(math.ceil(fraction * len(attention))))
    desc = np.sort(attention)[::-1]
    return float(desc[:k].sum() / attention.sum())


def _run(config: AggregatorConfig, n_compartments: int, seed: int, variant: str) -> RunOutcome:
    n = config.n_items
    loc, scale = lognormal_from_moments(config.quality)
    quality = substream(seed, _QUALITY_KEY).lognormal(loc, scale, n)
    ln_q = np.log(quality)
    p_vote = 1.0 / (1.0 + np.exp(-config.vote_noise * (ln_q - np.median(ln_q))))

    gamma = config.exposure_exponent
    scores = np.zeros((n_compartments, n), dtype=np.int64)
    attention = np.zeros(n, dtype=np.int64)
    draws = substream(seed, _SESSION_KEY).random((config.n_sessions, 2))

    for s in range(config.n_sessions):
        comp = scores[s % n_compartments]
        if gamma == 0.0:
            item = int(draws[s, 0] * n)
        else:
            w = (comp + 1.0) ** gamma if gamma != 1.0 else comp + 1.0
            cw = np.cumsum(w)
            item = int(np.searchsorted(cw, draws[s, 0] * cw[-1], side="right"))
        attention[item] += 1
        if draws[s, 1] < p_vote[item]:
            comp[item] += 1
        boundary = config.vetting_sessions
        if boundary and (s + 1) % boundary == 0 and (s + 1) < config.n_sessions:
            scores[:] = _consensus_baseline(_aggregate(scores), n)

    aggregate = _aggregate(scores)
    final_ranking = tuple(int(i) for i in np.argsort(-aggregate, kind="stable"))
    try:
        rho = spearman_rho(quality, aggregate)
    except ValueError:
        rho = 0.0  # fully tied aggregate carries no association
    items = tuple(
        ItemState(
            item_id=i,
            quality=float(quality[i]),
            per_compartment_score=tuple(int(v) for v in scores[:, i]),
            aggregate_score=float(aggregate[i]),
        )
        for i in range(n)
    )
    return RunOutcome(
        variant=variant,
        final_ranking=final_ranking,
        spearman_quality_rank=rho,
        gini_attention=gini(attention),
        top1_share=_top_share(attention),
        items=items,
        config=config,
        seed=seed,
    )


def run_pooled(config: AggregatorConfig, seed: int) -> RunOutcome:
    """Single-pool baseline: same dynamics with one compartment."""
    return _run(config, 1, seed, "pooled")


def run_compartmentalized(config: AggregatorConfig, seed: int) -> RunOutcome:
    """Split sessions round-robin across K compartments, aggregate by rank."""
    if config.n_compartments > config.n_sessions:
        raise ValueError("more compartments than sessions would leave compartments empty")
    return _run(config, config.n_compartments, seed, "compartmentalized")


def meritocracy_metrics(quality, final_scores, attention_counts) -> dict:
    """Spearman(quality, score), attention Gini, and top-1% attention share."""
    quality = np.asarray(quality, dtype=float)
    final_scores = np.asarray(final_scores, dtype=float)
    attention = np.asarray(attention_counts)
    if not (len(quality) == len(final_scores) == len(attention)):
        raise ValueError("quality, final_scores and attention_counts must have equal lengths")
    if len(quality) < 2:
        raise ValueError("need at least 2 items")
    return {
        "spearman": spearman_rho(quality, final_scores),
        "gini_attention": gini(attention),
        "top1_share": _top_share(attention),
    }
