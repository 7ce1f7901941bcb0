"""Monte Carlo laboratory for skill-vs-luck ranking studies."""

from .aggregator import (
    AggregatorConfig,
    ItemState,
    RunOutcome,
    meritocracy_metrics,
    run_compartmentalized,
    run_pooled,
)
from .gbm import (
    PERIOD_YEARS,
    Path,
    RealizedStats,
    VettingPeriod,
    characteristic_time,
    estimate_realized_stats,
    simulate_path,
    terminal_log_outcome,
)
from .growth import (
    GibratConfig,
    SimonConfig,
    concentration_metrics,
    hill_tail_exponent,
    simulate_gibrat,
    simulate_simon,
    tail_index_stability,
)
from .population import (
    POPULATION_PRESETS,
    Agent,
    FactorSpec,
    LognormalMoments,
    Population,
    PopulationSpec,
    lognormal_from_moments,
    sample_population,
    sample_shockley,
    shockley_productivity,
)
from .stats import InsufficientDataError, RngStream, gini, spearman_rho, standard_normal, substream
from .vetting import (
    DecileReport,
    DecileRow,
    RankingStatistic,
    SweepResult,
    decile_stats,
    rank_and_decile,
    run_vetting_study,
    sharpe_observation_study,
    vetting_sweep,
)

__version__ = "0.1.0"
