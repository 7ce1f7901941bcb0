"""Centralized styling constants for all figure kinds."""

from matplotlib import cm

FIGSIZE_PANEL = (7.0, 9.0)
FIGSIZE_WIDE = (8.0, 5.0)

# one color per decile curve, decile 1 first
DECILE_COLORS = [cm.tab10(i) for i in range(10)]

# population benchmark: horizontal dotted black line
BENCHMARK_STYLE = dict(color="black", linestyle=":", linewidth=1.2, label="population")

# optimal-allocation step line
OPTIMAL_STYLE = dict(color="black", linewidth=2.2, drawstyle="steps-post", label="optimal allocation")

CURVE_STYLE = dict(marker="o", markersize=3.5, linewidth=1.3)

PANEL_LABELS = {"mean_skill": "skill", "rms_luck": "luck", "sharpe": "Sharpe ratio"}


def sequential_colors(n: int):
    """Colors for ordered curve families (vetting periods, observation counts)."""
    return [cm.viridis(x) for x in (i / max(n - 1, 1) for i in range(n))]
