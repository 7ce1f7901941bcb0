"""Render meritlab CSV outputs into publication-style figures.

Standalone batch renderer: ``render --kind fig9 --in deciles.csv --in
optimal.csv --out fig9.png``.  Inputs are never modified and re-rendering a
spec is idempotent.  Every kind validates the CSV schema up front and fails
with the name of the first missing column.

Expected schemas (the meritlab CLI contracts):

=====================  =====================================================
kind                   input columns
=====================  =====================================================
a1-panel, a2-panel,    population,statistic,n_obs,vetting_label,
fig9 (first input)     vetting_years,decile,mean_skill,rms_luck,sharpe,n_agents
fig9 (second input)    population,statistic,n_obs,vetting_label,
                       vetting_years,optimal_decile
growth-tail            run,item_id,size
aggregator-compare     variant,K,seed,spearman,gini_attention,top1_share
=====================  =====================================================
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from . import styles

__all__ = ["FigureSpec", "SchemaError", "render", "main"]

KINDS = ("a1-panel", "a2-panel", "fig9", "growth-tail", "aggregator-compare")

DECILE_COLUMNS = [
    "population", "statistic", "n_obs", "vetting_label", "vetting_years",
    "decile", "mean_skill", "rms_luck", "sharpe", "n_agents",
]
OPTIMAL_COLUMNS = [
    "population", "statistic", "n_obs", "vetting_label", "vetting_years", "optimal_decile",
]
GROWTH_COLUMNS = ["run", "item_id", "size"]
AGGREGATOR_COLUMNS = ["variant", "K", "seed", "spearman", "gini_attention", "top1_share"]

METRICS = ("mean_skill", "rms_luck", "sharpe")


class SchemaError(ValueError):
    """Input CSV does not match the expected meritlab schema."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: tuple[Path, ...]
    output: Path

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; expected one of {KINDS}")
        if not self.inputs:
            raise ValueError("at least one input CSV is required")


def load_table(path: Path, required: list[str]) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path)
    except pd.errors.EmptyDataError:
        raise SchemaError(f"{path}: empty CSV") from None
    for column in required:
        if column not in frame.columns:
            raise SchemaError(f"{path}: missing column '{column}'")
    if len(frame) == 0:
        raise SchemaError(f"{path}: no data rows")
    return frame


def _period_label(label: str, years: float) -> str:
    return label if label != "custom" else f"{years:g}Y"


# ---------------------------------------------------------------------------
# data preparation (pure, testable)

def prepare_decile_panel(frame: pd.DataFrame, family: str) -> dict:
    """Group decile curves by ``family`` column ('vetting_years' or 'n_obs').

    Returns per-family-value curves for each metric plus the population
    benchmark heights (taken from the decile=0 rows).
    """
    body = frame[frame["decile"] > 0]
    bench = frame[frame["decile"] == 0]
    if len(body) == 0 or len(bench) == 0:
        raise SchemaError("expected decile rows 1..10 plus decile=0 benchmark rows")
    curves = {}
    for value, group in sorted(body.groupby(family), key=lambda kv: kv[0]):
        group = group.sort_values("decile")
        if family == "vetting_years":
            label = _period_label(group["vetting_label"].iloc[0], value)
        else:
            label = f"n_obs={value}"
        curves[label] = {
            "deciles": group["decile"].to_numpy(),
            **{metric: group[metric].to_numpy() for metric in METRICS},
        }
    benchmark = {metric: float(bench[metric].iloc[0]) for metric in METRICS}
    return {"curves": curves, "benchmark": benchmark}


def prepare_fig9(frame: pd.DataFrame, optimal: pd.DataFrame | None) -> dict:
    body = frame[frame["decile"] > 0]
    bench = frame[frame["decile"] == 0]
    if len(body) == 0 or len(bench) == 0:
        raise SchemaError("expected decile rows 1..10 plus decile=0 benchmark rows")
    deciles = {}
    for decile, group in body.groupby("decile"):
        group = group.sort_values("vetting_years")
        deciles[int(decile)] = {
            "years": group["vetting_years"].to_numpy(),
            "sharpe": group["sharpe"].to_numpy(),
        }
    out = {"deciles": deciles, "benchmark_sharpe": float(bench["sharpe"].iloc[0])}
    if optimal is not None:
        merged = optimal.sort_values("vetting_years")
        sharpe_of = body.set_index(["vetting_years", "decile"])["sharpe"]
        step = [
            float(sharpe_of.loc[(row.vetting_years, row.optimal_decile)])
            for row in merged.itertuples()
        ]
        out["optimal"] = {
            "years": merged["vetting_years"].to_numpy(),
            "decile": merged["optimal_decile"].to_numpy(),
            "sharpe": np.asarray(step),
        }
    return out


def prepare_growth_tail(frame: pd.DataFrame) -> dict:
    runs = {}
    for run, group in frame.groupby("run"):
        sizes = np.sort(group["size"].to_numpy())[::-1]
        if np.any(sizes <= 0):
            raise SchemaError("sizes must be positive for a log-log tail plot")
        survival = np.arange(1, len(sizes) + 1) / len(sizes)
        runs[int(run)] = {"size": sizes, "survival": survival}
    return {"runs": runs}


def prepare_aggregator_compare(frame: pd.DataFrame) -> dict:
    pooled = frame[frame["variant"] == "pooled"].set_index("seed").sort_index()
    comp = frame[frame["variant"] == "compartmentalized"].set_index("seed").sort_index()
    if len(pooled) == 0 or len(comp) == 0:
        raise SchemaError("expected both 'pooled' and 'compartmentalized' variant rows")
    shared = pooled.index.intersection(comp.index)
    if len(shared) == 0:
        raise SchemaError("no paired seeds between the two variants")
    return {
        "spearman": (pooled.loc[shared, "spearman"].to_numpy(),
                     comp.loc[shared, "spearman"].to_numpy()),
        "top1_share": (pooled.loc[shared, "top1_share"].to_numpy(),
                       comp.loc[shared, "top1_share"].to_numpy()),
        "K": int(comp["K"].iloc[0]),
    }


# ---------------------------------------------------------------------------
# renderers

def _render_panel(data: dict, title: str) -> plt.Figure:
    fig, axes = plt.subplots(3, 1, figsize=styles.FIGSIZE_PANEL, sharex=True)
    colors = styles.sequential_colors(len(data["curves"]))
    for ax, metric in zip(axes, METRICS):
        for color, (label, curve) in zip(colors, data["curves"].items()):
            ax.plot(curve["deciles"], curve[metric], color=color, label=label,
                    **styles.CURVE_STYLE)
        ax.axhline(data["benchmark"][metric], **styles.BENCHMARK_STYLE)
        ax.set_ylabel(styles.PANEL_LABELS[metric])
        ax.set_xticks(range(1, 11))
    axes[0].legend(fontsize=8, ncol=3)
    axes[0].set_title(title)
    axes[-1].set_xlabel("decile (1 = most successful)")
    fig.tight_layout()
    return fig


def _render_fig9(data: dict) -> plt.Figure:
    fig, ax = plt.subplots(figsize=styles.FIGSIZE_WIDE)
    for decile, curve in sorted(data["deciles"].items()):
        ax.plot(curve["years"], curve["sharpe"], color=styles.DECILE_COLORS[decile - 1],
                label=f"decile {decile}", **styles.CURVE_STYLE)
    ax.axhline(data["benchmark_sharpe"], **styles.BENCHMARK_STYLE)
    if "optimal" in data:
        ax.plot(data["optimal"]["years"], data["optimal"]["sharpe"], **styles.OPTIMAL_STYLE)
    ax.set_xscale("log")
    ax.set_xlabel("vetting period (years, log scale)")
    ax.set_ylabel("Sharpe ratio")
    ax.legend(fontsize=7, ncol=4)
    fig.tight_layout()
    return fig


def _render_growth_tail(data: dict) -> plt.Figure:
    fig, ax = plt.subplots(figsize=styles.FIGSIZE_WIDE)
    for run, curve in sorted(data["runs"].items()):
        ax.loglog(curve["size"], curve["survival"], marker=".", linestyle="none",
                  markersize=3, label=f"run {run}")
    ax.set_xlabel("size")
    ax.set_ylabel("survival fraction P(S >= s)")
    if len(data["runs"]) <= 10:
        ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def _render_aggregator_compare(data: dict) -> plt.Figure:
    fig, axes = plt.subplots(1, 2, figsize=styles.FIGSIZE_WIDE)
    for ax, metric, better in zip(axes, ("spearman", "top1_share"), ("above", "below")):
        pooled, comp = data[metric]
        ax.scatter(pooled, comp, s=14, alpha=0.7)
        lo = min(pooled.min(), comp.min())
        hi = max(pooled.max(), comp.max())
        ax.plot([lo, hi], [lo, hi], color="black", linestyle=":", linewidth=1)
        ax.set_xlabel(f"pooled {metric}")
        ax.set_ylabel(f"K={data['K']} compartments {metric}")
        ax.set_title(f"{metric} ({better} the line favors compartments)", fontsize=9)
    fig.tight_layout()
    return fig


def render(spec: FigureSpec) -> Path:
    """Render one figure to ``spec.output``; returns the output path."""
    if spec.kind in ("a1-panel", "a2-panel"):
        frame = load_table(spec.inputs[0], DECILE_COLUMNS)
        family = "vetting_years" if spec.kind == "a1-panel" else "n_obs"
        title = ("skill / luck / Sharpe per decile, one curve per vetting period"
                 if spec.kind == "a1-panel"
                 else "skill / luck / Sharpe per decile, one curve per observation count")
        fig = _render_panel(prepare_decile_panel(frame, family), title)
    elif spec.kind == "fig9":
        frame = load_table(spec.inputs[0], DECILE_COLUMNS)
        optimal = (
            load_table(spec.inputs[1], OPTIMAL_COLUMNS) if len(spec.inputs) > 1 else None
        )
        fig = _render_fig9(prepare_fig9(frame, optimal))
    elif spec.kind == "growth-tail":
        fig = _render_growth_tail(prepare_growth_tail(load_table(spec.inputs[0], GROWTH_COLUMNS)))
    elif spec.kind == "aggregator-compare":
        fig = _render_aggregator_compare(
            prepare_aggregator_compare(load_table(spec.inputs[0], AGGREGATOR_COLUMNS))
        )
    else:  # unreachable: FigureSpec validates the kind
        raise ValueError(spec.kind)
    spec.output.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(spec.output, dpi=150)
    plt.close(fig)
    return spec.output


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="render", description=__doc__.splitlines()[0])
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--in", dest="inputs", action="append", required=True,
                        metavar="CSV", help="input CSV; repeat for multi-input kinds")
    parser.add_argument("--out", required=True, help="output image path")
    args = parser.parse_args(argv)
    spec = FigureSpec(kind=args.kind, inputs=tuple(Path(p) for p in args.inputs),
                      output=Path(args.out))
    try:
        render(spec)
    except (SchemaError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
