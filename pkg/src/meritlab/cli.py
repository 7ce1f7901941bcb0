"""Command-line front end: JSON experiment configs to deterministic CSVs.

Every experiment writes its tables plus a ``metadata.json`` sidecar echoing
the fully resolved configuration and master seed.  Repetitions draw their
own master seeds from the substream ``(seed, 9, rep)``, and output rows are
emitted in sorted key order, so results are byte-identical regardless of
the worker-thread count (``--threads`` / ``MERITLAB_THREADS``).

CSV schemas
-----------
decile reports   population,statistic,n_obs,vetting_label,vetting_years,decile,mean_skill,rms_luck,sharpe,n_agents
                 (benchmark rows use decile=0)
optimal deciles  population,statistic,n_obs,vetting_label,vetting_years,optimal_decile
growth           run,item_id,size
aggregator       variant,K,seed,spearman,gini_attention,top1_share
shockley         sample,productivity
characteristic   mu,sigma,t_star
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib.metadata import version as _pkg_version
from pathlib import Path as FsPath

import numpy as np

from .aggregator import AggregatorConfig, run_compartmentalized, run_pooled
from .gbm import VettingPeriod, characteristic_time
from .growth import GibratConfig, SimonConfig, simulate_gibrat, simulate_simon
from .population import (
    POPULATION_PRESETS,
    FactorSpec,
    LognormalMoments,
    PopulationSpec,
    sample_shockley,
)
from .vetting import RankingStatistic, sharpe_observation_study, vetting_sweep

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "parse_config",
    "serialize_config",
    "run_experiment",
    "main",
]

_REP_SEED_KEY = 9
_SEED_MAX = 2**64 - 1

KINDS = (
    "vetting-sweep",
    "sharpe-study",
    "growth-simon",
    "growth-gibrat",
    "aggregator",
    "characteristic-time",
    "shockley",
)

DECILE_HEADER = [
    "population", "statistic", "n_obs", "vetting_label", "vetting_years",
    "decile", "mean_skill", "rms_luck", "sharpe", "n_agents",
]
OPTIMAL_HEADER = [
    "population", "statistic", "n_obs", "vetting_label", "vetting_years", "optimal_decile",
]
GROWTH_HEADER = ["run", "item_id", "size"]
AGGREGATOR_HEADER = ["variant", "K", "seed", "spearman", "gini_attention", "top1_share"]


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the key path."""


# ---------------------------------------------------------------------------
# config schema

@dataclass(frozen=True)
class VettingSweepExperiment:
    population_name: str
    spec: PopulationSpec
    periods: tuple[VettingPeriod, ...]
    statistic: RankingStatistic
    optimal_by: str
    resample_population: bool


@dataclass(frozen=True)
class SharpeStudyExperiment:
    population_name: str
    spec: PopulationSpec
    period: VettingPeriod
    n_obs_list: tuple[int, ...]


@dataclass(frozen=True)
class CharacteristicTimeExperiment:
    mu: float
    sigma: float


@dataclass(frozen=True)
class ShockleyExperiment:
    factors: FactorSpec
    n_samples: int


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    seed: int
    repetitions: int
    out: str | None
    experiment: object


class _Node:
    """Dict wrapper that tracks its key path and rejects unknown keys."""

    def __init__(self, data: dict, path: str):
        if not isinstance(data, dict):
            raise ConfigError(f"{path or 'config'} must be an object, got {type(data).__name__}")
        self._data = dict(data)
        self._path = path

    def _at(self, key: str) -> str:
        return f"{self._path}.{key}" if self._path else key

    def take(self, key: str, default=...):
        if key in self._data:
            return self._data.pop(key)
        if default is ...:
            raise ConfigError(f"missing required key '{self._at(key)}'")
        return default

    def child(self, key: str, default=...) -> "_Node | None":
        value = self.take(key, default)
        if value is default and default is not ...:
            return None
        return _Node(value, self._at(key))

    def done(self) -> None:
        if self._data:
            extra = sorted(self._data)
            raise ConfigError(f"unknown key '{self._at(extra[0])}'")


def _number(value, path: str, *, lo=None, hi=None) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"'{path}' must be a number, got {value!r}")
    v = float(value)
    if lo is not None and v < lo:
        raise ConfigError(f"'{path}' must be >= {lo}, got {value}")
    if hi is not None and v > hi:
        raise ConfigError(f"'{path}' must be <= {hi}, got {value}")
    return v


def _integer(value, path: str, *, lo=None, hi=None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"'{path}' must be an integer, got {value!r}")
    if lo is not None and value < lo:
        raise ConfigError(f"'{path}' must be >= {lo}, got {value}")
    if hi is not None and value > hi:
        raise ConfigError(f"'{path}' must be <= {hi}, got {value}")
    return value


def _moments(node: _Node, path: str) -> LognormalMoments:
    mean = _number(node.take("mean"), f"{path}.mean")
    std = _number(node.take("std"), f"{path}.std", lo=0.0)
    node.done()
    try:
        return LognormalMoments(mean, std)
    except ValueError as exc:
        raise ConfigError(f"'{path}': {exc}") from None


def _population(root: _Node) -> tuple[str, PopulationSpec]:
    raw = root.take("population", "population-1")
    n_agents = root.take("n_agents", None)
    if isinstance(raw, str):
        if raw not in POPULATION_PRESETS:
            raise ConfigError(
                f"'population' must name a preset ({', '.join(POPULATION_PRESETS)}) or be an object"
            )
        preset = POPULATION_PRESETS[raw]
        name = raw
        skill, luck = preset.skill, preset.luck
        count = preset.n_agents if n_agents is None else _integer(n_agents, "n_agents", lo=1)
    else:
        node = _Node(raw, "population")
        skill = _moments(node.child("skill"), "population.skill")
        luck = _moments(node.child("luck"), "population.luck")
        node.done()
        name = "custom"
        if n_agents is None:
            raise ConfigError("missing required key 'n_agents' (needed with an inline population)")
        count = _integer(n_agents, "n_agents", lo=1)
    return name, PopulationSpec(skill=skill, luck=luck, n_agents=count)


def _period(value, path: str) -> VettingPeriod:
    try:
        if isinstance(value, str):
            return VettingPeriod.from_label(value)
        return VettingPeriod.custom(_number(value, path, lo=0.0))
    except ValueError as exc:
        raise ConfigError(f"'{path}': {exc}") from None


def _statistic(value, path: str) -> RankingStatistic:
    try:
        if value == "raw_outcome":
            return RankingStatistic.raw()
        node = _Node(value, path)
        kind = node.take("kind")
        n_obs = node.take("n_obs", 1)
        node.done()
        return RankingStatistic(kind=kind, n_obs=_integer(n_obs, f"{path}.n_obs", lo=1))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"'{path}': {exc}") from None


def _parse_experiment(kind: str, root: _Node):
    if kind == "vetting-sweep":
        name, spec = _population(root)
        raw_periods = root.take("periods", list(_DEFAULT_PERIODS))
        if not isinstance(raw_periods, list) or not raw_periods:
            raise ConfigError("'periods' must be a non-empty list")
        periods = tuple(_period(p, f"periods[{i}]") for i, p in enumerate(raw_periods))
        statistic = _statistic(root.take("statistic", "raw_outcome"), "statistic")
        optimal_by = root.take("optimal_by", "true_sharpe")
        if optimal_by not in ("true_sharpe", "out_of_sample"):
            raise ConfigError("'optimal_by' must be 'true_sharpe' or 'out_of_sample'")
        resample = root.take("resample_population", False)
        if not isinstance(resample, bool):
            raise ConfigError("'resample_population' must be a boolean")
        return VettingSweepExperiment(name, spec, periods, statistic, optimal_by, resample)
    if kind == "sharpe-study":
        name, spec = _population(root)
        period = _period(root.take("period", "1Y"), "period")
        raw_list = root.take("n_obs_list")
        if not isinstance(raw_list, list) or not raw_list:
            raise ConfigError("'n_obs_list' must be a non-empty list")
        n_obs_list = tuple(_integer(v, f"n_obs_list[{i}]", lo=2) for i, v in enumerate(raw_list))
        return SharpeStudyExperiment(name, spec, period, n_obs_list)
    if kind == "growth-simon":
        alpha = _number(root.take("alpha"), "alpha")
        n_steps = _integer(root.take("n_steps"), "n_steps", lo=1)
        try:
            return SimonConfig(alpha=alpha, n_steps=n_steps)
        except ValueError as exc:
            raise ConfigError(f"'alpha': {exc}") from None
    if kind == "growth-gibrat":
        n_agents = _integer(root.take("n_agents"), "n_agents", lo=1)
        n_steps = _integer(root.take("n_steps"), "n_steps", lo=1)
        shock = _moments(root.child("growth_shock"), "growth_shock")
        return GibratConfig(n_agents=n_agents, n_steps=n_steps, growth_shock=shock)
    if kind == "aggregator":
        defaults = AggregatorConfig()
        kwargs = dict(
            n_items=_integer(root.take("n_items", defaults.n_items), "n_items", lo=2),
            n_compartments=_integer(
                root.take("n_compartments", defaults.n_compartments), "n_compartments", lo=1
            ),
            n_sessions=_integer(root.take("n_sessions", defaults.n_sessions), "n_sessions", lo=1),
            exposure_exponent=_number(
                root.take("exposure_exponent", defaults.exposure_exponent), "exposure_exponent", lo=0.0
            ),
            vote_noise=_number(root.take("vote_noise", defaults.vote_noise), "vote_noise"),
            vetting_sessions=_integer(
                root.take("vetting_sessions", defaults.vetting_sessions), "vetting_sessions", lo=0
            ),
        )
        quality_node = root.child("quality", None)
        kwargs["quality"] = (
            _moments(quality_node, "quality") if quality_node is not None else defaults.quality
        )
        try:
            return AggregatorConfig(**kwargs)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    if kind == "characteristic-time":
        return CharacteristicTimeExperiment(
            mu=_number(root.take("mu"), "mu"), sigma=_number(root.take("sigma"), "sigma")
        )
    if kind == "shockley":
        n_factors = _integer(root.take("n_factors"), "n_factors", lo=1)
        per_factor = _moments(root.child("per_factor"), "per_factor")
        n_samples = _integer(root.take("n_samples"), "n_samples", lo=1)
        return ShockleyExperiment(FactorSpec(n_factors, per_factor), n_samples)
    raise ConfigError(f"'kind' must be one of {', '.join(KINDS)}; got {kind!r}")


_DEFAULT_PERIODS = ("1D", "1W", "1M", "1Q", "1H", "1Y", "2Y", "4Y")


def parse_config(text: str, *, seed: int | None = None, out: str | None = None) -> ExperimentConfig:
    """Parse and validate a JSON experiment document.

    ``seed``/``out`` override the corresponding document keys (command-line
    flags win).  Unknown keys anywhere in the document are rejected.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}") from None
    root = _Node(data, "")
    kind = root.take("kind")
    if kind not in KINDS:
        raise ConfigError(f"'kind' must be one of {', '.join(KINDS)}; got {kind!r}")
    cfg_seed = root.take("seed", None)
    if seed is not None:
        cfg_seed = seed
    if cfg_seed is None:
        raise ConfigError("missing required key 'seed' (set it in the config or pass --seed)")
    cfg_seed = _integer(cfg_seed, "seed", lo=0, hi=_SEED_MAX)
    repetitions = _integer(root.take("repetitions", 1), "repetitions", lo=1)
    cfg_out = root.take("out", None)
    if out is not None:
        cfg_out = out
    if cfg_out is None and kind != "characteristic-time":
        cfg_out = "results"
    if kind in ("characteristic-time", "shockley") and repetitions != 1:
        raise ConfigError(f"'repetitions' must be 1 for {kind}")
    experiment = _parse_experiment(kind, root)
    root.done()
    return ExperimentConfig(
        kind=kind, seed=cfg_seed, repetitions=repetitions, out=cfg_out, experiment=experiment
    )


def _moments_dict(m: LognormalMoments) -> dict:
    return {"mean": m.mean, "std": m.std_dev}


def _period_json(p: VettingPeriod):
    return p.label if p.label != "custom" else p.years


def _experiment_dict(config: ExperimentConfig) -> dict:
    exp = config.experiment
    if isinstance(exp, VettingSweepExperiment):
        return {
            "population": (
                exp.population_name
                if exp.population_name != "custom"
                else {"skill": _moments_dict(exp.spec.skill), "luck": _moments_dict(exp.spec.luck)}
            ),
            "n_agents": exp.spec.n_agents,
            "periods": [_period_json(p) for p in exp.periods],
            "statistic": {"kind": exp.statistic.kind, "n_obs": exp.statistic.n_obs},
            "optimal_by": exp.optimal_by,
            "resample_population": exp.resample_population,
        }
    if isinstance(exp, SharpeStudyExperiment):
        return {
            "population": (
                exp.population_name
                if exp.population_name != "custom"
                else {"skill": _moments_dict(exp.spec.skill), "luck": _moments_dict(exp.spec.luck)}
            ),
            "n_agents": exp.spec.n_agents,
            "period": _period_json(exp.period),
            "n_obs_list": list(exp.n_obs_list),
        }
    if isinstance(exp, SimonConfig):
        return {"alpha": exp.alpha, "n_steps": exp.n_steps}
    if isinstance(exp, GibratConfig):
        return {
            "n_agents": exp.n_agents,
            "n_steps": exp.n_steps,
            "growth_shock": _moments_dict(exp.growth_shock),
        }
    if isinstance(exp, AggregatorConfig):
        return {
            "n_items": exp.n_items,
            "n_compartments": exp.n_compartments,
            "n_sessions": exp.n_sessions,
            "quality": _moments_dict(exp.quality),
            "exposure_exponent": exp.exposure_exponent,
            "vote_noise": exp.vote_noise,
            "vetting_sessions": exp.vetting_sessions,
        }
    if isinstance(exp, CharacteristicTimeExperiment):
        return {"mu": exp.mu, "sigma": exp.sigma}
    if isinstance(exp, ShockleyExperiment):
        return {
            "n_factors": exp.factors.n_factors,
            "per_factor": _moments_dict(exp.factors.per_factor),
            "n_samples": exp.n_samples,
        }
    raise TypeError(f"unserializable experiment {type(exp).__name__}")


def serialize_config(config: ExperimentConfig) -> str:
    doc = {"kind": config.kind, "seed": config.seed, "repetitions": config.repetitions}
    if config.out is not None:
        doc["out"] = config.out
    doc.update(_experiment_dict(config))
    return json.dumps(doc, indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# execution

def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)  # shortest round-trip decimal
    return str(value)


def _write_csv(path: FsPath, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def rep_seed(master_seed: int, rep: int) -> int:
    """Derived master seed for repetition ``rep``."""
    return int(np.random.SeedSequence([master_seed, _REP_SEED_KEY, rep]).generate_state(1, np.uint64)[0])


def _thread_count(threads: int | None) -> int:
    if threads is not None:
        return max(1, threads)
    env = os.environ.get("MERITLAB_THREADS")
    return max(1, int(env)) if env else 1


def _map_reps(fn, n_reps: int, threads: int) -> list:
    if threads <= 1 or n_reps <= 1:
        return [fn(r) for r in range(n_reps)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n_reps)))


def _decile_rows(population: str, report) -> list[tuple]:
    stat = report.statistic
    rows = [
        (
            population, stat.kind, stat.n_obs, report.vetting.label, report.vetting.years,
            row.decile, row.mean_skill, row.rms_luck, row.sharpe, row.n_agents,
        )
        for row in (report.benchmark, *report.per_decile)
    ]
    return rows


def _sorted_rows(rows: list[tuple]) -> list[tuple]:
    return sorted(rows)


def _rep_name(base: str, rep: int, n_reps: int) -> str:
    return f"{base}.csv" if n_reps == 1 else f"{base}_rep{rep:03d}.csv"


def _run_vetting_sweep(config: ExperimentConfig, out_dir: FsPath, threads: int) -> list[str]:
    exp: VettingSweepExperiment = config.experiment

    def one(rep: int):
        return vetting_sweep(
            exp.spec, exp.periods, exp.statistic, rep_seed(config.seed, rep),
            optimal_by=exp.optimal_by, resample_population=exp.resample_population,
        )
    results = _map_reps(one, config.repetitions, threads)
    files = []
    for rep, sweep in enumerate(results):
        rows = []
        for report in sweep.reports:
            rows.extend(_decile_rows(exp.population_name, report))
        name = _rep_name("deciles", rep, config.repetitions)
        _write_csv(out_dir / name, DECILE_HEADER, _sorted_rows(rows))
        files.append(name)
        opt_rows = [
            (
                exp.population_name, exp.statistic.kind, exp.statistic.n_obs,
                period.label, period.years, sweep.optimal_decile[period],
            )
            for period in exp.periods
        ]
        name = _rep_name("optimal", rep, config.repetitions)
        _write_csv(out_dir / name, OPTIMAL_HEADER, _sorted_rows(opt_rows))
        files.append(name)
    return files


def _run_sharpe_study(config: ExperimentConfig, out_dir: FsPath, threads: int) -> list[str]:
    exp: SharpeStudyExperiment = config.experiment

    def one(rep: int):
        return sharpe_observation_study(exp.spec, exp.period, exp.n_obs_list, rep_seed(config.seed, rep))
    results = _map_reps(one, config.repetitions, threads)
    files = []
    for rep, reports in enumerate(results):
        rows = []
        for report in reports:
            rows.extend(_decile_rows(exp.population_name, report))
        name = _rep_name("deciles", rep, config.repetitions)
        _write_csv(out_dir / name, DECILE_HEADER, _sorted_rows(rows))
        files.append(name)
    return files


def _run_growth(config: ExperimentConfig, out_dir: FsPath, threads: int) -> list[str]:
    simulate = simulate_simon if config.kind == "growth-simon" else simulate_gibrat

    def one(rep: int):
        return simulate(config.experiment, rep_seed(config.seed, rep))
    results = _map_reps(one, config.repetitions, threads)
    rows = []
    for rep, sizes in enumerate(results):
        for item_id, size in enumerate(sizes):
            value = int(size) if config.kind == "growth-simon" else float(size)
            rows.append((rep, item_id, value))
    _write_csv(out_dir / "growth.csv", GROWTH_HEADER, rows)
    return ["growth.csv"]


def _run_aggregator(config: ExperimentConfig, out_dir: FsPath, threads: int) -> list[str]:
    agg: AggregatorConfig = config.experiment

    def one(rep: int):
        seed = rep_seed(config.seed, rep)
        pooled = run_pooled(agg, seed)
        comp = run_compartmentalized(agg, seed)
        return [
            (out.variant, k, seed, out.spearman_quality_rank, out.gini_attention, out.top1_share)
            for out, k in ((pooled, 1), (comp, agg.n_compartments))
        ]
    results = _map_reps(one, config.repetitions, threads)
    rows = [row for pair in results for row in pair]
    _write_csv(out_dir / "aggregator.csv", AGGREGATOR_HEADER, _sorted_rows(rows))
    return ["aggregator.csv"]


def _run_characteristic_time(config: ExperimentConfig, out_dir: FsPath | None) -> list[str]:
    exp: CharacteristicTimeExperiment = config.experiment
    t_star = characteristic_time(exp.mu, exp.sigma)
    print(round(t_star, 9))
    if out_dir is None:
        return []
    _write_csv(out_dir / "characteristic_time.csv", ["mu", "sigma", "t_star"],
               [(exp.mu, exp.sigma, t_star)])
    return ["characteristic_time.csv"]


def _run_shockley(config: ExperimentConfig, out_dir: FsPath) -> list[str]:
    exp: ShockleyExperiment = config.experiment
    samples = sample_shockley(exp.factors, exp.n_samples, config.seed)
    rows = [(i, float(v)) for i, v in enumerate(samples)]
    _write_csv(out_dir / "shockley.csv", ["sample", "productivity"], rows)
    return ["shockley.csv"]


def run_experiment(config: ExperimentConfig, *, threads: int | None = None) -> int:
    """Execute an experiment, writing CSVs and a metadata sidecar; returns 0."""
    threads = _thread_count(threads)
    out_dir = None
    if config.out is not None:
        out_dir = FsPath(config.out)
        out_dir.mkdir(parents=True, exist_ok=True)

    if config.kind == "vetting-sweep":
        files = _run_vetting_sweep(config, out_dir, threads)
    elif config.kind == "sharpe-study":
        files = _run_sharpe_study(config, out_dir, threads)
    elif config.kind in ("growth-simon", "growth-gibrat"):
        files = _run_growth(config, out_dir, threads)
    elif config.kind == "aggregator":
        files = _run_aggregator(config, out_dir, threads)
    elif config.kind == "characteristic-time":
        files = _run_characteristic_time(config, out_dir)
    elif config.kind == "shockley":
        files = _run_shockley(config, out_dir)
    else:  # unreachable after parse_config validation
        raise ConfigError(f"unknown kind {config.kind!r}")

    if out_dir is not None:
        metadata = {
            "kind": config.kind,
            "seed": config.seed,
            "repetitions": config.repetitions,
            "experiment": _experiment_dict(config),
            "outputs": sorted(files),
            "package_version": _pkg_version("meritlab"),
        }
        exp = config.experiment
        if isinstance(exp, (VettingSweepExperiment, SharpeStudyExperiment)):
            # pin the preset's moments so the echo is complete on its own
            metadata["resolved_population"] = {
                "skill": _moments_dict(exp.spec.skill),
                "luck": _moments_dict(exp.spec.luck),
                "n_agents": exp.spec.n_agents,
            }
        with open(out_dir / "metadata.json", "w") as fh:
            json.dump(metadata, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


# ---------------------------------------------------------------------------
# argument parsing

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="meritlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run a {kind} experiment")
        p.add_argument("--config", help="path to the JSON experiment config")
        p.add_argument("--seed", type=int, help="master seed (overrides the config)")
        p.add_argument("--out", help="output directory (overrides the config)")
        p.add_argument("--threads", type=int, help="worker threads; results are independent of this")
        if kind == "characteristic-time":
            p.add_argument("--mu", type=float, help="skill drift per year")
            p.add_argument("--sigma", type=float, help="luck volatility per sqrt-year")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.config is not None:
            text = FsPath(args.config).read_text()
        elif args.kind == "characteristic-time" and args.mu is not None and args.sigma is not None:
            text = json.dumps({"kind": "characteristic-time", "seed": 0,
                               "mu": args.mu, "sigma": args.sigma})
        else:
            print(f"error: --config is required for {args.kind}", file=sys.stderr)
            return 2
        config = parse_config(text, seed=args.seed, out=args.out)
        if config.kind != args.kind:
            print(f"error: config kind {config.kind!r} does not match subcommand {args.kind!r}",
                  file=sys.stderr)
            return 2
        return run_experiment(config, threads=args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
