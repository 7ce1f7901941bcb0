import json

import pytest

from meritlab.cli import (
    ConfigError,
    main,
    parse_config,
    rep_seed,
    run_experiment,
    serialize_config,
)

MINIMAL_SWEEP = json.dumps({"kind": "vetting-sweep", "seed": 1, "population": "population-1"})


def read(path):
    return path.read_bytes()


class TestParseConfig:
    def test_minimal_sweep_fills_defaults(self):
        config = parse_config(MINIMAL_SWEEP)
        exp = config.experiment
        assert config.kind == "vetting-sweep" and config.seed == 1
        assert config.repetitions == 1 and config.out == "results"
        assert [p.label for p in exp.periods] == ["1D", "1W", "1M", "1Q", "1H", "1Y", "2Y", "4Y"]
        assert exp.statistic.kind == "raw_outcome"
        assert exp.optimal_by == "true_sharpe" and not exp.resample_population
        assert exp.spec.n_agents == 100_000

    def test_seed_required(self):
        with pytest.raises(ConfigError, match="seed"):
            parse_config(json.dumps({"kind": "vetting-sweep", "population": "population-1"}))

    def test_seed_flag_overrides(self):
        config = parse_config(MINIMAL_SWEEP, seed=77, out="elsewhere")
        assert config.seed == 77 and config.out == "elsewhere"

    def test_alpha_out_of_range_names_key(self):
        doc = json.dumps({"kind": "growth-simon", "seed": 1, "alpha": 1.5, "n_steps": 10})
        with pytest.raises(ConfigError, match="alpha"):
            parse_config(doc)

    def test_unknown_key_rejected_with_path(self):
        doc = json.dumps({"kind": "growth-simon", "seed": 1, "alpha": 0.5, "n_steps": 10, "alpa": 1})
        with pytest.raises(ConfigError, match="alpa"):
            parse_config(doc)
        doc = json.dumps(
            {"kind": "sharpe-study", "seed": 1, "population": "population-1",
             "n_obs_list": [2], "period": "1Y", "periods": ["1D"]}
        )
        with pytest.raises(ConfigError, match="periods"):
            parse_config(doc)

    def test_nested_error_paths(self):
        doc = json.dumps(
            {"kind": "growth-gibrat", "seed": 1, "n_agents": 10, "n_steps": 5,
             "growth_shock": {"mean": 1.0, "std": -0.1}}
        )
        with pytest.raises(ConfigError, match="growth_shock.std"):
            parse_config(doc)

    def test_inline_population_requires_n_agents(self):
        doc = json.dumps(
            {"kind": "vetting-sweep", "seed": 1,
             "population": {"skill": {"mean": 0.1, "std": 0.02}, "luck": {"mean": 0.2, "std": 0.04}}}
        )
        with pytest.raises(ConfigError, match="n_agents"):
            parse_config(doc)

    def test_malformed_json(self):
        with pytest.raises(ConfigError, match="malformed"):
            parse_config("{not json")

    def test_unknown_preset(self):
        doc = json.dumps({"kind": "vetting-sweep", "seed": 1, "population": "population-9"})
        with pytest.raises(ConfigError, match="population"):
            parse_config(doc)

    @pytest.mark.parametrize(
        "doc",
        [
            MINIMAL_SWEEP,
            json.dumps(
                {"kind": "vetting-sweep", "seed": 3, "repetitions": 2, "n_agents": 500,
                 "population": {"skill": {"mean": 0.1, "std": 0.02},
                                "luck": {"mean": 0.2, "std": 0.04}},
                 "periods": ["1D", 1.5, "4Y"],
                 "statistic": {"kind": "realized_sharpe", "n_obs": 4},
                 "optimal_by": "out_of_sample", "resample_population": True}
            ),
            json.dumps({"kind": "sharpe-study", "seed": 2, "population": "population-2",
                        "n_obs_list": [2, 4], "period": "1Y", "n_agents": 1000}),
            json.dumps({"kind": "growth-simon", "seed": 5, "alpha": 0.25, "n_steps": 100}),
            json.dumps({"kind": "growth-gibrat", "seed": 5, "n_agents": 10, "n_steps": 5,
                        "growth_shock": {"mean": 1.1, "std": 0.3}}),
            json.dumps({"kind": "aggregator", "seed": 6, "n_items": 10, "n_sessions": 50,
                        "repetitions": 3}),
            json.dumps({"kind": "characteristic-time", "seed": 0, "mu": 0.1, "sigma": 0.2}),
            json.dumps({"kind": "shockley", "seed": 4, "n_factors": 10,
                        "per_factor": {"mean": 1.0, "std": 0.25}, "n_samples": 100}),
        ],
    )
    def test_round_trip(self, doc):
        config = parse_config(doc)
        assert parse_config(serialize_config(config)) == config


class TestRunExperiment:
    def test_vetting_sweep_outputs(self, tmp_path):
        doc = json.dumps(
            {"kind": "vetting-sweep", "seed": 9, "population": "population-1",
             "n_agents": 500, "periods": ["1D", "1Y"]}
        )
        config = parse_config(doc, out=str(tmp_path / "run"))
        assert run_experiment(config) == 0
        deciles = (tmp_path / "run" / "deciles.csv").read_text().splitlines()
        assert deciles[0] == ("population,statistic,n_obs,vetting_label,vetting_years,"
                              "decile,mean_skill,rms_luck,sharpe,n_agents")
        assert len(deciles) == 1 + 2 * 11  # two periods x (benchmark + 10 deciles)
        optimal = (tmp_path / "run" / "optimal.csv").read_text().splitlines()
        assert optimal[0] == "population,statistic,n_obs,vetting_label,vetting_years,optimal_decile"
        metadata = json.loads((tmp_path / "run" / "metadata.json").read_text())
        assert metadata["seed"] == 9 and metadata["kind"] == "vetting-sweep"
        assert metadata["experiment"]["n_agents"] == 500
        assert "deciles.csv" in metadata["outputs"]

    def test_byte_identical_across_runs_and_threads(self, tmp_path):
        doc = json.dumps(
            {"kind": "vetting-sweep", "seed": 11, "population": "population-2",
             "n_agents": 400, "periods": ["1W", "1Y"], "repetitions": 3}
        )
        run_experiment(parse_config(doc, out=str(tmp_path / "a")), threads=1)
        run_experiment(parse_config(doc, out=str(tmp_path / "b")), threads=4)
        for name in ["deciles_rep000.csv", "deciles_rep001.csv", "deciles_rep002.csv",
                     "optimal_rep001.csv", "metadata.json"]:
            assert read(tmp_path / "a" / name) == read(tmp_path / "b" / name)

    def test_sharpe_study_blocks_ordered_by_n_obs(self, tmp_path):
        doc = json.dumps(
            {"kind": "sharpe-study", "seed": 2, "population": "population-1",
             "n_agents": 300, "period": "1Y", "n_obs_list": [2, 8]}
        )
        run_experiment(parse_config(doc, out=str(tmp_path / "s")))
        lines = (tmp_path / "s" / "deciles.csv").read_text().splitlines()[1:]
        n_obs_column = [int(line.split(",")[2]) for line in lines]
        assert n_obs_column == sorted(n_obs_column)
        assert set(n_obs_column) == {2, 8}

    def test_growth_and_aggregator_and_shockley_files(self, tmp_path):
        docs = {
            "growth.csv": {"kind": "growth-simon", "seed": 5, "alpha": 0.3, "n_steps": 200,
                           "repetitions": 2},
            "aggregator.csv": {"kind": "aggregator", "seed": 6, "n_items": 10,
                               "n_sessions": 80, "n_compartments": 4, "repetitions": 2},
            "shockley.csv": {"kind": "shockley", "seed": 7, "n_factors": 10,
                             "per_factor": {"mean": 1.0, "std": 0.25}, "n_samples": 20},
        }
        headers = {
            "growth.csv": "run,item_id,size",
            "aggregator.csv": "variant,K,seed,spearman,gini_attention,top1_share",
            "shockley.csv": "sample,productivity",
        }
        for name, doc in docs.items():
            out = tmp_path / doc["kind"]
            run_experiment(parse_config(json.dumps(doc), out=str(out)))
            lines = (out / name).read_text().splitlines()
            assert lines[0] == headers[name]
            assert len(lines) > 1

    def test_rep_seed_is_stable(self):
        assert rep_seed(123, 0) == rep_seed(123, 0)
        assert rep_seed(123, 0) != rep_seed(123, 1)


class TestMain:
    def test_characteristic_time_prints_36(self, capsys):
        assert main(["characteristic-time", "--mu", "0.05", "--sigma", "0.30"]) == 0
        assert capsys.readouterr().out.strip() == "36.0"

    def test_characteristic_time_lower_band(self, capsys):
        assert main(["characteristic-time", "--mu", "0.10", "--sigma", "0.20"]) == 0
        assert capsys.readouterr().out.strip() == "4.0"

    def test_missing_config_is_an_error(self, capsys):
        assert main(["vetting-sweep"]) == 2
        assert "--config" in capsys.readouterr().err

    def test_kind_mismatch(self, tmp_path, capsys):
        path = tmp_path / "c.json"
        path.write_text(MINIMAL_SWEEP)
        assert main(["growth-simon", "--config", str(path)]) == 2
        assert "does not match" in capsys.readouterr().err

    def test_config_error_exit_code(self, tmp_path, capsys):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"kind": "growth-simon", "seed": 1, "alpha": 2.0, "n_steps": 5}))
        assert main(["growth-simon", "--config", str(path)]) == 2
        assert "alpha" in capsys.readouterr().err

    def test_full_cli_run(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"kind": "growth-simon", "alpha": 0.5, "n_steps": 100}))
        out = tmp_path / "out"
        assert main(["growth-simon", "--config", str(path), "--seed", "3",
                     "--out", str(out), "--threads", "2"]) == 0
        assert (out / "growth.csv").exists() and (out / "metadata.json").exists()
