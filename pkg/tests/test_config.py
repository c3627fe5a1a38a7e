"""Tests for INI configuration parsing, validation and serialization."""
from pathlib import Path

import pytest

from src.config import (
    RateParams, RunConfig, build_config, parse_config, serialize_config,
    stopping_times, with_overrides,
)
from src.data.models import StoppingKind
from src.errors import ArgumentError, ConfigError

EXPERIMENTS = Path(__file__).resolve().parents[1] / "experiments"

MINIMAL = """
[run]
subcommand = rate
problem = sign_drift
seed = 42
"""


class TestParseConfig:
    def test_minimal_document_gets_defaults(self):
        cfg = parse_config(MINIMAL)
        assert cfg.subcommand == "rate"
        assert cfg.seed == 42
        assert cfg.rate.n_list == [2 ** k for k in range(4, 11)]
        assert cfg.rate.ref_level == 14
        assert cfg.rate.paths == 10_000
        assert cfg.rate.p == 1.0
        assert cfg.rate.norm == "sup"
        assert cfg.workers == 1
        assert cfg.format == "both"
        assert isinstance(cfg.params, RateParams)

    def test_section_values(self):
        cfg = parse_config(MINIMAL + """
[rate]
n_list = 16, 32, 64
ref_level = 10
norm = terminal_stopping
taus = horizon, deterministic(0.5), first_exit(1.0)
slope_upper = -0.15
""")
        assert cfg.rate.n_list == [16, 32, 64]
        assert cfg.rate.slope_upper == -0.15
        assert cfg.rate.slope_lower is None
        kinds = [tau.kind for tau in stopping_times(cfg.rate)]
        assert kinds == [StoppingKind.HORIZON, StoppingKind.DETERMINISTIC, StoppingKind.FIRST_EXIT]

    def test_family_problem(self):
        cfg = parse_config(MINIMAL.replace("sign_drift", "holder_diffusion(0.25)"))
        assert cfg.problem == "holder_diffusion(0.25)"

    def test_n_must_be_a_power_of_two(self):
        with pytest.raises(ConfigError, match="power of 2"):
            parse_config(MINIMAL + "[rate]\nn_list = 16, 32, 100\n")

    def test_unknown_key_names_the_nearest(self):
        with pytest.raises(ConfigError, match="nearest valid key is 'paths'"):
            parse_config(MINIMAL + "[rate]\npath = 100\n")

    def test_unknown_run_key(self):
        with pytest.raises(ConfigError, match="'seed'"):
            parse_config(MINIMAL + "sead = 1\n")

    def test_unknown_section_names_the_nearest(self):
        with pytest.raises(ConfigError, match=r"\[rate\]"):
            parse_config(MINIMAL + "[rates]\npaths = 100\n")

    def test_missing_run_section(self):
        with pytest.raises(ConfigError, match=r"\[run\]"):
            parse_config("[rate]\npaths = 100\n")

    def test_malformed_document(self):
        with pytest.raises(ConfigError, match="Malformed"):
            parse_config("subcommand = rate\n")

    def test_unknown_problem(self):
        with pytest.raises(ConfigError, match="no_such_problem"):
            parse_config(MINIMAL.replace("sign_drift", "no_such_problem"))

    def test_unknown_subcommand(self):
        with pytest.raises(ConfigError):
            parse_config(MINIMAL.replace("= rate", "= plot"))

    def test_config_error_is_an_argument_error(self):
        with pytest.raises(ArgumentError):
            parse_config(MINIMAL + "[rate]\npaths = 1\n")

    @pytest.mark.parametrize("section", [
        "[rate]\nref_level = 10\n",
        "[rate]\np = 9\n",
        "[rate]\nn_list = 16, 32\n",
        "[rate]\ntaus = someday\n",
        "[density]\nt_index = 17\n",
        "[density]\npaths = 500\n",
        "[yw]\ndeltas = 2.0\neps = 0.25, 0.5\n",
        "[yw]\ndeltas = 1.0\neps = 0.25\n",
        "[mollify]\nN_list = 8, 4\n",
        "[mollify]\nu_list = 0.0\n",
        "[jump-integral]\nq = 0.5\n",
    ])
    def test_constraint_violations(self, section):
        with pytest.raises(ConfigError):
            parse_config(MINIMAL + section)

    def test_initial_point_mass(self):
        with pytest.raises(ConfigError, match="point mass"):
            parse_config(MINIMAL + "[density]\nt_index = 0\n")

    def test_seed_range(self):
        assert parse_config(MINIMAL.replace("42", str(2 ** 64 - 1))).seed == 2 ** 64 - 1
        with pytest.raises(ConfigError):
            parse_config(MINIMAL.replace("42", str(2 ** 64)))


class TestSerialize:
    def test_round_trip(self):
        cfg = parse_config(MINIMAL + "[rate]\nn_list = 16, 32, 64\nslope_lower = -0.65\n")
        assert parse_config(serialize_config(cfg)) == cfg

    def test_round_trip_of_every_section(self):
        cfg = build_config({"subcommand": "yw", "seed": 3})
        text = serialize_config(cfg, all_sections=True)
        assert "[komatsu]" in text and "[jump-integral]" in text
        assert parse_config(text) == cfg

    def test_only_the_active_section_by_default(self):
        text = serialize_config(build_config({"subcommand": "komatsu"}))
        assert "[komatsu]" in text
        assert "[rate]" not in text


class TestOverrides:
    def test_flags_replace_values(self):
        cfg = with_overrides(parse_config(MINIMAL), seed=7, workers=4, output_dir="elsewhere")
        assert (cfg.seed, cfg.workers, cfg.output_dir) == (7, 4, "elsewhere")
        assert cfg.problem == "sign_drift"

    def test_none_means_not_given(self):
        cfg = parse_config(MINIMAL)
        assert with_overrides(cfg, seed=None, workers=None) is cfg

    def test_invalid_override(self):
        with pytest.raises(ConfigError, match="override"):
            with_overrides(parse_config(MINIMAL), workers=0)

    def test_problem_override_is_checked(self):
        with pytest.raises(ConfigError):
            with_overrides(parse_config(MINIMAL), problem="nope")

    def test_configs_are_frozen(self):
        cfg = build_config({"subcommand": "rate"})
        with pytest.raises(Exception):
            cfg.seed = 5
        assert isinstance(cfg, RunConfig)


class TestShippedExperiments:
    @pytest.mark.parametrize("path", sorted(EXPERIMENTS.glob("*.ini")), ids=lambda p: p.stem)
    def test_parses(self, path):
        cfg = parse_config(path.read_text(encoding="utf-8"))
        assert cfg.seed == 42
        assert cfg.output_dir.startswith("out/")

    def test_acceptance_bands(self):
        cfg = parse_config((EXPERIMENTS / "rate.ini").read_text(encoding="utf-8"))
        assert (cfg.rate.slope_lower, cfg.rate.slope_upper) == (-0.65, -0.35)
        holder = parse_config((EXPERIMENTS / "holder_terminal.ini").read_text(encoding="utf-8"))
        assert holder.rate.norm == "terminal_stopping"
        assert holder.rate.slope_upper == -0.15
