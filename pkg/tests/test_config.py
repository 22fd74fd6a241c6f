"""Tests for run configuration loading and overrides."""

import json
from pathlib import Path

import pytest

from minmax_bnn.config import (
    PRESETS_DIR,
    RunConfig,
    build_run_config,
    config_keys,
    load_run_config,
    parse_overrides,
    read_config_file,
)
from minmax_bnn.errors import ConfigError, DataError


class TestParseOverrides:
    def test_pairs(self):
        assert parse_overrides(["--ns", "1", "--lr=0.01"]) == {"ns": "1", "lr": "0.01"}

    def test_dashes_become_underscores(self):
        assert parse_overrides(["--batch-per-class", "4"]) == {"batch_per_class": "4"}

    def test_missing_value(self):
        with pytest.raises(ConfigError):
            parse_overrides(["--ns"])

    def test_bare_token(self):
        with pytest.raises(ConfigError):
            parse_overrides(["ns", "1"])


class TestBuildRunConfig:
    def test_defaults(self):
        config = build_run_config({})
        assert config.ns == 5
        assert config.lr == 1e-3
        assert config.classes == list(range(10))
        assert config.netv_direction == "min"

    def test_overrides_win(self):
        config = build_run_config({"ns": 5, "lr": 0.001}, {"ns": "1", "classes": "0,1,2"})
        assert config.ns == 1
        assert config.classes == [0, 1, 2]
        assert config.lr == 0.001

    def test_coercion(self):
        config = build_run_config(
            {}, {"zero_sigma": "true", "train_per_class": "none", "output_dir": "out"}
        )
        assert config.zero_sigma is True
        assert config.train_per_class is None
        assert config.output_dir == Path("out")

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="nsteps"):
            build_run_config({"nsteps": 3})

    @pytest.mark.parametrize(
        "overrides",
        [
            {"ns": "five"},
            {"ns": "0"},
            {"ns": 2.5},
            {"arch": "vit"},
            {"classes": "1,1"},
            {"beta1": "1.0"},
            {"eps_sq": "0"},
            {"netv_direction": "up"},
            {"zero_sigma": "maybe"},
        ],
    )
    def test_invalid_values(self, overrides):
        with pytest.raises(ConfigError):
            build_run_config({}, overrides)

    def test_resolved_lists_every_key(self):
        resolved = build_run_config({}, {"train_images": "a/b"}).resolved()
        assert sorted(resolved) == sorted(config_keys())
        assert resolved["train_images"] == str(Path("a/b"))
        json.dumps(resolved)

    def test_split_configs(self):
        config = build_run_config({}, {"pairwise_scope": "whole_batch", "feature_dim": "16"})
        assert config.train_config().pairwise_scope == "whole_batch"
        assert config.rate_config().feature_dim == 16


class TestConfigFiles:
    def test_yaml_and_json(self, tmp_path):
        (tmp_path / "a.yaml").write_text("ns: 2\nlr: 0.01\n", encoding="utf-8")
        (tmp_path / "b.json").write_text('{"ns": 2, "lr": 0.01}', encoding="utf-8")
        assert read_config_file(tmp_path / "a.yaml") == read_config_file(tmp_path / "b.json")

    def test_top_level_must_be_mapping(self, tmp_path):
        (tmp_path / "c.yaml").write_text("- 1\n- 2\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            read_config_file(tmp_path / "c.yaml")

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_run_config(tmp_path / "absent.yaml")

    @pytest.mark.parametrize("name,ns", [("desk_ns1", 1), ("desk_ns5", 5), ("desk_ns1_v0", 1)])
    def test_presets(self, name, ns):
        config = load_run_config(PRESETS_DIR / f"{name}.yaml")
        assert config.ns == ns
        assert config.classes == [0, 1, 2]
        assert config.arch == "conv-res-lite"
        assert config.feature_dim == 128
        assert config.lr == 0.001

    def test_sigma_of_ln2_preset(self):
        config = load_run_config(PRESETS_DIR / "desk_ns1_v0.yaml")
        assert config.sigma_init == pytest.approx(0.6931471805599453)


class TestDataPaths:
    def test_unset_path(self):
        with pytest.raises(DataError):
            RunConfig().check_data_paths()

    def test_missing_path(self, idx_dir):
        config = RunConfig(
            train_images=idx_dir / "nope",
            train_labels=idx_dir,
            test_images=idx_dir,
            test_labels=idx_dir,
        )
        with pytest.raises(DataError, match="train_images"):
            config.check_data_paths()
