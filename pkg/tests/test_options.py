from __future__ import annotations

from pathlib import Path

import pytest

from trollgraph import errors
from trollgraph.crf import Decoding
from trollgraph.features import FeatureSet
from trollgraph.models import DownstreamFeatures
from trollgraph.options import (
    DEFAULT_CONFIG,
    DEFAULT_OPTIONS,
    RunConfig,
    load_config,
    merge_with_default_config,
    merge_with_default_options,
    training_options,
    validate_config,
)


class DescribeMergeWithDefaultOptions:
    def it_adds_default_options(self):
        options = merge_with_default_options({"workers": 5})
        assert options == {**DEFAULT_OPTIONS, "workers": 5}  # type: ignore  # noqa: PGH003

    def it_returns_default_options_if_none(self):
        options = merge_with_default_options()
        assert options == DEFAULT_OPTIONS


class DescribeMergeWithDefaultConfig:
    def it_adds_default_values(self):
        config = merge_with_default_config({"k": 3})
        assert config == {**DEFAULT_CONFIG, "k": 3}  # type: ignore  # noqa: PGH003

    def it_returns_the_defaults_if_none(self):
        assert merge_with_default_config() == DEFAULT_CONFIG


class DescribeLoadConfig:
    def it_reads_a_toml_file(self, tmp_path: Path):
        path = tmp_path / "run.toml"
        path.write_text(
            'model_kind = "hybrid"\nk = 4\nl2_grid = [0.5]\n\n'
            "[optim]\nmax_iterations = 50\n"
        )
        assert load_config(path) == {
            "model_kind": "hybrid",
            "k": 4,
            "l2_grid": [0.5],
            "optim": {"max_iterations": 50},
        }

    def it_rejects_unknown_keys(self, tmp_path: Path):
        path = tmp_path / "run.toml"
        path.write_text("folds = 4\n")
        with pytest.raises(errors.InvalidConfigurationError, match="folds"):
            load_config(path)

    def it_rejects_unknown_optimizer_settings(self, tmp_path: Path):
        path = tmp_path / "run.toml"
        path.write_text("[optim]\nstep = 1.0\n")
        with pytest.raises(errors.InvalidConfigurationError, match="step"):
            load_config(path)

    def it_reports_unreadable_files(self, tmp_path: Path):
        with pytest.raises(errors.InvalidConfigurationError):
            load_config(tmp_path / "missing.toml")


class DescribeValidateConfig:
    def it_accepts_the_defaults(self):
        assert validate_config(merge_with_default_config()) == DEFAULT_CONFIG

    @pytest.mark.parametrize(
        "override",
        [
            {"model_kind": "ensemble"},
            {"features": "fancy"},
            {"decoding": "viterbi"},
            {"downstream_features": "predicted"},
            {"k": 1},
            {"threads": 0},
            {"k": 3, "tune_fold": 3},
            {"max_edit": -1},
            {"report_threshold": 1.5},
            {"l2_grid": []},
            {"l2_grid": [-1.0]},
            {"min_count_grid": [0]},
            {"optim": {"c1": 0.95}},
        ],
    )
    def it_rejects_invalid_values(self, override: RunConfig):
        with pytest.raises(errors.InvalidConfigurationError):
            validate_config(merge_with_default_config(override))

    def it_checks_that_required_paths_exist(self, tmp_path: Path):
        config = merge_with_default_config({"model": str(tmp_path / "missing.json")})
        with pytest.raises(errors.InvalidConfigurationError, match="model"):
            validate_config(config, existing=["model"])

    def it_accepts_existing_paths(self, tmp_path: Path):
        config = merge_with_default_config({"lexicons": str(tmp_path)})
        assert validate_config(config, existing=["lexicons"]) is config


class DescribeTrainingOptions:
    def it_uses_the_first_grid_values_by_default(self):
        config = merge_with_default_config(
            {"l2_grid": [0.3, 3.0], "min_count_grid": [2, 4]}
        )
        options = training_options(config)
        assert options.l2 == 0.3
        assert options.features.min_count == 2

    def it_takes_the_given_hyperparameters(self):
        options = training_options(merge_with_default_config(), l2=5.0, min_count=3)
        assert options.l2 == 5.0
        assert options.features.min_count == 3

    def it_converts_the_enumerations(self):
        config = merge_with_default_config(
            {
                "features": "enhanced",
                "decoding": "marginal",
                "downstream_features": "cross_val_predicted",
                "optim": {"max_iterations": 7},
                "threads": 2,
            }
        )
        options = training_options(config)
        assert options.features.feature_set is FeatureSet.ENHANCED
        assert options.decoding is Decoding.MARGINAL
        assert options.downstream_features is DownstreamFeatures.CROSS_VAL_PREDICTED
        assert options.optim.max_iterations == 7
        assert options.threads == 2
        assert options.inner_folds == config["k"]
