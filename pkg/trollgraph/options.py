"""Options module.

This module defines the options that can be used to configure a run: the
`RunConfig` read from a TOML file and overridden by command-line flags, and the
`ExperimentOptions` of the cross-validation runner.
"""

from __future__ import annotations

import asyncio
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Mapping, TypedDict, Union

import eventemitter
import toml

from trollgraph import errors, events
from trollgraph.crf import Decoding
from trollgraph.evaluation import REPORT_THRESHOLD
from trollgraph.features import FeatureConfig, FeatureSet
from trollgraph.models import DownstreamFeatures, ModelKind, TrainingOptions
from trollgraph.optim import OptimConfig


class OptimSettings(TypedDict, total=False):
    """Minimizer settings, the fields of `optim.OptimConfig`."""

    memory: int
    max_iterations: int
    gradient_tolerance: float
    c1: float
    c2: float


class RunConfig(TypedDict, total=False):
    """Run configuration.

    Attributes:
        dump (str): The comment dump, trees or snippet file read by the command.
        lexicons (str): The lexicon directory. Empty for the bundled lexicons.
        sidecars (str): A sidecar annotation file. Empty for none.
        model (str): The model file written by `train` and read by `predict`.
        out (str): The output directory.
        features (str): `basic` or `enhanced`.
        response_context (bool): Give response bags the suspect's features too.
        model_kind (str): `baseline`, `joint` or `hybrid`.
        k (int): Number of folds.
        seed (int): The seed of every random choice, recorded in the artifact headers.
        tune_fold (int): The fold used to pick the hyperparameters.
        l2_grid (list[float]): Candidate regularization strengths.
        min_count_grid (list[int]): Candidate vocabulary cutoffs.
        optim (OptimSettings): Minimizer settings.
        keyword (str): The keyword that marks a suspect's replies.
        max_edit (int): The maximum edit distance between a word and the keyword.
        downstream_features (str): `gold` or `cross_val_predicted`.
        decoding (str): `map` or `marginal`.
        threads (int): The number of threads for training.
        strict (bool): Fail on the first malformed record instead of skipping it.
        report_threshold (float): The minimum share of a strategy class in the report.
    """

    dump: str
    lexicons: str
    sidecars: str
    model: str
    out: str
    features: str
    response_context: bool
    model_kind: str
    k: int
    seed: int
    tune_fold: int
    l2_grid: List[float]
    min_count_grid: List[int]
    optim: OptimSettings
    keyword: str
    max_edit: int
    downstream_features: str
    decoding: str
    threads: int
    strict: bool
    report_threshold: float


DEFAULT_CONFIG: RunConfig = {
    "dump": "",
    "lexicons": "",
    "sidecars": "",
    "model": "model.json",
    "out": ".",
    "features": FeatureSet.BASIC.value,
    "response_context": False,
    "model_kind": ModelKind.JOINT.value,
    "k": 5,
    "seed": 0,
    "tune_fold": 0,
    "l2_grid": [0.01, 0.1, 1.0, 10.0],
    "min_count_grid": [1],
    "optim": {},
    "keyword": "troll",
    "max_edit": 1,
    "downstream_features": DownstreamFeatures.GOLD.value,
    "decoding": Decoding.MAP.value,
    "threads": 1,
    "strict": False,
    "report_threshold": REPORT_THRESHOLD,
}

_ENUMERATIONS: Mapping[str, Iterable[str]] = {
    "features": [member.value for member in FeatureSet],
    "model_kind": [member.value for member in ModelKind],
    "downstream_features": [member.value for member in DownstreamFeatures],
    "decoding": [member.value for member in Decoding],
}


def merge_with_default_config(config: RunConfig | None = None) -> RunConfig:
    """Merge the given configuration with the default one.

    Args:
        config (RunConfig): The configuration to merge.

    Returns:
        RunConfig: The merged configuration.
    """
    return {**DEFAULT_CONFIG, **(config or {})}  # type: ignore   # noqa: PGH003


def load_config(path: Union[str, Path]) -> RunConfig:
    """Read a configuration file.

    Args:
        path (str | Path): A TOML file whose top-level keys are `RunConfig` fields,
            with the minimizer settings in an `[optim]` table.

    Returns:
        RunConfig: The configuration found in the file, without defaults.

    Raises:
        errors.InvalidConfigurationError: If the file cannot be read or holds unknown
            keys.
    """
    try:
        loaded: Dict[str, Any] = toml.load(str(path))
    except (OSError, toml.TomlDecodeError) as e:
        msg = f'Cannot read the configuration file "{path}": {e}'
        raise errors.InvalidConfigurationError(msg) from e
    unknown = set(loaded) - set(RunConfig.__annotations__)
    if unknown:
        msg = f"Unknown configuration keys: {', '.join(sorted(unknown))}."
        raise errors.InvalidConfigurationError(msg)
    unknown = set(loaded.get("optim", {})) - set(OptimSettings.__annotations__)
    if unknown:
        msg = f"Unknown optimizer settings: {', '.join(sorted(unknown))}."
        raise errors.InvalidConfigurationError(msg)
    return loaded  # type: ignore[return-value]


def _positive(config: RunConfig, key: str) -> None:
    value = config[key]  # type: ignore[literal-required]
    if not isinstance(value, (int, float)) or value <= 0:
        msg = f"{key} must be positive (got {value!r})."
        raise errors.InvalidConfigurationError(msg)


def validate_config(config: RunConfig, *, existing: Iterable[str] = ()) -> RunConfig:
    """Check a merged configuration.

    Args:
        config (RunConfig): The configuration, merged with the defaults.
        existing (Iterable[str]): The path fields that must name existing files or
            directories for the command at hand.

    Returns:
        RunConfig: The same configuration.

    Raises:
        errors.InvalidConfigurationError: If an enumeration holds an unknown value,
            a number is out of range or a required path does not exist.
    """
    for key, allowed in _ENUMERATIONS.items():
        value = config[key]  # type: ignore[literal-required]
        if value not in allowed:
            msg = f"{key} must be one of {', '.join(allowed)} (got {value!r})."
            raise errors.InvalidConfigurationError(msg)
    for key in ("k", "threads"):
        _positive(config, key)
    if config["k"] < 2:  # noqa: PLR2004
        msg = f"k must be at least 2 (got {config['k']})."
        raise errors.InvalidConfigurationError(msg)
    if not 0 <= config["tune_fold"] < config["k"]:
        msg = f"tune_fold must lie in [0, {config['k']}) (got {config['tune_fold']})."
        raise errors.InvalidConfigurationError(msg)
    if config["max_edit"] < 0:
        msg = f"max_edit cannot be negative (got {config['max_edit']})."
        raise errors.InvalidConfigurationError(msg)
    if not 0 <= config["report_threshold"] <= 1:
        msg = "report_threshold must lie in [0, 1]."
        raise errors.InvalidConfigurationError(msg)
    if not config["l2_grid"] or any(value < 0 for value in config["l2_grid"]):
        msg = "l2_grid must hold non-negative values."
        raise errors.InvalidConfigurationError(msg)
    if not config["min_count_grid"] or any(
        value < 1 for value in config["min_count_grid"]
    ):
        msg = "min_count_grid must hold values of at least 1."
        raise errors.InvalidConfigurationError(msg)
    try:
        OptimConfig(**config["optim"])
    except (TypeError, ValueError) as e:
        msg = f"Invalid optimizer settings: {e}"
        raise errors.InvalidConfigurationError(msg) from e
    for key in existing:
        value = config[key]  # type: ignore[literal-required]
        if not value or not Path(value).exists():
            msg = f'The {key} path "{value}" does not exist.'
            raise errors.InvalidConfigurationError(msg)
    return config


def training_options(
    config: RunConfig, l2: float | None = None, min_count: int | None = None
) -> TrainingOptions:
    """The training options of a configuration.

    Args:
        config (RunConfig): A validated configuration.
        l2 (float, optional): The regularization strength. Defaults to the first value
            of the grid.
        min_count (int, optional): The vocabulary cutoff. Defaults to the first value of
            the grid.
    """
    return TrainingOptions(
        features=FeatureConfig(
            feature_set=FeatureSet(config["features"]),
            min_count=config["min_count_grid"][0] if min_count is None else min_count,
            response_context=config["response_context"],
        ),
        l2=config["l2_grid"][0] if l2 is None else l2,
        optim=OptimConfig(**config["optim"]),
        downstream_features=DownstreamFeatures(config["downstream_features"]),
        decoding=Decoding(config["decoding"]),
        inner_folds=config["k"],
        seed=config["seed"],
        threads=config["threads"],
    )


class ExperimentOptions(TypedDict, total=False):
    """Experiment runner options.

    Attributes:
        workers (int): The number of worker tasks processing folds concurrently.
        event_emitter_factory (Callable[[], events.EventEmitter]): A factory function
            to create the event emitter of the experiment. It is called inside the
            running event loop.
    """

    workers: int
    event_emitter_factory: Callable[[], events.EventEmitter]


DEFAULT_OPTIONS: ExperimentOptions = {
    "workers": 1,
    "event_emitter_factory": lambda: eventemitter.EventEmitter(
        asyncio.get_running_loop()
    ),
}


def merge_with_default_options(
    options: ExperimentOptions | None = None,
) -> ExperimentOptions:
    """Merge the given options with the default options.

    Args:
        options (ExperimentOptions): The options to merge.

    Returns:
        ExperimentOptions: The merged options.
    """
    return {**DEFAULT_OPTIONS, **(options or {})}  # type: ignore   # noqa: PGH003
