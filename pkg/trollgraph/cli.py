"""Console script for trollgraph."""

from __future__ import annotations

import asyncio
import functools
import logging
import sys
from pathlib import Path
from typing import (
    Any,
    Callable,
    Dict,
    Iterable,
    List,
    Optional,
    Sequence,
    Tuple,
    TypeVar,
    cast,
)

import click

from trollgraph import errors, events, serialization
from trollgraph.evaluation import corpus_statistics, fleiss_kappa, read_annotations
from trollgraph.experiment import Experiment, ExperimentResult, FoldResult, TuningResult
from trollgraph.features import (
    FeatureConfig,
    FeatureSet,
    SidecarAnnotation,
    SnippetBags,
    featurize_snippet,
    load_sidecars,
)
from trollgraph.lexicons import LexiconSet, bundled_lexicon_dir, load_lexicons
from trollgraph.models import ModelKind, train_model
from trollgraph.options import (
    ExperimentOptions,
    RunConfig,
    load_config,
    merge_with_default_config,
    training_options,
    validate_config,
)
from trollgraph.selfcheck import run_selfcheck
from trollgraph.snippets import (
    Snippet,
    SnippetLabels,
    build_trees,
    load_snippets,
    load_trees,
    mine_snippets,
    parse_comment_dump,
    validate_labels,
)
from trollgraph.synthetic import generate

logger = logging.getLogger(__name__)

F = TypeVar("F", bound=Callable[..., Any])

Examples = Sequence[Tuple[SnippetBags, Optional[SnippetLabels]]]
ExperimentFactory = Callable[[Examples, RunConfig, ExperimentOptions], Experiment]

_INPUT = click.Path(exists=True, dir_okay=False, path_type=Path)

_FLAG_KEYS = {
    "threads": "threads",
    "seed": "seed",
    "features": "features",
    "model": "model_kind",
    "keyword": "keyword",
    "max_edit": "max_edit",
    "out": "out",
    "lexicons": "lexicons",
    "sidecars": "sidecars",
    "model_file": "model",
    "strict": "strict",
}


def _run_options(command: F) -> F:
    """The flags shared by every data command; each one overrides the config file."""
    options = [
        click.option(
            "--config",
            "config_path",
            type=_INPUT,
            default=None,
            help="TOML configuration file.",
        ),
        click.option("--threads", type=click.IntRange(min=1), help="Training threads."),
        click.option("--seed", type=int, help="Seed of every random choice."),
        click.option(
            "--out", type=click.Path(file_okay=False), help="Output directory."
        ),
        click.option(
            "--strict/--lenient",
            default=None,
            help="Fail on the first malformed record.",
        ),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def _feature_options(command: F) -> F:
    options = [
        click.option(
            "--features",
            type=click.Choice([member.value for member in FeatureSet]),
            help="Feature set.",
        ),
        click.option(
            "--lexicons",
            type=click.Path(exists=True, file_okay=False),
            help="Lexicon directory. Defaults to the bundled lexicons.",
        ),
        click.option(
            "--sidecars",
            type=click.Path(exists=True, dir_okay=False),
            help="Sidecar annotation file.",
        ),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def _model_option(command: F) -> F:
    return click.option(
        "--model",
        type=click.Choice([member.value for member in ModelKind]),
        help="The system to train.",
    )(command)


def _exits_on_errors(command: F) -> F:
    """Turn configuration errors into usage errors and data errors into exit code 1."""

    @functools.wraps(command)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return command(*args, **kwargs)
        except errors.InvalidConfigurationError as e:
            raise click.UsageError(str(e)) from e
        except errors.Error as e:
            click.secho(f"Error: {e}", fg="red", err=True)
            raise click.exceptions.Exit(1) from e

    return cast(F, wrapper)


def _resolve(
    config_path: Optional[Path], flags: Dict[str, Any], existing: Iterable[str] = ()
) -> RunConfig:
    """File values, then flag values, then defaults."""
    config: Dict[str, Any] = dict(load_config(config_path)) if config_path else {}
    config.update(
        {
            _FLAG_KEYS[name]: value
            for name, value in flags.items()
            if name in _FLAG_KEYS and value is not None
        }
    )
    merged = merge_with_default_config(cast(RunConfig, config))
    optional = [key for key in ("lexicons", "sidecars") if merged.get(key)]
    return validate_config(merged, existing=[*existing, *optional])


def _output(config: RunConfig, name: str) -> Path:
    directory = Path(config["out"])
    directory.mkdir(parents=True, exist_ok=True)
    return directory / name


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")
    click.echo(f"Wrote {path}")


def _read_lines(path: Path) -> List[str]:
    return path.read_text(encoding="utf-8").splitlines()


def _lexicons(config: RunConfig) -> LexiconSet:
    return load_lexicons(config["lexicons"] or bundled_lexicon_dir())


def _sidecars(config: RunConfig) -> Dict[str, SidecarAnnotation]:
    if not config["sidecars"]:
        return {}
    return load_sidecars(_read_lines(Path(config["sidecars"])), strict=config["strict"])


def _featurize(
    snippets: Sequence[Tuple[Snippet, Optional[SnippetLabels]]],
    config: RunConfig,
    features: Optional[FeatureConfig] = None,
) -> List[Tuple[SnippetBags, Optional[SnippetLabels]]]:
    features = features or training_options(config).features
    lexicons = _lexicons(config)
    sidecars = _sidecars(config)
    return [
        (featurize_snippet(snippet, features, lexicons, sidecars), labels)
        for snippet, labels in snippets
    ]


def _load_labeled(
    path: Path, config: RunConfig
) -> List[Tuple[Snippet, Optional[SnippetLabels]]]:
    snippets = load_snippets(_read_lines(path), strict=config["strict"])
    for snippet, labels in snippets:
        if labels is None:
            continue
        for violation in validate_labels(snippet, labels):
            logger.warning(
                "Snippet %s violates %s: %s",
                snippet.snippet_id,
                violation.invariant,
                violation.message,
            )
    return snippets


def cli_for(experiment_factory: ExperimentFactory) -> Callable[..., int]:
    """Return a CLI function for the given experiment factory.

    Args:
        experiment_factory (ExperimentFactory): A factory function that returns an
            Experiment instance from the labeled snippets, the run configuration and
            the runner options.

    Returns:
        Callable[..., int]: A CLI function.
    """

    @click.group("trollgraph")
    @click.option(
        "--verbose", "-v", count=True, help="Log more (-v for info, -vv for debug)."
    )
    def main(verbose: int) -> None:
        """Predict trolling events in conversation snippets."""
        levels = [logging.WARNING, logging.INFO, logging.DEBUG]
        logging.basicConfig(
            level=levels[min(verbose, len(levels) - 1)],
            format="%(levelname)s %(name)s: %(message)s",
        )

    @main.command()
    @click.argument("dump", type=_INPUT)
    @_run_options
    @_exits_on_errors
    def ingest(dump: Path, config_path: Optional[Path], **flags: Any) -> None:
        """Rebuild the conversation trees of a comment dump."""
        config = _resolve(config_path, flags)
        comments = parse_comment_dump(_read_lines(dump), strict=config["strict"])
        trees = build_trees(comments)
        _write(
            _output(config, "trees.jsonl"),
            serialization.dumps_records(
                [tree.to_record() for tree in trees],
                serialization.artifact_header(config["seed"], "ingest"),
            ),
        )
        click.secho(
            f"Rebuilt {len(trees)} tree(s) from {len(comments)} comment(s)",
            fg="green",
        )

    @main.command()
    @click.argument("trees", type=_INPUT)
    @click.option("--keyword", type=str, help="Keyword of the replies to suspects.")
    @click.option("--max-edit", type=click.IntRange(min=0), help="Edits allowed.")
    @_run_options
    @_exits_on_errors
    def mine(trees: Path, config_path: Optional[Path], **flags: Any) -> None:
        """Cut the snippets around suspected trolling comments."""
        config = _resolve(config_path, flags)
        result = mine_snippets(
            load_trees(_read_lines(trees), strict=config["strict"]),
            config["keyword"],
            config["max_edit"],
        )
        _write(
            _output(config, "snippets.jsonl"),
            serialization.dumps_records(
                [snippet.to_record() for snippet in result.snippets],
                serialization.artifact_header(config["seed"], "mine"),
            ),
        )
        click.secho(f"Mined {len(result.snippets)} snippet(s)", fg="green")
        for reason, count in sorted(result.rejections.items()):
            click.echo(f"Rejected {count} suspect(s): {reason.value}")

    @main.command()
    @click.argument("snippets", type=_INPUT)
    @_feature_options
    @_run_options
    @_exits_on_errors
    def featurize(snippets: Path, config_path: Optional[Path], **flags: Any) -> None:
        """Write the feature bags of every snippet."""
        config = _resolve(config_path, flags)
        featurized = _featurize(_load_labeled(snippets, config), config)
        records = [
            {
                "snippet_id": bags.snippet_id,
                "context": dict(bags.context),
                "responses": [dict(bag) for bag in bags.responses],
                "notes": sorted(
                    bags.context.notes.union(*(bag.notes for bag in bags.responses))
                ),
            }
            for bags, _ in featurized
        ]
        _write(
            _output(config, "features.jsonl"),
            serialization.dumps_records(
                records, serialization.artifact_header(config["seed"], "featurize")
            ),
        )

    @main.command()
    @click.argument("snippets", type=_INPUT)
    @_model_option
    @click.option("--l2", type=click.FloatRange(min=0), help="Regularization strength.")
    @click.option("--model-file", type=click.Path(dir_okay=False), help="Model path.")
    @_feature_options
    @_run_options
    @_exits_on_errors
    def train(
        snippets: Path, config_path: Optional[Path], l2: Optional[float], **flags: Any
    ) -> None:
        """Train a model on labeled snippets."""
        config = _resolve(config_path, flags)
        options = training_options(config, l2)
        loaded = _load_labeled(snippets, config)
        featurized = _featurize(loaded, config, options.features)
        model = train_model(
            config["model_kind"],
            [bags for bags, _ in featurized],
            [labels for _, labels in featurized],
            options,
        )
        path = Path(config["model"])
        path.parent.mkdir(parents=True, exist_ok=True)
        serialization.save_model(
            model,
            path,
            seed=config["seed"],
            training={"l2": options.l2, "decoding": options.decoding.value},
        )
        click.secho(f"Trained a {model.kind.value} model: {path}", fg="green")

    @main.command()
    @click.argument("snippets", type=_INPUT)
    @click.option("--model-file", type=click.Path(dir_okay=False), help="Model path.")
    @click.option("--lexicons", type=click.Path(exists=True, file_okay=False))
    @click.option("--sidecars", type=click.Path(exists=True, dir_okay=False))
    @_run_options
    @_exits_on_errors
    def predict(snippets: Path, config_path: Optional[Path], **flags: Any) -> None:
        """Label snippets with a trained model."""
        config = _resolve(config_path, flags, existing=["model"])
        model = serialization.load_model(config["model"])
        loaded = _load_labeled(snippets, config)
        featurized = _featurize(loaded, config, model.features)
        _write(
            _output(config, "predictions.jsonl"),
            serialization.dumps_records(
                [
                    serialization.prediction_record(
                        bags.snippet_id, model.predict(bags)
                    )
                    for bags, _ in featurized
                ],
                serialization.artifact_header(config["seed"], "predict"),
            ),
        )

    @main.command()
    @click.argument("snippets", type=_INPUT, required=False)
    @click.option(
        "--synthetic",
        type=click.IntRange(min=1),
        help="Evaluate on N generated snippets instead of a snippet file.",
    )
    @_model_option
    @_feature_options
    @_run_options
    @_exits_on_errors
    def evaluate(
        snippets: Optional[Path],
        config_path: Optional[Path],
        synthetic: Optional[int],
        **flags: Any,
    ) -> None:
        """Run the cross-validation protocol and write the report."""
        if (snippets is None) == (synthetic is None):
            msg = "Give either a snippet file or --synthetic N."
            raise click.UsageError(msg)
        config = _resolve(config_path, flags)
        loaded: Sequence[Tuple[Snippet, Optional[SnippetLabels]]] = (
            generate(synthetic, config["seed"])
            if synthetic is not None
            else _load_labeled(cast(Path, snippets), config)
        )
        experiment = experiment_factory(
            _featurize(loaded, config), config, {"workers": config["threads"]}
        )
        experiment.on(events.Event.TUNED, _echo_tuned).on(
            events.Event.FOLD_DONE, _echo_fold
        )
        result: ExperimentResult = asyncio.run(experiment.run())
        header = serialization.artifact_header(config["seed"], "evaluate")
        _write(_output(config, "report.txt"), f"{header}\n{result.report.text}")
        _write(_output(config, "report.jsonl"), f"{header}\n{result.report.to_jsonl()}")
        click.echo(result.report.text, nl=False)

    @main.command()
    @click.argument("annotations", type=_INPUT)
    @click.option("--delimiter", default=",", show_default=True, help="Delimiter.")
    @_exits_on_errors
    def kappa(annotations: Path, delimiter: str) -> None:
        """Fleiss kappa of every aspect of an annotation file."""
        tables = read_annotations(_read_lines(annotations), delimiter)
        for aspect, table in tables.items():
            click.echo(
                f"{aspect}: {fleiss_kappa(table):.3f} "
                f"({len(table.items)} items, {table.annotators} annotators)"
            )

    @main.command()
    @click.argument("snippets", type=_INPUT)
    @click.option("--sidecars", type=click.Path(exists=True, dir_okay=False))
    @_run_options
    @_exits_on_errors
    def stats(snippets: Path, config_path: Optional[Path], **flags: Any) -> None:
        """Count the conversations, sentences and tokens of a snippet file."""
        config = _resolve(config_path, flags)
        loaded = _load_labeled(snippets, config)
        counts = corpus_statistics(
            [snippet for snippet, _ in loaded], _sidecars(config)
        )
        click.echo(
            f"{counts.conversations} conversations with {counts.sentences} sentences "
            f"and {counts.tokens} tokens"
        )

    @main.command()
    @click.option("--seed", type=int, default=0, show_default=True)
    @click.option("--draws", type=click.IntRange(min=1), default=200, show_default=True)
    def selfcheck(seed: int, draws: int) -> None:
        """Check exact inference and the gradients against brute-force oracles."""
        result = run_selfcheck(seed=seed, draws=draws)
        for line in result.lines():
            click.echo(line)
        if not result.passed:
            click.secho("Self-check failed", fg="red", err=True)
            raise click.exceptions.Exit(1)
        click.secho("Self-check passed", fg="green")

    return main


def _echo_tuned(tuning: TuningResult, experiment: Experiment) -> None:  # noqa: ARG001
    click.echo(f"Tuned: l2={tuning.l2:g} min_count={tuning.min_count}")


def _echo_fold(fold: FoldResult, experiment: Experiment) -> None:  # noqa: ARG001
    click.echo(f"Fold {fold.fold}: {len(fold.snippet_ids)} snippet(s)")


main = cli_for(Experiment)


if __name__ == "__main__":
    sys.exit(main())
