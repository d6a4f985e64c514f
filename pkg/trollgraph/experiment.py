"""Experiment module.

This module defines the `Experiment` class that runs the cross-validation protocol
asynchronously: the hyperparameters are chosen on the tuning fold, then every other
fold is predicted by a model trained on the remaining reporting folds, and the
pooled predictions are scored.
"""

from __future__ import annotations

import asyncio
import functools
import itertools
import logging
from dataclasses import dataclass
from typing import (
    Awaitable,
    Callable,
    Dict,
    List,
    Optional,
    Sequence,
    Tuple,
)

import numpy as np
from typing_extensions import Self  # type: ignore[attr-defined]

from trollgraph import errors, events
from trollgraph.evaluation import (
    FoldPlan,
    MetricsTable,
    Report,
    class_distribution,
    evaluate,
    make_folds,
    report,
)
from trollgraph.features import SnippetBags
from trollgraph.models import ModelKind, train_model
from trollgraph.options import (
    ExperimentOptions,
    RunConfig,
    merge_with_default_config,
    merge_with_default_options,
    training_options,
)
from trollgraph.snippets import SnippetLabels, Task

__all__ = [
    "TuningResult",
    "FoldResult",
    "ExperimentResult",
    "Experiment",
    "tuning_score",
]

logger = logging.getLogger(__name__)

Hyperparameters = Tuple[float, int]


@dataclass(frozen=True)
class TuningResult:
    """The grid scores on the tuning fold and the chosen hyperparameters.

    Attributes:
        l2 (float): The chosen regularization strength.
        min_count (int): The chosen vocabulary cutoff.
        scores (Dict[Tuple[float, int], float]): The score of every grid point.
    """

    l2: float
    min_count: int
    scores: Dict[Hyperparameters, float]


@dataclass(frozen=True)
class FoldResult:
    fold: int
    training_ids: Tuple[str, ...]
    snippet_ids: Tuple[str, ...]
    predictions: Tuple[SnippetLabels, ...]


@dataclass(frozen=True)
class ExperimentResult:
    plan: FoldPlan
    tuning: TuningResult
    folds: Tuple[FoldResult, ...]
    gold: Tuple[SnippetLabels, ...]
    predicted: Tuple[SnippetLabels, ...]
    metrics: MetricsTable
    report: Report


def tuning_score(table: MetricsTable) -> float:
    """Mean over the tasks of the macro F1 of the classes present in the gold labels."""
    scores = []
    for task in Task:
        present = [row.f1 for row in table.for_task(task) if row.support > 0]
        if present:
            scores.append(float(np.mean(present)))
    return float(np.mean(scores)) if scores else 0.0


class Experiment:
    """An asynchronous runner of the cross-validation protocol over featurized snippets.

    Args:
        examples (Sequence[Tuple[SnippetBags, SnippetLabels]]): The labeled snippets.
        config (RunConfig, optional): The run configuration: model kind, folds, seed,
            grids and training settings.
        options (ExperimentOptions, optional): The options of the runner.
    """

    _todo: asyncio.Queue[Callable[[], Awaitable[None]]]
    _bags: Dict[str, SnippetBags]
    _gold: Dict[str, SnippetLabels]
    _config: RunConfig
    _options: ExperimentOptions
    _num_workers: int
    _handlers: List[Tuple[events.Event, events.Handler]]
    _event_emitter: Optional[events.EventEmitter]
    _workers: List[asyncio.Task]
    _failures: List[errors.Error]
    _plan: Optional[FoldPlan]
    _tuning: Optional[TuningResult]
    _folds: Dict[int, FoldResult]
    _result: Optional[ExperimentResult]

    def __init__(
        self,
        examples: Sequence[Tuple[SnippetBags, Optional[SnippetLabels]]],
        config: RunConfig | None = None,
        options: ExperimentOptions | None = None,
    ) -> None:
        missing = [bags.snippet_id for bags, labels in examples if labels is None]
        if missing:
            raise errors.MissingLabelsError(missing)
        self._bags = {bags.snippet_id: bags for bags, _ in examples}
        self._gold = {
            bags.snippet_id: labels for bags, labels in examples if labels is not None
        }
        if len(self._bags) != len(examples):
            msg = "Snippet ids must be unique."
            raise ValueError(msg)
        self._config = merge_with_default_config(config)
        self._options = merge_with_default_options(options)
        self._todo: asyncio.Queue[Callable[[], Awaitable[None]]] = asyncio.Queue()
        self._num_workers = self._options["workers"]
        self._handlers = []
        self._event_emitter = None
        self._workers = []
        self._failures = []
        self._plan = None
        self._tuning = None
        self._folds = {}
        self._result = None

    async def run(self) -> ExperimentResult:
        """Run the experiment.

        Returns:
            ExperimentResult: The pooled predictions, their metrics and the report.

        Raises:
            errors.FoldError: If there are fewer snippets than folds, or a reported
                fold saw a tuning snippet.
            errors.Error: The first error raised while training or predicting a fold.
                Exceptions from outside this package arrive wrapped in
                `errors.FoldJobError`.
        """
        self._event_emitter = self._options["event_emitter_factory"]()
        for event, handler in self._handlers:
            self._event_emitter.on(event, handler)
        self._folds.clear()
        self._failures.clear()

        self._plan = make_folds(
            self._bags,
            self._config["k"],
            self._config["seed"],
            self._config["tune_fold"],
        )
        logger.info("Fold sizes: %s", self._plan.sizes)

        self._tuning = await self._tune(self._plan)
        self._emit_event(events.Event.TUNED, self._tuning)

        plan, tuning = self._plan, self._tuning
        await self._run_all(
            [
                functools.partial(self._evaluate_fold, plan, fold, tuning)
                for fold in plan.reporting_folds
            ]
        )
        self._result = self._pool(plan, tuning)
        self._emit_event(events.Event.DONE, self._result)
        await asyncio.sleep(0)
        return self._result

    async def _run_all(self, jobs: Sequence[Callable[[], Awaitable[None]]]) -> None:
        for job in jobs:
            await self._todo.put(job)

        self._workers = [
            asyncio.create_task(self._worker()) for _ in range(self._num_workers)
        ]
        await self._todo.join()

        for worker in self._workers:
            worker.cancel()

        if self._failures:
            raise self._failures[0]

    async def _worker(self) -> None:
        while True:
            try:
                await self._process_one()
            except asyncio.CancelledError:
                return

    async def _process_one(self) -> None:
        job = await self._todo.get()
        try:
            await job()
        except errors.Error as e:
            self._emit_event(events.Event.ERROR, e)
            self._failures.append(e)
        except Exception as e:
            logger.exception("Fold job failed")
            error = errors.FoldJobError(e)
            error.__cause__ = e
            self._emit_event(events.Event.ERROR, error)
            self._failures.append(error)
        finally:
            self._todo.task_done()

    def _fit_predict(
        self,
        training_ids: Sequence[str],
        test_ids: Sequence[str],
        l2: float,
        min_count: int,
    ) -> List[SnippetLabels]:
        model = train_model(
            ModelKind(self._config["model_kind"]),
            [self._bags[sid] for sid in training_ids],
            [self._gold[sid] for sid in training_ids],
            training_options(self._config, l2, min_count),
        )
        return [model.predict(self._bags[sid]) for sid in test_ids]

    async def _tune(self, plan: FoldPlan) -> TuningResult:
        grid = list(
            itertools.product(self._config["l2_grid"], self._config["min_count_grid"])
        )
        if len(grid) == 1:
            l2, min_count = grid[0]
            return TuningResult(l2, min_count, {})

        training_ids = plan.ids_outside([plan.tune_fold])
        tune_ids = plan.fold(plan.tune_fold)
        gold = [self._gold[sid] for sid in tune_ids]
        scores: Dict[Hyperparameters, float] = {}

        async def score(l2: float, min_count: int) -> None:
            predicted = await asyncio.to_thread(
                self._fit_predict, training_ids, tune_ids, l2, min_count
            )
            scores[(l2, min_count)] = tuning_score(evaluate(gold, predicted))
            logger.info(
                "l2=%g min_count=%d: tuning score %.4f",
                l2,
                min_count,
                scores[(l2, min_count)],
            )

        await self._run_all(
            [functools.partial(score, l2, count) for l2, count in grid]
        )
        l2, min_count = max(grid, key=lambda point: (scores[point], -grid.index(point)))
        return TuningResult(l2, min_count, {point: scores[point] for point in grid})

    async def _evaluate_fold(
        self, plan: FoldPlan, fold: int, tuning: TuningResult
    ) -> None:
        training_ids = plan.ids_outside([plan.tune_fold, fold])
        test_ids = plan.fold(fold)
        predictions = await asyncio.to_thread(
            self._fit_predict, training_ids, test_ids, tuning.l2, tuning.min_count
        )
        result = FoldResult(
            fold, tuple(training_ids), tuple(test_ids), tuple(predictions)
        )
        self._folds[fold] = result
        logger.info("Fold %d done: %d snippet(s) predicted", fold, len(test_ids))
        self._emit_event(events.Event.FOLD_DONE, result)

    def _pool(self, plan: FoldPlan, tuning: TuningResult) -> ExperimentResult:
        folds = tuple(self._folds[fold] for fold in plan.reporting_folds)
        tuning_ids = set(plan.fold(plan.tune_fold))
        for result in folds:
            if tuning_ids & (set(result.snippet_ids) | set(result.training_ids)):
                msg = f"Fold {result.fold} used snippets of the tuning fold."
                raise errors.FoldError(msg)
        snippet_ids = [sid for result in folds for sid in result.snippet_ids]
        gold = tuple(self._gold[sid] for sid in snippet_ids)
        predicted = tuple(label for result in folds for label in result.predictions)
        everything = list(self._gold.values())
        metrics = evaluate(
            gold,
            predicted,
            {task: class_distribution(everything, task) for task in Task},
        )
        return ExperimentResult(
            plan=plan,
            tuning=tuning,
            folds=folds,
            gold=gold,
            predicted=predicted,
            metrics=metrics,
            report=report(metrics, self._config["report_threshold"]),
        )

    def on(self, event: events.Event, handler: events.Handler) -> Self:
        """Add an event handler to the experiment.

        An event is emitted when
        - the hyperparameters are chosen (`Event.TUNED`): the `TuningResult` is passed
        to the handler.
        - a reporting fold is predicted (`Event.FOLD_DONE`): the `FoldResult` is passed
        to the handler.
        - an error occurs while processing a fold (`Event.ERROR`): the `Error` object is
        passed to the handler.
        - the experiment is over (`Event.DONE`): the `ExperimentResult` is passed to the
        handler.

        Args:
            event (Event): The event to add the handler to.
            handler (Callable): The handler to add to the event.
        """
        self._handlers.append((event, handler))
        if self._event_emitter is not None:
            self._event_emitter.on(event, handler)
        return self

    def _emit_event(self, event: events.Event, *data) -> None:
        if self._event_emitter is not None:
            self._event_emitter.emit(event, *data, experiment=self)

    @property
    def plan(self) -> Optional[FoldPlan]:
        """The fold plan of the last run."""
        return self._plan

    @property
    def tuning(self) -> Optional[TuningResult]:
        return self._tuning

    @property
    def folds(self) -> Dict[int, FoldResult]:
        """The reporting folds finished so far, by index."""
        return self._folds

    @property
    def result(self) -> Optional[ExperimentResult]:
        return self._result

    @property
    def num_workers(self) -> int:
        """The number of worker tasks processing folds."""
        return self._num_workers

    @property
    def config(self) -> RunConfig:
        """The configuration used by the experiment."""
        return self._config

    @property
    def options(self) -> ExperimentOptions:
        """The options used by the experiment."""
        return self._options
