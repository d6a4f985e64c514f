"""Event handlers for experiments.

This module defines the event handlers that can be used to
do some action when a specific event occurs, like recording the
hyperparameters chosen on the tuning fold, printing progress as folds
finish, or logging errors. The handlers are called with the current
`Experiment` instance (passed through the `experiment` kwarg) and the event data.
"""

from __future__ import annotations

from enum import Enum
from typing import TYPE_CHECKING, Protocol, Union

from typing_extensions import Self  # type: ignore[attr-defined]

from trollgraph import errors

if TYPE_CHECKING:
    from trollgraph.experiment import (
        Experiment,
        ExperimentResult,
        FoldResult,
        TuningResult,
    )


class Event(Enum):
    TUNED = "tuned"
    FOLD_DONE = "fold_done"
    ERROR = "error"
    DONE = "done"


class TunedHandler(Protocol):
    """Handler for when the hyperparameters have been chosen on the tuning fold."""

    def __call__(self, tuning: TuningResult, experiment: Experiment) -> None: ...


class FoldDoneHandler(Protocol):
    """Handler for when a reporting fold has been trained and predicted."""

    def __call__(self, fold: FoldResult, experiment: Experiment) -> None: ...


class ErrorHandler(Protocol):
    """Handler for errors occurred during an experiment."""

    def __call__(self, error: errors.Error, experiment: Experiment) -> None: ...


class DoneHandler(Protocol):
    """Handler for when every fold has been pooled into the final metrics."""

    def __call__(self, result: ExperimentResult, experiment: Experiment) -> None: ...


Handler = Union[TunedHandler, FoldDoneHandler, ErrorHandler, DoneHandler]


class EventEmitter(Protocol):
    """Protocol for an event emitter."""

    def emit(
        self,
        event: Event,
        *data: Union[TuningResult, FoldResult, errors.Error, ExperimentResult],
        experiment: Experiment,
    ) -> Self: ...

    def on(self, event: Event, handler: Handler) -> Self: ...
