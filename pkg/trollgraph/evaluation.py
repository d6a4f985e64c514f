"""Cross-validation folds, per-class metrics, reports and annotator agreement."""

from __future__ import annotations

import json
import logging
import random
import re
from collections import defaultdict
from dataclasses import dataclass
from typing import (
    Dict,
    Iterable,
    List,
    Mapping,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
)

import numpy as np
from sklearn.metrics import precision_recall_fscore_support

from trollgraph import errors, parsers
from trollgraph.features import SidecarAnnotation, tokenize
from trollgraph.snippets import AnyLabel, Snippet, SnippetLabels, Task

__all__ = [
    "REPORT_THRESHOLD",
    "FoldPlan",
    "MetricRow",
    "MetricsTable",
    "AnnotationTable",
    "Report",
    "CorpusStatistics",
    "make_folds",
    "prf1",
    "evaluate",
    "accuracy",
    "class_distribution",
    "fleiss_kappa",
    "read_annotations",
    "report",
    "corpus_statistics",
]

logger = logging.getLogger(__name__)

REPORT_THRESHOLD = 0.05

_SENTENCE_END = re.compile(r"[.!?]+")


@dataclass(frozen=True)
class FoldPlan:
    """Assignment of snippets to cross-validation folds.

    Attributes:
        seed (int): The shuffling seed.
        k (int): The number of folds.
        assignment (Mapping[str, int]): The fold of every snippet id.
        tune_fold (int): The fold held out for hyperparameter tuning.
    """

    seed: int
    k: int
    assignment: Mapping[str, int]
    tune_fold: int = 0

    def fold(self, index: int) -> List[str]:
        return sorted(sid for sid, fold in self.assignment.items() if fold == index)

    def ids_outside(self, excluded: Iterable[int]) -> List[str]:
        skip = set(excluded)
        return sorted(sid for sid, fold in self.assignment.items() if fold not in skip)

    @property
    def sizes(self) -> List[int]:
        return [len(self.fold(index)) for index in range(self.k)]

    @property
    def reporting_folds(self) -> List[int]:
        """Every fold but the tuning one, in order."""
        return [index for index in range(self.k) if index != self.tune_fold]


def make_folds(
    snippet_ids: Iterable[str], k: int = 5, seed: int = 0, tune_fold: int = 0
) -> FoldPlan:
    """Shuffle the sorted ids with `seed` and deal them round-robin into `k` folds.

    Raises:
        ValueError: If `k < 2`, `tune_fold` is out of range or an id repeats.
        errors.FoldError: If there are fewer snippets than folds.
    """
    if k < 2:  # noqa: PLR2004
        msg = f"At least two folds are needed (got {k})."
        raise ValueError(msg)
    if not 0 <= tune_fold < k:
        msg = f"tune_fold must lie in [0, {k}) (got {tune_fold})."
        raise ValueError(msg)
    ids = sorted(snippet_ids)
    if len(set(ids)) != len(ids):
        msg = "Snippet ids must be unique."
        raise ValueError(msg)
    if len(ids) < k:
        msg = f"Cannot split {len(ids)} snippet(s) into {k} folds."
        raise errors.FoldError(msg)
    random.Random(seed).shuffle(ids)
    return FoldPlan(
        seed=seed,
        k=k,
        assignment={sid: position % k for position, sid in enumerate(ids)},
        tune_fold=tune_fold,
    )


class MetricRow(NamedTuple):
    task: Task
    label: str
    precision: float
    recall: float
    f1: float
    support: int
    share: float


@dataclass(frozen=True)
class MetricsTable:
    rows: Tuple[MetricRow, ...]

    def for_task(self, task: Task) -> List[MetricRow]:
        return [row for row in self.rows if row.task is task]

    def row(self, task: Task, label: str) -> MetricRow:
        for candidate in self.rows:
            if candidate.task is task and candidate.label == label:
                return candidate
        raise KeyError((task, label))


def _values(labels: Sequence[SnippetLabels], task: Task) -> List[AnyLabel]:
    return [value for snippet in labels for value in snippet.values(task)]


def class_distribution(
    labels: Sequence[SnippetLabels], task: Task
) -> Dict[str, float]:
    """Share of every class of a task among the gold instances (the Size column)."""
    values = _values(labels, task)
    counts = {label.value: 0 for label in task.labels}
    for value in values:
        counts[value.value] += 1
    total = len(values)
    return {label: (count / total if total else 0.0) for label, count in counts.items()}


def prf1(
    gold: Sequence[AnyLabel],
    predicted: Sequence[AnyLabel],
    task: Task,
    shares: Optional[Mapping[str, float]] = None,
) -> List[MetricRow]:
    """One-vs-rest precision, recall and F1 of every class of a task.

    Precision is 0 for a class that is never predicted, and F1 is 0 whenever
    precision and recall are both 0.

    Args:
        gold: The gold labels of every instance.
        predicted: The predicted labels, aligned with `gold`.
        task: The task the labels belong to.
        shares: The Size column; defaults to the class shares in `gold`.

    Raises:
        errors.LabelError: If the sequences differ in length or are empty.
    """
    if len(gold) != len(predicted):
        msg = f"Got {len(gold)} gold label(s) but {len(predicted)} prediction(s)."
        raise errors.LabelError(msg)
    if not gold:
        msg = f"No {task.value} instance to evaluate."
        raise errors.LabelError(msg)
    classes = list(task.labels)
    precision, recall, f1, support = precision_recall_fscore_support(
        [label.index for label in gold],
        [label.index for label in predicted],
        labels=list(range(len(classes))),
        average=None,
        zero_division=0,
    )
    return [
        MetricRow(
            task=task,
            label=label.value,
            precision=float(precision[j]),
            recall=float(recall[j]),
            f1=float(f1[j]),
            support=int(support[j]),
            share=(
                shares.get(label.value, 0.0)
                if shares is not None
                else int(support[j]) / len(gold)
            ),
        )
        for j, label in enumerate(classes)
    ]


def evaluate(
    gold: Sequence[SnippetLabels],
    predicted: Sequence[SnippetLabels],
    distribution: Optional[Mapping[Task, Mapping[str, float]]] = None,
) -> MetricsTable:
    """Per-class metrics of the four tasks.

    Args:
        gold: Gold labels, one per snippet.
        predicted: Predictions aligned with `gold`.
        distribution: Class shares per task for the Size column; defaults to the
            shares in `gold`.
    """
    if len(gold) != len(predicted):
        msg = f"Got {len(gold)} gold snippet(s) but {len(predicted)} prediction(s)."
        raise errors.LabelError(msg)
    rows: List[MetricRow] = []
    for task in Task:
        rows.extend(
            prf1(
                _values(gold, task),
                _values(predicted, task),
                task,
                (distribution or {}).get(task) or class_distribution(gold, task),
            )
        )
    return MetricsTable(tuple(rows))


def accuracy(
    gold: Sequence[SnippetLabels], predicted: Sequence[SnippetLabels], task: Task
) -> float:
    gold_values = _values(gold, task)
    predicted_values = _values(predicted, task)
    if len(gold_values) != len(predicted_values) or not gold_values:
        msg = f"Cannot compare {task.value} labels of different or empty sets."
        raise errors.LabelError(msg)
    hits = sum(1 for g, p in zip(gold_values, predicted_values) if g is p)
    return hits / len(gold_values)


@dataclass(frozen=True)
class AnnotationTable:
    """Category labels given by `n` annotators to each of `N` items for one aspect."""

    items: Tuple[str, ...]
    ratings: Tuple[Tuple[str, ...], ...]

    def __post_init__(self) -> None:
        if len(self.items) != len(self.ratings) or not self.ratings:
            msg = "An annotation table needs one row of ratings per item."
            raise errors.InvalidAnnotationTableError(msg)
        raters = {len(row) for row in self.ratings}
        if len(raters) != 1:
            msg = "Every item must be rated by the same number of annotators."
            raise errors.InvalidAnnotationTableError(msg)
        if raters.pop() < 2:  # noqa: PLR2004
            msg = "At least two annotators are needed."
            raise errors.InvalidAnnotationTableError(msg)
        if any(not cell for row in self.ratings for cell in row):
            msg = "Every cell of an annotation table must be filled."
            raise errors.InvalidAnnotationTableError(msg)

    @property
    def categories(self) -> List[str]:
        return sorted({cell for row in self.ratings for cell in row})

    @property
    def annotators(self) -> int:
        return len(self.ratings[0])

    def counts(self) -> np.ndarray:
        """Items by categories matrix of rating counts."""
        column = {category: j for j, category in enumerate(self.categories)}
        counts = np.zeros((len(self.items), len(column)))
        for i, row in enumerate(self.ratings):
            for cell in row:
                counts[i, column[cell]] += 1
        return counts


def fleiss_kappa(table: AnnotationTable) -> float:
    """Chance-corrected agreement of the annotators of a table.

    Raises:
        errors.KappaUndefinedError: If chance agreement is 1 while observed agreement
            is not. A table where both are 1 has kappa 1.0.
    """
    counts = table.counts()
    items, raters = counts.shape[0], table.annotators
    per_item = (np.sum(counts * counts, axis=1) - raters) / (raters * (raters - 1))
    observed = float(np.mean(per_item))
    shares = counts.sum(axis=0) / (items * raters)
    expected = float(np.sum(shares * shares))
    if np.isclose(expected, 1.0, rtol=0.0, atol=1e-15):
        if np.isclose(observed, 1.0, rtol=0.0, atol=1e-15):
            return 1.0
        raise errors.KappaUndefinedError
    return (observed - expected) / (1.0 - expected)


def read_annotations(
    lines: Iterable[str], delimiter: str = ","
) -> Dict[str, AnnotationTable]:
    """Read `snippet_id, annotator_id, aspect, label` rows into one table per aspect.

    Ratings of an item are ordered by annotator id.

    Raises:
        errors.InvalidRecordError: If a row is malformed.
        errors.InvalidAnnotationTableError: If an annotator rates an item twice or the
            items of an aspect have different numbers of ratings.
    """
    parser = parsers.DelimitedParser(
        ["snippet_id", "annotator_id", "aspect", "label"], delimiter, strict=True
    )
    parser.feed("\n".join(line.rstrip("\n") for line in lines))
    grouped: Dict[str, Dict[str, Dict[str, str]]] = defaultdict(dict)
    for _, record in parser.found_records:
        ratings = grouped[record["aspect"].lower()].setdefault(record["snippet_id"], {})
        if record["annotator_id"] in ratings:
            msg = (
                f'Annotator "{record["annotator_id"]}" rated '
                f'"{record["snippet_id"]}" twice for {record["aspect"]}.'
            )
            raise errors.InvalidAnnotationTableError(msg)
        ratings[record["annotator_id"]] = record["label"].lower()
    tables = {}
    for aspect, items in sorted(grouped.items()):
        ids = tuple(sorted(items))
        tables[aspect] = AnnotationTable(
            items=ids,
            ratings=tuple(
                tuple(items[sid][annotator] for annotator in sorted(items[sid]))
                for sid in ids
            ),
        )
    return tables


@dataclass(frozen=True)
class Report:
    """A rendered metrics table and its machine-readable records."""

    text: str
    records: Tuple[parsers.Record, ...]

    def to_jsonl(self) -> str:
        return "".join(
            json.dumps(record, sort_keys=True) + "\n" for record in self.records
        )


def report(table: MetricsTable, threshold: float = REPORT_THRESHOLD) -> Report:
    """Render a metrics table.

    Every class of intention, disclosure and interpretation is shown; strategy classes
    are shown only when their share reaches `threshold`. The records keep every row,
    with a `shown` flag.
    """
    header = f"{'Task':<16}{'Class':<18}{'Size':>8}{'P':>8}{'R':>8}{'F1':>8}"
    lines = [header, "-" * len(header)]
    records = []
    for task in Task:
        for row in table.for_task(task):
            shown = task is not Task.STRATEGY or row.share >= threshold
            records.append(
                {
                    "task": task.value,
                    "class": row.label,
                    "size": round(row.share, 6),
                    "precision": round(row.precision, 6),
                    "recall": round(row.recall, 6),
                    "f1": round(row.f1, 6),
                    "support": row.support,
                    "shown": shown,
                }
            )
            if shown:
                lines.append(
                    f"{task.value:<16}{row.label:<18}{row.share * 100:>7.1f}%"
                    f"{row.precision:>8.3f}{row.recall:>8.3f}{row.f1:>8.3f}"
                )
    return Report("\n".join(lines) + "\n", tuple(records))


@dataclass(frozen=True)
class CorpusStatistics:
    conversations: int
    sentences: int
    tokens: int


def _sentences(text: str) -> int:
    return sum(1 for part in _SENTENCE_END.split(text) if part.strip())


def corpus_statistics(
    snippets: Sequence[Snippet],
    sidecars: Optional[Mapping[str, SidecarAnnotation]] = None,
) -> CorpusStatistics:
    """Count conversations, sentences and tokens over every comment of the snippets.

    Sidecar annotations give the sentence and token counts of the comments they
    cover; other comments are split on sentence-final punctuation and tokenized.
    """
    sidecars = sidecars or {}
    sentences = tokens = 0
    for snippet in snippets:
        for comment in snippet.comments():
            sidecar = sidecars.get(comment.id)
            if sidecar is not None:
                sentences += sidecar.sentences
                tokens += len(sidecar.tokens)
            else:
                sentences += _sentences(comment.body)
                tokens += len(tokenize(comment.body))
    return CorpusStatistics(len(snippets), sentences, tokens)
