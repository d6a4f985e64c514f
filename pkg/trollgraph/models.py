"""The three end-to-end systems.

- `PipelineModel`: four logistic regressions chained intention, disclosure,
  interpretation, strategy; each later classifier sees one-hot `task:*` indicators of
  the earlier labels.
- `JointModel`: the full CRF over the four tasks.
- `HybridModel`: a CRF over intention, disclosure and interpretation, followed by a
  strategy classifier fed with the CRF's labels.

During training the indicators carry gold labels, or out-of-fold predictions when
`downstream_features` is `cross_val_predicted`. At prediction time they always carry
the model's own predictions.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import (
    ClassVar,
    Dict,
    FrozenSet,
    List,
    Mapping,
    NamedTuple,
    Optional,
    Protocol,
    Sequence,
    Tuple,
    Union,
)

import numpy as np

from trollgraph import errors
from trollgraph.crf import (
    JOINT_TASKS,
    TWO_PASS_TASKS,
    Assignment,
    CrfParams,
    Decoding,
    decode_crf,
    predict_crf,
    train_crf,
)
from trollgraph.evaluation import make_folds
from trollgraph.features import (
    FeatureBag,
    FeatureConfig,
    FeatureSpace,
    SnippetBags,
    Vocabulary,
    build_vocabulary,
    indicator_names,
    vectorize,
    with_indicators,
)
from trollgraph.optim import (
    LogRegWeights,
    OptimConfig,
    predict_logreg,
    train_logreg,
)
from trollgraph.snippets import (
    AnyLabel,
    DisclosureLabel,
    IntentionLabel,
    InterpretationLabel,
    ResponseLabels,
    SnippetLabels,
    StrategyLabel,
    Task,
)

__all__ = [
    "ModelKind",
    "DownstreamFeatures",
    "TrainingOptions",
    "Model",
    "Classifier",
    "PipelineModel",
    "JointModel",
    "HybridModel",
    "UpstreamLabels",
    "UPSTREAM_TASKS",
    "task_instances",
    "train_pipeline",
    "predict_pipeline",
    "train_joint",
    "predict_joint",
    "train_hybrid",
    "predict_hybrid",
    "train_model",
    "indicator_columns",
]

logger = logging.getLogger(__name__)

UPSTREAM_TASKS: Mapping[Task, Tuple[Task, ...]] = {
    Task.INTENTION: (),
    Task.DISCLOSURE: (Task.INTENTION,),
    Task.INTERPRETATION: (Task.INTENTION, Task.DISCLOSURE),
    Task.STRATEGY: (Task.INTENTION, Task.DISCLOSURE, Task.INTERPRETATION),
}


class ModelKind(str, Enum):
    BASELINE = "baseline"
    JOINT = "joint"
    HYBRID = "hybrid"


class DownstreamFeatures(str, Enum):
    GOLD = "gold"
    CROSS_VAL_PREDICTED = "cross_val_predicted"


@dataclass(frozen=True)
class TrainingOptions:
    """Everything a model needs to be trained.

    Attributes:
        features (FeatureConfig): Feature set and vocabulary cutoff.
        l2 (float): Regularization strength of every objective.
        optim (OptimConfig): Minimizer settings.
        downstream_features (DownstreamFeatures): Source of the upstream labels fed to
            later tasks during training.
        decoding (Decoding): How the CRFs decode.
        inner_folds (int): Folds of the out-of-fold predictions.
        seed (int): Seed of the inner fold plan.
        threads (int): Threads evaluating CRF objectives.
    """

    features: FeatureConfig = field(default_factory=FeatureConfig)
    l2: float = 1.0
    optim: OptimConfig = field(default_factory=OptimConfig)
    downstream_features: DownstreamFeatures = DownstreamFeatures.GOLD
    decoding: Decoding = Decoding.MAP
    inner_folds: int = 5
    seed: int = 0
    threads: int = 1


class Model(Protocol):
    """A trained system."""

    kind: ClassVar[ModelKind]

    @property
    def features(self) -> FeatureConfig: ...

    def predict(self, bags: SnippetBags) -> SnippetLabels:
        """Predict the labels of a featurized snippet."""
        ...


class UpstreamLabels(NamedTuple):
    """The labels fed to later tasks as indicator features."""

    intention: IntentionLabel
    disclosure: DisclosureLabel
    interpretations: Tuple[InterpretationLabel, ...]

    @classmethod
    def from_labels(cls, labels: SnippetLabels) -> UpstreamLabels:
        return cls(
            labels.intention,
            labels.disclosure,
            tuple(response.interpretation for response in labels.per_response),
        )

    @classmethod
    def from_assignment(cls, assignment: Assignment) -> UpstreamLabels:
        interpretations = list(InterpretationLabel)
        return cls(
            list(IntentionLabel)[assignment.intention],
            list(DisclosureLabel)[assignment.disclosure],
            tuple(interpretations[r] for r in assignment.interpretations),
        )


def task_instances(
    bags: SnippetBags, task: Task, upstream: UpstreamLabels
) -> List[FeatureBag]:
    """The classifier instances of one task in a snippet, with their indicators.

    Intention and disclosure have one instance per snippet (the context bag),
    interpretation and strategy one per response.
    """
    if task is Task.INTENTION:
        return [bags.context]
    if task is Task.DISCLOSURE:
        return [with_indicators(bags.context, {Task.INTENTION: upstream.intention})]
    known: Dict[Task, AnyLabel] = {
        Task.INTENTION: upstream.intention,
        Task.DISCLOSURE: upstream.disclosure,
    }
    if task is Task.INTERPRETATION:
        return [with_indicators(bag, known) for bag in bags.responses]
    return [
        with_indicators(bag, {**known, Task.INTERPRETATION: interpretation})
        for bag, interpretation in zip(bags.responses, upstream.interpretations)
    ]


@dataclass(frozen=True, eq=False)
class Classifier:
    """A logistic regression over its own vocabulary."""

    task: Task
    vocabulary: Vocabulary
    weights: LogRegWeights

    def predict(self, bag: FeatureBag) -> AnyLabel:
        index, _ = predict_logreg(self.weights, vectorize(bag, self.vocabulary))
        return list(self.task.labels)[index]


def _fit_classifier(
    task: Task,
    instances: Sequence[FeatureBag],
    targets: Sequence[AnyLabel],
    options: TrainingOptions,
) -> Classifier:
    vocabulary = build_vocabulary(
        instances,
        options.features.min_count,
        always=indicator_names(UPSTREAM_TASKS[task]),
    )
    names = [label.value for label in task.labels]
    y = [label.index for label in targets]
    try:
        weights = train_logreg(
            [vectorize(bag, vocabulary) for bag in instances],
            y,
            names,
            vocabulary.dimension,
            options.l2,
            options.optim,
        )
    except errors.InsufficientLabelsError:
        logger.warning(
            "Only one %s label in the training data; predicting it constantly",
            task.value,
        )
        weights = LogRegWeights.zeros(names, vocabulary.dimension)
        weights.bias[y[0] if y else 0] = 1.0
    return Classifier(task, vocabulary, weights)


def _require_labels(
    bags: Sequence[SnippetBags], labels: Sequence[Optional[SnippetLabels]]
) -> List[SnippetLabels]:
    if len(bags) != len(labels):
        msg = f"Got {len(bags)} snippet(s) but {len(labels)} labeling(s)."
        raise errors.LabelError(msg)
    if not bags:
        msg = "Cannot train on an empty dataset."
        raise errors.LabelError(msg)
    missing = [b.snippet_id for b, lab in zip(bags, labels) if lab is None]
    if missing:
        raise errors.MissingLabelsError(missing)
    gold = [lab for lab in labels if lab is not None]
    for snippet, lab in zip(bags, gold):
        if len(lab.per_response) != snippet.size:
            msg = (
                f'Snippet "{snippet.snippet_id}" has {snippet.size} response(s) but '
                f"{len(lab.per_response)} response label(s)."
            )
            raise errors.LabelError(msg)
    return gold


def _out_of_fold(
    kind: ModelKind,
    bags: Sequence[SnippetBags],
    gold: Sequence[SnippetLabels],
    options: TrainingOptions,
) -> List[UpstreamLabels]:
    """Upstream labels of every snippet predicted by a model that never saw it."""
    k = min(options.inner_folds, len(bags))
    if k < 2:  # noqa: PLR2004
        logger.warning(
            "Too few snippets for out-of-fold predictions; using gold labels"
        )
        return [UpstreamLabels.from_labels(lab) for lab in gold]
    plan = make_folds([b.snippet_id for b in bags], k, options.seed)
    inner = replace(options, downstream_features=DownstreamFeatures.GOLD)
    position = {b.snippet_id: n for n, b in enumerate(bags)}
    upstream: List[Optional[UpstreamLabels]] = [None] * len(bags)
    for fold in range(k):
        held_out = [position[sid] for sid in plan.fold(fold)]
        training = [position[sid] for sid in plan.ids_outside([fold])]
        train_bags = [bags[n] for n in training]
        train_gold = [gold[n] for n in training]
        if kind is ModelKind.BASELINE:
            pipeline = train_pipeline(train_bags, train_gold, inner)
            for n in held_out:
                upstream[n] = UpstreamLabels.from_labels(pipeline.predict(bags[n]))
        else:
            space = FeatureSpace.fit(train_bags, options.features)
            params = _train_crf(space, train_bags, train_gold, TWO_PASS_TASKS, inner)
            for n in held_out:
                upstream[n] = UpstreamLabels.from_assignment(
                    decode_crf(params, space.transform(bags[n]), options.decoding)
                )
    return [u for u in upstream if u is not None]


def _upstream(
    kind: ModelKind,
    bags: Sequence[SnippetBags],
    gold: Sequence[SnippetLabels],
    options: TrainingOptions,
) -> List[UpstreamLabels]:
    if options.downstream_features is DownstreamFeatures.CROSS_VAL_PREDICTED:
        return _out_of_fold(kind, bags, gold, options)
    return [UpstreamLabels.from_labels(lab) for lab in gold]


@dataclass(frozen=True, eq=False)
class PipelineModel:
    kind: ClassVar[ModelKind] = ModelKind.BASELINE

    classifiers: Mapping[Task, Classifier]
    features: FeatureConfig = field(default_factory=FeatureConfig)

    def predict(self, bags: SnippetBags) -> SnippetLabels:
        return predict_pipeline(self, bags)


def train_pipeline(
    bags: Sequence[SnippetBags],
    labels: Sequence[Optional[SnippetLabels]],
    options: Optional[TrainingOptions] = None,
) -> PipelineModel:
    """Train the four chained classifiers.

    Raises:
        errors.MissingLabelsError: If a snippet has no labels.
        errors.LabelError: If labels do not cover exactly the responses.
    """
    options = options or TrainingOptions()
    gold = _require_labels(bags, labels)
    upstream = _upstream(ModelKind.BASELINE, bags, gold, options)
    classifiers = {}
    for task in Task:
        instances = [
            instance
            for snippet, up in zip(bags, upstream)
            for instance in task_instances(snippet, task, up)
        ]
        targets = [value for lab in gold for value in lab.values(task)]
        classifiers[task] = _fit_classifier(task, instances, targets, options)
    return PipelineModel(classifiers, options.features)


def predict_pipeline(model: PipelineModel, bags: SnippetBags) -> SnippetLabels:
    """Predict task by task, feeding each prediction to the later tasks."""
    classifiers = model.classifiers

    def predict(task: Task, upstream: UpstreamLabels) -> List[AnyLabel]:
        return [
            classifiers[task].predict(instance)
            for instance in task_instances(bags, task, upstream)
        ]

    partial = UpstreamLabels(IntentionLabel.NONE, DisclosureLabel.NONE, ())
    intention = predict(Task.INTENTION, partial)[0]
    partial = partial._replace(intention=intention)
    disclosure = predict(Task.DISCLOSURE, partial)[0]
    partial = partial._replace(disclosure=disclosure)
    interpretations = predict(Task.INTERPRETATION, partial)
    partial = partial._replace(interpretations=tuple(interpretations))
    strategies = predict(Task.STRATEGY, partial)
    return SnippetLabels(
        intention=IntentionLabel(intention.value),
        disclosure=DisclosureLabel(disclosure.value),
        per_response=tuple(
            ResponseLabels(InterpretationLabel(r.value), StrategyLabel(b.value))
            for r, b in zip(interpretations, strategies)
        ),
    )


def _train_crf(
    space: FeatureSpace,
    bags: Sequence[SnippetBags],
    gold: Sequence[SnippetLabels],
    tasks: FrozenSet[Task],
    options: TrainingOptions,
) -> CrfParams:
    return train_crf(
        [(space.transform(snippet), lab) for snippet, lab in zip(bags, gold)],
        tasks,
        options.l2,
        options.optim,
        options.threads,
    )


@dataclass(frozen=True, eq=False)
class JointModel:
    kind: ClassVar[ModelKind] = ModelKind.JOINT

    space: FeatureSpace
    params: CrfParams
    decoding: Decoding = Decoding.MAP

    @property
    def features(self) -> FeatureConfig:
        return self.space.config

    def predict(self, bags: SnippetBags) -> SnippetLabels:
        return predict_joint(self, bags)


def train_joint(
    bags: Sequence[SnippetBags],
    labels: Sequence[Optional[SnippetLabels]],
    options: Optional[TrainingOptions] = None,
) -> JointModel:
    options = options or TrainingOptions()
    gold = _require_labels(bags, labels)
    space = FeatureSpace.fit(bags, options.features)
    params = _train_crf(space, bags, gold, JOINT_TASKS, options)
    return JointModel(space, params, options.decoding)


def predict_joint(model: JointModel, bags: SnippetBags) -> SnippetLabels:
    return predict_crf(model.params, model.space.transform(bags), model.decoding)


@dataclass(frozen=True, eq=False)
class HybridModel:
    kind: ClassVar[ModelKind] = ModelKind.HYBRID

    space: FeatureSpace
    params: CrfParams
    strategy: Classifier
    decoding: Decoding = Decoding.MAP

    @property
    def features(self) -> FeatureConfig:
        return self.space.config

    def predict(self, bags: SnippetBags) -> SnippetLabels:
        return predict_hybrid(self, bags)


def train_hybrid(
    bags: Sequence[SnippetBags],
    labels: Sequence[Optional[SnippetLabels]],
    options: Optional[TrainingOptions] = None,
) -> HybridModel:
    """Train the CRF over intention, disclosure and interpretation, then the strategy
    classifier on response features plus the three upstream indicators.
    """
    options = options or TrainingOptions()
    gold = _require_labels(bags, labels)
    space = FeatureSpace.fit(bags, options.features)
    params = _train_crf(space, bags, gold, TWO_PASS_TASKS, options)
    upstream = _upstream(ModelKind.HYBRID, bags, gold, options)
    instances = [
        instance
        for snippet, up in zip(bags, upstream)
        for instance in task_instances(snippet, Task.STRATEGY, up)
    ]
    targets = [value for lab in gold for value in lab.values(Task.STRATEGY)]
    strategy = _fit_classifier(Task.STRATEGY, instances, targets, options)
    return HybridModel(space, params, strategy, options.decoding)


def predict_hybrid(model: HybridModel, bags: SnippetBags) -> SnippetLabels:
    """CRF labels for intention, disclosure and interpretation; strategies from the
    classifier given those labels.
    """
    upstream = UpstreamLabels.from_assignment(
        decode_crf(model.params, model.space.transform(bags), model.decoding)
    )
    strategies = [
        StrategyLabel(model.strategy.predict(instance).value)
        for instance in task_instances(bags, Task.STRATEGY, upstream)
    ]
    return SnippetLabels(
        intention=upstream.intention,
        disclosure=upstream.disclosure,
        per_response=tuple(
            ResponseLabels(r, b) for r, b in zip(upstream.interpretations, strategies)
        ),
    )


AnyModel = Union[PipelineModel, JointModel, HybridModel]


def train_model(
    kind: Union[ModelKind, str],
    bags: Sequence[SnippetBags],
    labels: Sequence[Optional[SnippetLabels]],
    options: Optional[TrainingOptions] = None,
) -> AnyModel:
    """Train the system of the given kind."""
    trainers = {
        ModelKind.BASELINE: train_pipeline,
        ModelKind.JOINT: train_joint,
        ModelKind.HYBRID: train_hybrid,
    }
    return trainers[ModelKind(kind)](bags, labels, options)  # type: ignore[operator]


def indicator_columns(classifier: Classifier, task: Task) -> np.ndarray:
    """Columns of a classifier's vocabulary holding the indicators of `task`."""
    prefix = f"task:{task.short}:"
    return np.array(
        [
            j
            for j, name in enumerate(classifier.vocabulary.names)
            if name.startswith(prefix)
        ],
        dtype=np.int64,
    )
