from __future__ import annotations

from typing import Dict, List, Tuple

import pytest

from trollgraph import errors
from trollgraph.evaluation import accuracy, make_folds
from trollgraph.features import (
    SENTIMENT_FEATURES,
    FeatureBag,
    FeatureConfig,
    FeatureSpace,
    SnippetBags,
    featurize_snippet,
)
from trollgraph.models import (
    AnyModel,
    Classifier,
    DownstreamFeatures,
    HybridModel,
    JointModel,
    ModelKind,
    PipelineModel,
    TrainingOptions,
    UpstreamLabels,
    indicator_columns,
    predict_pipeline,
    task_instances,
    train_model,
)
from trollgraph.optim import LogRegWeights, OptimConfig
from trollgraph.snippets import (
    DisclosureLabel,
    IntentionLabel,
    InterpretationLabel,
    SnippetLabels,
    Task,
)
from trollgraph.synthetic import STRATEGY_OF_INTERPRETATION, generate

Dataset = List[Tuple[SnippetBags, SnippetLabels]]

OPTIONS = TrainingOptions(l2=0.1)


@pytest.fixture(scope="module")
def trained(synthetic_bags: Dataset) -> Dict[ModelKind, AnyModel]:
    bags = [b for b, _ in synthetic_bags]
    labels = [lab for _, lab in synthetic_bags]
    return {kind: train_model(kind, bags, labels, OPTIONS) for kind in ModelKind}


class DescribeTrainModel:
    @pytest.mark.parametrize("kind", list(ModelKind))
    @pytest.mark.parametrize("task", list(Task))
    def it_fits_planted_features(
        self,
        trained: Dict[ModelKind, AnyModel],
        synthetic_bags: Dataset,
        kind: ModelKind,
        task: Task,
    ):
        model = trained[kind]
        predicted = [model.predict(b) for b, _ in synthetic_bags]
        gold = [lab for _, lab in synthetic_bags]
        assert accuracy(gold, predicted, task) >= 0.99

    @pytest.mark.parametrize("kind", list(ModelKind))
    def it_predicts_one_label_per_response(
        self,
        trained: Dict[ModelKind, AnyModel],
        synthetic_bags: Dataset,
        kind: ModelKind,
    ):
        model = trained[kind]
        assert model.kind is kind
        for bags, _ in synthetic_bags[:5]:
            assert len(model.predict(bags).per_response) == bags.size

    def it_accepts_kind_names(self, synthetic_bags: Dataset):
        subset = synthetic_bags[:10]
        model = train_model(
            "baseline", [b for b, _ in subset], [lab for _, lab in subset], OPTIONS
        )
        assert isinstance(model, PipelineModel)
        assert model.features == OPTIONS.features

    @pytest.mark.parametrize("kind", [ModelKind.BASELINE, ModelKind.HYBRID])
    def it_trains_on_out_of_fold_upstream_labels(
        self, synthetic_bags: Dataset, kind: ModelKind
    ):
        subset = synthetic_bags[:24]
        options = TrainingOptions(
            l2=0.1,
            downstream_features=DownstreamFeatures.CROSS_VAL_PREDICTED,
            inner_folds=3,
        )
        model = train_model(
            kind, [b for b, _ in subset], [lab for _, lab in subset], options
        )
        gold = [lab for _, lab in subset]
        predicted = [model.predict(b) for b, _ in subset]
        assert accuracy(gold, predicted, Task.INTENTION) >= 0.9

    def it_falls_back_to_a_constant_prediction_for_a_single_class(self):
        examples = generate(8, seed=1)
        bags = [featurize_snippet(s, FeatureConfig()) for s, _ in examples]
        labels = [
            SnippetLabels(IntentionLabel.NONE, DisclosureLabel.NONE, lab.per_response)
            for _, lab in examples
        ]
        model = train_model(ModelKind.BASELINE, bags, labels, OPTIONS)
        predicted = model.predict(bags[0])
        assert predicted.intention is IntentionLabel.NONE
        assert predicted.disclosure is DisclosureLabel.NONE

    def it_learns_strategies_tied_to_interpretations(self):
        examples = generate(40, seed=2, strategy_from_interpretation=True)
        bags = [featurize_snippet(s, FeatureConfig()) for s, _ in examples]
        model = train_model(
            ModelKind.HYBRID, bags, [lab for _, lab in examples], OPTIONS
        )
        for snippet_bags in bags[:10]:
            for response in model.predict(snippet_bags).per_response:
                assert response.strategy is STRATEGY_OF_INTERPRETATION[
                    response.interpretation
                ]


class DescribeTrainingErrors:
    def it_requires_labels(self, synthetic_bags: Dataset):
        bags = [b for b, _ in synthetic_bags[:3]]
        with pytest.raises(errors.MissingLabelsError):
            train_model(ModelKind.JOINT, bags, [None, None, None])

    def it_requires_one_labeling_per_snippet(self, synthetic_bags: Dataset):
        bags = [b for b, _ in synthetic_bags[:3]]
        with pytest.raises(errors.LabelError):
            train_model(ModelKind.BASELINE, bags, [synthetic_bags[0][1]])

    def it_rejects_an_empty_dataset(self):
        with pytest.raises(errors.LabelError):
            train_model(ModelKind.HYBRID, [], [])

    def it_requires_labels_for_every_response(self, synthetic_bags: Dataset):
        bags, labels = synthetic_bags[0]
        short = SnippetLabels(labels.intention, labels.disclosure, ())
        with pytest.raises(errors.LabelError):
            train_model(ModelKind.BASELINE, [bags], [short])


class DescribeTaskInstances:
    def it_adds_the_upstream_indicators(self):
        bags = SnippetBags(
            "s", FeatureBag({"uni:a": 1.0}), (FeatureBag({"uni:b": 1.0}),)
        )
        upstream = UpstreamLabels(
            IntentionLabel.TROLLING,
            DisclosureLabel.HIDDEN,
            (InterpretationLabel.TROLLING,),
        )
        (intention,) = task_instances(bags, Task.INTENTION, upstream)
        (disclosure,) = task_instances(bags, Task.DISCLOSURE, upstream)
        (strategy,) = task_instances(bags, Task.STRATEGY, upstream)
        assert dict(intention) == {"uni:a": 1.0}
        assert "task:i:trolling" in disclosure
        assert {"task:i:trolling", "task:d:hidden", "task:r:trolling"} <= set(strategy)

    def it_reserves_indicator_columns(self, trained: Dict[ModelKind, AnyModel]):
        model = trained[ModelKind.BASELINE]
        assert isinstance(model, PipelineModel)
        strategy = model.classifiers[Task.STRATEGY]
        assert len(indicator_columns(strategy, Task.INTERPRETATION)) == 3
        intention = model.classifiers[Task.INTENTION]
        assert len(indicator_columns(intention, Task.STRATEGY)) == 0


class DescribeVocabularyProvenance:
    @pytest.mark.parametrize("kind", [ModelKind.JOINT, ModelKind.HYBRID])
    def it_indexes_only_training_fold_names(
        self, synthetic_bags: Dataset, kind: ModelKind
    ):
        plan = make_folds([b.snippet_id for b, _ in synthetic_bags], 5, seed=1)
        training = set(plan.ids_outside([0]))
        train = [(b, lab) for b, lab in synthetic_bags if b.snippet_id in training]
        model = train_model(
            kind,
            [b for b, _ in train],
            [lab for _, lab in train],
            TrainingOptions(l2=1.0, optim=OptimConfig(max_iterations=20)),
        )
        context_names = {name for b, _ in train for name in b.context}
        response_names = {
            name for b, _ in train for bag in b.responses for name in bag
        }
        assert isinstance(model, (JointModel, HybridModel))
        slots = set(SENTIMENT_FEATURES)
        assert set(model.space.context.names) - slots <= context_names
        assert set(model.space.response.names) - slots <= response_names

    def it_ignores_names_only_seen_in_held_out_folds(self, synthetic_bags: Dataset):
        held_out = SnippetBags(
            "held-out",
            FeatureBag({"uni:zzheldout": 1.0}),
            (FeatureBag({"uni:zzheldout": 1.0}),),
        )
        space = FeatureSpace.fit(
            [b for b, _ in synthetic_bags[:20]], FeatureConfig()
        )
        assert "uni:zzheldout" not in space.context
        assert space.transform(held_out).context.nnz == 0


class DescribePipelineAblation:
    def it_matches_independent_classifiers_without_indicator_weights(
        self, trained: Dict[ModelKind, AnyModel], synthetic_bags: Dataset
    ):
        model = trained[ModelKind.BASELINE]
        assert isinstance(model, PipelineModel)
        classifiers = {}
        for task, classifier in model.classifiers.items():
            weights = classifier.weights.weights.copy()
            for upstream in Task:
                weights[:, indicator_columns(classifier, upstream)] = 0.0
            classifiers[task] = Classifier(
                task,
                classifier.vocabulary,
                LogRegWeights(
                    weights, classifier.weights.bias, classifier.weights.labels
                ),
            )
        ablated = PipelineModel(classifiers, model.features)

        for bags, _ in synthetic_bags[:20]:
            predicted = predict_pipeline(ablated, bags)
            assert (
                predicted.intention.value
                == classifiers[Task.INTENTION].predict(bags.context).value
            )
            assert (
                predicted.disclosure.value
                == classifiers[Task.DISCLOSURE].predict(bags.context).value
            )
            assert [r.value for r in predicted.values(Task.INTERPRETATION)] == [
                classifiers[Task.INTERPRETATION].predict(bag).value
                for bag in bags.responses
            ]
            assert [b.value for b in predicted.values(Task.STRATEGY)] == [
                classifiers[Task.STRATEGY].predict(bag).value
                for bag in bags.responses
            ]
