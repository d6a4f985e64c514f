from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given

from trollgraph import errors
from trollgraph.features import (
    SENTIMENT_FEATURES,
    FeatureBag,
    FeatureConfig,
    FeatureSet,
    FeatureSpace,
    SidecarAnnotation,
    SparseVector,
    Vocabulary,
    build_vocabulary,
    combine_context,
    extract_features,
    featurize_snippet,
    indicator_names,
    load_sidecars,
    stack,
    tokenize,
    vectorize,
    with_indicators,
)
from trollgraph.lexicons import LexiconSet
from trollgraph.snippets import Comment, IntentionLabel, Snippet, Task
from tests.strategies import sparse_vectors

SIDECAR = {
    "comment_id": "c1",
    "tokens": [
        {"text": "You", "pos": "PRP", "lemma": "you", "sentence": 0},
        {"text": "idiots", "pos": "NNS", "lemma": "idiot", "sentence": 0},
        {"text": "Sorry", "pos": "UH", "lemma": "sorry", "sentence": 1},
    ],
    "frames": [
        {
            "frame": "Judgment",
            "target": "idiots",
            "args": [{"role": "Evaluee", "text": "You"}],
        }
    ],
}


class DescribeTokenize:
    def it_splits_off_punctuation(self):
        assert [t.text for t in tokenize("Space is cool! :)", [":)"])] == [
            "Space",
            "is",
            "cool",
            "!",
            ":)",
        ]

    def it_keeps_known_emoticons_intact(self):
        assert [t.text for t in tokenize("ok :-(", [":-("])] == ["ok", ":-("]

    @pytest.mark.parametrize(
        ("text", "expected"),
        [
            ("cool!:)", ["cool", "!", ":)"]),
            ("cool:)", ["cool", ":)"]),
            ("(:-(sigh", ["(", ":-(", "sigh"]),
            ("wow!!", ["wow", "!!"]),
        ],
    )
    def it_keeps_emoticons_glued_to_other_text(self, text: str, expected: list):
        assert [t.text for t in tokenize(text, [":)", ":-("])] == expected


class DescribeExtractFeatures:
    def it_extracts_the_basic_families(self, lexicons: LexiconSet):
        bag = extract_features(Comment("c", "t", "You stupid idiot"), None, lexicons)
        assert {
            "uni:you",
            "uni:stupid",
            "bi:you_stupid",
            "bi:stupid_idiot",
            "lemma:idiot",
            "harm:stupid",
            "harm:idiot",
        } <= set(bag)
        assert not any(name.startswith("senti:") for name in bag)
        assert any(note.startswith("no-sidecar") for note in bag.notes)

    def it_extracts_the_enhanced_families(self, lexicons: LexiconSet):
        bag = extract_features(
            Comment("c", "t", "You stupid idiot, shut up :)"),
            None,
            lexicons,
            FeatureSet.ENHANCED,
        )
        assert {
            "emoticon::)",
            "subj:stupid",
            "swear:shut_up",
            "impolite:shut_up",
            *SENTIMENT_FEATURES,
        } <= set(bag)
        assert bag["senti:positive"] == 0.0
        assert bag["senti:negative"] == pytest.approx(2 / 6)

    def it_uses_the_sidecar_tokens(self, lexicons: LexiconSet):
        sidecar = SidecarAnnotation.from_record(SIDECAR)
        bag = extract_features(
            Comment("c1", "t", "ignored"), sidecar, lexicons, FeatureSet.ENHANCED
        )
        assert "uni:ignored" not in bag
        assert {
            "unipos:idiots/NNS",
            "bipos:you/PRP_idiots/NNS",
            "lemma:idiot",
            "emo:empathy:sorry",
            "frame:Judgment",
            "frametgt:Judgment_idiots",
            "framearg:Evaluee_you",
        } <= set(bag)

    def it_does_not_cross_sentences_with_bigrams(self):
        sidecar = SidecarAnnotation.from_record(SIDECAR)
        bag = extract_features(Comment("c1", "t", ""), sidecar)
        assert "bi:you_idiots" in bag
        assert "bi:idiots_sorry" not in bag

    def it_notes_missing_lexicons(self):
        bag = extract_features(Comment("c", "t", "hi"))
        assert any(note.startswith("no-lexicons") for note in bag.notes)
        assert not any(name.startswith("harm:") for name in bag)

    def it_requires_lexicons_for_the_enhanced_set(self):
        with pytest.raises(ValueError, match="lexicons"):
            extract_features(Comment("c", "t", "hi"), feature_set=FeatureSet.ENHANCED)


class DescribeLoadSidecars:
    def it_keys_annotations_by_comment(self):
        sidecars = load_sidecars([json.dumps(SIDECAR)])
        assert sidecars["c1"].sentences == 2
        assert sidecars["c1"].frames[0].args == (("Evaluee", "You"),)

    def it_skips_malformed_records(self):
        assert load_sidecars(['{"tokens": []}']) == {}

    def it_raises_on_malformed_records_when_strict(self):
        with pytest.raises(errors.InvalidRecordError):
            load_sidecars(['{"comment_id": "c", "tokens": [{}]}'], strict=True)


class DescribeContext:
    def it_prefixes_the_parent_features(self):
        combined = combine_context(
            FeatureBag({"uni:a": 1.0}), FeatureBag({"uni:b": 1.0}, ["x"])
        )
        assert dict(combined) == {"uni:a": 1.0, "ctx:uni:b": 1.0}
        assert combined.notes == frozenset({"x"})

    def it_adds_task_indicators(self):
        bag = with_indicators(FeatureBag({}), {Task.INTENTION: IntentionLabel.NONE})
        assert dict(bag) == {"task:i:none": 1.0}
        assert indicator_names([Task.DISCLOSURE]) == [
            "task:d:none",
            "task:d:hidden",
            "task:d:exposed",
        ]

    def it_featurizes_a_snippet(self, snippet: Snippet, lexicons: LexiconSet):
        bags = featurize_snippet(snippet, FeatureConfig(), lexicons)
        assert bags.snippet_id == "s1"
        assert bags.size == 2
        assert "uni:rockets" in bags.context
        assert "ctx:uni:engine" in bags.context
        assert not any(name.startswith("ctx:") for name in bags.responses[0])

    def it_can_give_responses_the_suspect_features(self, snippet: Snippet):
        bags = featurize_snippet(snippet, FeatureConfig(response_context=True))
        assert "uni:feed" in bags.responses[0]
        assert "ctx:uni:rockets" in bags.responses[0]


class DescribeVocabulary:
    def it_keeps_names_reaching_the_cutoff(self):
        vocabulary = build_vocabulary(
            [FeatureBag({"uni:a": 1.0, "uni:b": 1.0}), FeatureBag({"uni:a": 1.0})],
            min_count=2,
            always=["task:i:none"],
        )
        assert vocabulary.names == ["uni:a", *SENTIMENT_FEATURES, "task:i:none"]
        assert vocabulary.frozen

    def it_always_keeps_real_valued_features(self):
        vocabulary = build_vocabulary(
            [FeatureBag({"uni:a": 1.0, "senti:compound": 0.3}), FeatureBag({})],
            min_count=2,
            require_binary=False,
        )
        assert "senti:compound" in vocabulary
        assert "uni:a" not in vocabulary

    def it_rejects_an_empty_vocabulary(self):
        with pytest.raises(errors.EmptyVocabularyError):
            build_vocabulary([FeatureBag({"uni:a": 1.0})], min_count=2)

    def it_refuses_new_names_once_frozen(self):
        vocabulary = Vocabulary(["a"]).freeze()
        assert vocabulary.add("a") == 0
        with pytest.raises(errors.FrozenVocabularyError):
            vocabulary.add("b")

    def it_rejects_a_cutoff_below_one(self):
        with pytest.raises(ValueError, match="min_count"):
            FeatureConfig(min_count=0)


class DescribeVectorize:
    def it_drops_unknown_names(self):
        vocabulary = Vocabulary(["b", "a"], frozen=True)
        vector = vectorize({"a": 2.0, "c": 1.0, "b": 0.5}, vocabulary)
        assert vector.items() == [(0, 0.5), (1, 2.0)]
        assert vector.dimension == 2

    def it_requires_a_frozen_vocabulary(self):
        with pytest.raises(ValueError, match="frozen"):
            vectorize({}, Vocabulary(["a"]))

    @given(sparse_vectors())
    def it_stacks_vectors_into_rows(self, vector: SparseVector):
        matrix = stack([vector, vector], vector.dimension)
        assert np.array_equal(matrix.toarray()[1], vector.to_dense())

    def it_rejects_vectors_of_another_dimension(self):
        vector = SparseVector(np.array([0]), np.array([1.0]), 3)
        with pytest.raises(errors.DimensionMismatchError):
            stack([vector], 4)

    def it_rejects_unsorted_indices(self):
        with pytest.raises(ValueError, match="increasing"):
            SparseVector(np.array([2, 1]), np.array([1.0, 1.0]), 3)


class DescribeFeatureSpace:
    def it_fits_one_vocabulary_per_variable_kind(self, snippet: Snippet):
        bags = featurize_snippet(snippet, FeatureConfig())
        space = FeatureSpace.fit([bags], FeatureConfig())
        vectors = space.transform(bags)
        assert vectors.context.dimension == space.context.dimension
        assert [r.dimension for r in vectors.responses] == [
            space.response.dimension
        ] * 2
        assert "uni:troll" in space.response
        assert "uni:troll" not in space.context
