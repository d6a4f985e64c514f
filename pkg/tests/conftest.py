from __future__ import annotations

from typing import List, Tuple

import pytest

from trollgraph.features import FeatureConfig, SnippetBags, featurize_snippet
from trollgraph.lexicons import LexiconSet, bundled_lexicon_dir, load_lexicons
from trollgraph.snippets import (
    Comment,
    DisclosureLabel,
    IntentionLabel,
    InterpretationLabel,
    ResponseLabels,
    Snippet,
    SnippetLabels,
    StrategyLabel,
)
from trollgraph.synthetic import generate


@pytest.fixture(scope="session")
def lexicons() -> LexiconSet:
    return load_lexicons(bundled_lexicon_dir())


@pytest.fixture()
def snippet() -> Snippet:
    parent = Comment(
        "p1", "t1", "What engine does the new rocket use?", "alice", None, 10
    )
    suspect = Comment(
        "s1", "t1", "Rockets are a waste of money, idiots.", "bob", "p1", 20
    )
    return Snippet(
        "s1",
        parent,
        suspect,
        (
            Comment("r1", "t1", "Don't feed the troll.", "alice", "s1", 30),
            Comment("r2", "t1", "Thank you, this made my day :)", "carol", "s1", 40),
        ),
    )


@pytest.fixture()
def labels() -> SnippetLabels:
    return SnippetLabels(
        IntentionLabel.TROLLING,
        DisclosureLabel.EXPOSED,
        (
            ResponseLabels(InterpretationLabel.TROLLING, StrategyLabel.FRUSTRATE),
            ResponseLabels(InterpretationLabel.PLAYING, StrategyLabel.ENGAGE),
        ),
    )


@pytest.fixture(scope="session")
def synthetic_bags() -> List[Tuple[SnippetBags, SnippetLabels]]:
    """Sixty generated snippets, featurized with the basic set."""
    return [
        (featurize_snippet(snippet, FeatureConfig()), labels)
        for snippet, labels in generate(60, seed=7)
    ]
