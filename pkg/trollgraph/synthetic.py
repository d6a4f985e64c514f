"""A generator of labeled snippets with planted features.

Every label is a deterministic function of a marker token: the suspect carries
`zqi<k>` and `zqd<k>` for its intention and disclosure, every response `zqr<k>` for
its interpretation and, unless the strategy is derived from the interpretation,
`zqb<k>` for its strategy (`k` being the label index). The remaining words are filler.
The labels respect the scheme: no intention pairs with no disclosure, playing is
always exposed, and strategies agree with the interpretation of their response.
"""

from __future__ import annotations

from typing import List, Mapping, Sequence, Tuple

import numpy as np

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

__all__ = ["FILLER", "STRATEGY_OF_INTERPRETATION", "marker", "generate"]

FILLER = (
    "the",
    "space",
    "station",
    "orbit",
    "launch",
    "really",
    "think",
    "about",
    "this",
    "engine",
    "rocket",
    "mission",
    "maybe",
    "people",
    "said",
    "week",
)

STRATEGY_OF_INTERPRETATION: Mapping[InterpretationLabel, StrategyLabel] = {
    InterpretationLabel.NONE: StrategyLabel.NORMAL,
    InterpretationLabel.TROLLING: StrategyLabel.FRUSTRATE,
    InterpretationLabel.PLAYING: StrategyLabel.ENGAGE,
}

_STRATEGIES: Mapping[InterpretationLabel, Tuple[StrategyLabel, ...]] = {
    InterpretationLabel.NONE: (StrategyLabel.NORMAL, StrategyLabel.FAILED),
    InterpretationLabel.TROLLING: (
        StrategyLabel.FRUSTRATE,
        StrategyLabel.NEUTRALIZE,
        StrategyLabel.COUNTER_TROLLING,
    ),
    InterpretationLabel.PLAYING: (
        StrategyLabel.ENGAGE,
        StrategyLabel.PRAISE,
        StrategyLabel.FOLLOW,
    ),
}

_INTENTION_WEIGHTS = (0.5, 0.35, 0.15)


def marker(short: str, index: int) -> str:
    """The planted token of a label, e.g. `zqi1` for intention index 1."""
    return f"zq{short}{index}"


def _filler(rng: np.random.Generator, low: int = 2, high: int = 6) -> List[str]:
    return [str(word) for word in rng.choice(FILLER, size=int(rng.integers(low, high)))]


def _sentence(rng: np.random.Generator, markers: Sequence[str]) -> str:
    words = _filler(rng)
    for token in markers:
        words.insert(int(rng.integers(0, len(words) + 1)), token)
    return " ".join(words)


def _disclosure(rng: np.random.Generator, intention: IntentionLabel) -> DisclosureLabel:
    if intention is IntentionLabel.NONE:
        return DisclosureLabel.NONE
    if intention is IntentionLabel.PLAYING:
        return DisclosureLabel.EXPOSED
    hidden = rng.random() < 0.5  # noqa: PLR2004
    return DisclosureLabel.HIDDEN if hidden else DisclosureLabel.EXPOSED


def generate(
    n: int, seed: int = 0, *, strategy_from_interpretation: bool = False
) -> List[Tuple[Snippet, SnippetLabels]]:
    """Generate `n` labeled snippets.

    Args:
        n (int): The number of snippets.
        seed (int): The random seed; equal seeds give equal datasets.
        strategy_from_interpretation (bool): Make every strategy a function of the
            interpretation (`STRATEGY_OF_INTERPRETATION`) and plant no strategy marker.

    Returns:
        List[Tuple[Snippet, SnippetLabels]]: The snippets with their labels.

    Raises:
        ValueError: If `n` is negative.
    """
    if n < 0:
        msg = f"Cannot generate {n} snippets."
        raise ValueError(msg)
    rng = np.random.default_rng(seed)
    intentions = list(IntentionLabel)
    interpretations = list(InterpretationLabel)
    dataset = []
    for number in range(1, n + 1):
        snippet_id = f"syn{number:04d}"
        thread_id = f"synthread{number:04d}"
        intention = intentions[int(rng.choice(3, p=_INTENTION_WEIGHTS))]
        disclosure = _disclosure(rng, intention)

        per_response = []
        responses = []
        for k in range(1, int(rng.integers(1, 4)) + 1):
            interpretation = interpretations[int(rng.integers(0, 3))]
            if strategy_from_interpretation:
                strategy = STRATEGY_OF_INTERPRETATION[interpretation]
                markers = [marker("r", interpretation.index)]
            else:
                pool = _STRATEGIES[interpretation]
                strategy = pool[int(rng.integers(0, len(pool)))]
                markers = [
                    marker("r", interpretation.index),
                    marker("b", strategy.index),
                ]
            if k == 1:
                markers.append("troll")
            responses.append(
                Comment(
                    id=f"{snippet_id}-r{k}",
                    thread_id=thread_id,
                    body=_sentence(rng, markers),
                    # The first response comes from the parent's author.
                    author="parent_author" if k == 1 else f"responder{k}",
                    parent_id=snippet_id,
                    created_utc=number * 100 + 2 + k,
                )
            )
            per_response.append(ResponseLabels(interpretation, strategy))

        parent = Comment(
            id=f"{snippet_id}-p",
            thread_id=thread_id,
            body=_sentence(rng, []),
            author="parent_author",
            created_utc=number * 100,
        )
        suspect = Comment(
            id=snippet_id,
            thread_id=thread_id,
            body=_sentence(
                rng, [marker("i", intention.index), marker("d", disclosure.index)]
            ),
            author="suspect_author",
            parent_id=parent.id,
            created_utc=number * 100 + 1,
        )
        dataset.append(
            (
                Snippet(snippet_id, parent, suspect, tuple(responses)),
                SnippetLabels(intention, disclosure, tuple(per_response)),
            )
        )
    return dataset
