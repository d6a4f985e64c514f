import inspect
from typing import List, Type

import numpy as np
from hypothesis import strategies

from trollgraph.evaluation import AnnotationTable
from trollgraph.features import SparseVector
from trollgraph.filters import CommentProperty, Filter, HasFuzzyToken, In
from trollgraph.snippets import (
    Comment,
    DisclosureLabel,
    IntentionLabel,
    InterpretationLabel,
    ResponseLabels,
    SnippetLabels,
    StrategyLabel,
)

comment_properties: List[CommentProperty] = ["id", "thread_id", "author", "body"]

words = strategies.text(
    alphabet="abcdefghijklmnopqrstuvwxyz", min_size=1, max_size=8
)


@strategies.composite
def comments(draw: strategies.DrawFn) -> Comment:
    """Strategy to generate a comment of a single thread.

    Returns:
        Comment: A comment whose body is a few lowercase words.
    """
    return Comment(
        id=draw(words),
        thread_id="t",
        body=" ".join(draw(strategies.lists(words, min_size=1, max_size=8))),
        author=draw(words),
        parent_id=draw(strategies.none() | words),
        created_utc=draw(strategies.integers(min_value=0, max_value=10**6)),
    )


@strategies.composite
def _f_classes(draw: strategies.DrawFn) -> Type[Filter]:
    return draw(
        strategies.sampled_from(
            [
                klass
                for klass in Filter.__subclasses__()
                if not inspect.isabstract(klass)
            ]
        )
    )


@strategies.composite
def filters(draw: strategies.DrawFn) -> Filter:
    """Strategy to generate a filter.

    Returns:
        Filter: A filter object over a random comment property.
    """
    f_class = draw(_f_classes())
    prop = draw(strategies.sampled_from(comment_properties))
    if issubclass(f_class, In):
        return f_class(prop, draw(strategies.lists(words, max_size=5)))
    if issubclass(f_class, HasFuzzyToken):
        return f_class(
            prop, draw(words), max_edit=draw(strategies.integers(0, 2))
        )
    return f_class(prop)


@strategies.composite
def snippet_labels(draw: strategies.DrawFn, responses: int = 1) -> SnippetLabels:
    """Strategy to generate the labels of a snippet with `responses` responses."""
    return SnippetLabels(
        draw(strategies.sampled_from(list(IntentionLabel))),
        draw(strategies.sampled_from(list(DisclosureLabel))),
        tuple(
            ResponseLabels(
                draw(strategies.sampled_from(list(InterpretationLabel))),
                draw(strategies.sampled_from(list(StrategyLabel))),
            )
            for _ in range(responses)
        ),
    )


@strategies.composite
def annotation_tables(draw: strategies.DrawFn) -> AnnotationTable:
    """Strategy to generate an annotation table with at least two categories used."""
    items = draw(strategies.integers(min_value=2, max_value=12))
    raters = draw(strategies.integers(min_value=2, max_value=5))
    categories = ["a", "b", "c"]
    ratings = [
        tuple(draw(strategies.sampled_from(categories)) for _ in range(raters))
        for _ in range(items)
    ]
    ratings[0] = ("a",) * raters
    ratings[1] = ("b",) * raters
    return AnnotationTable(
        tuple(f"item{n}" for n in range(items)), tuple(ratings)
    )


@strategies.composite
def sparse_vectors(draw: strategies.DrawFn, dimension: int = 8) -> SparseVector:
    """Strategy to generate a sparse vector of the given dimension."""
    indices = sorted(
        draw(
            strategies.sets(
                strategies.integers(min_value=0, max_value=dimension - 1),
                max_size=dimension,
            )
        )
    )
    values = [
        draw(strategies.floats(min_value=-3, max_value=3, allow_nan=False))
        for _ in indices
    ]
    return SparseVector(
        np.array(indices, dtype=np.int64), np.array(values), dimension
    )


@strategies.composite
def comment_forests(draw: strategies.DrawFn) -> List[Comment]:
    """Strategy to generate the comments of a few threads, parents before replies.

    Some parents point outside the dump, which makes their comments roots.
    """
    count = draw(strategies.integers(min_value=1, max_value=25))
    threads = ["t1", "t2", "t3"]
    reply_words = ["troll", "trol", "trolls", "tr0ll", "roll", "toll", "hello"]
    forest: List[Comment] = []
    for n in range(count):
        thread = draw(strategies.sampled_from(threads))
        earlier = [c.id for c in forest if c.thread_id == thread]
        parent = draw(
            strategies.none()
            | strategies.just("missing")
            | (strategies.sampled_from(earlier) if earlier else strategies.none())
        )
        body = " ".join(
            draw(
                strategies.lists(
                    strategies.sampled_from(reply_words) | words,
                    min_size=1,
                    max_size=4,
                )
            )
        )
        forest.append(
            Comment(
                id=f"c{n}",
                thread_id=thread,
                body=body,
                author=draw(strategies.sampled_from(["ann", "ben", "cy"])),
                parent_id=parent,
                created_utc=draw(strategies.integers(min_value=0, max_value=50)),
            )
        )
    return forest
