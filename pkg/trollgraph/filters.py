"""Filters for comments.

Not every comment of a dump is usable: some were deleted, and only some of them answer a
suspected trolling event.

This module defines the filters that decide which comments are kept while ingesting a
dump and which replies mark their parent as a suspect.
"""

from __future__ import annotations

import copy
from abc import ABC, abstractmethod
from typing import Final, Generic, Literal, Optional, Protocol, Sequence, TypeVar

from trollgraph.text import within_distance, word_tokens

__all__ = [
    "DELETED_MARKER",
    "CommentLike",
    "CommentProperty",
    "Filter",
    "In",
    "HasFuzzyToken",
    "not_deleted",
]

DELETED_MARKER: Final[str] = "[deleted]"

T = TypeVar("T")

CommentProperty = Literal["id", "parent_id", "thread_id", "author", "body"]


class CommentLike(Protocol):
    """The comment fields the filters look at."""

    @property
    def id(self) -> str: ...

    @property
    def parent_id(self) -> Optional[str]: ...

    @property
    def thread_id(self) -> str: ...

    @property
    def author(self) -> str: ...

    @property
    def body(self) -> str: ...


class Filter(ABC, Generic[T]):
    """
    Base class for filters.

    Filters decide whether a comment should be kept. They can be combined using the
    bitwise operator `&`: `filter1 & filter2` passes only if both pass, and inverted
    with `~`.

    New filters can be created by subclassing this class and implementing `_apply`.

    Generic:
        T: The type of the filter parameter.

    Examples:
        >>> kept = ~In("body", ["[deleted]"]) & ~In("author", ["[deleted]"])
        >>> suspect_reply = HasFuzzyToken("body", "troll", max_edit=1)
    """

    comment_prop: CommentProperty
    __inverted: bool
    _chained: list[Filter]
    param: T | None

    def __init__(
        self,
        comment_prop: CommentProperty,
        param: T | None = None,
        *,
        _inverted: bool = False,
        _chained: list[Filter] | None = None,
    ) -> None:
        self.param = param
        self.comment_prop = comment_prop
        self.__inverted = _inverted
        self._chained = _chained or []

    @abstractmethod
    def _apply(self, comment: CommentLike) -> bool:
        """Test the filter rule on the given comment.

        Args:
            comment (CommentLike): The comment to test the filter on.

        Returns:
            bool: True if the comment passes the filter, False otherwise.
        """
        ...

    def _get_comment_property(self, comment: CommentLike) -> str:
        return getattr(comment, self.comment_prop) or ""

    def filter(self, comment: CommentLike) -> bool:
        """Applies the filter (and the filters chained to it) to the given comment.

        Args:
            comment (CommentLike): The comment to filter.

        Returns:
            bool: True if the comment passes the filter, False otherwise.
        """
        return all(
            (
                *(f.filter(comment) for f in self._chained),
                self._apply(comment) != self.__inverted,
            )
        )

    def __call__(self, comment: CommentLike) -> bool:
        return self.filter(comment)

    def __invert__(self) -> Filter:
        new = copy.deepcopy(self)
        new.__inverted = not self.__inverted  # noqa: SLF001
        return new

    def __and__(self, other: Filter) -> Filter:
        if not isinstance(other, Filter):
            raise NotImplementedError
        new = copy.deepcopy(self)
        new._chained.append(other)
        return new


class In(Filter[Sequence[str]]):
    """Keep comments whose property is one of a group of values.

    Examples:
        >>> In("author", ["AutoModerator"]).filter(comment)
    """

    def __init__(
        self, comment_prop: CommentProperty, group: Sequence[str], **kwargs
    ) -> None:
        super().__init__(comment_prop, group, **kwargs)
        self.set = set(group)

    def _apply(self, comment: CommentLike) -> bool:
        return self._get_comment_property(comment) in self.set


class HasFuzzyToken(Filter[str]):
    """Keep comments whose property has a word within `max_edit` edits of a keyword.

    Words are obtained with `trollgraph.text.word_tokens`, so `"Troll,"` is the word
    `"troll"`.

    Args:
        comment_prop (CommentProperty): The property to search, usually `"body"`.
        keyword (str): The keyword; it is lowercased.
        max_edit (int): The maximum Levenshtein distance accepted.
    """

    def __init__(
        self, comment_prop: CommentProperty, keyword: str, max_edit: int = 0, **kwargs
    ) -> None:
        if not keyword:
            msg = "The keyword cannot be empty."
            raise ValueError(msg)
        if max_edit < 0:
            msg = f"max_edit must be non-negative (got {max_edit})."
            raise ValueError(msg)
        super().__init__(comment_prop, keyword.lower(), **kwargs)
        self.keyword = keyword.lower()
        self.max_edit = max_edit

    def _apply(self, comment: CommentLike) -> bool:
        return any(
            within_distance(word, self.keyword, self.max_edit)
            for word in word_tokens(self._get_comment_property(comment))
        )


def not_deleted() -> Filter:
    """Filter that drops comments whose body or author is the deleted marker."""
    return ~In("body", [DELETED_MARKER]) & ~In("author", [DELETED_MARKER])
