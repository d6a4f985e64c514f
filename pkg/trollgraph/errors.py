from __future__ import annotations

from typing import Sequence


class Error(Exception):
    """
    Base class for exceptions in this package
    """

    default_message: str | None = None

    def __init__(self, message: str = "") -> None:
        super().__init__(message or self.default_message or "")
        self.message = message or self.default_message

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({self.message})"


class InvalidConfigurationError(Error):
    """
    Raised when a run configuration is invalid
    """

    default_message = "Invalid configuration."


class InvalidRecordError(Error):
    """
    Raised when a line of a record file cannot be turned into a record
    """

    def __init__(self, line: int, reason: str) -> None:
        super().__init__(f"Line {line}: {reason}")
        self.line = line
        self.reason = reason


class DuplicateCommentError(Error):
    """
    Raised when two comments of the same thread share an id
    """

    def __init__(self, comment_id: str, thread_id: str) -> None:
        super().__init__(
            f'The comment id "{comment_id}" appears twice in thread "{thread_id}".'
        )
        self.comment_id = comment_id
        self.thread_id = thread_id


class CyclicThreadError(Error):
    """
    Raised when the parent links of a thread form a cycle
    """

    def __init__(self, thread_id: str, comment_ids: Sequence[str]) -> None:
        shown = ", ".join(sorted(comment_ids)[:5])
        super().__init__(f'Thread "{thread_id}" has a reply cycle through: {shown}')
        self.thread_id = thread_id
        self.comment_ids = list(comment_ids)


class SnippetRejectedError(Error):
    """
    Raised when a suspect comment cannot be turned into a snippet
    """

    def __init__(self, suspect_id: str, reason: str) -> None:
        super().__init__(f'Suspect "{suspect_id}" rejected: {reason}.')
        self.suspect_id = suspect_id
        self.reason = reason


class LexiconLoadError(Error):
    """
    Raised when a lexicon file is missing or unusable
    """

    def __init__(self, path: str, reason: str = "missing") -> None:
        super().__init__(f'Lexicon file "{path}" is {reason}.')
        self.path = path
        self.reason = reason


class EmptyVocabularyError(Error):
    """
    Raised when no feature survives the vocabulary cutoff
    """

    default_message = "The vocabulary would contain no n-gram or lexicon feature."


class FrozenVocabularyError(Error):
    """
    Raised when a name is added to a frozen vocabulary
    """

    def __init__(self, name: str) -> None:
        super().__init__(f'Cannot add "{name}" to a frozen vocabulary.')
        self.name = name


class DimensionMismatchError(Error):
    """
    Raised when a vector does not match the dimension of the weights it meets
    """

    def __init__(self, expected: int, got: int, what: str = "vector") -> None:
        super().__init__(f"Expected a {what} of dimension {expected}, got {got}.")
        self.expected = expected
        self.got = got


class LabelError(Error):
    """
    Raised when a label index or label arity is invalid
    """


class InsufficientLabelsError(Error):
    """
    Raised when a classifier is asked to learn from a single class
    """

    default_message = "At least two distinct labels are needed to train a classifier."


class MissingLabelsError(Error):
    """
    Raised when training data lacks gold labels
    """

    def __init__(self, snippet_ids: Sequence[str]) -> None:
        shown = ", ".join(snippet_ids[:5])
        super().__init__(f"{len(snippet_ids)} snippet(s) have no labels: {shown}")
        self.snippet_ids = list(snippet_ids)


class OptimizationError(Error):
    """
    Raised when the minimizer meets a non-finite objective or gradient
    """


class FoldError(Error):
    """
    Raised when a fold plan cannot be built
    """


class FoldJobError(Error):
    """
    Raised when a fold job fails with an exception from outside this package
    """

    def __init__(self, cause: BaseException) -> None:
        super().__init__(f"A fold job failed: {cause!r}")
        self.cause = cause


class InvalidAnnotationTableError(Error):
    """
    Raised when raw annotations cannot form an items by annotators table
    """


class KappaUndefinedError(Error):
    """
    Raised when the chance agreement of an annotation table is 1 but the observed
    agreement is not
    """

    default_message = "Fleiss kappa is undefined for this table."


class ModelFormatError(Error):
    """
    Raised when a model file cannot be read back
    """
