"""Comments, conversation trees and snippets.

A snippet is the unit of prediction: the parent of a suspected trolling comment, the
suspect itself and every direct response to it. This module reconstructs conversation
trees from a comment dump, finds suspects (comments with a reply mentioning the
keyword), cuts snippets out of the trees and holds the four-aspect label scheme.
"""

from __future__ import annotations

import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import (
    Callable,
    Dict,
    Iterable,
    Iterator,
    List,
    Mapping,
    Optional,
    Tuple,
    Type,
    Union,
)

from typing_extensions import Self  # type: ignore[attr-defined]

from trollgraph import errors, parsers
from trollgraph.filters import HasFuzzyToken, not_deleted

__all__ = [
    "IntentionLabel",
    "DisclosureLabel",
    "InterpretationLabel",
    "StrategyLabel",
    "Task",
    "Comment",
    "ConversationTree",
    "Snippet",
    "ResponseLabels",
    "SnippetLabels",
    "RejectionReason",
    "MiningResult",
    "Violation",
    "parse_comment_dump",
    "build_trees",
    "find_suspects",
    "extract_snippet",
    "mine_snippets",
    "validate_labels",
    "label_warnings",
    "load_snippets",
    "load_trees",
]

logger = logging.getLogger(__name__)


class _Label(str, Enum):
    @classmethod
    def parse(cls, value: str) -> Self:
        """Read a label from its lowercase name, ignoring case, spaces, `_` and `-`."""
        key = value.lower().replace("_", "").replace(" ", "").replace("-", "")
        for label in cls:
            if label.value == key:
                return label
        msg = f'"{value}" is not a valid {cls.__name__}.'
        raise errors.LabelError(msg)

    @property
    def index(self) -> int:
        return list(type(self)).index(self)


class IntentionLabel(_Label):
    NONE = "none"
    TROLLING = "trolling"
    PLAYING = "playing"


class DisclosureLabel(_Label):
    NONE = "none"
    HIDDEN = "hidden"
    EXPOSED = "exposed"


class InterpretationLabel(_Label):
    NONE = "none"
    TROLLING = "trolling"
    PLAYING = "playing"


class StrategyLabel(_Label):
    NORMAL = "normal"
    BITE_ATTEMPT = "biteattempt"
    IMAGINARY_BITE = "imaginarybite"
    FALSE_ACCUSATION = "falseaccusation"
    FRUSTRATE = "frustrate"
    NEUTRALIZE = "neutralize"
    COUNTER_TROLLING = "countertrolling"
    PRAISE = "praise"
    ENGAGE = "engage"
    AGGRAVATION = "aggravation"
    CONFRONTATION = "confrontation"
    FAILED = "failed"
    BITE = "bite"
    FOLLOW = "follow"


AnyLabel = Union[IntentionLabel, DisclosureLabel, InterpretationLabel, StrategyLabel]


class Task(str, Enum):
    """The four aspects of a trolling event, in pipeline order."""

    INTENTION = "intention"
    DISCLOSURE = "disclosure"
    INTERPRETATION = "interpretation"
    STRATEGY = "strategy"

    @property
    def short(self) -> str:
        """One-letter code used in feature names (`task:i:trolling`)."""
        return _SHORT[self]

    @property
    def labels(self) -> Type[_Label]:
        return _LABELS[self]

    @property
    def per_response(self) -> bool:
        return self in (Task.INTERPRETATION, Task.STRATEGY)


_SHORT = {
    Task.INTENTION: "i",
    Task.DISCLOSURE: "d",
    Task.INTERPRETATION: "r",
    Task.STRATEGY: "b",
}
_LABELS: Dict[Task, Type[_Label]] = {
    Task.INTENTION: IntentionLabel,
    Task.DISCLOSURE: DisclosureLabel,
    Task.INTERPRETATION: InterpretationLabel,
    Task.STRATEGY: StrategyLabel,
}

# Strategies whose definition implies the responder recognised (or did not recognise)
# malicious or playful intentions.
_ACKNOWLEDGING = frozenset(
    {
        StrategyLabel.FRUSTRATE,
        StrategyLabel.NEUTRALIZE,
        StrategyLabel.COUNTER_TROLLING,
        StrategyLabel.PRAISE,
        StrategyLabel.ENGAGE,
        StrategyLabel.FOLLOW,
    }
)
_UNAWARE = frozenset({StrategyLabel.NORMAL, StrategyLabel.FAILED})


def _required(record: parsers.Record, key: str) -> str:
    value = record.get(key)
    if value is None or (isinstance(value, str) and not value):
        msg = f'missing field "{key}"'
        raise ValueError(msg)
    return str(value)


def _strip_kind(fullname: Optional[str]) -> Optional[str]:
    """Turn a comment fullname (`t1_abc`) into its id; other kinds become roots."""
    if fullname is None or fullname == "":
        return None
    if fullname.startswith("t1_"):
        return fullname[3:]
    if fullname.startswith("t3_"):
        return None
    return fullname


@dataclass(frozen=True)
class Comment:
    id: str
    thread_id: str
    body: str
    author: str = ""
    parent_id: Optional[str] = None
    created_utc: int = 0

    @classmethod
    def from_record(cls, record: parsers.Record) -> Comment:
        """Build a comment from a dump record.

        Raises:
            ValueError: If `id`, the thread id (`link_id` or `thread_id`) or `body` is
                missing or empty, or `created_utc` is not an integer.
        """
        thread = record.get("link_id", record.get("thread_id"))
        if thread is None or thread == "":
            msg = 'missing field "link_id"'
            raise ValueError(msg)
        body = record.get("body")
        if body is None or body == "":
            msg = 'missing field "body"'
            raise ValueError(msg)
        try:
            created = int(record.get("created_utc") or 0)
        except (TypeError, ValueError):
            msg = f'"created_utc" is not an integer: {record.get("created_utc")!r}'
            raise ValueError(msg) from None
        return cls(
            id=_required(record, "id"),
            thread_id=str(thread),
            body=str(body),
            author=str(record.get("author") or ""),
            parent_id=_strip_kind(record.get("parent_id")),
            created_utc=created,
        )

    def to_record(self) -> parsers.Record:
        return {
            "id": self.id,
            "parent_id": self.parent_id,
            "link_id": self.thread_id,
            "author": self.author,
            "body": self.body,
            "created_utc": self.created_utc,
        }


@dataclass(frozen=True)
class ConversationTree:
    """A reconstructed thread.

    Attributes:
        thread_id (str): The thread all the comments belong to.
        nodes (Mapping[str, Comment]): The comments by id.
        children (Mapping[str, Tuple[str, ...]]): Child ids of every comment, ordered by
            creation time then id.
        roots (Tuple[str, ...]): Comments with no parent in the dump, same order.
    """

    thread_id: str
    nodes: Mapping[str, Comment]
    children: Mapping[str, Tuple[str, ...]]
    roots: Tuple[str, ...]

    def parent(self, comment_id: str) -> Optional[Comment]:
        parent_id = self.nodes[comment_id].parent_id
        if parent_id is None or comment_id in self.roots:
            return None
        return self.nodes[parent_id]

    def replies(self, comment_id: str) -> List[Comment]:
        return [self.nodes[child] for child in self.children.get(comment_id, ())]

    def walk(self) -> Iterator[Comment]:
        """Yield the comments in preorder, roots first."""
        stack = list(reversed(self.roots))
        while stack:
            comment_id = stack.pop()
            yield self.nodes[comment_id]
            stack.extend(reversed(self.children.get(comment_id, ())))

    def flatten(self) -> List[Comment]:
        return list(self.walk())

    @property
    def depth(self) -> int:
        """Number of comments on the longest root-to-leaf path."""
        deepest = 0
        stack = [(root, 1) for root in self.roots]
        while stack:
            comment_id, level = stack.pop()
            deepest = max(deepest, level)
            stack.extend(
                (child, level + 1) for child in self.children.get(comment_id, ())
            )
        return deepest

    def to_record(self) -> parsers.Record:
        return {
            "thread_id": self.thread_id,
            "comments": [comment.to_record() for comment in self.walk()],
        }

    @classmethod
    def from_record(cls, record: parsers.Record) -> ConversationTree:
        comments = [Comment.from_record(c) for c in record.get("comments", [])]
        trees = build_trees(comments)
        if len(trees) != 1:
            msg = "a tree record must hold the comments of exactly one thread"
            raise ValueError(msg)
        return trees[0]


@dataclass(frozen=True)
class Snippet:
    snippet_id: str
    parent: Comment
    suspect: Comment
    responses: Tuple[Comment, ...]

    @property
    def size(self) -> int:
        """The number of direct responses, R."""
        return len(self.responses)

    def comments(self) -> List[Comment]:
        return [self.parent, self.suspect, *self.responses]

    def to_record(self, labels: Optional[SnippetLabels] = None) -> parsers.Record:
        record: parsers.Record = {
            "snippet_id": self.snippet_id,
            "parent": self.parent.to_record(),
            "suspect": self.suspect.to_record(),
            "responses": [response.to_record() for response in self.responses],
        }
        if labels is not None:
            record["labels"] = labels.to_record()
        return record

    @classmethod
    def from_record(cls, record: parsers.Record) -> Snippet:
        responses = record.get("responses")
        if not isinstance(responses, list):
            msg = 'missing field "responses"'
            raise ValueError(msg)
        return cls(
            snippet_id=_required(record, "snippet_id"),
            parent=Comment.from_record(record.get("parent") or {}),
            suspect=Comment.from_record(record.get("suspect") or {}),
            responses=tuple(Comment.from_record(r) for r in responses),
        )


@dataclass(frozen=True)
class ResponseLabels:
    interpretation: InterpretationLabel
    strategy: StrategyLabel


@dataclass(frozen=True)
class SnippetLabels:
    intention: IntentionLabel
    disclosure: DisclosureLabel
    per_response: Tuple[ResponseLabels, ...] = field(default_factory=tuple)

    def values(self, task: Task) -> List[AnyLabel]:
        """The labels of one task: a single value for I and D, one per response else."""
        if task is Task.INTENTION:
            return [self.intention]
        if task is Task.DISCLOSURE:
            return [self.disclosure]
        if task is Task.INTERPRETATION:
            return [response.interpretation for response in self.per_response]
        return [response.strategy for response in self.per_response]

    def to_record(self) -> parsers.Record:
        return {
            "intention": self.intention.value,
            "disclosure": self.disclosure.value,
            "responses": [
                {
                    "interpretation": response.interpretation.value,
                    "strategy": response.strategy.value,
                }
                for response in self.per_response
            ],
        }

    @classmethod
    def from_record(cls, record: parsers.Record) -> SnippetLabels:
        return cls(
            intention=IntentionLabel.parse(_required(record, "intention")),
            disclosure=DisclosureLabel.parse(_required(record, "disclosure")),
            per_response=tuple(
                ResponseLabels(
                    InterpretationLabel.parse(_required(response, "interpretation")),
                    StrategyLabel.parse(_required(response, "strategy")),
                )
                for response in record.get("responses") or []
            ),
        )


class RejectionReason(str, Enum):
    NO_PARENT = "NoParent"
    NO_RESPONSES = "NoResponses"
    PARENT_NOT_RESPONDER = "ParentNotResponder"


@dataclass(frozen=True)
class MiningResult:
    snippets: List[Snippet]
    rejections: Counter


@dataclass(frozen=True)
class Violation:
    invariant: str
    message: str


def parse_comment_dump(
    lines: Iterable[str],
    *,
    strict: bool = False,
    on_error: Optional[Callable[[errors.InvalidRecordError], None]] = None,
) -> List[Comment]:
    """Read a newline-delimited comment dump.

    Deleted comments (body or author equal to `[deleted]`) are dropped; the order of
    the input is preserved.

    Args:
        lines (Iterable[str]): The lines of the dump.
        strict (bool, optional): Raise on the first malformed record. Defaults to
            `False`, in which case malformed records are reported and skipped.
        on_error (Callable, optional): Called with every `InvalidRecordError` found.

    Returns:
        List[Comment]: The kept comments.

    Raises:
        errors.InvalidRecordError: In strict mode, for the first malformed record.
    """
    parser = parsers.parse_json_lines(lines, strict=strict)
    found_errors = list(parser.errors)
    kept = not_deleted()
    comments: List[Comment] = []
    for line, record in parser.found_records:
        try:
            comment = Comment.from_record(record)
        except ValueError as e:
            error = errors.InvalidRecordError(line, str(e))
            if strict:
                raise error from e
            logger.warning("Skipping malformed record: %s", error.message)
            found_errors.append(error)
            continue
        if kept(comment):
            comments.append(comment)
    if on_error is not None:
        for error in sorted(found_errors, key=lambda e: e.line):
            on_error(error)
    return comments


def build_trees(comments: Iterable[Comment]) -> List[ConversationTree]:
    """Reconstruct one conversation tree per thread.

    Comments whose parent is not part of the dump become roots of their thread's tree.
    Children and roots are ordered by creation time, then id. Trees are returned in
    the order their threads first appear.

    Raises:
        errors.DuplicateCommentError: If an id appears twice within a thread.
        errors.CyclicThreadError: If parent links within a thread form a cycle.
    """
    by_thread: Dict[str, Dict[str, Comment]] = {}
    for comment in comments:
        nodes = by_thread.setdefault(comment.thread_id, {})
        if comment.id in nodes:
            raise errors.DuplicateCommentError(comment.id, comment.thread_id)
        nodes[comment.id] = comment

    trees = []
    for thread_id, nodes in by_thread.items():
        children: Dict[str, List[Comment]] = defaultdict(list)
        roots: List[Comment] = []
        for comment in nodes.values():
            if comment.parent_id is not None and comment.parent_id in nodes:
                children[comment.parent_id].append(comment)
            else:
                roots.append(comment)

        def ordered(group: List[Comment]) -> Tuple[str, ...]:
            by_time = sorted(group, key=lambda c: (c.created_utc, c.id))
            return tuple(c.id for c in by_time)

        tree = ConversationTree(
            thread_id=thread_id,
            nodes=dict(nodes),
            children={parent: ordered(group) for parent, group in children.items()},
            roots=ordered(roots),
        )
        reached = {comment.id for comment in tree.walk()}
        if len(reached) != len(nodes):
            raise errors.CyclicThreadError(thread_id, list(set(nodes) - reached))
        trees.append(tree)
    return trees


def find_suspects(tree: ConversationTree, keyword: str, max_edit: int) -> List[str]:
    """Ids of the comments having at least one reply with a word within `max_edit`
    edits of `keyword`, in preorder.

    Args:
        tree (ConversationTree): The tree to scan.
        keyword (str): The keyword, e.g. `"troll"`.
        max_edit (int): The maximum Levenshtein distance accepted.

    Returns:
        List[str]: The suspect comment ids.
    """
    mentions = HasFuzzyToken("body", keyword, max_edit)
    return [
        comment.id
        for comment in tree.walk()
        if any(mentions(reply) for reply in tree.replies(comment.id))
    ]


def extract_snippet(tree: ConversationTree, suspect_id: str) -> Snippet:
    """Cut the snippet (parent, suspect, direct responses) around a suspect.

    The parent's author must be among the authors of the responses; an unknown
    (empty) author never matches.

    Raises:
        KeyError: If the suspect is not part of the tree.
        errors.SnippetRejectedError: With a `RejectionReason` value when the suspect
            has no parent, no responses, or its parent's author did not respond.
    """
    if suspect_id not in tree.nodes:
        raise KeyError(suspect_id)
    parent = tree.parent(suspect_id)
    if parent is None:
        raise errors.SnippetRejectedError(suspect_id, RejectionReason.NO_PARENT.value)
    responses = tree.replies(suspect_id)
    if not responses:
        raise errors.SnippetRejectedError(
            suspect_id, RejectionReason.NO_RESPONSES.value
        )
    if not parent.author or parent.author not in {r.author for r in responses}:
        raise errors.SnippetRejectedError(
            suspect_id, RejectionReason.PARENT_NOT_RESPONDER.value
        )
    return Snippet(
        snippet_id=suspect_id,
        parent=parent,
        suspect=tree.nodes[suspect_id],
        responses=tuple(responses),
    )


def mine_snippets(
    trees: Iterable[ConversationTree], keyword: str = "troll", max_edit: int = 1
) -> MiningResult:
    """Find the suspects of every tree and extract their snippets.

    Returns:
        MiningResult: The snippets plus the number of rejected suspects per reason.
    """
    snippets: List[Snippet] = []
    rejections: Counter = Counter()
    for tree in trees:
        for suspect_id in find_suspects(tree, keyword, max_edit):
            try:
                snippets.append(extract_snippet(tree, suspect_id))
            except errors.SnippetRejectedError as e:
                rejections[RejectionReason(e.reason)] += 1
    logger.info(
        "Mined %d snippet(s), rejected %d suspect(s)",
        len(snippets),
        sum(rejections.values()),
    )
    return MiningResult(snippets, rejections)


def validate_labels(snippet: Snippet, labels: SnippetLabels) -> List[Violation]:
    """Check a labeling against the invariants of the label scheme.

    Returns:
        List[Violation]: Empty if every invariant holds.
    """
    violations = []
    if len(labels.per_response) != snippet.size:
        violations.append(
            Violation(
                "response-count",
                f"{len(labels.per_response)} response label(s) for "
                f"{snippet.size} response(s)",
            )
        )
    if (labels.intention is IntentionLabel.NONE) != (
        labels.disclosure is DisclosureLabel.NONE
    ):
        violations.append(
            Violation(
                "intention-disclosure",
                f"intention {labels.intention.value} with disclosure "
                f"{labels.disclosure.value}",
            )
        )
    return violations


def label_warnings(snippet: Snippet, labels: SnippetLabels) -> List[str]:
    """Combinations the label scheme does not forbid but that look suspicious."""
    warnings = []
    if (
        labels.intention is IntentionLabel.PLAYING
        and labels.disclosure is DisclosureLabel.HIDDEN
    ):
        warnings.append("playing intention with hidden disclosure")
    for response, response_labels in zip(snippet.responses, labels.per_response):
        strategy = response_labels.strategy
        interpretation = response_labels.interpretation
        if strategy in _ACKNOWLEDGING and interpretation is InterpretationLabel.NONE:
            warnings.append(
                f"response {response.id}: {strategy.value} without a trolling or "
                "playing interpretation"
            )
        if strategy in _UNAWARE and interpretation is not InterpretationLabel.NONE:
            warnings.append(
                f"response {response.id}: {strategy.value} with a "
                f"{interpretation.value} interpretation"
            )
    return warnings


def load_snippets(
    lines: Iterable[str], *, strict: bool = False
) -> List[Tuple[Snippet, Optional[SnippetLabels]]]:
    """Read a snippet file; the labels are `None` for unlabeled records.

    Raises:
        errors.InvalidRecordError: In strict mode, for the first malformed record.
    """
    parser = parsers.parse_json_lines(lines, strict=strict)
    loaded = []
    for line, record in parser.found_records:
        try:
            snippet = Snippet.from_record(record)
            labels = (
                SnippetLabels.from_record(record["labels"])
                if record.get("labels")
                else None
            )
        except (ValueError, errors.LabelError) as e:
            error = errors.InvalidRecordError(line, str(e))
            if strict:
                raise error from e
            logger.warning("Skipping malformed snippet: %s", error.message)
            continue
        loaded.append((snippet, labels))
    return loaded


def load_trees(lines: Iterable[str], *, strict: bool = False) -> List[ConversationTree]:
    """Read the tree file written by the `ingest` command."""
    parser = parsers.parse_json_lines(lines, strict=strict)
    trees = []
    for line, record in parser.found_records:
        try:
            trees.append(ConversationTree.from_record(record))
        except ValueError as e:
            error = errors.InvalidRecordError(line, str(e))
            if strict:
                raise error from e
            logger.warning("Skipping malformed tree: %s", error.message)
    return trees
