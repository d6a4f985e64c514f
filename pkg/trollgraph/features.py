"""Feature extraction, vocabularies and sparse vectors.

Comments become `FeatureBag`s of namespaced features (`family:payload`). Binary
families have value 1.0; the four `senti:*` features carry the real-valued sentiment
scores. A `Vocabulary` built on training bags only maps names to columns, and
`vectorize` turns bags into `SparseVector`s over it.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import (
    Dict,
    FrozenSet,
    Iterable,
    Iterator,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
)

import numpy as np
from scipy import sparse

from trollgraph import errors, parsers
from trollgraph.lexicons import LexiconSet, sentiment_scores
from trollgraph.snippets import AnyLabel, Comment, Snippet, Task
from trollgraph.text import PUNCTUATION, split_pieces

__all__ = [
    "FeatureSet",
    "FeatureConfig",
    "Token",
    "Frame",
    "SidecarAnnotation",
    "FeatureBag",
    "Vocabulary",
    "SparseVector",
    "SnippetBags",
    "SnippetVectors",
    "FeatureSpace",
    "SENTIMENT_FEATURES",
    "CONTEXT_PREFIX",
    "tokenize",
    "extract_features",
    "combine_context",
    "with_indicators",
    "indicator_name",
    "indicator_names",
    "build_vocabulary",
    "vectorize",
    "stack",
    "featurize_snippet",
    "load_sidecars",
]

logger = logging.getLogger(__name__)

CONTEXT_PREFIX = "ctx:"
SENTIMENT_FEATURES: Tuple[str, ...] = (
    "senti:positive",
    "senti:neutral",
    "senti:negative",
    "senti:compound",
)
REAL_VALUED_FAMILIES = frozenset({"senti"})


class FeatureSet(str, Enum):
    BASIC = "basic"
    ENHANCED = "enhanced"


@dataclass(frozen=True)
class FeatureConfig:
    """How snippets are featurized.

    Attributes:
        feature_set (FeatureSet): `basic` or `enhanced`.
        min_count (int): Minimum number of training bags a name must occur in.
        response_context (bool): Also give response bags the suspect's features, under
            the `ctx:` prefix.
    """

    feature_set: FeatureSet = FeatureSet.BASIC
    min_count: int = 1
    response_context: bool = False

    def __post_init__(self) -> None:
        if self.min_count < 1:
            msg = f"min_count must be at least 1 (got {self.min_count})."
            raise ValueError(msg)

    def to_record(self) -> parsers.Record:
        return {
            "feature_set": self.feature_set.value,
            "min_count": self.min_count,
            "response_context": self.response_context,
        }

    @classmethod
    def from_record(cls, record: parsers.Record) -> FeatureConfig:
        return cls(
            feature_set=FeatureSet(record.get("feature_set", FeatureSet.BASIC.value)),
            min_count=int(record.get("min_count", 1)),
            response_context=bool(record.get("response_context", False)),
        )


@dataclass(frozen=True)
class Token:
    text: str
    pos: Optional[str] = None
    lemma: Optional[str] = None
    sentence: int = 0

    @property
    def lowered(self) -> str:
        return self.text.lower()

    @property
    def is_punctuation(self) -> bool:
        return all(char in PUNCTUATION for char in self.text)


@dataclass(frozen=True)
class Frame:
    name: str
    target: str
    args: Tuple[Tuple[str, str], ...] = ()


@dataclass(frozen=True)
class SidecarAnnotation:
    """Offline linguistic annotation of one comment."""

    comment_id: str
    tokens: Tuple[Token, ...]
    frames: Tuple[Frame, ...] = ()

    @property
    def sentences(self) -> int:
        return len({token.sentence for token in self.tokens})

    @classmethod
    def from_record(cls, record: parsers.Record) -> SidecarAnnotation:
        comment_id = record.get("comment_id")
        if not comment_id:
            msg = 'missing field "comment_id"'
            raise ValueError(msg)
        tokens = tuple(
            Token(
                text=str(token["text"]),
                pos=token.get("pos"),
                lemma=token.get("lemma"),
                sentence=int(token.get("sentence", 0)),
            )
            for token in record.get("tokens") or []
        )
        frames = tuple(
            Frame(
                name=str(frame["frame"]),
                target=str(frame.get("target", "")),
                args=tuple(
                    (str(arg["role"]), str(arg["text"]))
                    for arg in frame.get("args", [])
                ),
            )
            for frame in record.get("frames") or []
        )
        return cls(str(comment_id), tokens, frames)


def load_sidecars(
    lines: Iterable[str], *, strict: bool = False
) -> Dict[str, SidecarAnnotation]:
    """Read a sidecar annotation file into a map keyed by comment id."""
    parser = parsers.parse_json_lines(lines, strict=strict)
    sidecars = {}
    for line, record in parser.found_records:
        try:
            sidecar = SidecarAnnotation.from_record(record)
        except (KeyError, TypeError, ValueError) as e:
            error = errors.InvalidRecordError(line, str(e))
            if strict:
                raise error from e
            logger.warning("Skipping malformed sidecar: %s", error.message)
            continue
        sidecars[sidecar.comment_id] = sidecar
    return sidecars


class FeatureBag(Mapping[str, float]):
    """Immutable map of feature names to values.

    Args:
        values (Mapping[str, float]): The features.
        notes (Iterable[str]): Provenance notes, such as the families that were
            disabled for lack of annotations.
    """

    __slots__ = ("_values", "notes")

    def __init__(self, values: Mapping[str, float], notes: Iterable[str] = ()) -> None:
        self._values = dict(values)
        self.notes: FrozenSet[str] = frozenset(notes)

    def __getitem__(self, name: str) -> float:
        return self._values[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def __repr__(self) -> str:
        return f"FeatureBag({self._values!r})"


def tokenize(text: str, emoticons: Iterable[str] = ()) -> List[Token]:
    """Split a text into tokens.

    Pieces are separated by whitespace, then leading and trailing runs of punctuation
    become tokens of their own. Known emoticons stay intact, also when glued to a word
    or to other punctuation.

    Args:
        text (str): The text to split.
        emoticons (Iterable[str]): The emoticons to preserve, lowercased.

    Returns:
        List[Token]: The tokens, in order.

    Examples:
        >>> [t.text for t in tokenize("Space is cool! :)", [":)"])]
        ['Space', 'is', 'cool', '!', ':)']
    """
    return [Token(part) for part in split_pieces(text, emoticons)]


def _phrase_hits(words: Sequence[str], phrases: Iterable[str]) -> List[str]:
    """The phrases occurring as contiguous word sequences."""
    by_length: Dict[int, set] = {}
    for phrase in phrases:
        parts = tuple(phrase.split())
        by_length.setdefault(len(parts), set()).add(parts)
    hits = []
    for length, candidates in sorted(by_length.items()):
        for start in range(len(words) - length + 1):
            window = tuple(words[start : start + length])
            if window in candidates:
                hits.append("_".join(window))
    return hits


def extract_features(
    comment: Comment,
    sidecar: Optional[SidecarAnnotation] = None,
    lexicons: Optional[LexiconSet] = None,
    feature_set: FeatureSet = FeatureSet.BASIC,
) -> FeatureBag:
    """Extract the feature bag of one comment.

    The basic set holds unigrams, bigrams, POS-conjoined uni- and bigrams, lemmas,
    harmful-vocabulary hits and emotion lemma hits. The enhanced set adds emoticons,
    the four sentiment scores, subjectivity, swearing, frame-semantic features and
    politeness cues.

    Args:
        comment (Comment): The comment.
        sidecar (SidecarAnnotation, optional): Its offline annotation. Without it, POS,
            sidecar lemmas and frames are unavailable and the bag records so.
        lexicons (LexiconSet, optional): Required by the enhanced set.
        feature_set (FeatureSet): Which set to extract.

    Returns:
        FeatureBag: The features.

    Raises:
        ValueError: If the enhanced set is requested without lexicons.
    """
    enhanced = feature_set is FeatureSet.ENHANCED
    if enhanced and lexicons is None:
        msg = "The enhanced feature set requires loaded lexicons."
        raise ValueError(msg)

    emoticons = frozenset(lexicons.emoticons) if lexicons else frozenset()
    notes = []
    if sidecar is None:
        tokens = tokenize(comment.body, emoticons)
        notes.append("no-sidecar: pos, frame families disabled; lemma = lowered token")
    else:
        tokens = list(sidecar.tokens)
        if not sidecar.frames and enhanced:
            notes.append("no-frames: frame families disabled")
    if lexicons is None:
        notes.append("no-lexicons: harm, emo families disabled")

    bag: Dict[str, float] = {}

    def flag(name: str) -> None:
        bag[name] = 1.0

    for token in tokens:
        flag(f"uni:{token.lowered}")
        if token.pos:
            flag(f"unipos:{token.lowered}/{token.pos}")
    for first, second in zip(tokens, tokens[1:]):
        if first.sentence != second.sentence:
            continue
        flag(f"bi:{first.lowered}_{second.lowered}")
        if first.pos and second.pos:
            flag(f"bipos:{first.lowered}/{first.pos}_{second.lowered}/{second.pos}")

    lemmas = [(token.lemma or token.lowered).lower() for token in tokens]
    for lemma in lemmas:
        flag(f"lemma:{lemma}")

    if lexicons is not None:
        for token in tokens:
            if token.lowered in lexicons.harmful_words:
                flag(f"harm:{token.lowered}")
        for emotion, members in lexicons.emotion_lemmas.items():
            for lemma in lemmas:
                if lemma in members:
                    flag(f"emo:{emotion}:{lemma}")

    if enhanced and lexicons is not None:
        words = [token.lowered for token in tokens if not token.is_punctuation]
        for token in tokens:
            if token.lowered in lexicons.emoticons:
                flag(f"emoticon:{token.lowered}")
            if token.lowered in lexicons.subjectivity_entries:
                flag(f"subj:{token.lowered}")
        for hit in _phrase_hits(words, lexicons.swear_entries):
            flag(f"swear:{hit}")
        for hit in _phrase_hits(words, lexicons.polite_cues):
            flag(f"polite:{hit}")
        for hit in _phrase_hits(words, lexicons.impolite_cues):
            flag(f"impolite:{hit}")
        for frame in sidecar.frames if sidecar else ():
            flag(f"frame:{frame.name}")
            flag(f"frametgt:{frame.name}_{frame.target.lower()}")
            for role, unit in frame.args:
                flag(f"framearg:{role}_{unit.lower()}")
        scores = sentiment_scores(comment.body, lexicons)
        for name, value in zip(SENTIMENT_FEATURES, scores):
            bag[name] = float(value)

    return FeatureBag(bag, notes)


def combine_context(suspect_bag: FeatureBag, parent_bag: FeatureBag) -> FeatureBag:
    """Union of the suspect's features and the parent's, the latter renamed `ctx:*`."""
    combined = dict(suspect_bag)
    combined.update(
        (f"{CONTEXT_PREFIX}{name}", value) for name, value in parent_bag.items()
    )
    return FeatureBag(combined, suspect_bag.notes | parent_bag.notes)


def indicator_name(task: Task, label: AnyLabel) -> str:
    """Name of the feature telling a later task the label of an earlier one."""
    return f"task:{task.short}:{label.value}"


def indicator_names(tasks: Iterable[Task]) -> List[str]:
    """Every indicator name of the given tasks, in task then label order."""
    return [indicator_name(task, label) for task in tasks for label in task.labels]


def with_indicators(bag: FeatureBag, labels: Mapping[Task, AnyLabel]) -> FeatureBag:
    extended = dict(bag)
    extended.update(
        (indicator_name(task, label), 1.0) for task, label in labels.items()
    )
    return FeatureBag(extended, bag.notes)


def _family(name: str) -> str:
    if name.startswith(CONTEXT_PREFIX):
        name = name[len(CONTEXT_PREFIX) :]
    return name.split(":", 1)[0]


class Vocabulary:
    """Feature names mapped to contiguous column indices.

    Names are added in order; once frozen, the vocabulary rejects new names.
    """

    def __init__(self, names: Iterable[str] = (), *, frozen: bool = False) -> None:
        self._index: Dict[str, int] = {}
        self._frozen = False
        for name in names:
            self.add(name)
        self._frozen = frozen

    def add(self, name: str) -> int:
        if name in self._index:
            return self._index[name]
        if self._frozen:
            raise errors.FrozenVocabularyError(name)
        self._index[name] = len(self._index)
        return self._index[name]

    def freeze(self) -> Vocabulary:
        self._frozen = True
        return self

    @property
    def frozen(self) -> bool:
        return self._frozen

    @property
    def dimension(self) -> int:
        return len(self._index)

    @property
    def names(self) -> List[str]:
        return list(self._index)

    def get(self, name: str) -> Optional[int]:
        return self._index.get(name)

    def __contains__(self, name: object) -> bool:
        return name in self._index

    def __len__(self) -> int:
        return len(self._index)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Vocabulary):
            return NotImplemented
        return self.names == other.names and self.frozen == other.frozen

    def __repr__(self) -> str:
        return f"Vocabulary(dimension={self.dimension}, frozen={self.frozen})"


def build_vocabulary(
    bags: Iterable[FeatureBag],
    min_count: int = 1,
    *,
    always: Iterable[str] = (),
    require_binary: bool = True,
) -> Vocabulary:
    """Build a frozen vocabulary from training bags.

    Names occurring in at least `min_count` bags are indexed in first-seen order.
    Real-valued features are always kept, and the four `senti:*` slots are always
    present, appended if no bag carries them. Names in `always` (the task indicators)
    are appended last.

    Args:
        bags (Iterable[FeatureBag]): Bags drawn from training folds only.
        min_count (int): The document-frequency cutoff.
        always (Iterable[str]): Names indexed whatever their count.
        require_binary (bool): Raise if no binary feature of the bags survives.

    Returns:
        Vocabulary: The frozen vocabulary.

    Raises:
        errors.EmptyVocabularyError: If no binary feature survives the cutoff.
    """
    counts: Counter = Counter()
    for bag in bags:
        counts.update(bag.keys())
    kept = [
        name
        for name, count in counts.items()
        if count >= min_count or _family(name) in REAL_VALUED_FAMILIES
    ]
    if require_binary and not any(
        _family(name) not in REAL_VALUED_FAMILIES for name in kept
    ):
        raise errors.EmptyVocabularyError
    vocabulary = Vocabulary(kept)
    for name in (*SENTIMENT_FEATURES, *always):
        vocabulary.add(name)
    return vocabulary.freeze()


@dataclass(frozen=True, eq=False)
class SparseVector:
    """Sorted (index, value) pairs over a fixed dimension."""

    indices: np.ndarray
    values: np.ndarray
    dimension: int

    def __post_init__(self) -> None:
        if len(self.indices) != len(self.values):
            msg = "indices and values must have the same length."
            raise ValueError(msg)
        if len(self.indices) and (
            np.any(np.diff(self.indices) <= 0)
            or self.indices[0] < 0
            or self.indices[-1] >= self.dimension
        ):
            msg = "indices must be strictly increasing and below the dimension."
            raise ValueError(msg)

    @property
    def nnz(self) -> int:
        return len(self.indices)

    def to_dense(self) -> np.ndarray:
        dense = np.zeros(self.dimension)
        dense[self.indices] = self.values
        return dense

    def items(self) -> List[Tuple[int, float]]:
        return list(zip(self.indices.tolist(), self.values.tolist()))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparseVector):
            return NotImplemented
        return (
            self.dimension == other.dimension
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.values, other.values)
        )


def vectorize(bag: Mapping[str, float], vocabulary: Vocabulary) -> SparseVector:
    """Map a bag onto a frozen vocabulary; unknown names are dropped.

    Raises:
        ValueError: If the vocabulary is not frozen.
    """
    if not vocabulary.frozen:
        msg = "Vectors can only be built over a frozen vocabulary."
        raise ValueError(msg)
    pairs = sorted(
        (index, value)
        for index, value in ((vocabulary.get(name), v) for name, v in bag.items())
        if index is not None
    )
    return SparseVector(
        indices=np.array([index for index, _ in pairs], dtype=np.int64),
        values=np.array([value for _, value in pairs], dtype=np.float64),
        dimension=vocabulary.dimension,
    )


def stack(vectors: Sequence[SparseVector], dimension: int) -> sparse.csr_matrix:
    """Stack vectors as the rows of a CSR matrix.

    Raises:
        errors.DimensionMismatchError: If a vector has another dimension.
    """
    for vector in vectors:
        if vector.dimension != dimension:
            raise errors.DimensionMismatchError(dimension, vector.dimension)
    indptr = np.zeros(len(vectors) + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([vector.nnz for vector in vectors])
    indices = (
        np.concatenate([vector.indices for vector in vectors])
        if vectors
        else np.zeros(0, dtype=np.int64)
    )
    data = (
        np.concatenate([vector.values for vector in vectors])
        if vectors
        else np.zeros(0)
    )
    return sparse.csr_matrix((data, indices, indptr), shape=(len(vectors), dimension))


@dataclass(frozen=True)
class SnippetBags:
    """The bags of one snippet: suspect plus parent context, and one per response."""

    snippet_id: str
    context: FeatureBag
    responses: Tuple[FeatureBag, ...]

    @property
    def size(self) -> int:
        return len(self.responses)


@dataclass(frozen=True)
class SnippetVectors:
    snippet_id: str
    context: SparseVector
    responses: Tuple[SparseVector, ...]

    @property
    def size(self) -> int:
        return len(self.responses)


def featurize_snippet(
    snippet: Snippet,
    config: FeatureConfig,
    lexicons: Optional[LexiconSet] = None,
    sidecars: Optional[Mapping[str, SidecarAnnotation]] = None,
) -> SnippetBags:
    sidecars = sidecars or {}

    def bag_of(comment: Comment) -> FeatureBag:
        return extract_features(
            comment, sidecars.get(comment.id), lexicons, config.feature_set
        )

    suspect = bag_of(snippet.suspect)
    responses = [bag_of(response) for response in snippet.responses]
    if config.response_context:
        responses = [combine_context(response, suspect) for response in responses]
    return SnippetBags(
        snippet_id=snippet.snippet_id,
        context=combine_context(suspect, bag_of(snippet.parent)),
        responses=tuple(responses),
    )


@dataclass(frozen=True)
class FeatureSpace:
    """The two vocabularies of a snippet model.

    The context vocabulary covers suspect and parent features, the response vocabulary
    covers the features of individual responses.
    """

    context: Vocabulary
    response: Vocabulary
    config: FeatureConfig = field(default_factory=FeatureConfig)

    @classmethod
    def fit(cls, bags: Sequence[SnippetBags], config: FeatureConfig) -> FeatureSpace:
        return cls(
            context=build_vocabulary(
                [snippet.context for snippet in bags], config.min_count
            ),
            response=build_vocabulary(
                [bag for snippet in bags for bag in snippet.responses],
                config.min_count,
            ),
            config=config,
        )

    def transform(self, bags: SnippetBags) -> SnippetVectors:
        return SnippetVectors(
            snippet_id=bags.snippet_id,
            context=vectorize(bags.context, self.context),
            responses=tuple(vectorize(bag, self.response) for bag in bags.responses),
        )
