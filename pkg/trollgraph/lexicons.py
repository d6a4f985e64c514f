"""Dictionary resources used by the feature extractors.

A lexicon directory holds one file per resource:

- `harmful.txt`, `swear.txt`, `politeness_polite.txt`, `politeness_impolite.txt`: one
  entry (word or short phrase) per line.
- `emotions/<emotion>.txt`: the lemmas of each of the seven emotions.
- `subjectivity.tsv`: `token<TAB>polarity<TAB>strength`.
- `emoticons.tsv`: `emoticon<TAB>polarity`.
- `sentiment_valence.tsv`: `token<TAB>valence`.

Lines starting with `#` are comments. A small lexicon ships with the package so that the
enhanced feature set can run end to end; real resources are loaded from any directory
with the same layout.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Dict, FrozenSet, List, Mapping, NamedTuple, Tuple, Union

from trollgraph import errors, parsers
from trollgraph.text import PUNCTUATION, split_pieces

__all__ = [
    "EMOTIONS",
    "COMPOUND_ALPHA",
    "LexiconSet",
    "SentimentScores",
    "load_lexicons",
    "bundled_lexicon_dir",
    "sentiment_scores",
]

logger = logging.getLogger(__name__)

EMOTIONS: Tuple[str, ...] = (
    "anger",
    "embarrassment",
    "empathy",
    "fear",
    "pride",
    "relief",
    "sadness",
)

COMPOUND_ALPHA = 15.0

PathLike = Union[str, Path]


@dataclass(frozen=True)
class LexiconSet:
    """The loaded resources. Every entry is lowercased; phrases are single-spaced."""

    harmful_words: FrozenSet[str]
    swear_entries: FrozenSet[str]
    emotion_lemmas: Mapping[str, FrozenSet[str]]
    subjectivity_entries: Mapping[str, Tuple[str, str]]
    emoticons: Mapping[str, str]
    polite_cues: FrozenSet[str]
    impolite_cues: FrozenSet[str]
    sentiment_valence: Mapping[str, float]

    @property
    def politeness_cues(self) -> Tuple[FrozenSet[str], FrozenSet[str]]:
        return self.polite_cues, self.impolite_cues

    @cached_property
    def intact_tokens(self) -> FrozenSet[str]:
        """Emoticons, plus valence entries containing punctuation, that tokenizing
        keeps whole."""
        return frozenset(self.emoticons) | frozenset(
            entry
            for entry in self.sentiment_valence
            if any(char in PUNCTUATION for char in entry)
        )


class SentimentScores(NamedTuple):
    positive: float
    neutral: float
    negative: float
    compound: float


def bundled_lexicon_dir() -> Path:
    """The directory of the small lexicon shipped with the package."""
    return Path(str(resources.files("trollgraph") / "resources" / "lexicons"))


def _normalize(entry: str) -> str:
    return " ".join(entry.lower().split())


def _read(path: Path) -> str:
    if not path.is_file():
        raise errors.LexiconLoadError(path.name)
    return path.read_text(encoding="utf-8")


def _load_entries(path: Path) -> FrozenSet[str]:
    entries = set()
    for line in _read(path).splitlines():
        entry = _normalize(line)
        if entry and not entry.startswith(parsers.HEADER_PREFIX):
            entries.add(entry)
    if not entries:
        raise errors.LexiconLoadError(path.name, "empty")
    return frozenset(entries)


def _load_table(path: Path, fieldnames: List[str]) -> List[parsers.Record]:
    parser = parsers.DelimitedParser(
        fieldnames, delimiter="\t", quoting=csv.QUOTE_NONE, strict=True
    )
    try:
        parser.feed(_read(path))
    except errors.InvalidRecordError as e:
        raise errors.LexiconLoadError(
            path.name, f"malformed at line {e.line} ({e.reason})"
        ) from e
    if not parser.found_records:
        raise errors.LexiconLoadError(path.name, "empty")
    return [record for _, record in parser.found_records]


def load_lexicons(directory: PathLike) -> LexiconSet:
    """Load every resource of a lexicon directory.

    Args:
        directory (PathLike): The lexicon directory.

    Returns:
        LexiconSet: The loaded resources, lowercased and deduplicated.

    Raises:
        errors.LexiconLoadError: If a file is missing, empty or malformed. The error
            names the file.
    """
    root = Path(directory)
    emotion_dir = root / "emotions"
    subjectivity: Dict[str, Tuple[str, str]] = {}
    for record in _load_table(
        root / "subjectivity.tsv", ["token", "polarity", "strength"]
    ):
        subjectivity[_normalize(record["token"])] = (
            record["polarity"].lower(),
            record["strength"].lower(),
        )
    emoticons = {
        record["emoticon"].lower(): record["polarity"].lower()
        for record in _load_table(root / "emoticons.tsv", ["emoticon", "polarity"])
    }
    valence: Dict[str, float] = {}
    for record in _load_table(root / "sentiment_valence.tsv", ["token", "valence"]):
        try:
            valence[_normalize(record["token"])] = float(record["valence"])
        except ValueError:
            raise errors.LexiconLoadError(
                "sentiment_valence.tsv", f'malformed valence "{record["valence"]}"'
            ) from None

    lexicons = LexiconSet(
        harmful_words=_load_entries(root / "harmful.txt"),
        swear_entries=_load_entries(root / "swear.txt"),
        emotion_lemmas={
            emotion: _load_entries(emotion_dir / f"{emotion}.txt")
            for emotion in EMOTIONS
        },
        subjectivity_entries=subjectivity,
        emoticons=emoticons,
        polite_cues=_load_entries(root / "politeness_polite.txt"),
        impolite_cues=_load_entries(root / "politeness_impolite.txt"),
        sentiment_valence=valence,
    )
    logger.info(
        "Loaded lexicons from %s (%d swear entries, %d valence entries)",
        root,
        len(lexicons.swear_entries),
        len(lexicons.sentiment_valence),
    )
    return lexicons


def sentiment_scores(text: str, lexicons: LexiconSet) -> SentimentScores:
    """Valence-sum sentiment of a text.

    Tokens are the words of the text plus the emoticons and punctuated valence entries
    it contains; bare punctuation is ignored. `positive` and `negative` are the shares
    of tokens with a positive or negative valence, `neutral` the share of every other
    token. `compound` normalizes the raw valence sum `S` to `S / sqrt(S**2 + 15)`.

    Examples:
        >>> sentiment_scores("", lexicons)
        SentimentScores(positive=0.0, neutral=1.0, negative=0.0, compound=0.0)
    """
    intact = lexicons.intact_tokens
    words = [
        piece.lower()
        for piece in split_pieces(text, intact)
        if piece.lower() in intact
        or not all(char in PUNCTUATION for char in piece)
    ]
    if not words:
        return SentimentScores(0.0, 1.0, 0.0, 0.0)
    valences = [lexicons.sentiment_valence.get(word, 0.0) for word in words]
    positive = sum(1 for v in valences if v > 0) / len(words)
    negative = sum(1 for v in valences if v < 0) / len(words)
    total = math.fsum(valences)
    return SentimentScores(
        positive=positive,
        neutral=1.0 - positive - negative,
        negative=negative,
        compound=total / math.sqrt(total * total + COMPOUND_ALPHA),
    )
