"""Text helpers shared by the comment filters, lexicons and feature extractors."""

from __future__ import annotations

import string
from typing import FrozenSet, Iterable, List

__all__ = [
    "PUNCTUATION",
    "levenshtein",
    "split_pieces",
    "word_tokens",
    "within_distance",
]

PUNCTUATION = string.punctuation + "“”‘’«»…–—"


def word_tokens(text: str) -> List[str]:
    """Split a text on whitespace, strip leading and trailing punctuation from every
    piece and lowercase it. Pieces made only of punctuation are dropped.

    Args:
        text (str): The text to split.

    Returns:
        List[str]: The lowercased words, in order.

    Examples:
        >>> word_tokens("Stop it, troll!")
        ['stop', 'it', 'troll']
    """
    words = (piece.strip(PUNCTUATION).lower() for piece in text.split())
    return [word for word in words if word]


def _split_run(run: str, keep: FrozenSet[str], longest: int) -> List[str]:
    """Split kept entries out of a punctuation run, longest match first."""
    parts: List[str] = []
    rest = ""
    i = 0
    while i < len(run):
        sizes = range(min(longest, len(run) - i), 0, -1)
        size = next((n for n in sizes if run[i : i + n].lower() in keep), 0)
        if size:
            if rest:
                parts.append(rest)
                rest = ""
            parts.append(run[i : i + size])
            i += size
        else:
            rest += run[i]
            i += 1
    return [*parts, rest] if rest else parts


def _split_piece(piece: str, keep: FrozenSet[str], longest: int) -> List[str]:
    lowered = piece.lower()
    if lowered in keep:
        return [piece]
    # Kept entries glued to either end of a word, longest match first.
    for size in range(min(longest, len(piece) - 1), 0, -1):
        tail = lowered[-size:]
        if tail in keep and tail[0] in PUNCTUATION:
            return [*_split_piece(piece[:-size], keep, longest), piece[-size:]]
        head = lowered[:size]
        if head in keep and head[-1] in PUNCTUATION:
            return [piece[:size], *_split_piece(piece[size:], keep, longest)]
    if all(char in PUNCTUATION for char in piece):
        return _split_run(piece, keep, longest)
    start = 0
    while piece[start] in PUNCTUATION:
        start += 1
    end = len(piece)
    while piece[end - 1] in PUNCTUATION:
        end -= 1
    return [
        *_split_run(piece[:start], keep, longest),
        piece[start:end],
        *_split_run(piece[end:], keep, longest),
    ]


def split_pieces(text: str, keep: Iterable[str] = ()) -> List[str]:
    """Split a text on whitespace, then split leading and trailing punctuation runs
    off every piece.

    Entries of `keep` (lowercased emoticons) stay whole, also when glued to a word
    or to other punctuation.

    Examples:
        >>> split_pieces("Cool!:) see you", [":)"])
        ['Cool', '!', ':)', 'see', 'you']
    """
    known = frozenset(keep)
    longest = max(map(len, known), default=0)
    return [
        part for piece in text.split() for part in _split_piece(piece, known, longest)
    ]


def levenshtein(first: str, second: str) -> int:
    """Unit-cost edit distance (insertions, deletions and substitutions).

    Args:
        first (str): A string.
        second (str): Another string.

    Returns:
        int: The minimum number of edits turning `first` into `second`.
    """
    if len(first) < len(second):
        first, second = second, first
    previous = list(range(len(second) + 1))
    for i, left in enumerate(first, 1):
        current = [i]
        for j, right in enumerate(second, 1):
            current.append(
                min(
                    current[-1] + 1,
                    previous[j] + 1,
                    previous[j - 1] + (left != right),
                )
            )
        previous = current
    return previous[-1]


def within_distance(first: str, second: str, max_edit: int) -> bool:
    """Whether two strings are at most `max_edit` edits apart.

    The length difference is a lower bound of the distance, so far-apart lengths are
    rejected without filling the table.
    """
    if abs(len(first) - len(second)) > max_edit:
        return False
    return levenshtein(first, second) <= max_edit
