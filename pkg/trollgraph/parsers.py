"""Parsers for the record files the library reads.

Comment dumps, sidecar annotations, snippet files and prediction files are
newline-delimited JSON objects; raw annotation tables are delimiter-separated rows. The
parsers here turn the text of those files into plain records, keeping track of the lines
that could not be read so that a single bad line does not lose a whole dump.
"""

from __future__ import annotations

import csv
import json
import logging
from typing import Any, Dict, Iterable, List, Protocol, Tuple

from trollgraph import errors

__all__ = [
    "Record",
    "Parser",
    "JsonLinesParser",
    "DelimitedParser",
    "HEADER_PREFIX",
    "parse_json_lines",
]

logger = logging.getLogger(__name__)

Record = Dict[str, Any]

HEADER_PREFIX = "#"


class Parser(Protocol):
    """Parses the content of a record file into records.

    Args:
        strict (bool): Abort on the first malformed line instead of collecting it.
    """

    def __init__(self, *, strict: bool = False) -> None: ...

    def feed(self, text: str) -> None:
        """Process a chunk of complete lines and update `found_records`.

        Args:
            text (str): The content to parse.
        """
        ...

    def reset(self) -> None:
        """Reset the parser to its initial state."""

    @property
    def found_records(self) -> List[Tuple[int, Record]]: ...

    @property
    def errors(self) -> List[errors.InvalidRecordError]: ...


class InitParserMixin:
    """Helper mixin holding the parser state."""

    def __init__(self, *, strict: bool = False) -> None:
        self.strict = strict
        self.found_records: List[Tuple[int, Record]] = []
        self.errors: List[errors.InvalidRecordError] = []
        self._line = 0

    def reset(self) -> None:
        self.found_records.clear()
        self.errors.clear()
        self._line = 0

    def _fail(self, reason: str) -> None:
        error = errors.InvalidRecordError(self._line, reason)
        if self.strict:
            raise error
        logger.warning("Skipping malformed record: %s", error.message)
        self.errors.append(error)


class JsonLinesParser(InitParserMixin):
    """Parses newline-delimited JSON objects.

    Blank lines and lines starting with `#` (artifact headers) are skipped but still
    counted, so reported line numbers match the file.
    """

    def feed(self, text: str) -> None:
        for raw in text.split("\n"):
            self._line += 1
            line = raw.strip()
            if not line or line.startswith(HEADER_PREFIX):
                continue
            try:
                value = json.loads(line)
            except json.JSONDecodeError as e:
                self._fail(f"invalid JSON ({e.msg})")
                continue
            if not isinstance(value, dict):
                self._fail("expected an object")
                continue
            self.found_records.append((self._line, value))


class DelimitedParser(InitParserMixin):
    """Parses delimiter-separated rows into records keyed by the given field names.

    A first row equal to the field names is treated as a header and skipped.

    Args:
        fieldnames (Iterable[str]): The names of the columns, in order.
        delimiter (str): The column delimiter. Defaults to `","`.
        quoting (int): A `csv` quoting constant. Defaults to `csv.QUOTE_MINIMAL`.
    """

    def __init__(
        self,
        fieldnames: Iterable[str],
        delimiter: str = ",",
        quoting: int = csv.QUOTE_MINIMAL,
        *,
        strict: bool = False,
    ) -> None:
        super().__init__(strict=strict)
        self.fieldnames = list(fieldnames)
        self.delimiter = delimiter
        self.quoting = quoting

    def feed(self, text: str) -> None:
        for row in csv.reader(
            text.splitlines(), delimiter=self.delimiter, quoting=self.quoting
        ):
            self._line += 1
            cells = [cell.strip() for cell in row]
            if not cells or cells[0].startswith(HEADER_PREFIX):
                continue
            if self._line == 1 and cells == self.fieldnames:
                continue
            if len(cells) != len(self.fieldnames):
                self._fail(
                    f"expected {len(self.fieldnames)} columns, got {len(cells)}"
                )
                continue
            self.found_records.append((self._line, dict(zip(self.fieldnames, cells))))


def parse_json_lines(lines: Iterable[str], *, strict: bool = False) -> JsonLinesParser:
    """Feed every line to a fresh `JsonLinesParser` and return it."""
    parser = JsonLinesParser(strict=strict)
    parser.feed("\n".join(line.rstrip("\n") for line in lines))
    return parser
