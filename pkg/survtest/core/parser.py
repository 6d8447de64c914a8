"""Parsing of censored observation files (`group,time,event` CSV)."""

import hashlib
import re
from typing import BinaryIO

from .base import Observation, ParsedSample
from .exceptions import InvalidInputError

HEADER = ("group", "time", "event")


class ObservationParser:
    """Parser for `group,time,event` CSV input."""

    LABEL_PATTERN = re.compile(r"^[A-Za-z0-9_.-]+$")
    TIME_PATTERN = re.compile(r"^[+-]?[0-9]+$")

    @classmethod
    def parse_row(
        cls,
        line: str,
        line_number: int,
        labels: dict[str, int],
    ) -> Observation:
        """
        Parse one data row, registering unseen group labels in `labels`.

        Args:
            line: Raw row text without the trailing newline
            line_number: 1-based line number used in error messages
            labels: Mutable label → index mapping in first-appearance order

        Returns:
            The parsed Observation

        Raises:
            InvalidInputError: If the row is malformed
        """
        fields = [field.strip() for field in line.split(",")]
        if len(fields) != 3:
            raise InvalidInputError(
                f"line {line_number}: expected 3 fields (group,time,event), got {len(fields)}"
            )
        label, time_text, event_text = fields

        if not cls.LABEL_PATTERN.match(label):
            raise InvalidInputError(f"line {line_number}: invalid group label '{label}'")
        if not cls.TIME_PATTERN.match(time_text):
            raise InvalidInputError(f"line {line_number}: time '{time_text}' is not an integer")
        time = int(time_text)
        if time < 1:
            raise InvalidInputError(f"line {line_number}: category must be ≥ 1 (got {time})")
        if event_text not in ("0", "1"):
            raise InvalidInputError(f"line {line_number}: event must be 0 or 1, got '{event_text}'")

        group = labels.setdefault(label, len(labels))
        return Observation(time=time, event=event_text == "1", group=group)

    @classmethod
    def parse_text(cls, text: str, digest: str | None = None) -> ParsedSample:
        """
        Parse CSV text into observations.

        A leading `group,time,event` header is skipped; a file whose first line
        is already a data row is read as header-less.

        Raises:
            InvalidInputError: If any row is malformed or fewer than 2 groups appear
        """
        labels: dict[str, int] = {}
        observations: list[Observation] = []

        for line_number, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line:
                continue
            if line_number == 1 and tuple(f.strip().lower() for f in line.split(",")) == HEADER:
                continue
            observations.append(cls.parse_row(line, line_number, labels))

        if not observations:
            raise InvalidInputError("no observations found")
        if len(labels) < 2:
            raise InvalidInputError(f"at least 2 groups are required, found {len(labels)}")

        return ParsedSample(
            observations=tuple(observations),
            group_labels=tuple(labels),
            digest=digest,
        )


def ingest_csv(source: BinaryIO | bytes) -> ParsedSample:
    """
    Read observations from a UTF-8 byte stream.

    The SHA-256 digest of the raw bytes is recorded on the result.
    """
    data = source if isinstance(source, bytes) else source.read()
    try:
        text = data.decode("utf-8-sig")
    except UnicodeDecodeError as e:
        raise InvalidInputError(f"input is not valid UTF-8: {e}") from e
    return ObservationParser.parse_text(text, digest=hashlib.sha256(data).hexdigest())
