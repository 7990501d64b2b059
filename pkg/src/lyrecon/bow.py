"""Bag-of-Words dataset files: parse, validate, serialize.

File grammar (mirrors the public musiXmatch distribution, so real files
load unmodified):

* lines starting ``#`` are comments and are ignored,
* exactly one line starting ``%`` carries the comma-separated vocabulary
  and must precede all data lines,
* every other non-blank line is ``track_id,source_id,idx:cnt,idx:cnt,...``
  with 1-based word indices into the vocabulary and positive counts.

Encoding is UTF-8; LF and CRLF both parse; the canonical serialization
uses LF, drops comments, and emits each track's pairs in ascending index
order, so ``parse -> serialize`` is a canonicalizer and
``serialize -> parse`` is the identity.

Every rejected line is reported with its 1-based line number.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import IO, Iterable

from lyrecon.errors import LyreconError

__all__ = [
    "BowCorpus",
    "BowParseError",
    "DuplicateTrackId",
    "IndexOutOfRange",
    "MalformedPair",
    "MissingVocabHeader",
    "NonPositiveCount",
    "TrackBow",
    "VocabTable",
    "load_bow",
    "ordered_vocabulary",
    "serialize_bow",
]

_FORBIDDEN_VOCAB_CHARS = ",:"


class BowParseError(LyreconError):
    """Base for BoW file rejections; carries the 1-based line number."""

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class MissingVocabHeader(BowParseError):
    pass


class DuplicateTrackId(BowParseError):
    pass


class IndexOutOfRange(BowParseError):
    pass


class MalformedPair(BowParseError):
    pass


class NonPositiveCount(BowParseError):
    pass


@dataclass(frozen=True)
class VocabTable:
    """Shared, ordered vocabulary; word indices are 1-based."""

    words: tuple[str, ...]

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for word in self.words:
            if not word or any(ch.isspace() for ch in word):
                raise ValueError(f"vocabulary word {word!r} is empty or has whitespace")
            if any(ch in _FORBIDDEN_VOCAB_CHARS for ch in word):
                raise ValueError(f"vocabulary word {word!r} contains ',' or ':'")
            if word in seen:
                raise ValueError(f"duplicate vocabulary word {word!r}")
            seen.add(word)

    def __len__(self) -> int:
        return len(self.words)

    def word(self, index: int) -> str:
        """Word at a 1-based index."""
        if not 1 <= index <= len(self.words):
            raise IndexOutOfRange(f"word index {index} outside 1..{len(self.words)}")
        return self.words[index - 1]


@dataclass(frozen=True)
class TrackBow:
    """Sparse word-index -> count map for one track.

    ``source_id`` is a secondary identifier present in the public files;
    it is preserved through parse/serialize but nothing downstream reads it.
    """

    track_id: str
    source_id: str
    counts: dict[int, int]

    def __post_init__(self) -> None:
        if not self.track_id:
            raise ValueError("track_id must be non-empty")
        for name, value in (("track_id", self.track_id), ("source_id", self.source_id)):
            if any(ch in value for ch in ",\n\r"):
                raise ValueError(f"{name} {value!r} has a comma or newline "
                                 "(unrepresentable in the interchange format)")
        if self.track_id[0] in "%#":
            raise ValueError(f"track_id {self.track_id!r} would serialize as a "
                             "header/comment line")
        if not self.counts:
            raise ValueError(f"track {self.track_id}: counts map is empty")
        for index, count in self.counts.items():
            if index < 1:
                raise ValueError(f"track {self.track_id}: word index {index} < 1")
            if count < 1:
                raise ValueError(f"track {self.track_id}: count {count} < 1 at index {index}")


@dataclass(frozen=True)
class BowCorpus:
    vocab: VocabTable
    tracks: tuple[TrackBow, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        seen: set[str] = set()
        size = len(self.vocab)
        for track in self.tracks:
            if track.track_id in seen:
                raise ValueError(f"duplicate track id {track.track_id!r}")
            seen.add(track.track_id)
            for index in track.counts:
                if index > size:
                    raise ValueError(
                        f"track {track.track_id}: word index {index} > vocabulary size {size}"
                    )

    def by_track_id(self) -> dict[str, TrackBow]:
        return {track.track_id: track for track in self.tracks}


def _parse_vocab_line(body: str, line_no: int) -> VocabTable:
    words = body.split(",")
    try:
        return VocabTable(words=tuple(words))
    except ValueError as exc:
        raise BowParseError(f"bad vocabulary: {exc}", line_no) from exc


def _parse_data_line(line: str, line_no: int, vocab_size: int) -> TrackBow:
    fields = line.split(",")
    if len(fields) < 3:
        raise MalformedPair("expected track_id,source_id,idx:cnt,...", line_no)
    track_id, source_id = fields[0], fields[1]
    if not track_id:
        raise MalformedPair("empty track_id", line_no)
    counts: dict[int, int] = {}
    for pair in fields[2:]:
        idx_text, sep, cnt_text = pair.partition(":")
        if not sep:
            raise MalformedPair(f"pair {pair!r} has no ':'", line_no)
        try:
            index = int(idx_text)
            count = int(cnt_text)
        except ValueError as exc:
            raise MalformedPair(f"pair {pair!r} is not integer:integer", line_no) from exc
        if not 1 <= index <= vocab_size:
            raise IndexOutOfRange(
                f"word index {index} outside 1..{vocab_size}", line_no
            )
        if count < 1:
            raise NonPositiveCount(f"count {count} for index {index}", line_no)
        if index in counts:
            raise MalformedPair(f"duplicate word index {index}", line_no)
        counts[index] = count
    return TrackBow(track_id=track_id, source_id=source_id, counts=counts)


def load_bow(source: Iterable[str] | IO[str] | str) -> BowCorpus:
    """Parse a BoW file from a string, an open text stream, or lines."""
    if isinstance(source, str):
        source = io.StringIO(source)
    vocab: VocabTable | None = None
    tracks: list[TrackBow] = []
    seen_ids: set[str] = set()
    for line_no, raw in enumerate(source, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        if line.startswith("%"):
            if vocab is not None:
                raise BowParseError("second vocabulary header", line_no)
            vocab = _parse_vocab_line(line[1:], line_no)
            continue
        if vocab is None:
            raise MissingVocabHeader(
                "data line before the % vocabulary header", line_no
            )
        track = _parse_data_line(line, line_no, len(vocab))
        if track.track_id in seen_ids:
            raise DuplicateTrackId(f"track id {track.track_id!r} repeated", line_no)
        seen_ids.add(track.track_id)
        tracks.append(track)
    if vocab is None:
        raise MissingVocabHeader("no % vocabulary header in input")
    return BowCorpus(vocab=vocab, tracks=tuple(tracks))


def serialize_bow(corpus: BowCorpus) -> str:
    """Canonical text form: LF endings, no comments, pairs in index order."""
    out = ["%" + ",".join(corpus.vocab.words)]
    for track in corpus.tracks:
        pairs = ",".join(
            f"{index}:{track.counts[index]}" for index in sorted(track.counts)
        )
        out.append(f"{track.track_id},{track.source_id},{pairs}")
    return "\n".join(out) + "\n"


def ordered_vocabulary(track: TrackBow, vocab: VocabTable) -> list[str]:
    """The track's distinct words, most frequent first.

    Equal counts are broken by ascending vocabulary index so the result is
    deterministic (the ordering feeds byte-compared prompts).
    """
    size = len(vocab)
    for index in track.counts:
        if index > size:
            raise IndexOutOfRange(f"word index {index} outside 1..{size}")
    order = sorted(track.counts.items(), key=lambda item: (-item[1], item[0]))
    return [vocab.words[index - 1] for index, _ in order]
