"""Metadata tables and the four-way inner join into reconstruction records.

Three side tables accompany a BoW corpus:

* a mood table (delimited, headered) with valence and arousal columns,
* a genre table (headerless TSV, ``track_id<TAB>genre``, one pair per
  line, multiple lines per track accumulate),
* an artist/title table (delimited, headered).

Column names are configuration (:class:`ColumnMap`), not hardcoded,
because the upstream datasets do not share a schema. Track-id matching is
exact, case-sensitive string equality. Tracks missing from any source are
dropped, not errors; the join reports per-source counts so the drop rate
is visible.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import IO, Iterable

from lyrecon.bow import BowCorpus, ordered_vocabulary
from lyrecon.errors import LyreconError
from lyrecon.mood import MoodPoint, MoodTable, mood_angle, mood_label
from lyrecon.mood import ZeroMoodVector as _ZeroAngleError

__all__ = [
    "ColumnMap",
    "DuplicateId",
    "EmptyField",
    "EmptyGenre",
    "GenreTags",
    "JoinReport",
    "MalformedLine",
    "MissingColumn",
    "NonNumericValue",
    "ReconstructionRecord",
    "TableParseError",
    "TrackMeta",
    "ZeroMoodVector",
    "join_records",
    "parse_genre_table",
    "parse_mood_table",
    "parse_track_meta",
]


class TableParseError(LyreconError):
    """Base for metadata-table rejections; carries the 1-based file line."""

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class MissingColumn(TableParseError):
    pass


class NonNumericValue(TableParseError):
    pass


class DuplicateId(TableParseError):
    pass


class ZeroMoodVector(TableParseError, _ZeroAngleError):
    """Zero vector in a mood row: both a parse rejection and an angle error."""


class MalformedLine(TableParseError):
    pass


class EmptyGenre(TableParseError):
    pass


class EmptyField(TableParseError):
    pass


@dataclass(frozen=True)
class ColumnMap:
    """Names of the columns to read from a headered table.

    ``value_columns`` is (valence, arousal) for mood tables and
    (artist, title) for track-meta tables.
    """

    id_column: str
    value_columns: tuple[str, str]

    @classmethod
    def parse(cls, text: str) -> "ColumnMap":
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3 or not all(parts):
            raise ValueError(f"column map must be 'id,first,second', got {text!r}")
        return cls(id_column=parts[0], value_columns=(parts[1], parts[2]))


MOOD_COLUMNS = ColumnMap(id_column="track_id", value_columns=("valence", "arousal"))
META_COLUMNS = ColumnMap(id_column="track_id", value_columns=("artist", "title"))


@dataclass(frozen=True)
class TrackMeta:
    track_id: str
    artist: str
    title: str


@dataclass(frozen=True)
class GenreTags:
    track_id: str
    tags: tuple[str, ...]


@dataclass(frozen=True)
class ReconstructionRecord:
    """Everything the prompt builder needs for one track.

    ``theta`` is recomputable from ``mood`` and ``vocabulary`` from the
    matching BoW track; both are stored so records serialize standalone.
    """

    track_id: str
    artist: str
    title: str
    tags: tuple[str, ...]
    mood: MoodPoint
    theta: float
    mood_label: str
    vocabulary: tuple[str, ...]


@dataclass(frozen=True)
class JoinReport:
    bow_tracks: int
    mood_rows: int
    genre_tracks: int
    meta_rows: int
    joined: int

    def render(self) -> str:
        return (
            f"bow tracks:   {self.bow_tracks}\n"
            f"mood rows:    {self.mood_rows}\n"
            f"genre tracks: {self.genre_tracks}\n"
            f"meta rows:    {self.meta_rows}\n"
            f"joined: {self.joined}"
        )


def _dict_reader(stream: Iterable[str] | IO[str], columns: ColumnMap,
                 delimiter: str) -> csv.DictReader:
    reader = csv.DictReader(stream, delimiter=delimiter, skipinitialspace=True)
    header = reader.fieldnames
    if header is None:
        raise MissingColumn("empty table: no header row")
    for name in (columns.id_column, *columns.value_columns):
        if name not in header:
            raise MissingColumn(f"column {name!r} not in header {header}")
    return reader


def parse_mood_table(
    stream: Iterable[str] | IO[str],
    columns: ColumnMap = MOOD_COLUMNS,
    delimiter: str = ",",
) -> dict[str, MoodPoint]:
    """Parse per-track valence/arousal scores from a headered table."""
    reader = _dict_reader(stream, columns, delimiter)
    val_col, aro_col = columns.value_columns
    points: dict[str, MoodPoint] = {}
    for row in reader:
        line_no = reader.line_num
        track_id = (row[columns.id_column] or "").strip()
        if not track_id:
            raise EmptyField("empty track id", line_no)
        if track_id in points:
            raise DuplicateId(f"track id {track_id!r} repeated", line_no)
        try:
            valence = float(row[val_col])
            arousal = float(row[aro_col])
        except (TypeError, ValueError) as exc:
            raise NonNumericValue(
                f"track {track_id}: valence/arousal not numeric", line_no
            ) from exc
        if not (math.isfinite(valence) and math.isfinite(arousal)):
            raise NonNumericValue(f"track {track_id}: non-finite value", line_no)
        if valence == 0.0 and arousal == 0.0:
            raise ZeroMoodVector(
                f"track {track_id}: zero mood vector has no angle", line_no
            )
        points[track_id] = MoodPoint(valence=valence, arousal=arousal)
    return points


def parse_track_meta(
    stream: Iterable[str] | IO[str],
    columns: ColumnMap = META_COLUMNS,
    delimiter: str = ",",
) -> dict[str, TrackMeta]:
    """Parse per-track artist and title from a headered table."""
    reader = _dict_reader(stream, columns, delimiter)
    artist_col, title_col = columns.value_columns
    metas: dict[str, TrackMeta] = {}
    for row in reader:
        line_no = reader.line_num
        track_id = (row[columns.id_column] or "").strip()
        if not track_id:
            raise EmptyField("empty track id", line_no)
        if track_id in metas:
            raise DuplicateId(f"track id {track_id!r} repeated", line_no)
        artist = (row[artist_col] or "").strip()
        title = (row[title_col] or "").strip()
        if not artist:
            raise EmptyField(f"track {track_id}: empty artist", line_no)
        if not title:
            raise EmptyField(f"track {track_id}: empty title", line_no)
        metas[track_id] = TrackMeta(track_id=track_id, artist=artist, title=title)
    return metas


def parse_genre_table(stream: Iterable[str] | IO[str]) -> dict[str, GenreTags]:
    """Parse a headerless ``track_id<TAB>genre`` table.

    Tags accumulate per track in file order; exact duplicates are dropped.
    ``#`` comment lines and blank lines are skipped (public genre releases
    carry comment headers).
    """
    tags: dict[str, list[str]] = {}
    for line_no, raw in enumerate(stream, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise MalformedLine(
                f"expected track_id<TAB>genre, got {len(parts)} fields", line_no
            )
        track_id, genre = parts[0].strip(), parts[1].strip()
        if not track_id:
            raise MalformedLine("empty track id", line_no)
        if not genre:
            raise EmptyGenre(f"track {track_id}: empty genre", line_no)
        bucket = tags.setdefault(track_id, [])
        if genre not in bucket:
            bucket.append(genre)
    return {
        track_id: GenreTags(track_id=track_id, tags=tuple(genres))
        for track_id, genres in tags.items()
    }


def join_records(
    bow: BowCorpus,
    mood: dict[str, MoodPoint],
    genres: dict[str, GenreTags],
    meta: dict[str, TrackMeta],
    mood_table: MoodTable,
) -> tuple[list[ReconstructionRecord], JoinReport]:
    """Inner-join all four sources into records, sorted by track id.

    Order-insensitive: only membership matters, so shuffled inputs yield
    the identical record list.
    """
    bow_tracks = bow.by_track_id()
    joined_ids = sorted(
        set(bow_tracks) & set(mood) & set(genres) & set(meta)
    )
    records: list[ReconstructionRecord] = []
    for track_id in joined_ids:
        point = mood[track_id]
        theta = mood_angle(point)
        records.append(
            ReconstructionRecord(
                track_id=track_id,
                artist=meta[track_id].artist,
                title=meta[track_id].title,
                tags=genres[track_id].tags,
                mood=point,
                theta=theta,
                mood_label=mood_label(theta, mood_table),
                vocabulary=tuple(ordered_vocabulary(bow_tracks[track_id], bow.vocab)),
            )
        )
    report = JoinReport(
        bow_tracks=len(bow_tracks),
        mood_rows=len(mood),
        genre_tracks=len(genres),
        meta_rows=len(meta),
        joined=len(records),
    )
    return records, report
