"""Batch-run state: record files, corpus files, and the run manifest.

Three on-disk artifacts connect the CLI commands:

* records file: one JSON object per line holding a full
  :class:`~lyrecon.metadata.ReconstructionRecord` (written by ``join``,
  read by ``reconstruct``),
* corpus file: one JSON object per line with ``track_id``,
  ``prompt_digest``, ``model``, ``created_at`` and ``lyrics`` (newlines
  inside lyrics are JSON-escaped, so the file stays line-oriented),
* manifest: an append-only JSON-lines log next to the corpus file: a
  header line binding the run to its config and input digests, then one
  write-ahead line per track state change. Replaying the log (last status
  wins) reconstructs the run state after a crash.

A corpus line is flushed before its manifest "done" line, so "done"
implies the output exists; the reverse gap (line written, process killed
before the manifest append) is healed on resume by adopting any track
already present in the output file.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Sequence

from lyrecon.errors import LyreconError
from lyrecon.metadata import ReconstructionRecord
from lyrecon.mood import MoodPoint, mood_angle

__all__ = [
    "CorpusEntry",
    "CorpusFormatError",
    "ManifestMismatch",
    "RecordsFormatError",
    "RunManifest",
    "corpus_entry_line",
    "file_digest",
    "read_corpus",
    "read_records",
    "recover_corpus_file",
    "rewrite_corpus_in_order",
    "write_records",
]


class RecordsFormatError(LyreconError):
    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class CorpusFormatError(LyreconError):
    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class ManifestMismatch(LyreconError):
    pass


def file_digest(path: Path | str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# --- records file -----------------------------------------------------------

def record_to_dict(record: ReconstructionRecord) -> dict:
    return {
        "track_id": record.track_id,
        "artist": record.artist,
        "title": record.title,
        "tags": list(record.tags),
        "valence": record.mood.valence,
        "arousal": record.mood.arousal,
        "theta": record.theta,
        "mood_label": record.mood_label,
        "vocabulary": list(record.vocabulary),
    }


def _record_from_dict(data: dict, line_no: int) -> ReconstructionRecord:
    try:
        point = MoodPoint(valence=float(data["valence"]), arousal=float(data["arousal"]))
        record = ReconstructionRecord(
            track_id=str(data["track_id"]),
            artist=str(data["artist"]),
            title=str(data["title"]),
            tags=tuple(str(t) for t in data["tags"]),
            mood=point,
            theta=float(data["theta"]),
            mood_label=str(data["mood_label"]),
            vocabulary=tuple(str(w) for w in data["vocabulary"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise RecordsFormatError(f"bad record object: {exc}", line_no) from exc
    if not math.isclose(record.theta, mood_angle(point), abs_tol=1e-9):
        raise RecordsFormatError(
            f"track {record.track_id}: stored theta does not match valence/arousal",
            line_no,
        )
    return record


def write_records(records: Iterable[ReconstructionRecord], path: Path | str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record_to_dict(record), ensure_ascii=False) + "\n")


def read_records(path: Path | str) -> list[ReconstructionRecord]:
    records = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise RecordsFormatError(f"not valid JSON: {exc}", line_no) from exc
            record = _record_from_dict(data, line_no)
            if record.track_id in seen:
                raise RecordsFormatError(
                    f"track id {record.track_id!r} repeated", line_no
                )
            seen.add(record.track_id)
            records.append(record)
    return records


# --- corpus file ------------------------------------------------------------

@dataclass(frozen=True)
class CorpusEntry:
    track_id: str
    prompt_digest: str
    model: str
    created_at: str
    lyrics: str


def corpus_entry_line(entry: CorpusEntry) -> str:
    return json.dumps(
        {
            "track_id": entry.track_id,
            "prompt_digest": entry.prompt_digest,
            "model": entry.model,
            "created_at": entry.created_at,
            "lyrics": entry.lyrics,
        },
        ensure_ascii=False,
    )


def _entry_from_line(line: str, line_no: int) -> CorpusEntry:
    try:
        data = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CorpusFormatError(f"not valid JSON: {exc}", line_no) from exc
    try:
        entry = CorpusEntry(
            track_id=str(data["track_id"]),
            prompt_digest=str(data["prompt_digest"]),
            model=str(data["model"]),
            created_at=str(data["created_at"]),
            lyrics=data["lyrics"],
        )
    except (KeyError, TypeError) as exc:
        raise CorpusFormatError(f"missing field: {exc}", line_no) from exc
    if not isinstance(entry.lyrics, str) or not entry.lyrics:
        raise CorpusFormatError("lyrics must be non-empty text", line_no)
    return entry


def read_corpus(path: Path | str) -> list[CorpusEntry]:
    entries = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            entries.append(_entry_from_line(line, line_no))
    return entries


def recover_corpus_file(path: Path) -> list[CorpusEntry]:
    """Read a possibly crash-truncated corpus file for resumption.

    Only the final line can be a partial write; if it fails to parse it is
    dropped and the file rewritten without it. A malformed line anywhere
    else is real corruption and raises.
    """
    if not path.exists():
        return []
    raw_lines = path.read_text(encoding="utf-8").splitlines()
    entries: list[CorpusEntry] = []
    for i, line in enumerate(raw_lines):
        if not line.strip():
            continue
        try:
            entries.append(_entry_from_line(line, i + 1))
        except CorpusFormatError:
            if i == len(raw_lines) - 1:
                _atomic_write(path, "".join(l + "\n" for l in raw_lines[:i]))
                return entries
            raise
    return entries


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def rewrite_corpus_in_order(path: Path, order: Sequence[str]) -> bool:
    """Put corpus lines into the given track order; returns True if rewritten.

    Used after a fully successful run: resumed retries may have appended
    out of record order, and a canonical file must not depend on failure
    history.
    """
    entries = read_corpus(path)
    index = {track_id: i for i, track_id in enumerate(order)}
    current = [e.track_id for e in entries]
    target = sorted(current, key=lambda tid: index[tid])
    if current == target:
        return False
    by_id = {e.track_id: e for e in entries}
    _atomic_write(path, "".join(corpus_entry_line(by_id[t]) + "\n" for t in target))
    return True


# --- run manifest -----------------------------------------------------------

class RunManifest:
    """Append-only run log. One instance per reconstruct invocation.

    The in-memory view (``status``) is the replay of the log; ``done`` and
    ``failed`` append a line, flush it, and update the view.
    """

    def __init__(self, path: Path, config_digest: str, records_digest: str, total: int):
        self.path = path
        self.config_digest = config_digest
        self.records_digest = records_digest
        self.total = total
        self.status: dict[str, str] = {}
        self.reasons: dict[str, str] = {}
        self._fh: IO[str] | None = None

    @classmethod
    def create(cls, path: Path, config_digest: str, records_digest: str,
               total: int) -> "RunManifest":
        manifest = cls(path, config_digest, records_digest, total)
        header = {
            "kind": "run",
            "config_digest": config_digest,
            "records_digest": records_digest,
            "total": total,
        }
        path.write_text(json.dumps(header) + "\n", encoding="utf-8")
        return manifest

    @classmethod
    def load(cls, path: Path, config_digest: str, records_digest: str) -> "RunManifest":
        """Replay an existing manifest, refusing to mix configurations."""
        lines = path.read_text(encoding="utf-8").splitlines()
        if not lines:
            raise ManifestMismatch(f"{path}: empty manifest")
        try:
            header = json.loads(lines[0])
        except json.JSONDecodeError as exc:
            raise ManifestMismatch(f"{path}: unreadable header: {exc}") from exc
        if header.get("kind") != "run":
            raise ManifestMismatch(f"{path}: first line is not a run header")
        if header.get("config_digest") != config_digest:
            raise ManifestMismatch(
                f"{path}: manifest was written with a different backend config; "
                "use a fresh output path or restore the old flags"
            )
        if header.get("records_digest") != records_digest:
            raise ManifestMismatch(
                f"{path}: manifest was written for a different records file"
            )
        manifest = cls(path, config_digest, records_digest, int(header.get("total", 0)))
        for raw in lines[1:]:
            if not raw.strip():
                continue
            try:
                event = json.loads(raw)
            except json.JSONDecodeError:
                continue  # torn tail line from a crash; state before it is intact
            if event.get("kind") != "status":
                continue
            track_id = event.get("track_id")
            status = event.get("status")
            if not track_id or status not in ("done", "failed"):
                continue
            manifest.status[track_id] = status
            if status == "failed":
                manifest.reasons[track_id] = event.get("reason", "")
            else:
                manifest.reasons.pop(track_id, None)
        return manifest

    def __enter__(self) -> "RunManifest":
        self._fh = open(self.path, "a", encoding="utf-8")
        return self

    def __exit__(self, *exc_info) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def _append(self, event: dict) -> None:
        assert self._fh is not None, "manifest not opened for append"
        self._fh.write(json.dumps(event) + "\n")
        self._fh.flush()

    def done(self, track_id: str) -> None:
        self._append({"kind": "status", "track_id": track_id, "status": "done"})
        self.status[track_id] = "done"
        self.reasons.pop(track_id, None)

    def failed(self, track_id: str, reason: str) -> None:
        self._append(
            {"kind": "status", "track_id": track_id, "status": "failed", "reason": reason}
        )
        self.status[track_id] = "failed"
        self.reasons[track_id] = reason

    def done_ids(self) -> set[str]:
        return {t for t, s in self.status.items() if s == "done"}

    def failed_ids(self) -> set[str]:
        return {t for t, s in self.status.items() if s == "failed"}

    def counts(self) -> dict[str, int]:
        done = len(self.done_ids())
        failed = len(self.failed_ids())
        return {
            "total": self.total,
            "done": done,
            "failed": failed,
            "pending": self.total - done - failed,
        }
