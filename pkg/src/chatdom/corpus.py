"""Transcript data model, CSV ingestion, and corpus descriptive statistics."""

from __future__ import annotations

import csv
import io
import math
import statistics
import warnings
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Iterable, Literal, Sequence, TextIO

from chatdom.errors import EmptyTranscriptError, TranscriptParseError

TranscriptFormat = Literal["csv", "tsv"]

FIELDS = ("group_id", "participant_id", "timestamp", "text")
_DELIMITERS = {"csv": ",", "tsv": "\t"}


class TimestampRegressionWarning(UserWarning):
    """A comment's timestamp is earlier than its predecessor's."""


@dataclass(frozen=True)
class Comment:
    group_id: str
    participant_id: str
    timestamp: float  # seconds since the earliest comment of the transcript
    seq: int
    text: str

    @property
    def key(self) -> tuple[str, int]:
        return (self.group_id, self.seq)


@dataclass(frozen=True)
class Transcript:
    group_id: str
    comments: tuple[Comment, ...]
    participants: frozenset[str] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "comments", tuple(self.comments))
        for i, c in enumerate(self.comments):
            if c.group_id != self.group_id:
                raise ValueError(f"comment {i} belongs to group {c.group_id!r}, not {self.group_id!r}")
            if c.seq != i:
                raise ValueError(f"comment seq values must run 0..n-1; got {c.seq} at position {i}")
        object.__setattr__(self, "participants", frozenset(c.participant_id for c in self.comments))

    def __len__(self) -> int:
        return len(self.comments)

    def __iter__(self):
        return iter(self.comments)

    def participant_order(self) -> list[str]:
        """Participant ids in order of first appearance."""
        return list(dict.fromkeys(c.participant_id for c in self.comments))

    def to_dict(self) -> dict:
        return {
            "group_id": self.group_id,
            "participants": sorted(self.participants),
            "comments": [
                {
                    "seq": c.seq,
                    "participant_id": c.participant_id,
                    "timestamp": _format_offset(c.timestamp),
                    "text": c.text,
                }
                for c in self.comments
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Transcript":
        gid = data["group_id"]
        comments = [
            Comment(gid, str(c["participant_id"]), float(c["timestamp"]), int(c["seq"]), c["text"])
            for c in data["comments"]
        ]
        return cls(gid, tuple(comments))


def _format_offset(seconds: float) -> int | float:
    return int(seconds) if float(seconds).is_integer() else seconds


def _parse_timestamp(raw: str) -> tuple[str, float | datetime]:
    raw = raw.strip()
    try:
        value = float(raw)
    except ValueError:
        pass
    else:
        if not math.isfinite(value) or value < 0:
            raise ValueError(f"seconds offset must be a finite non-negative number, got {raw!r}")
        return "offset", value
    iso = raw[:-1] + "+00:00" if raw.endswith(("Z", "z")) else raw
    try:
        return "iso", datetime.fromisoformat(iso)
    except ValueError:
        raise ValueError(f"unrecognized timestamp {raw!r}") from None


def _read_rows(source: TextIO | str, fmt: TranscriptFormat, name: str | None):
    if fmt not in _DELIMITERS:
        raise TranscriptParseError(f"unsupported transcript format {fmt!r}", source=name)
    if isinstance(source, str):
        source = io.StringIO(source, newline="")
    reader = csv.reader(source, delimiter=_DELIMITERS[fmt])
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyTranscriptError(name) from None
    header = [h.strip().lstrip("﻿") for h in header]
    missing = [f for f in FIELDS if f not in header]
    if missing:
        raise TranscriptParseError(f"header lacks column(s): {', '.join(missing)}", line=1, source=name)
    idx = {f: header.index(f) for f in FIELDS}
    rows = []
    while True:
        start = reader.line_num + 1
        try:
            row = next(reader)
        except StopIteration:
            break
        except csv.Error as exc:
            raise TranscriptParseError(str(exc), line=start, source=name) from None
        if not row or (len(row) == 1 and row[0] == ""):
            continue
        if len(row) < len(header):
            absent = [f for f in FIELDS if idx[f] >= len(row)]
            raise TranscriptParseError(f"missing field(s): {', '.join(absent)}", line=start, source=name)
        record = {f: row[i] for f, i in idx.items()}
        for f in ("group_id", "participant_id", "timestamp"):
            if not record[f].strip():
                raise TranscriptParseError(f"missing {f}", line=start, source=name)
        rows.append((start, record))
    if not rows:
        raise EmptyTranscriptError(name)
    return rows


def _build(group_id: str, rows, name: str | None) -> Transcript:
    parsed = []
    kinds = set()
    for line, rec in rows:
        try:
            kind, value = _parse_timestamp(rec["timestamp"])
        except ValueError as exc:
            raise TranscriptParseError(str(exc), line=line, source=name) from None
        kinds.add(kind)
        if len(kinds) > 1:
            raise TranscriptParseError("mixed ISO-8601 and offset timestamps", line=line, source=name)
        parsed.append((line, rec, value))

    try:
        origin = min(v for _, _, v in parsed)
    except TypeError:
        raise TranscriptParseError("mixed naive and timezone-aware timestamps", source=name) from None
    comments = []
    prev = None
    for seq, (line, rec, value) in enumerate(parsed):
        offset = (value - origin).total_seconds() if isinstance(value, datetime) else value - origin
        if prev is not None and offset < prev:
            warnings.warn(
                f"{name + ':' if name else ''}line {line}: timestamp regresses in group {group_id!r}; "
                "keeping file order",
                TimestampRegressionWarning,
                stacklevel=3,
            )
        prev = offset
        comments.append(Comment(group_id, rec["participant_id"], offset, seq, rec["text"]))
    return Transcript(group_id, tuple(comments))


def parse_transcripts(source: TextIO | str, format: TranscriptFormat = "csv", name: str | None = None) -> list[Transcript]:
    """Parse a file that may hold several groups; one Transcript per group, in order of first appearance."""
    rows = _read_rows(source, format, name)
    groups: dict[str, list] = {}
    for line, rec in rows:
        groups.setdefault(rec["group_id"], []).append((line, rec))
    return [_build(gid, grows, name) for gid, grows in groups.items()]


def parse_transcript(source: TextIO | str, format: TranscriptFormat = "csv", name: str | None = None) -> Transcript:
    """Parse a single-group transcript.

    ``source`` is an open text stream (opened with ``newline=""``) or the
    file contents as a string. Comments keep file order and raw text; a
    timestamp that goes backwards emits :class:`TimestampRegressionWarning`.
    """
    transcripts = parse_transcripts(source, format, name)
    if len(transcripts) > 1:
        ids = ", ".join(t.group_id for t in transcripts)
        raise TranscriptParseError(f"expected one group, found {len(transcripts)}: {ids}", source=name)
    return transcripts[0]


def read_transcripts(paths: Iterable[str | Path], format: TranscriptFormat | None = None) -> list[Transcript]:
    """Read every file in ``paths``; the format defaults from the extension."""
    out: list[Transcript] = []
    for p in paths:
        p = Path(p)
        fmt = format or ("tsv" if p.suffix.lower() in (".tsv", ".tab") else "csv")
        try:
            fh = p.open(encoding="utf-8", newline="")
        except FileNotFoundError:
            raise TranscriptParseError("no such file", source=str(p)) from None
        with fh:
            try:
                out.extend(parse_transcripts(fh, fmt, name=str(p)))
            except UnicodeDecodeError as exc:
                raise TranscriptParseError(f"not valid UTF-8 ({exc.reason})", source=str(p)) from None
    seen: set[str] = set()
    for t in out:
        if t.group_id in seen:
            raise TranscriptParseError(f"group {t.group_id!r} appears in more than one file")
        seen.add(t.group_id)
    return out


def write_transcripts(transcripts: Sequence[Transcript], fh: TextIO, format: TranscriptFormat = "csv") -> None:
    writer = csv.writer(fh, delimiter=_DELIMITERS[format], lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    writer.writerow(FIELDS)
    for t in transcripts:
        for c in t.comments:
            writer.writerow([c.group_id, c.participant_id, _format_offset(c.timestamp), c.text])


def transcripts_to_csv(transcripts: Sequence[Transcript], format: TranscriptFormat = "csv") -> str:
    buf = io.StringIO(newline="")
    write_transcripts(transcripts, buf, format)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# descriptive statistics


@dataclass(frozen=True)
class GroupStats:
    group_id: str
    comment_count: int
    char_length_total: int
    word_count_total: int


@dataclass(frozen=True)
class FieldSummary:
    total: int
    mean: float
    sd: float
    min: int
    max: int
    sd_defined: bool  # False with a single group; sd is then reported as 0


@dataclass(frozen=True)
class CorpusStats:
    groups: tuple[GroupStats, ...]
    comments: FieldSummary
    length: FieldSummary
    words: FieldSummary

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    def to_dict(self) -> dict:
        def summ(s: FieldSummary) -> dict:
            return {
                "total": s.total,
                "mean": s.mean,
                "sd": s.sd,
                "sd_defined": s.sd_defined,
                "min": s.min,
                "max": s.max,
            }

        return {
            "n_groups": self.n_groups,
            "groups": [
                {
                    "group_id": g.group_id,
                    "comment_count": g.comment_count,
                    "char_length_total": g.char_length_total,
                    "word_count_total": g.word_count_total,
                }
                for g in self.groups
            ],
            "corpus": {
                "comment_count": summ(self.comments),
                "char_length_total": summ(self.length),
                "word_count_total": summ(self.words),
            },
        }


def summarize(values: Sequence[int]) -> FieldSummary:
    if not values:
        raise ValueError("no values to summarize")
    total = sum(values)
    defined = len(values) > 1
    return FieldSummary(
        total=total,
        mean=total / len(values),
        sd=statistics.stdev(values) if defined else 0.0,
        min=min(values),
        max=max(values),
        sd_defined=defined,
    )


def corpus_stats(transcripts: Sequence[Transcript]) -> CorpusStats:
    """Per-group comment, character and word totals with mean, sample SD, min and max."""
    from chatdom.features import tokenize

    if not transcripts:
        raise ValueError("corpus_stats needs at least one transcript")
    groups = tuple(
        GroupStats(
            group_id=t.group_id,
            comment_count=len(t.comments),
            char_length_total=sum(len(c.text) for c in t.comments),
            word_count_total=sum(len(tokenize(c.text)) for c in t.comments),
        )
        for t in transcripts
    )
    return CorpusStats(
        groups=groups,
        comments=summarize([g.comment_count for g in groups]),
        length=summarize([g.char_length_total for g in groups]),
        words=summarize([g.word_count_total for g in groups]),
    )
