"""Automatic per-comment dominance indicators and per-participant aggregates."""

from __future__ import annotations

import csv
import json
import unicodedata
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Sequence, TextIO

from chatdom.errors import ConfigurationError

if TYPE_CHECKING:
    from chatdom.corpus import Comment, Transcript

DEFAULT_CHOICE_TERMS = frozenset({"alex", "mansi", "nali", "john", "donahue"})
DEFAULT_TIME_TERMS = frozenset(
    {"time", "min", "mins", "minute", "minutes", "hour", "hours", "sec", "secs",
     "second", "seconds", "clock", "deadline"}
)
DEFAULT_SELF_TERMS = frozenset({"i", "i'm", "im", "i'll", "i've", "i'd", "me", "my", "mine", "myself"})

# Punctuation that carries meaning when attached to a word ("#5", "@nali", "50%").
_KEEP = frozenset("#@%&")
_APOSTROPHES = str.maketrans({"’": "'", "‘": "'", "ʼ": "'"})


def _validate_terms(name: str, terms: Iterable[str]) -> frozenset[str]:
    if isinstance(terms, str):
        raise ConfigurationError(f"{name} must be a list of tokens, not a string")
    out = frozenset(terms)
    for t in out:
        if not isinstance(t, str) or not t:
            raise ConfigurationError(f"{name} entries must be non-empty strings (got {t!r})")
        if any(ch.isspace() for ch in t):
            raise ConfigurationError(f"{name} entry {t!r} contains whitespace")
        if t != t.lower():
            raise ConfigurationError(f"{name} entry {t!r} is not lowercase")
    return out


@dataclass(frozen=True)
class LexiconConfig:
    choice_terms: frozenset[str] = DEFAULT_CHOICE_TERMS
    time_terms: frozenset[str] = DEFAULT_TIME_TERMS
    self_terms: frozenset[str] = DEFAULT_SELF_TERMS
    min_allcaps_len: int = 2

    def __post_init__(self):
        for name in ("choice_terms", "time_terms", "self_terms"):
            object.__setattr__(self, name, _validate_terms(name, getattr(self, name)))
        if isinstance(self.min_allcaps_len, bool) or not isinstance(self.min_allcaps_len, int) \
                or self.min_allcaps_len < 1:
            raise ConfigurationError(f"min_allcaps_len must be an integer >= 1, got {self.min_allcaps_len!r}")

    @classmethod
    def from_dict(cls, data: dict) -> "LexiconConfig":
        known = {"choice_terms", "time_terms", "self_terms", "min_allcaps_len"}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown lexicon key(s): {', '.join(sorted(unknown))}")
        return cls(**data)

    @classmethod
    def load(cls, path: str | Path) -> "LexiconConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigurationError(f"lexicon file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(data, dict):
            raise ConfigurationError(f"{path}: lexicon must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {
            "choice_terms": sorted(self.choice_terms),
            "time_terms": sorted(self.time_terms),
            "self_terms": sorted(self.self_terms),
            "min_allcaps_len": self.min_allcaps_len,
        }


def _strippable(ch: str) -> bool:
    return ch not in _KEEP and unicodedata.category(ch).startswith("P")


def tokenize(text: str) -> list[str]:
    """Split on whitespace and trim punctuation from token edges.

    Internal punctuation survives ("don't"), as do ``# @ % &`` at the edges.
    Tokens with no letter or digit (emoticons, "!!!") are dropped.
    Case is never changed.
    """
    tokens = []
    for raw in text.split():
        start, end = 0, len(raw)
        while start < end and _strippable(raw[start]):
            start += 1
        while end > start and _strippable(raw[end - 1]):
            end -= 1
        tok = raw[start:end]
        if any(ch.isalnum() for ch in tok):
            tokens.append(tok)
    return tokens


def _fold(token: str) -> str:
    return token.casefold().translate(_APOSTROPHES)


def _lexicon_count(tokens: Sequence[str], terms: frozenset[str]) -> int:
    return sum(1 for t in tokens if _fold(t) in terms)


def _is_all_caps(token: str, min_len: int) -> bool:
    return len(token) >= min_len and token.isalpha() and token.isupper()


def count_all_caps(text: str, cfg: LexiconConfig = LexiconConfig()) -> int:
    return sum(1 for t in tokenize(text) if _is_all_caps(t, cfg.min_allcaps_len))


def count_time_references(text: str, cfg: LexiconConfig = LexiconConfig()) -> int:
    """1 if the comment mentions time at all, else 0."""
    return int(_lexicon_count(tokenize(text), cfg.time_terms) > 0)


def count_exclamations(text: str) -> int:
    return text.count("!")


def count_question_marks(text: str) -> int:
    return text.count("?")


def count_self_references(text: str, cfg: LexiconConfig = LexiconConfig()) -> int:
    return _lexicon_count(tokenize(text), cfg.self_terms)


def count_choice_references(text: str, cfg: LexiconConfig = LexiconConfig()) -> int:
    if not cfg.choice_terms:
        raise ConfigurationError("choice_terms is empty; choice references cannot be counted")
    return _lexicon_count(tokenize(text), cfg.choice_terms)


@dataclass(frozen=True)
class CommentFeatures:
    comment_length_chars: int = 0
    word_count: int = 0
    average_word_length: float = 0.0
    choice_reference: int = 0
    all_caps_words: int = 0
    time_reference: int = 0
    exclamation_points: int = 0
    question_marks: int = 0
    self_references: int = 0

    def as_dict(self) -> dict:
        return asdict(self)

    def predictors(self) -> dict[str, float]:
        """Values keyed by regression column name."""
        return {REGRESSION_NAMES[k]: float(v) for k, v in asdict(self).items()}


FEATURE_FIELDS = tuple(f.name for f in fields(CommentFeatures))

# Column names used in fitted models and published coefficient tables.
REGRESSION_NAMES = {
    "comment_length_chars": "CommentLengthChar",
    "word_count": "WordCount",
    "average_word_length": "AverageWordLength",
    "choice_reference": "ChoiceReference",
    "all_caps_words": "AllCapsWords",
    "time_reference": "TimeReferences",
    "exclamation_points": "CountExclamationPoi",
    "question_marks": "CountQuestionMarks",
    "self_references": "SelfReferences",
}
AUTOMATIC_COLUMNS = tuple(REGRESSION_NAMES[f] for f in FEATURE_FIELDS)


def text_features(text: str, cfg: LexiconConfig = LexiconConfig()) -> CommentFeatures:
    if not cfg.choice_terms:
        raise ConfigurationError("choice_terms is empty; choice references cannot be counted")
    tokens = tokenize(text)
    n = len(tokens)
    return CommentFeatures(
        comment_length_chars=len(text),
        word_count=n,
        average_word_length=sum(len(t) for t in tokens) / n if n else 0.0,
        choice_reference=_lexicon_count(tokens, cfg.choice_terms),
        all_caps_words=sum(1 for t in tokens if _is_all_caps(t, cfg.min_allcaps_len)),
        time_reference=int(_lexicon_count(tokens, cfg.time_terms) > 0),
        exclamation_points=count_exclamations(text),
        question_marks=count_question_marks(text),
        self_references=_lexicon_count(tokens, cfg.self_terms),
    )


def extract_features(comment: "Comment | str", cfg: LexiconConfig = LexiconConfig()) -> CommentFeatures:
    text = comment if isinstance(comment, str) else comment.text
    return text_features(text, cfg)


def extract_transcript(transcript: "Transcript", cfg: LexiconConfig = LexiconConfig()) -> list[CommentFeatures]:
    return [text_features(c.text, cfg) for c in transcript.comments]


@dataclass(frozen=True)
class ParticipantAggregate:
    group_id: str
    participant_id: str
    comment_count: int
    sums: CommentFeatures  # field-wise sums over the participant's comments

    def as_row(self) -> dict:
        row = {"group_id": self.group_id, "participant_id": self.participant_id,
               "comment_count": self.comment_count}
        row.update({f"{k}_sum": v for k, v in self.sums.as_dict().items()})
        return row


def _add(a: CommentFeatures, b: CommentFeatures) -> CommentFeatures:
    return CommentFeatures(*(getattr(a, f) + getattr(b, f) for f in FEATURE_FIELDS))


def aggregate_participant(transcript: "Transcript", features: Sequence[CommentFeatures]) -> list[ParticipantAggregate]:
    """One aggregate per participant, in order of first appearance."""
    if len(features) != len(transcript.comments):
        raise ValueError(
            f"{len(features)} feature vectors for {len(transcript.comments)} comments in group {transcript.group_id!r}"
        )
    counts: dict[str, int] = {}
    sums: dict[str, CommentFeatures] = {}
    for c, f in zip(transcript.comments, features):
        pid = c.participant_id
        counts[pid] = counts.get(pid, 0) + 1
        sums[pid] = _add(sums[pid], f) if pid in sums else f
    return [ParticipantAggregate(transcript.group_id, pid, counts[pid], sums[pid]) for pid in counts]


def write_feature_matrix(transcripts: Sequence["Transcript"], features: Sequence[Sequence[CommentFeatures]],
                         fh: TextIO, fmt=None) -> None:
    """CSV: key columns, then one column per feature in declaration order."""
    fmt = fmt or (lambda v: v)
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["group_id", "seq", "participant_id", *FEATURE_FIELDS])
    for t, feats in zip(transcripts, features):
        for c, f in zip(t.comments, feats):
            writer.writerow([c.group_id, c.seq, c.participant_id, *(fmt(getattr(f, k)) for k in FEATURE_FIELDS)])
