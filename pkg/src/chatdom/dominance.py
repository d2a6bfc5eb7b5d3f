"""Comment scoring and group-level dominance shares."""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Mapping, Sequence, TextIO

from chatdom.errors import ColumnMismatchError
from chatdom.glm import LogitModel, predict_prob

Key = tuple[str, int]


class EmptyGroupWarning(UserWarning):
    """A group has no ED comments, so all its members get share 0."""


@dataclass(frozen=True)
class EDScore:
    key: Key
    probability: float
    predicted_ed: int


def score_comments(model: LogitModel, rows: Sequence[Mapping[str, float]], keys: Sequence[Key] | None = None,
                   decision_threshold: float = 0.5) -> list[EDScore]:
    """Probability of ED per row; predicted_ed is 1 only when probability > threshold.

    Each row must carry exactly the model's predictor columns. A threshold
    of 1.0 is accepted and predicts no ED at all.
    """
    if not 0.0 < decision_threshold <= 1.0:
        raise ValueError(f"decision_threshold must be in (0, 1], got {decision_threshold}")
    if keys is None:
        keys = [("", i) for i in range(len(rows))]
    if len(keys) != len(rows):
        raise ValueError(f"{len(keys)} keys for {len(rows)} rows")
    expected = set(model.predictors)
    out = []
    for key, row in zip(keys, rows):
        got = set(row)
        if got != expected:
            raise ColumnMismatchError(sorted(expected - got), sorted(got - expected))
        p = predict_prob(model, row)
        out.append(EDScore(tuple(key), p, int(p > decision_threshold)))
    return out


# ---------------------------------------------------------------------------
# shares


@dataclass(frozen=True)
class ParticipantShare:
    group_id: str
    participant_id: str
    comment_count: int
    ed_count: int
    group_ed_total: int
    share: float
    dominant: bool


@dataclass(frozen=True)
class DominanceReport:
    participants: tuple[ParticipantShare, ...]
    corpus_mean_share: float
    corpus_sd_share: float
    threshold: float
    sd_kind: str
    empty_groups: tuple[str, ...]

    @property
    def dominant(self) -> list[ParticipantShare]:
        return [p for p in self.participants if p.dominant]

    def group(self, group_id: str) -> list[ParticipantShare]:
        return [p for p in self.participants if p.group_id == group_id]

    def to_dict(self) -> dict:
        return {
            "corpus_mean_share": self.corpus_mean_share,
            "corpus_sd_share": self.corpus_sd_share,
            "sd_kind": self.sd_kind,
            "threshold": self.threshold,
            "n_participants": len(self.participants),
            "n_dominant": len(self.dominant),
            "empty_groups": list(self.empty_groups),
            "participants": [
                {
                    "group_id": p.group_id,
                    "participant_id": p.participant_id,
                    "comment_count": p.comment_count,
                    "ed_count": p.ed_count,
                    "group_ed_total": p.group_ed_total,
                    "share": p.share,
                    "dominant": p.dominant,
                }
                for p in self.participants
            ],
        }

    def write_csv(self, fh: TextIO, fmt=None) -> None:
        fmt = fmt or (lambda v: v)
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["group_id", "participant_id", "comment_count", "ed_count", "group_ed_total",
                    "share", "threshold", "dominant"])
        for p in self.participants:
            w.writerow([p.group_id, p.participant_id, p.comment_count, p.ed_count, p.group_ed_total,
                        fmt(p.share), fmt(self.threshold), int(p.dominant)])


def _labels_by_key(ed_labels, transcripts) -> dict[Key, int]:
    keys = [c.key for t in transcripts for c in t.comments]
    if isinstance(ed_labels, Mapping):
        missing = [k for k in keys if k not in ed_labels]
        if missing:
            raise ValueError(f"no ED label for {len(missing)} comment(s), e.g. {missing[0]}")
        labels = {k: ed_labels[k] for k in keys}
    else:
        ed_labels = list(ed_labels)
        if len(ed_labels) != len(keys):
            raise ValueError(f"{len(ed_labels)} labels for {len(keys)} comments")
        labels = dict(zip(keys, ed_labels))
    for k, v in labels.items():
        if v not in (0, 1):
            raise ValueError(f"ED label for {k} must be 0 or 1, got {v!r}")
    return {k: int(v) for k, v in labels.items()}


def dominance_shares(ed_labels, transcripts, sd: Literal["population", "sample"] = "population") -> DominanceReport:
    """Each member's share of their group's ED comments, flagged against mean + 1 SD.

    ``ed_labels`` is a mapping from (group_id, seq) to 0/1, or a flat
    sequence aligned with the comments of ``transcripts`` in order. The mean
    and SD are pooled over every participant in the corpus. Shares are exact
    fractions until the end, so uniform g-member groups give a mean of
    exactly 1/g.
    """
    if sd not in ("population", "sample"):
        raise ValueError(f"sd must be 'population' or 'sample', got {sd!r}")
    labels = _labels_by_key(ed_labels, transcripts)

    rows = []  # (group, pid, comments, ed, total, Fraction share)
    empty = []
    for t in transcripts:
        order = t.participant_order()
        if not order:
            raise ValueError(f"group {t.group_id!r} has no members")
        ed = dict.fromkeys(order, 0)
        n_comments = dict.fromkeys(order, 0)
        for c in t.comments:
            ed[c.participant_id] += labels[c.key]
            n_comments[c.participant_id] += 1
        total = sum(ed.values())
        if total == 0:
            empty.append(t.group_id)
            warnings.warn(f"group {t.group_id!r} has no ED comments; all member shares set to 0",
                          EmptyGroupWarning, stacklevel=2)
        for pid in order:
            share = Fraction(ed[pid], total) if total else Fraction(0)
            rows.append((t.group_id, pid, n_comments[pid], ed[pid], total, share))

    if not rows:
        raise ValueError("no participants")
    shares = [r[5] for r in rows]
    n = len(shares)
    mean = sum(shares, Fraction(0)) / n
    ss = sum(((s - mean) ** 2 for s in shares), Fraction(0))
    denom = n if sd == "population" else n - 1
    sd_value = math.sqrt(ss / denom) if denom > 0 else 0.0
    mean_f = float(mean)
    threshold = mean_f + sd_value
    participants = tuple(
        ParticipantShare(g, pid, nc, e, tot, float(s), float(s) > threshold)
        for g, pid, nc, e, tot, s in rows
    )
    return DominanceReport(participants, mean_f, sd_value, threshold, sd, tuple(empty))


# ---------------------------------------------------------------------------
# scoring evaluation


@dataclass(frozen=True)
class ScoringEvaluation:
    tp: int
    fp: int
    tn: int
    fn: int
    accuracy: float
    precision: float | None  # None when nothing was predicted positive
    recall: float | None  # None when the reference has no positives

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def to_dict(self) -> dict:
        return {
            "tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn, "n": self.n,
            "accuracy": self.accuracy,
            "precision": self.precision, "precision_defined": self.precision is not None,
            "recall": self.recall, "recall_defined": self.recall is not None,
        }


def evaluate_scoring(predicted: Sequence[EDScore], reference: Mapping[Key, int] | Sequence[int]) -> ScoringEvaluation:
    if isinstance(reference, Mapping):
        pred_keys = [s.key for s in predicted]
        if set(pred_keys) != set(reference) or len(pred_keys) != len(reference):
            raise ValueError("predicted and reference keys differ")
        ref = [int(reference[k]) for k in pred_keys]
    else:
        ref = [int(v) for v in reference]
        if len(ref) != len(predicted):
            raise ValueError(f"{len(predicted)} predictions for {len(ref)} reference labels")
    if not ref:
        raise ValueError("nothing to evaluate")
    tp = fp = tn = fn = 0
    for s, r in zip(predicted, ref):
        if s.predicted_ed and r:
            tp += 1
        elif s.predicted_ed:
            fp += 1
        elif r:
            fn += 1
        else:
            tn += 1
    n = tp + fp + tn + fn
    return ScoringEvaluation(
        tp, fp, tn, fn,
        accuracy=(tp + tn) / n,
        precision=tp / (tp + fp) if tp + fp else None,
        recall=tp / (tp + fn) if tp + fn else None,
    )
