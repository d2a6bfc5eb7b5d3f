"""Manually coded variables, two-coder ED labels, reliability, reconciliation."""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Iterable, Mapping, Sequence, TextIO

from chatdom.errors import AnnotationError, UndefinedKappaError, UnresolvedLabelsError

Key = tuple[str, int]


@dataclass(frozen=True)
class ManualCodes:
    humor: int = 0
    humor_appreciated: int = 0
    profanity: int = 0
    questions: int = 0
    answers: int = 0
    call_for_vote: int = 0
    organizational: int = 0
    asymmetric_info: int = 0
    refocus: int = 0
    choice_reference_pro: int = 0  # a count, not a flag

    def __post_init__(self):
        for f in MANUAL_FLAGS:
            if getattr(self, f) not in (0, 1):
                raise ValueError(f"{f} must be 0 or 1, got {getattr(self, f)!r}")
        if not isinstance(self.choice_reference_pro, int) or self.choice_reference_pro < 0:
            raise ValueError(f"choice_reference_pro must be a non-negative integer, got {self.choice_reference_pro!r}")

    def as_dict(self) -> dict:
        return asdict(self)

    def predictors(self) -> dict[str, float]:
        return {REGRESSION_NAMES[k]: float(v) for k, v in asdict(self).items()}


MANUAL_FIELDS = tuple(f.name for f in fields(ManualCodes))
MANUAL_FLAGS = MANUAL_FIELDS[:-1]

REGRESSION_NAMES = {
    "humor": "Humor",
    "humor_appreciated": "HumorAppreciated",
    "profanity": "Profanity",
    "answers": "Answers",
    "questions": "Questions",
    "call_for_vote": "CallForVote",
    "organizational": "Organizational",
    "asymmetric_info": "AsymmetricInfo",
    "refocus": "Refocus",
    "choice_reference_pro": "ChoiceReferencePro",
}
# Order used by the published Model 2 table.
MANUAL_COLUMNS = tuple(REGRESSION_NAMES[f] for f in (
    "humor", "humor_appreciated", "profanity", "answers", "questions", "call_for_vote",
    "organizational", "asymmetric_info", "refocus", "choice_reference_pro",
))


@dataclass(frozen=True)
class EDLabelSet:
    key: Key
    coder_a: int
    coder_b: int
    resolved: int | None = None

    def __post_init__(self):
        for name in ("coder_a", "coder_b"):
            if getattr(self, name) not in (0, 1):
                raise ValueError(f"{name} must be 0 or 1")
        if self.resolved not in (None, 0, 1):
            raise ValueError("resolved must be 0, 1 or None")
        if self.agreed and self.resolved is not None and self.resolved != self.coder_a:
            raise ValueError(f"{self.key}: resolved value contradicts the coders' common value")

    @property
    def agreed(self) -> bool:
        return self.coder_a == self.coder_b

    @property
    def unresolved(self) -> bool:
        return not self.agreed and self.resolved is None

    @property
    def final(self) -> int | None:
        if self.agreed:
            return self.coder_a
        return self.resolved


@dataclass
class Annotations:
    """Parsed annotation file, keyed by (group_id, seq) in file order."""

    codes: dict[Key, ManualCodes]
    labels: dict[Key, EDLabelSet]
    missing_counts: Counter = field(default_factory=Counter)
    extra_coder_columns: dict[str, tuple[dict[Key, int], dict[Key, int]]] = field(default_factory=dict)
    columns: tuple[str, ...] = ()  # header of the source file

    def __len__(self) -> int:
        return len(self.labels)

    def __getitem__(self, key: Key) -> tuple[ManualCodes, EDLabelSet]:
        return self.codes[key], self.labels[key]

    def __iter__(self):
        return iter(self.labels)

    def items(self):
        return ((k, self[k]) for k in self.labels)

    @property
    def unresolved_keys(self) -> list[Key]:
        return [k for k, l in self.labels.items() if l.unresolved]

    @property
    def reconciled(self) -> bool:
        return not self.unresolved_keys

    def final_labels(self, fallback_to_coder_a: bool = False) -> dict[Key, int]:
        """Consensus ED per comment; unresolved disagreements raise unless falling back to coder A."""
        bad = self.unresolved_keys
        if bad and not fallback_to_coder_a:
            raise UnresolvedLabelsError(bad)
        return {k: (l.final if l.final is not None else l.coder_a) for k, l in self.labels.items()}


ED_COLUMNS = ("ed_a", "ed_b", "resolved")
ANNOTATION_HEADER = ("group_id", "seq", *MANUAL_FIELDS, *ED_COLUMNS)


def _binary(value: str, column: str, line: int) -> int:
    v = value.strip()
    if v not in ("0", "1"):
        raise AnnotationError(f"column {column!r} must be 0 or 1, got {value!r}", line=line)
    return int(v)


def load_annotations(source: TextIO | str, transcripts=None) -> Annotations:
    """Read an annotation CSV.

    Missing columns or empty cells default to 0 and are tallied in
    ``missing_counts`` per field. When ``transcripts`` is given, every key must
    exist there, and comments without a row get all-zero codes (also tallied).
    Column pairs ``<name>_a``/``<name>_b`` other than ED are kept for
    per-column reliability.
    """
    if isinstance(source, str):
        source = io.StringIO(source, newline="")
    reader = csv.reader(source)
    try:
        header = [h.strip().lstrip("﻿") for h in next(reader)]
    except StopIteration:
        header = []
    col = {h: i for i, h in enumerate(header)}
    if header and ("group_id" not in col or "seq" not in col):
        raise AnnotationError("annotation header must contain group_id and seq", line=1)

    pair_names = sorted(
        h[:-2] for h in header
        if h.endswith("_a") and h != "ed_a" and h[:-2] + "_b" in col
    )
    codes: dict[Key, ManualCodes] = {}
    labels: dict[Key, EDLabelSet] = {}
    missing: Counter = Counter()
    extra = {name: ({}, {}) for name in pair_names}

    def cell(row, name):
        i = col.get(name)
        if i is None or i >= len(row):
            return ""
        return row[i]

    while True:
        line = reader.line_num + 1
        try:
            row = next(reader)
        except StopIteration:
            break
        if not row or all(not c.strip() for c in row):
            continue
        gid = cell(row, "group_id").strip()
        seq_raw = cell(row, "seq").strip()
        if not gid or not seq_raw:
            raise AnnotationError("missing group_id or seq", line=line)
        try:
            seq = int(seq_raw)
        except ValueError:
            raise AnnotationError(f"seq must be an integer, got {seq_raw!r}", line=line) from None
        key = (gid, seq)
        if key in labels:
            raise AnnotationError(f"duplicate annotation for {gid}#{seq}", line=line)

        values = {}
        for f in MANUAL_FIELDS:
            raw = cell(row, f)
            if not raw.strip():
                missing[f] += 1
                values[f] = 0
            elif f == "choice_reference_pro":
                try:
                    values[f] = int(raw)
                except ValueError:
                    values[f] = -1
                if values[f] < 0:
                    raise AnnotationError(f"column {f!r} must be a non-negative integer, got {raw!r}", line=line)
            else:
                values[f] = _binary(raw, f, line)
        codes[key] = ManualCodes(**values)

        ed = {}
        for f in ("ed_a", "ed_b"):
            raw = cell(row, f)
            if not raw.strip():
                missing[f] += 1
                ed[f] = 0
            else:
                ed[f] = _binary(raw, f, line)
        raw = cell(row, "resolved")
        resolved = _binary(raw, "resolved", line) if raw.strip() else None
        try:
            labels[key] = EDLabelSet(key, ed["ed_a"], ed["ed_b"], resolved)
        except ValueError as exc:
            raise AnnotationError(str(exc), line=line) from None

        for name in pair_names:
            for side, store in zip(("_a", "_b"), extra[name]):
                raw = cell(row, name + side)
                if raw.strip():
                    store[key] = _binary(raw, name + side, line)

    ann = Annotations(codes, labels, missing, extra, tuple(header))
    if transcripts is not None:
        ann = _align(ann, transcripts)
    return ann


def _align(ann: Annotations, transcripts) -> Annotations:
    known = [c.key for t in transcripts for c in t.comments]
    known_set = set(known)
    unknown = [k for k in ann.labels if k not in known_set]
    if unknown:
        shown = ", ".join(f"{g}#{s}" for g, s in unknown[:20])
        raise AnnotationError(f"{len(unknown)} annotation key(s) not found in transcripts: {shown}")
    codes, labels = {}, {}
    missing = Counter(ann.missing_counts)
    for k in known:
        if k in ann.labels:
            codes[k], labels[k] = ann.codes[k], ann.labels[k]
        else:
            codes[k], labels[k] = ManualCodes(), EDLabelSet(k, 0, 0)
            for f in (*MANUAL_FIELDS, "ed_a", "ed_b"):
                missing[f] += 1
    return Annotations(codes, labels, missing, ann.extra_coder_columns, ann.columns)


def write_annotations(ann: Annotations, fh: TextIO) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(ANNOTATION_HEADER)
    for key, (codes, lab) in ann.items():
        writer.writerow([
            key[0], key[1], *(getattr(codes, f) for f in MANUAL_FIELDS),
            lab.coder_a, lab.coder_b, "" if lab.resolved is None else lab.resolved,
        ])


# ---------------------------------------------------------------------------
# reliability


@dataclass(frozen=True)
class ReliabilityReport:
    column: str
    n_items: int
    percent_agreement: float
    cohens_kappa: float | None  # None when expected agreement is 1
    kappa_defined: bool
    expected_agreement: float
    confusion: tuple[tuple[int, int], tuple[int, int]]  # [a][b]

    def to_dict(self) -> dict:
        return {
            "column": self.column,
            "n_items": self.n_items,
            "percent_agreement": self.percent_agreement,
            "cohens_kappa": self.cohens_kappa,
            "kappa_defined": self.kappa_defined,
            "expected_agreement": self.expected_agreement,
            "confusion": [list(r) for r in self.confusion],
        }


def _pairs(labels: Iterable) -> list[tuple[int, int]]:
    out = []
    for item in labels:
        if isinstance(item, EDLabelSet):
            out.append((item.coder_a, item.coder_b))
        else:
            a, b = item
            out.append((int(a), int(b)))
    return out


def _confusion(pairs: Sequence[tuple[int, int]]) -> list[list[int]]:
    m = [[0, 0], [0, 0]]
    for a, b in pairs:
        m[a][b] += 1
    return m


def percent_agreement(labels: Sequence) -> float:
    """Fraction of items on which both coders agree."""
    pairs = _pairs(labels)
    if not pairs:
        raise ValueError("percent_agreement needs at least one item")
    return sum(1 for a, b in pairs if a == b) / len(pairs)


def _kappa_parts(pairs):
    n = len(pairs)
    m = _confusion(pairs)
    po = (m[0][0] + m[1][1]) / n
    a1 = (m[1][0] + m[1][1]) / n
    b1 = (m[0][1] + m[1][1]) / n
    pe = a1 * b1 + (1 - a1) * (1 - b1)
    return m, po, pe


def cohens_kappa(labels: Sequence) -> float:
    """Chance-corrected agreement (po - pe) / (1 - pe).

    Raises :class:`UndefinedKappaError` (carrying ``percent_agreement``) when
    pe = 1, i.e. both coders used a single identical category throughout.
    """
    pairs = _pairs(labels)
    if not pairs:
        raise ValueError("cohens_kappa needs at least one item")
    _, po, pe = _kappa_parts(pairs)
    if pe >= 1.0:
        raise UndefinedKappaError(po)
    return (po - pe) / (1 - pe)


def reliability(labels: Sequence, column: str = "ed") -> ReliabilityReport:
    pairs = _pairs(labels)
    if not pairs:
        raise ValueError("reliability needs at least one item")
    m, po, pe = _kappa_parts(pairs)
    try:
        kappa = cohens_kappa(pairs)
    except UndefinedKappaError:
        kappa = None
    return ReliabilityReport(
        column=column,
        n_items=len(pairs),
        percent_agreement=po,
        cohens_kappa=kappa,
        kappa_defined=kappa is not None,
        expected_agreement=pe,
        confusion=((m[0][0], m[0][1]), (m[1][0], m[1][1])),
    )


def reliability_by_column(ann: Annotations) -> list[ReliabilityReport]:
    """ED reliability followed by every other double-coded column."""
    reports = [reliability(list(ann.labels.values()), column="ed")]
    for name, (a, b) in sorted(ann.extra_coder_columns.items()):
        keys = [k for k in a if k in b]
        if keys:
            reports.append(reliability([(a[k], b[k]) for k in keys], column=name))
    return reports


# ---------------------------------------------------------------------------
# reconciliation


def apply_resolutions(labels: Sequence[EDLabelSet], resolutions: Mapping[Key, int]) -> list[EDLabelSet]:
    """Return labels with consensus values filled in.

    ``resolutions`` must cover every disagreement still lacking a resolved
    value and may only name disagreeing items.
    """
    by_key = {l.key: l for l in labels}
    disagreeing = {l.key for l in labels if not l.agreed}
    needed = {l.key for l in labels if l.unresolved}
    given = set(resolutions)
    missing = needed - given
    extraneous = given - disagreeing
    if missing or extraneous:
        parts = []
        if missing:
            parts.append("missing resolutions for " + ", ".join(f"{g}#{s}" for g, s in sorted(missing)))
        if extraneous:
            extra_desc = []
            for k in sorted(extraneous, key=lambda k: (k[0], k[1])):
                why = "coders agree" if k in by_key else "unknown key"
                extra_desc.append(f"{k[0]}#{k[1]} ({why})")
            parts.append("extraneous resolutions for " + ", ".join(extra_desc))
        raise AnnotationError("; ".join(parts))
    out = []
    for l in labels:
        if l.key in resolutions:
            value = resolutions[l.key]
            if value not in (0, 1):
                raise AnnotationError(f"resolution for {l.key[0]}#{l.key[1]} must be 0 or 1, got {value!r}")
            l = replace(l, resolved=int(value))
        out.append(l)
    return out


def reconcile(labels: Sequence[EDLabelSet], resolutions: Mapping[Key, int]) -> list[int]:
    """Final ED vector, aligned with ``labels``."""
    return [l.final for l in apply_resolutions(labels, resolutions)]


def load_resolutions(source: TextIO | str) -> dict[Key, int]:
    """CSV with columns group_id, seq, resolved."""
    if isinstance(source, str):
        source = io.StringIO(source, newline="")
    reader = csv.DictReader(source)
    if reader.fieldnames is None:
        return {}
    for need in ("group_id", "seq", "resolved"):
        if need not in reader.fieldnames:
            raise AnnotationError(f"resolutions file lacks column {need!r}", line=1)
    out = {}
    for row in reader:
        line = reader.line_num
        try:
            key = (row["group_id"], int(row["seq"]))
        except (TypeError, ValueError):
            raise AnnotationError("bad group_id/seq", line=line) from None
        out[key] = _binary(row["resolved"] or "", "resolved", line)
    return out
