"""Synthetic chat corpora with ED labels drawn from a known logistic model.

Used for the bundled demo corpus and for coefficient-recovery checks. Text
is assembled from small word pools so that every automatic indicator varies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from chatdom.annotations import MANUAL_FIELDS, Annotations, EDLabelSet, ManualCodes
from chatdom.corpus import Comment, Transcript
from chatdom.features import AUTOMATIC_COLUMNS, LexiconConfig, text_features
from chatdom.glm import sigmoid

FILLER = (
    "the", "it", "was", "he", "she", "they", "because", "clue", "server", "password", "log", "access",
    "ok", "yes", "no", "maybe", "think", "said", "who", "why", "that", "this", "guys", "we", "should",
    "agree", "motive", "alibi", "night", "office", "email", "key", "card", "right", "so", "but",
    "lol", "wait", "really", "sure", "evidence", "fired", "boss", "money", "hacked", "laptop",
)
NAMES = ("alex", "mansi", "nali", "john", "donahue")
TIME_PHRASES = ("mins left", "minutes", "no time", "1 hour", "seconds", "the clock")
SELF = ("i", "me", "my", "i'm", "i think", "myself")

# Default generating coefficients over the automatic indicators.
TRUE_COEFFICIENTS = {
    "Intercept": -2.0,
    "CommentLengthChar": 0.01,
    "WordCount": -0.08,
    "AverageWordLength": -0.15,
    "ChoiceReference": 1.2,
    "AllCapsWords": 0.25,
    "TimeReferences": 1.5,
    "CountExclamationPoi": 0.3,
    "CountQuestionMarks": -0.6,
    "SelfReferences": 0.35,
}


def _cap(word: str, rng: np.random.Generator, p_caps: float) -> str:
    if rng.random() < p_caps:
        return word.upper()
    if rng.random() < 0.15:
        return word.capitalize()
    return word


def random_comment(rng: np.random.Generator) -> str:
    """One chat-like utterance."""
    n = int(rng.integers(1, 14))
    p_caps = 0.6 if rng.random() < 0.08 else 0.03
    words = [FILLER[i] for i in rng.integers(0, len(FILLER), size=n)]
    if rng.random() < 0.35:
        for _ in range(int(rng.integers(1, 3))):
            words.insert(int(rng.integers(0, len(words) + 1)), NAMES[int(rng.integers(0, len(NAMES)))])
    if rng.random() < 0.12:
        words.insert(int(rng.integers(0, len(words) + 1)), TIME_PHRASES[int(rng.integers(0, len(TIME_PHRASES)))])
    if rng.random() < 0.3:
        words.insert(0, SELF[int(rng.integers(0, len(SELF)))])
    words = [_cap(w, rng, p_caps) for w in words]
    if words[0] == "i" or words[0].startswith("i'") or words[0].startswith("i "):
        words[0] = "I" + words[0][1:]
    text = " ".join(words)
    r = rng.random()
    if r < 0.15:
        text += "!" * int(rng.integers(1, 4))
    elif r < 0.35:
        text += "?" * int(rng.integers(1, 3))
    elif r < 0.5:
        text += "."
    if rng.random() < 0.04:
        text += " :)"
    return text


def feature_matrix(texts, cfg: LexiconConfig = LexiconConfig()) -> np.ndarray:
    """n x 9 matrix of automatic indicators in regression column order."""
    rows = [text_features(t, cfg).predictors() for t in texts]
    return np.array([[r[c] for c in AUTOMATIC_COLUMNS] for r in rows], dtype=float)


def simulate_design(n: int, rng: np.random.Generator, coefficients=TRUE_COEFFICIENTS):
    """Feature matrix (with intercept) and ED draws for ``n`` random comments."""
    texts = [random_comment(rng) for _ in range(n)]
    F = feature_matrix(texts)
    X = np.column_stack([np.ones(n), F])
    beta = np.array([coefficients[c] for c in ("Intercept", *AUTOMATIC_COLUMNS)])
    y = (rng.random(n) < sigmoid(X @ beta)).astype(int)
    return texts, X, y


@dataclass
class SyntheticCorpus:
    transcripts: list[Transcript]
    annotations: Annotations
    true_ed: dict


def simulate_corpus(n_groups: int = 7, members: int = 6, comments_per_group: tuple[int, int] = (100, 390),
                    seed: int = 0, coefficients=TRUE_COEFFICIENTS, coder_error: float = 0.05,
                    resolve: bool = True) -> SyntheticCorpus:
    """Groups of chatting participants with two-coder ED annotations.

    ED is drawn from ``coefficients`` over the automatic indicators. Each
    coder flips the true label with probability ``coder_error``; with
    ``resolve`` the disagreements are settled to the true value. Manual codes
    are loosely tied to the text (questions to '?', choice_reference_pro to
    name mentions) plus noise.
    """
    rng = np.random.default_rng(seed)
    beta = np.array([coefficients[c] for c in ("Intercept", *AUTOMATIC_COLUMNS)])
    transcripts, codes, labels, truth = [], {}, {}, {}
    for g in range(n_groups):
        gid = f"g{g + 1}"
        lo, hi = comments_per_group
        n = int(rng.integers(lo, hi + 1))
        # a couple of talkative members per group
        weights = rng.gamma(1.5, size=members)
        weights /= weights.sum()
        t = 0
        comments = []
        for seq in range(n):
            pid = f"{gid}p{int(rng.choice(members, p=weights)) + 1}"
            if seq:
                t += int(rng.integers(1, 30))
            comments.append(Comment(gid, pid, float(t), seq, random_comment(rng)))
        transcript = Transcript(gid, tuple(comments))
        transcripts.append(transcript)
        F = feature_matrix([c.text for c in comments])
        p = sigmoid(np.column_stack([np.ones(n), F]) @ beta)
        ed = (rng.random(n) < p).astype(int)
        for c, f, e in zip(comments, F, ed):
            qm = f[AUTOMATIC_COLUMNS.index("CountQuestionMarks")]
            names = f[AUTOMATIC_COLUMNS.index("ChoiceReference")]
            flags = {name: int(rng.random() < 0.05) for name in MANUAL_FIELDS[:-1]}
            flags["questions"] = int(qm > 0 or rng.random() < 0.05)
            flags["answers"] = int(not flags["questions"] and rng.random() < 0.1)
            cr_pro = int(names + (rng.random() < 0.2))
            codes[c.key] = ManualCodes(**flags, choice_reference_pro=cr_pro)
            a = int(e) ^ int(rng.random() < coder_error)
            b = int(e) ^ int(rng.random() < coder_error)
            resolved = int(e) if (resolve and a != b) else None
            labels[c.key] = EDLabelSet(c.key, a, b, resolved)
            truth[c.key] = int(e)
    return SyntheticCorpus(transcripts, Annotations(codes, labels), truth)


def write_bundle(directory, seed: int = 2024) -> None:
    """Write the demo corpus: transcripts.csv and annotations.csv."""
    from pathlib import Path

    from chatdom.annotations import write_annotations
    from chatdom.corpus import write_transcripts

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    corpus = simulate_corpus(seed=seed)
    with open(directory / "transcripts.csv", "w", encoding="utf-8", newline="") as fh:
        write_transcripts(corpus.transcripts, fh)
    with open(directory / "annotations.csv", "w", encoding="utf-8", newline="") as fh:
        write_annotations(corpus.annotations, fh)


def bundled_corpus_dir():
    """Location of the demo corpus shipped with the package."""
    from importlib import resources

    return resources.files("chatdom.data").joinpath("synthetic")


if __name__ == "__main__":
    import argparse

    ap = argparse.ArgumentParser(description="write the synthetic demo corpus")
    ap.add_argument("directory", nargs="?", default="synthetic")
    ap.add_argument("--seed", type=int, default=2024)
    ns = ap.parse_args()
    write_bundle(ns.directory, seed=ns.seed)
