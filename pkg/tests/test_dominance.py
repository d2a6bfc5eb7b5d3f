import math
import warnings
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from chatdom.corpus import Comment, Transcript
from chatdom.dominance import (
    EDScore,
    EmptyGroupWarning,
    dominance_shares,
    evaluate_scoring,
    score_comments,
)
from chatdom.errors import ColumnMismatchError
from chatdom.glm import INTERCEPT, LogitModel
from chatdom.published import published_model

PUBLISHED1 = published_model("model1")


def zero_row(model=PUBLISHED1, **overrides):
    row = {c: 0.0 for c in model.predictors}
    row.update(overrides)
    return row


def group(gid, ed_counts, extra_non_ed=1):
    """One transcript whose i-th member writes ed_counts[i] ED comments plus some non-ED ones."""
    comments, labels = [], []
    for i, k in enumerate(ed_counts):
        for j in range(k + extra_non_ed):
            comments.append((f"m{i}", int(j < k)))
    cs = tuple(Comment(gid, pid, float(s), s, "x") for s, (pid, _) in enumerate(comments))
    return Transcript(gid, cs), [lab for _, lab in comments]


def corpus(*counts):
    ts, labels = [], []
    for i, c in enumerate(counts):
        t, lab = group(f"g{i}", c)
        ts.append(t)
        labels.extend(lab)
    return ts, labels


class TestScore:
    def test_zero_model(self):
        m = LogitModel((INTERCEPT, "a"), (0.0, 0.0), (1.0, 1.0), 1.0)
        scores = score_comments(m, [{"a": 1.0}, {"a": -4.0}])
        assert [s.probability for s in scores] == [0.5, 0.5]
        assert [s.predicted_ed for s in scores] == [0, 0]

    def test_published_model1_intercept_only(self):
        (s,) = score_comments(PUBLISHED1, [zero_row()])
        assert s.probability == pytest.approx(1 / (1 + math.exp(1.20)), abs=1e-12)
        assert s.probability == pytest.approx(0.2315, abs=5e-5)
        assert s.predicted_ed == 0

    def test_published_model1_time_reference(self):
        (s,) = score_comments(PUBLISHED1, [zero_row(TimeReferences=1.0)])
        assert s.probability == pytest.approx(1 / (1 + math.exp(-4.37)), abs=1e-12)
        assert s.probability == pytest.approx(0.9875, abs=5e-5)
        assert s.predicted_ed == 1

    def test_probability_equal_to_threshold_is_not_ed(self):
        m = LogitModel((INTERCEPT,), (math.log(3),), (1.0,), 1.0)
        (s,) = score_comments(m, [{}], decision_threshold=0.75)
        assert s.probability == 0.75
        assert s.predicted_ed == 0

    def test_threshold_one_predicts_nothing(self):
        scores = score_comments(PUBLISHED1, [zero_row(TimeReferences=5.0)], decision_threshold=1.0)
        assert scores[0].predicted_ed == 0

    @pytest.mark.parametrize("t", [0.0, -0.1, 1.5])
    def test_invalid_threshold(self, t):
        with pytest.raises(ValueError):
            score_comments(PUBLISHED1, [zero_row()], decision_threshold=t)

    def test_column_mismatch_names_columns(self):
        row = zero_row()
        del row["WordCount"]
        row["Humor"] = 1
        with pytest.raises(ColumnMismatchError) as exc:
            score_comments(PUBLISHED1, [row])
        assert exc.value.missing == ["WordCount"]
        assert exc.value.extra == ["Humor"]
        assert "WordCount" in str(exc.value) and "Humor" in str(exc.value)

    def test_keys_carried(self):
        scores = score_comments(PUBLISHED1, [zero_row(), zero_row()], keys=[("g", 0), ("g", 1)])
        assert [s.key for s in scores] == [("g", 0), ("g", 1)]


class TestShares:
    def test_one_dominant_member(self):
        ts, labels = corpus([10, 2, 2, 2, 2, 2])
        r = dominance_shares(labels, ts)
        assert [p.share for p in r.participants] == [0.5, 0.1, 0.1, 0.1, 0.1, 0.1]
        assert r.corpus_mean_share == pytest.approx(1 / 6, abs=1e-15)
        # hand computation: deviations 1/3 and five of -1/15 give variance 1/45
        assert r.corpus_sd_share == pytest.approx(math.sqrt(1 / 45), abs=1e-15)
        assert r.corpus_sd_share == pytest.approx(0.1491, abs=5e-5)
        assert r.threshold == pytest.approx(0.3157, abs=5e-5)
        assert [p.participant_id for p in r.dominant] == ["m0"]

    def test_all_equal_group(self):
        ts, labels = corpus([3] * 6)
        r = dominance_shares(labels, ts)
        assert all(p.share == pytest.approx(1 / 6) for p in r.participants)
        assert r.corpus_sd_share == 0.0
        assert r.threshold == r.corpus_mean_share
        assert r.dominant == []

    def test_shares_sum_to_one(self):
        ts, labels = corpus([7, 1, 0, 3, 2, 9], [1, 1, 1, 1, 1, 4])
        r = dominance_shares(labels, ts)
        for t in ts:
            assert abs(sum(p.share for p in r.group(t.group_id)) - 1) <= 1e-12

    def test_uniform_groups_mean_exactly_one_over_g(self):
        ts, labels = corpus([5, 1, 1, 0, 2, 3], [1, 1, 1, 1, 1, 1], [0, 0, 7, 0, 0, 1])
        r = dominance_shares(labels, ts)
        assert r.corpus_mean_share == 1 / 6

    def test_sample_sd_option(self):
        ts, labels = corpus([10, 2, 2, 2, 2, 2])
        r = dominance_shares(labels, ts, sd="sample")
        assert r.sd_kind == "sample"
        assert r.corpus_sd_share == pytest.approx(math.sqrt((1 / 9 + 5 / 225) / 5), abs=1e-15)

    def test_empty_group_warns_and_counts_as_zero(self):
        ts, labels = corpus([10, 2, 2, 2, 2, 2], [0] * 6)
        with pytest.warns(EmptyGroupWarning, match="g1"):
            r = dominance_shares(labels, ts)
        assert r.empty_groups == ("g1",)
        assert all(p.share == 0 for p in r.group("g1"))
        assert len(r.participants) == 12
        assert r.corpus_mean_share == pytest.approx(1 / 12)

    def test_mapping_labels(self):
        ts, labels = corpus([2, 1])
        keyed = {c.key: lab for c, lab in zip(ts[0].comments, labels)}
        assert dominance_shares(keyed, ts) == dominance_shares(labels, ts)

    def test_misaligned_labels(self):
        ts, labels = corpus([2, 1])
        with pytest.raises(ValueError):
            dominance_shares(labels[:-1], ts)
        with pytest.raises(ValueError):
            dominance_shares([2] * len(labels), ts)

    def test_report_serialization(self, tmp_path):
        import io

        ts, labels = corpus([10, 2, 2, 2, 2, 2])
        r = dominance_shares(labels, ts)
        doc = r.to_dict()
        assert doc["n_dominant"] == 1 and doc["n_participants"] == 6
        buf = io.StringIO()
        r.write_csv(buf)
        lines = buf.getvalue().splitlines()
        assert lines[0].startswith("group_id,participant_id")
        assert lines[1].endswith(",1") and lines[2].endswith(",0")


counts = st.lists(st.integers(0, 15), min_size=2, max_size=8).filter(lambda c: sum(c) > 0)


@given(counts, st.integers(2, 5))
def test_scaling_leaves_shares_and_dominance_unchanged(c, factor):
    ts, labels = corpus(c, [1] * len(c))
    ts2, labels2 = corpus([x * factor for x in c], [1] * len(c))
    a, b = dominance_shares(labels, ts), dominance_shares(labels2, ts2)
    assert [p.share for p in a.participants] == [p.share for p in b.participants]
    assert a.corpus_sd_share == b.corpus_sd_share
    assert [p.participant_id for p in a.dominant] == [p.participant_id for p in b.dominant]


@given(counts, st.data())
def test_raising_a_count_never_lowers_that_share(c, data):
    i = data.draw(st.integers(0, len(c) - 1))
    bumped = list(c)
    bumped[i] += data.draw(st.integers(1, 5))
    ts, labels = corpus(c)
    ts2, labels2 = corpus(bumped)
    before = dominance_shares(labels, ts).participants[i].share
    after = dominance_shares(labels2, ts2).participants[i].share
    assert after >= before


@given(st.lists(st.lists(st.integers(0, 6), min_size=4, max_size=4).filter(lambda c: sum(c) > 0),
                min_size=1, max_size=5))
def test_mean_share_identity(groups):
    ts, labels = corpus(*groups)
    r = dominance_shares(labels, ts)
    assert r.corpus_mean_share == 0.25
    for p in r.participants:
        assert p.share == float(Fraction(p.ed_count, p.group_ed_total))
        assert p.dominant == (p.share > r.threshold)


def _scores(pred):
    return [EDScore(("g", i), 0.9 if v else 0.1, v) for i, v in enumerate(pred)]


class TestEvaluate:
    def test_identical(self):
        ref = [1, 0, 1, 1, 0]
        ev = evaluate_scoring(_scores(ref), ref)
        assert (ev.accuracy, ev.precision, ev.recall) == (1.0, 1.0, 1.0)

    def test_all_zero_predictions(self):
        ref = [1, 0, 0, 1, 0, 0, 1]
        ev = evaluate_scoring(_scores([0] * 7), ref)
        assert ev.accuracy == 4 / 7
        assert ev.recall == 0.0
        assert ev.precision is None
        assert ev.to_dict()["precision_defined"] is False

    def test_two_planted_errors(self):
        ref = [1, 1, 1, 0, 0, 0, 0, 1, 0, 0]
        pred = list(ref)
        pred[0] = 0  # a miss
        pred[4] = 1  # a false alarm
        ev = evaluate_scoring(_scores(pred), ref)
        assert (ev.tp, ev.fp, ev.tn, ev.fn) == (3, 1, 5, 1)
        assert ev.accuracy == 0.8
        assert ev.precision == 0.75 and ev.recall == 0.75

    def test_mapping_reference(self):
        ref = {("g", 0): 1, ("g", 1): 0}
        assert evaluate_scoring(_scores([1, 0]), ref).accuracy == 1.0
        with pytest.raises(ValueError):
            evaluate_scoring(_scores([1, 0]), {("g", 0): 1})

    def test_misaligned(self):
        with pytest.raises(ValueError):
            evaluate_scoring(_scores([1, 0]), [1])
