import math
from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from segwords.errors import InputError
from segwords.evaluate import (MatchCounts, compose_scores, evaluate_corpus,
                               format_report, match_boundaries, metrics_from_counts,
                               report_csv_row)
from segwords.postprocess import BoundaryList


def bl(*times, utt=""):
    return BoundaryList(np.array(times, dtype=float), utterance_id=utt)


def max_matching_oracle(pred, ref, tol):
    """Exhaustive match/skip recursion over both sorted lists (memoized);
    explores every one-to-one assignment, independent of the greedy path."""

    pred, ref = tuple(pred), tuple(ref)

    @lru_cache(maxsize=None)
    def best(i, j):
        if i == len(pred) or j == len(ref):
            return 0
        options = [best(i + 1, j), best(i, j + 1)]
        if abs(pred[i] - ref[j]) <= tol:
            options.append(1 + best(i + 1, j + 1))
        return max(options)

    return best(0, 0)


class TestMatchBoundaries:
    def test_within_window(self):
        c = match_boundaries(bl(1.00), bl(1.02), 0.04)
        assert (c.n_hit, c.n_f, c.n_ref) == (1, 1, 1)

    def test_one_to_one_no_double_match(self):
        c = match_boundaries(bl(1.00, 1.03), bl(1.02), 0.04)
        assert (c.n_hit, c.n_f, c.n_ref) == (1, 2, 1)

    def test_unsorted_rejected(self):
        good = bl(1.0, 2.0)
        bad = BoundaryList.__new__(BoundaryList)
        object.__setattr__(bad, "times", np.array([2.0, 1.0]))
        object.__setattr__(bad, "utterance_id", "")
        with pytest.raises(ValueError, match="not sorted"):
            match_boundaries(bad, good, 0.04)

    def test_empty_lists(self):
        c = match_boundaries(bl(), bl(1.0), 0.04)
        assert (c.n_hit, c.n_f, c.n_ref) == (0, 0, 1)

    def test_greedy_equals_bruteforce_sample(self):
        rng = np.random.default_rng(123)
        for _ in range(200):
            n_p, n_r = rng.integers(0, 9, 2)
            pred = np.sort(rng.uniform(0, 2.0, n_p))
            ref = np.sort(rng.uniform(0, 2.0, n_r))
            pred = np.unique(pred)
            ref = np.unique(ref)
            for tol in (0.01, 0.02, 0.04):
                got = match_boundaries(BoundaryList(pred), BoundaryList(ref), tol).n_hit
                assert got == max_matching_oracle(pred, ref, tol)

    @given(st.lists(st.integers(1, 1000), max_size=6),
           st.lists(st.integers(1, 1000), max_size=6),
           st.floats(0, 100))
    @settings(max_examples=200)
    def test_shift_invariance(self, pred_gaps, ref_gaps, shift):
        # millisecond-grid gaps with an off-grid tolerance keep every pair
        # far from the matching threshold, so fp noise cannot flip a hit
        tol = 0.0405
        pred = np.cumsum(np.asarray(pred_gaps)) * 1e-3
        ref = np.cumsum(np.asarray(ref_gaps)) * 1e-3
        base = match_boundaries(BoundaryList(pred), BoundaryList(ref), tol)
        moved = match_boundaries(BoundaryList(pred + shift), BoundaryList(ref + shift), tol)
        assert base == moved

    def test_hit_count_monotone_in_tolerance(self):
        rng = np.random.default_rng(5)
        pred = np.unique(rng.uniform(0, 3, 7))
        ref = np.unique(rng.uniform(0, 3, 6))
        hits = [match_boundaries(BoundaryList(pred), BoundaryList(ref), tol).n_hit
                for tol in (0.0, 0.01, 0.02, 0.04, 0.1, 1.0)]
        assert hits == sorted(hits)


TABLE_ROWS = [
    # (prc, rcl, os, f_published, r_published)
    (0.8805, 0.0460, -0.9475, 0.0874, 0.3254),
    (0.3013, 0.6585, 1.1889, 0.4131, -0.1604),
    (0.6556, 0.4736, -0.2766, 0.5494, 0.6139),
    (0.9302, 0.4403, -0.5327, 0.5971, 0.6032),
    (0.4840, 0.9161, 0.8942, 0.6332, 0.2049),
    (0.8999, 0.7928, -0.1187, 0.8427, 0.8489),
]


class TestComposeScores:
    @pytest.mark.parametrize("prc,rcl,os,f_pub,r_pub", TABLE_ROWS)
    def test_published_ablation_rows(self, prc, rcl, os, f_pub, r_pub):
        f, r = compose_scores(prc, rcl, os)
        assert f == pytest.approx(f_pub, abs=2e-3)
        assert r == pytest.approx(r_pub, abs=2e-3)

    def test_perfect(self):
        assert compose_scores(1.0, 1.0, 0.0) == (1.0, 1.0)

    def test_zero_rates(self):
        f, r = compose_scores(0.0, 0.0, -1.0)
        assert f == 0.0
        assert r == pytest.approx(1 - math.sqrt(2) / 2)


class TestMetricsFromCounts:
    def test_all_perfect(self):
        r = metrics_from_counts(MatchCounts(10, 10, 10))
        assert (r.prc, r.rcl, r.f_value, r.os, r.r_value) == (1, 1, 1, 0, 1)

    def test_nothing_detected(self):
        r = metrics_from_counts(MatchCounts(0, 0, 10))
        assert r.prc == 0 and r.rcl == 0 and r.f_value == 0
        assert r.os == -1.0
        assert r.r1 == pytest.approx(math.sqrt(2))
        assert r.r2 == 0.0
        assert r.r_value == pytest.approx(0.2928932)

    def test_hand_derived_case(self):
        # independently evaluated: prc=.5 rcl=.75 os=.5 f=.6
        # r1=sqrt(.0625+.25)=.5590170 r2=-.75/sqrt(2)=-.5303301 r=.4553264
        r = metrics_from_counts(MatchCounts(3, 6, 4))
        assert r.prc == 0.5 and r.rcl == 0.75 and r.os == 0.5
        assert r.f_value == pytest.approx(0.6)
        assert r.r1 == pytest.approx(0.5590170)
        assert r.r2 == pytest.approx(-0.5303301)
        assert r.r_value == pytest.approx(0.4553264)

    def test_equal_counts_zero_os(self):
        r = metrics_from_counts(MatchCounts(2, 7, 7))
        assert r.os == 0.0

    def test_zero_reference_rejected(self):
        with pytest.raises(ValueError, match="n_ref"):
            metrics_from_counts(MatchCounts(0, 3, 0))

    def test_r_is_one_iff_perfect(self):
        rng = np.random.default_rng(17)
        for _ in range(200):
            n_ref = int(rng.integers(1, 30))
            n_f = int(rng.integers(0, 30))
            n_hit = int(rng.integers(0, min(n_f, n_ref) + 1))
            r = metrics_from_counts(MatchCounts(n_hit, n_f, n_ref))
            if r.rcl == 1.0 and r.os == 0.0:
                assert r.r_value == 1.0
            else:
                assert r.r_value < 1.0


class TestEvaluateCorpus:
    def test_two_perfect_utterances(self):
        preds = {"a": bl(0.1, 0.5, utt="a"), "b": bl(0.2, utt="b")}
        report = evaluate_corpus(preds, preds, 0.04)
        assert report.r_value == 1.0

    def test_micro_pooling(self):
        preds = {"a": bl(0.1, utt="a"), "b": bl(1.0, utt="b")}
        refs = {"a": bl(0.1, 5.0, utt="a"), "b": bl(1.0, 9.0, utt="b")}
        report = evaluate_corpus(preds, refs, 0.04)
        assert (report.counts.n_hit, report.counts.n_f, report.counts.n_ref) == (2, 2, 4)
        assert report.prc == 1.0 and report.rcl == 0.5

    def test_single_utterance_equals_per_utterance(self):
        pred = {"a": bl(0.1, 0.3, utt="a")}
        ref = {"a": bl(0.12, 0.9, utt="a")}
        corpus_report = evaluate_corpus(pred, ref, 0.04)
        counts = match_boundaries(pred["a"], ref["a"], 0.04)
        solo = metrics_from_counts(counts, 0.04)
        assert corpus_report == solo

    def test_mismatched_keys(self):
        with pytest.raises(InputError, match="utterance sets differ"):
            evaluate_corpus({"a": bl(0.1)}, {"b": bl(0.1)}, 0.04)

    def test_macro_aggregate(self):
        preds = {"a": bl(0.1, utt="a"), "b": bl(1.0, 2.0, utt="b")}
        refs = {"a": bl(0.1, utt="a"), "b": bl(5.0, utt="b")}
        micro = evaluate_corpus(preds, refs, 0.04, aggregate="micro")
        macro = evaluate_corpus(preds, refs, 0.04, aggregate="macro")
        assert macro.prc == pytest.approx(0.5)   # mean of 1.0 and 0.0
        assert macro.rcl == pytest.approx(0.5)
        assert micro.prc == pytest.approx(1 / 3)


class TestReportFormat:
    def test_key_value_lines(self):
        r = metrics_from_counts(MatchCounts(3, 6, 4), tolerance_s=0.04)
        text = format_report(r)
        lines = text.splitlines()
        assert lines[0] == "n_hit=3"
        assert "prc=0.500000" in lines
        assert "r_value=0.455326" in lines
        assert lines[-1] == "tolerance_s=0.040000"

    def test_csv_row_matches_text(self):
        r = metrics_from_counts(MatchCounts(3, 6, 4), tolerance_s=0.04)
        row = report_csv_row(r)
        assert row.split(",")[0] == "3"
        assert "0.455326" in row
