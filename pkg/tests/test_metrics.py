from __future__ import annotations

import math

import pytest

from dl_oracle import all_sequences, edit_ball, oracle_distance
from ppmbench.errors import PpmBenchError
from ppmbench.metrics import (
    accuracy,
    balanced_accuracy,
    bleu,
    build_report,
    dl_distance,
    dl_similarity,
    f1_macro,
    jaccard,
    regression_errors,
)


class TestAccuracy:
    def test_all_correct(self):
        assert accuracy([1, 2, 3], [1, 2, 3]) == 1.0

    def test_all_wrong(self):
        assert accuracy([1, 1], [2, 3]) == 0.0

    def test_hand_count(self):
        assert accuracy(["A", "A", "A", "A"], ["A", "A", "A", "B"]) == 0.75

    def test_errors(self):
        with pytest.raises(PpmBenchError):
            accuracy([1], [1, 2])
        with pytest.raises(PpmBenchError):
            accuracy([], [])


class TestBalancedAccuracy:
    def test_imbalanced_hand_value(self):
        preds, targets = ["A", "A", "A", "A"], ["A", "A", "A", "B"]
        # Recalls: A -> 1.0, B -> 0.0.
        assert balanced_accuracy(preds, targets) == 0.5
        assert accuracy(preds, targets) == 0.75

    def test_fixed_k_counts_absent_classes(self):
        preds, targets = ["A", "A", "A", "A"], ["A", "A", "A", "B"]
        assert balanced_accuracy(preds, targets, num_classes=4) == 0.25

    def test_perfect_in_both_modes(self):
        preds = targets = ["A", "B", "C"]
        assert balanced_accuracy(preds, targets) == 1.0
        assert balanced_accuracy(preds, targets, num_classes=3) == 1.0

    def test_fixed_k_too_small(self):
        with pytest.raises(PpmBenchError):
            balanced_accuracy(["A", "B"], ["B", "C"], num_classes=2)

    def test_equals_accuracy_on_uniform_symmetric_case(self):
        # Uniform targets, class-symmetric confusion.
        targets = ["A", "A", "B", "B"]
        preds = ["A", "B", "B", "A"]
        assert balanced_accuracy(preds, targets) == accuracy(preds, targets) == 0.5

    def test_never_exceeds_one(self):
        for preds, targets in [(["A"], ["A"]), (["A", "B", "B"], ["B", "B", "A"])]:
            assert balanced_accuracy(preds, targets) <= 1.0


class TestF1Macro:
    def test_perfect(self):
        assert f1_macro(["A", "B"], ["A", "B"]) == 1.0

    def test_no_true_positive(self):
        assert f1_macro(["B", "A"], ["A", "B"]) == 0.0

    def test_hand_confusion_matrix(self):
        # targets AAB, preds ABB: P_A=1, R_A=1/2 -> 2/3; P_B=1/2, R_B=1 -> 2/3.
        assert f1_macro(["A", "B", "B"], ["A", "A", "B"]) == pytest.approx(2 / 3)


class TestRegressionErrors:
    def test_zero_on_equal(self):
        assert regression_errors([1.0, 2.0], [1.0, 2.0]) == {"mae": 0.0, "mse": 0.0, "rmse": 0.0}

    def test_hand_values(self):
        out = regression_errors([1.0, 1.0], [0.0, 2.0])
        assert out == {"mae": 1.0, "mse": 1.0, "rmse": 1.0}

    def test_absolute_error_hides_sign(self):
        assert regression_errors([-1.0], [0.0])["mae"] == 1.0


class TestDLDistance:
    def test_identity(self):
        assert dl_distance(("A", "B", "C"), ("A", "B", "C")) == 0

    def test_insertions_from_empty(self):
        assert dl_distance((), ("A", "B")) == 2

    def test_transposition(self):
        assert dl_distance(("A", "B"), ("B", "A")) == 1

    def test_deletion(self):
        assert dl_distance(("A", "B", "C"), ("A", "C")) == 1

    def test_unrestricted_not_osa(self):
        # OSA would report 3 here; the unrestricted distance is 2.
        assert dl_distance(("C", "A"), ("A", "B", "C")) == 2

    def test_exhaustive_against_edit_script_search_len3(self):
        alphabet = (0, 1, 2)
        seqs = all_sequences(alphabet, 3)
        balls = {s: edit_ball(s, 2, alphabet) for s in seqs}
        for a in seqs:
            for b in seqs:
                assert dl_distance(a, b) == oracle_distance(balls[a], balls[b])

    def test_symmetry_and_upper_bound(self):
        seqs = all_sequences((0, 1), 4)
        for a in seqs:
            for b in seqs:
                d = dl_distance(a, b)
                assert d == dl_distance(b, a)
                assert d <= max(len(a), len(b))

    def test_triangle_inequality_small(self):
        seqs = all_sequences((0, 1), 3)
        dist = {(a, b): dl_distance(a, b) for a in seqs for b in seqs}
        for a in seqs:
            for b in seqs:
                for c in seqs:
                    assert dist[a, c] <= dist[a, b] + dist[b, c]


class TestDLSimilarity:
    def test_identical(self):
        assert dl_similarity(("A", "B"), ("A", "B")) == 1.0

    def test_hand_value(self):
        assert dl_similarity(("A", "B", "C"), ("A", "C", "B")) == pytest.approx(1 - 1 / 3)

    def test_both_empty_convention(self):
        assert dl_similarity((), ()) == 1.0

    def test_bounds_and_equality_condition(self):
        seqs = all_sequences((0, 1, 2), 3)
        for a in seqs:
            for b in seqs:
                sim = dl_similarity(a, b)
                assert 0.0 <= sim <= 1.0
                assert (sim == 1.0) == (a == b)


class TestBleu:
    def test_perfect_long_candidate(self):
        seq = ("A", "B", "C", "D", "E")
        assert bleu(seq, seq) == pytest.approx(1.0)

    def test_brevity_penalty_hand_value(self):
        # candidate (A,B) vs reference (A,B,C): p1 = p2 = 1, BP = exp(1 - 3/2).
        assert bleu(("A", "B"), ("A", "B", "C")) == pytest.approx(math.exp(-0.5), abs=1e-4)
        assert bleu(("A", "B"), ("A", "B", "C")) == pytest.approx(0.6065, abs=1e-4)

    def test_disjoint_unigrams(self):
        assert bleu(("A", "B"), ("C", "D")) == 0.0

    def test_empty_candidate(self):
        assert bleu((), ("A",)) == 0.0

    def test_both_empty(self):
        assert bleu((), ()) == 1.0

    def test_monotone_under_corruption(self):
        reference = ("A", "B", "C", "D")
        intact = bleu(("A", "B", "C", "D"), reference)
        corrupted = bleu(("A", "B", "Z", "D"), reference)
        assert corrupted <= intact

    def test_renaming_invariance(self):
        mapping = {"A": 10, "B": 20, "C": 30}
        cand, ref = ("A", "B"), ("A", "B", "C")
        renamed = bleu(tuple(mapping[t] for t in cand), tuple(mapping[t] for t in ref))
        assert renamed == pytest.approx(bleu(cand, ref))


class TestJaccard:
    def test_identical(self):
        assert jaccard(("A", "B"), ("B", "A")) == 1.0

    def test_disjoint(self):
        assert jaccard(("A",), ("B",)) == 0.0

    def test_hand_value(self):
        assert jaccard(("A", "B", "C"), ("B", "C", "D")) == 0.5

    def test_both_empty(self):
        assert jaccard((), ()) == 1.0


def test_sequence_metrics_invariant_under_id_permutation():
    perm = {0: 7, 1: 5, 2: 9, 3: 0}
    a, b = (0, 1, 2), (1, 2, 3)
    pa, pb = tuple(perm[t] for t in a), tuple(perm[t] for t in b)
    assert dl_similarity(a, b) == dl_similarity(pa, pb)
    assert bleu(a, b) == pytest.approx(bleu(pa, pb))
    assert jaccard(a, b) == jaccard(pa, pb)


class TestBuildReport:
    def test_weighted_vs_unweighted_hand_value(self):
        samples = [(1, {"accuracy": 1.0})] * 90 + [(1, {"accuracy": 0.0})] * 10
        samples += [(5, {"accuracy": 1.0})] * 5 + [(5, {"accuracy": 0.0})] * 5
        report = build_report(samples)
        assert report.aggregate_unweighted["accuracy"] == pytest.approx(0.7)
        assert report.aggregate_weighted["accuracy"] == pytest.approx(0.8636, abs=1e-4)
        assert [row.k for row in report.per_k] == [1, 5]
        assert report.per_k[0].values["accuracy"] == pytest.approx(0.9)
        assert report.per_k[0].n_samples == 100

    def test_single_group_aggregates_match(self):
        report = build_report([(2, {"mae": 1.0}), (2, {"mae": 3.0})])
        assert report.aggregate_unweighted == report.aggregate_weighted

    def test_weighted_equals_pooled_for_decomposable(self):
        samples = [(k, {"accuracy": float(i % 2)}) for k in (1, 2, 3) for i in range(k * 3)]
        report = build_report(samples)
        assert report.aggregate_weighted["accuracy"] == pytest.approx(
            report.global_values["accuracy"], abs=1e-9
        )

    def test_empty_errors(self):
        with pytest.raises(PpmBenchError):
            build_report([])
