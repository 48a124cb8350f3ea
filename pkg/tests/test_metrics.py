"""Evaluation report arithmetic and the paired t-test."""

import math

import numpy as np
import pytest

from eldiff.consensus import Label
from eldiff.learn.metrics import evaluate, paired_t_test, t_critical


class TestEvaluate:
    def test_all_correct(self):
        report = evaluate([0, 1, 2, 0], [0, 1, 2, 0])
        for label in Label:
            metrics = report.per_class[label]
            assert metrics.precision == 1.0 and metrics.recall == 1.0 and metrics.f1 == 1.0
        assert report.macro_f1 == 1.0

    def test_single_class_predictions_flag_undefined(self):
        # classifier predicting only EASY on an all-EASY gold set
        report = evaluate([2, 2, 2], [2, 2, 2])
        easy = report.per_class[Label.EASY]
        assert easy.precision == 1.0 and easy.recall == 1.0
        hard = report.per_class[Label.HARD]
        assert hard.precision is None and hard.recall is None and hard.f1 is None
        assert report.undefined_precisions == 2
        assert report.undefined_recalls == 2

    def test_hand_computed_confusion_matrix(self):
        # gold: 5 HARD, 5 MEDIUM, 10 EASY
        # confusion [[5,0,0],[2,3,0],[0,0,10]] by construction
        predictions = [0] * 5 + [0, 0, 1, 1, 1] + [2] * 10
        gold = [0] * 5 + [1] * 5 + [2] * 10
        report = evaluate(predictions, gold)
        np.testing.assert_array_equal(report.confusion, [[5, 0, 0], [2, 3, 0], [0, 0, 10]])
        assert report.per_class[Label.HARD].precision == pytest.approx(5 / 7)
        assert report.per_class[Label.HARD].recall == 1.0
        assert report.per_class[Label.MEDIUM].precision == 1.0
        assert report.per_class[Label.MEDIUM].recall == pytest.approx(0.6)
        assert report.per_class[Label.EASY].precision == 1.0
        assert report.per_class[Label.EASY].recall == 1.0
        assert report.macro_precision == pytest.approx((5 / 7 + 1 + 1) / 3)

    def test_micro_accuracy_is_trace_over_total(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            n = int(rng.integers(5, 50))
            predictions = rng.integers(0, 3, size=n)
            gold = rng.integers(0, 3, size=n)
            report = evaluate(predictions, gold)
            assert report.accuracy() == pytest.approx(float(np.mean(predictions == gold)))
            assert report.confusion.sum() == n

    def test_accepts_label_enums(self):
        report = evaluate([Label.HARD, Label.EASY], [Label.HARD, Label.EASY])
        assert report.accuracy() == 1.0

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            evaluate([0, 1], [0])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            evaluate([], [])

    def test_macro_defined_only_variant(self):
        report = evaluate([2, 2, 2], [2, 2, 2])
        assert report.macro_precision == pytest.approx(1 / 3)  # undefined counted as 0
        assert report.defined_macro_precision == 1.0

    def test_f1_zero_when_precision_and_recall_zero(self):
        # HARD predicted but never correct; HARD gold exists
        report = evaluate([0, 2], [2, 0])
        hard = report.per_class[Label.HARD]
        assert hard.precision == 0.0 and hard.recall == 0.0 and hard.f1 == 0.0


class TestPairedTTest:
    def test_identical_scores_degenerate(self):
        result = paired_t_test([0.5, 0.6, 0.7], [0.5, 0.6, 0.7])
        assert result.degenerate and not result.significant

    def test_constant_differences_degenerate(self):
        result = paired_t_test([1, 2, 3, 4, 5], [0, 1, 2, 3, 4])
        assert result.degenerate and not result.significant
        assert math.isnan(result.t)

    def test_hand_computed_example(self):
        # d = (1, 2, 3): mean 2, sd 1, t = 2 / (1/sqrt(3)) = 2*sqrt(3)
        result = paired_t_test([1.0, 2.0, 3.0], [0.0, 0.0, 0.0])
        assert result.t == pytest.approx(2 * math.sqrt(3))
        assert result.critical == 4.303  # df=2, alpha=.05
        assert not result.significant

    def test_clearly_significant(self):
        a = [0.9, 0.91, 0.89, 0.92, 0.9]
        b = [0.5, 0.52, 0.49, 0.51, 0.5]
        result = paired_t_test(a, b)
        assert result.significant and result.t > 0

    def test_symmetry_in_sign(self):
        a = [0.9, 0.8, 0.95, 0.85]
        b = [0.5, 0.55, 0.5, 0.45]
        forward = paired_t_test(a, b)
        backward = paired_t_test(b, a)
        assert forward.t == pytest.approx(-backward.t)
        assert forward.significant == backward.significant

    def test_alpha_one_percent_table(self):
        assert t_critical(2, 0.01) == 9.925
        assert t_critical(9, 0.05) == 2.262

    def test_large_df_uses_conservative_entry(self):
        assert t_critical(45, 0.05) == 2.021  # df 40 entry
        assert t_critical(1000, 0.05) == 1.980  # df 120 entry

    def test_unsupported_alpha_rejected(self):
        with pytest.raises(ValueError):
            paired_t_test([1.0, 2.0], [0.0, 0.0], alpha=0.1)

    def test_too_short_rejected(self):
        with pytest.raises(ValueError):
            paired_t_test([1.0], [0.0])
