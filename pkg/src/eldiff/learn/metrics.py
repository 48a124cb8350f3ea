"""Evaluation metrics and paired significance testing.

Precision of a never-predicted class is undefined, not zero; reports keep
the distinction (rendered as "-") and macro averages count undefined
entries as 0 while recording how many there were. A defined-only macro
variant is reported alongside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ..consensus import CLASS_INDEX, CLASS_ORDER, Label
from .dataset import N_CLASSES


@dataclass(frozen=True)
class ClassMetrics:
    precision: float | None
    recall: float | None
    f1: float | None


@dataclass(frozen=True)
class EvalReport:
    confusion: np.ndarray
    per_class: Mapping[Label, ClassMetrics]
    macro_precision: float
    macro_recall: float
    macro_f1: float
    defined_macro_precision: float | None
    defined_macro_recall: float | None
    defined_macro_f1: float | None
    undefined_precisions: int
    undefined_recalls: int
    undefined_f1s: int

    def accuracy(self) -> float:
        """Micro accuracy: confusion-matrix trace over total."""
        return float(np.trace(self.confusion)) / float(self.confusion.sum())


def _to_codes(values: Sequence) -> np.ndarray:
    codes = np.array(
        [CLASS_INDEX[v] if isinstance(v, Label) else int(v) for v in values],
        dtype=np.int64,
    )
    if codes.size and (codes.min() < 0 or codes.max() >= N_CLASSES):
        raise ValueError("label codes out of range")
    return codes


def _macro(values: list[float | None]) -> tuple[float, float | None, int]:
    as_zero = [0.0 if v is None else v for v in values]
    defined = [v for v in values if v is not None]
    defined_mean = sum(defined) / len(defined) if defined else None
    return sum(as_zero) / len(values), defined_mean, len(values) - len(defined)


def evaluate(predictions: Sequence, gold: Sequence) -> EvalReport:
    """Per-class and macro precision/recall/F1 plus the confusion matrix
    (rows gold, columns predicted, in HARD/MEDIUM/EASY order)."""
    if len(predictions) != len(gold):
        raise ValueError("predictions and gold differ in length")
    if len(gold) == 0:
        raise ValueError("cannot evaluate an empty set")
    pred = _to_codes(predictions)
    true = _to_codes(gold)
    confusion = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    np.add.at(confusion, (true, pred), 1)

    per_class: dict[Label, ClassMetrics] = {}
    precisions: list[float | None] = []
    recalls: list[float | None] = []
    f1s: list[float | None] = []
    for c, label in enumerate(CLASS_ORDER):
        tp = int(confusion[c, c])
        predicted = int(confusion[:, c].sum())
        actual = int(confusion[c, :].sum())
        precision = None if predicted == 0 else tp / predicted
        recall = None if actual == 0 else tp / actual
        if precision is None or recall is None:
            f1 = None
        elif precision + recall == 0:
            f1 = 0.0
        else:
            f1 = 2.0 * precision * recall / (precision + recall)
        per_class[label] = ClassMetrics(precision, recall, f1)
        precisions.append(precision)
        recalls.append(recall)
        f1s.append(f1)

    macro_p, defined_p, undef_p = _macro(precisions)
    macro_r, defined_r, undef_r = _macro(recalls)
    macro_f, defined_f, undef_f = _macro(f1s)
    return EvalReport(
        confusion=confusion,
        per_class=per_class,
        macro_precision=macro_p,
        macro_recall=macro_r,
        macro_f1=macro_f,
        defined_macro_precision=defined_p,
        defined_macro_recall=defined_r,
        defined_macro_f1=defined_f,
        undefined_precisions=undef_p,
        undefined_recalls=undef_r,
        undefined_f1s=undef_f,
    )


# Two-tailed critical values of Student's t. For degrees of freedom beyond
# the table, the value of the largest tabulated df below is used, which is
# conservative (critical values shrink as df grows).
_T_CRITICAL = {
    0.05: {
        1: 12.706, 2: 4.303, 3: 3.182, 4: 2.776, 5: 2.571, 6: 2.447,
        7: 2.365, 8: 2.306, 9: 2.262, 10: 2.228, 11: 2.201, 12: 2.179,
        13: 2.160, 14: 2.145, 15: 2.131, 16: 2.120, 17: 2.110, 18: 2.101,
        19: 2.093, 20: 2.086, 21: 2.080, 22: 2.074, 23: 2.069, 24: 2.064,
        25: 2.060, 26: 2.056, 27: 2.052, 28: 2.048, 29: 2.045, 30: 2.042,
        40: 2.021, 60: 2.000, 120: 1.980,
    },
    0.01: {
        1: 63.657, 2: 9.925, 3: 5.841, 4: 4.604, 5: 4.032, 6: 3.707,
        7: 3.499, 8: 3.355, 9: 3.250, 10: 3.169, 11: 3.106, 12: 3.055,
        13: 3.012, 14: 2.977, 15: 2.947, 16: 2.921, 17: 2.898, 18: 2.878,
        19: 2.861, 20: 2.845, 21: 2.831, 22: 2.819, 23: 2.807, 24: 2.797,
        25: 2.787, 26: 2.779, 27: 2.771, 28: 2.763, 29: 2.756, 30: 2.750,
        40: 2.704, 60: 2.660, 120: 2.617,
    },
}


@dataclass(frozen=True)
class TTestResult:
    t: float
    significant: bool
    degenerate: bool
    df: int
    alpha: float
    critical: float


def t_critical(df: int, alpha: float = 0.05) -> float:
    try:
        table = _T_CRITICAL[alpha]
    except KeyError:
        raise ValueError(f"alpha must be one of {sorted(_T_CRITICAL)}, got {alpha}") from None
    if df < 1:
        raise ValueError("degrees of freedom must be >= 1")
    usable = max(d for d in table if d <= df)
    return table[usable]


def paired_t_test(scores_a: Sequence[float], scores_b: Sequence[float],
                  alpha: float = 0.05) -> TTestResult:
    """Two-tailed paired t-test on per-fold scores.

    Zero-variance differences (including all-zero) are flagged degenerate
    and never reported significant.
    """
    a = np.asarray(scores_a, dtype=np.float64)
    b = np.asarray(scores_b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("score vectors must share the same length")
    k = a.shape[0]
    if k < 2:
        raise ValueError("need at least 2 paired scores")
    diff = a - b
    critical = t_critical(k - 1, alpha)
    sd = float(np.std(diff, ddof=1))
    if sd == 0.0:
        return TTestResult(t=math.nan, significant=False, degenerate=True,
                           df=k - 1, alpha=alpha, critical=critical)
    t = float(np.mean(diff) / (sd / math.sqrt(k)))
    return TTestResult(t=t, significant=abs(t) > critical, degenerate=False,
                       df=k - 1, alpha=alpha, critical=critical)
