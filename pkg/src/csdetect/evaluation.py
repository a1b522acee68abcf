"""Classification metrics, the Friedman rank test, and timing measurement."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput, LengthMismatch

N_CLASSES = 4
CLASS_NAMES = ("None", "Low", "Medium", "High")


def confusion_matrix(y_true, y_pred, n_classes: int = N_CLASSES) -> np.ndarray:
    """Counts[true class][predicted class]."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if len(y_true) != len(y_pred):
        raise LengthMismatch(
            f"{len(y_true)} labels vs {len(y_pred)} predictions"
        )
    if len(y_true) == 0:
        raise LengthMismatch("need at least one prediction")
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (y_true, y_pred), 1)
    return cm


@dataclass
class MetricsReport:
    accuracy: float
    precision: tuple[float, ...]
    recall: tuple[float, ...]
    f1: tuple[float, ...]
    macro_f1: float
    train_time_s: float = math.nan
    inference_ms_per_sample: float = math.nan

    def as_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": list(self.precision),
            "recall": list(self.recall),
            "f1": list(self.f1),
            "macro_f1": self.macro_f1,
            "train_time_s": self.train_time_s,
            "inference_ms_per_sample": self.inference_ms_per_sample,
        }


def classification_metrics(cm: np.ndarray) -> MetricsReport:
    """Per-class precision/recall/F1 plus accuracy and macro-F1.

    Any 0/0 rate is defined as 0 (a class absent from both labels and
    predictions scores zero, matching how empty classes are tabulated).
    """
    cm = np.asarray(cm, dtype=np.float64)
    total = cm.sum()
    if total < 1:
        raise DegenerateInput("empty confusion matrix")
    diag = np.diag(cm)
    col = cm.sum(axis=0)
    row = cm.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        precision = np.where(col > 0, diag / col, 0.0)
        recall = np.where(row > 0, diag / row, 0.0)
        pr = precision + recall
        f1 = np.where(pr > 0, 2 * precision * recall / np.where(pr > 0, pr, 1.0), 0.0)
    return MetricsReport(
        accuracy=float(diag.sum() / total),
        precision=tuple(precision),
        recall=tuple(recall),
        f1=tuple(f1),
        macro_f1=float(f1.mean()),
    )


# ---------------------------------------------------------------------------
# Friedman rank test


def average_ranks(row: np.ndarray, higher_is_better: bool = True) -> np.ndarray:
    """Rank one row of scores, 1 = best, ties receiving average ranks."""
    row = np.asarray(row, dtype=np.float64)
    v = -row if higher_is_better else row
    order = np.argsort(v, kind="stable")
    k = len(row)
    ranks = np.empty(k, dtype=np.float64)
    i = 0
    while i < k:
        j = i
        while j + 1 < k and v[order[j + 1]] == v[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


@dataclass
class FriedmanResult:
    n_blocks: int              # N: folds
    n_treatments: int          # k: models
    rank_matrix: np.ndarray    # (N, k)
    mean_ranks: np.ndarray     # (k,)
    chi2: float
    p_value: float
    dof: int

    def as_dict(self) -> dict:
        return {
            "n_blocks": self.n_blocks,
            "n_treatments": self.n_treatments,
            "rank_matrix": self.rank_matrix.tolist(),
            "mean_ranks": self.mean_ranks.tolist(),
            "chi2": self.chi2,
            "p_value": self.p_value,
            "dof": self.dof,
        }


def friedman_test(scores, higher_is_better: bool = True) -> FriedmanResult:
    """Friedman chi-square over an (N blocks) x (k treatments) score matrix.

    chi2 = 12N / (k (k+1)) * [sum_j mean_rank_j^2 - k (k+1)^2 / 4]
    with the p-value from the chi-square survival function at k-1 dof.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 2:
        raise DegenerateInput("score matrix must be 2-dimensional")
    n, k = scores.shape
    if n < 2 or k < 2:
        raise DegenerateInput(f"need N >= 2 and k >= 2, got {n} x {k}")
    ranks = np.stack([average_ranks(r, higher_is_better) for r in scores])
    mean_ranks = ranks.mean(axis=0)
    chi2 = 12.0 * n / (k * (k + 1)) * (
        float((mean_ranks ** 2).sum()) - k * (k + 1) ** 2 / 4.0
    )
    chi2 = max(chi2, 0.0)
    return FriedmanResult(
        n_blocks=n,
        n_treatments=k,
        rank_matrix=ranks,
        mean_ranks=mean_ranks,
        chi2=chi2,
        p_value=chi2_survival(chi2, k - 1),
        dof=k - 1,
    )


# ---------------------------------------------------------------------------
# Chi-square survival function (regularized upper incomplete gamma)

_MAX_ITER = 600


def _lower_series(a: float, x: float) -> float:
    """P(a, x) by the classic ascending series."""
    term = 1.0 / a
    total = term
    denom = a
    for _ in range(_MAX_ITER):
        denom += 1.0
        term *= x / denom
        total += term
        if abs(term) < abs(total) * 1e-16:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))

def _upper_continued_fraction(a: float, x: float) -> float:
    """Q(a, x) by the Lentz continued fraction; accurate for x > a + 1."""
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def chi2_survival(x: float, dof: int) -> float:
    """P(X >= x) for a chi-square variable with *dof* degrees of freedom."""
    if dof < 1:
        raise DegenerateInput("degrees of freedom must be >= 1")
    if x < 0:
        raise DegenerateInput("chi-square statistic must be >= 0")
    if x == 0.0:
        return 1.0
    a = dof / 2.0
    half_x = x / 2.0
    if half_x < a + 1.0:
        return min(max(1.0 - _lower_series(a, half_x), 0.0), 1.0)
    return min(max(_upper_continued_fraction(a, half_x), 0.0), 1.0)


# ---------------------------------------------------------------------------
# Timing


def measure_timing(
    fit,
    predict,
    test_set,
    repeats: int = 1,
    clock=time.perf_counter,
) -> tuple[float, float]:
    """Median wall-clock fit time and per-sample batch-predict time.

    ``fit`` and ``predict`` are zero-argument closures; ``predict`` must
    evaluate the whole *test_set* batch. The injectable *clock* makes the
    median computation testable with fake readings.
    """
    if repeats < 1:
        raise DegenerateInput("repeats must be >= 1")
    n_test = len(test_set)
    fit_times = []
    predict_times = []
    for _ in range(repeats):
        t0 = clock()
        fit()
        t1 = clock()
        fit_times.append(t1 - t0)
        t0 = clock()
        predict()
        t1 = clock()
        predict_times.append(t1 - t0)
    train_s = float(np.median(fit_times))
    inference_ms = float(np.median(predict_times)) / max(n_test, 1) * 1000.0
    return train_s, inference_ms
