"""F1 metrics, multi-run aggregation, and the median-run reporting protocol."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from .data import LabelSpace
from .errors import DataError

Metric = Callable[[Sequence[int], Sequence[int]], float]

BINARY_PROTOCOL = "binary-positive-class"
MICRO_PROTOCOL = "micro-excluding-no-relation"


@dataclass(frozen=True)
class ConfusionCounts:
    """Per-label confusion tallies under a named counting protocol."""

    true_positive: dict[int, int]
    false_positive: dict[int, int]
    false_negative: dict[int, int]
    protocol: str
    total: int


def confusion_counts(
    predictions: Sequence[int],
    golds: Sequence[int],
    protocol: str = BINARY_PROTOCOL,
) -> ConfusionCounts:
    if len(predictions) != len(golds):
        raise DataError(
            f"got {len(predictions)} predictions for {len(golds)} gold labels")
    tp: dict[int, int] = {}
    fp: dict[int, int] = {}
    fn: dict[int, int] = {}
    for pred, gold in zip(predictions, golds):
        if pred == gold:
            tp[gold] = tp.get(gold, 0) + 1
        else:
            fp[pred] = fp.get(pred, 0) + 1
            fn[gold] = fn.get(gold, 0) + 1
    return ConfusionCounts(true_positive=tp, false_positive=fp, false_negative=fn,
                           protocol=protocol, total=len(predictions))


def _f1(tp: int, fp: int, fn: int) -> float:
    """F1 from counts; 0 when precision+recall is undefined or zero."""
    if tp == 0:
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2.0 * precision * recall / (precision + recall)


def f1_binary(predictions: Sequence[int], golds: Sequence[int], positive_label: int) -> float:
    """F1 of the positive class. Undefined precision or recall counts as 0."""
    counts = confusion_counts(predictions, golds, BINARY_PROTOCOL)
    return _f1(counts.true_positive.get(positive_label, 0),
               counts.false_positive.get(positive_label, 0),
               counts.false_negative.get(positive_label, 0))


def f1_micro_excluding_no_relation(
    predictions: Sequence[int],
    golds: Sequence[int],
    no_relation_id: int,
) -> float:
    """Micro-averaged F1 where the no-relation class never counts.

    Precision pools over predicted relations, recall over gold relations;
    a correct no-relation prediction contributes to neither.
    """
    if len(predictions) != len(golds):
        raise DataError(
            f"got {len(predictions)} predictions for {len(golds)} gold labels")
    correct = 0
    predicted = 0
    gold_relations = 0
    for pred, gold in zip(predictions, golds):
        if pred != no_relation_id:
            predicted += 1
            if pred == gold:
                correct += 1
        if gold != no_relation_id:
            gold_relations += 1
    if correct == 0:
        return 0.0
    precision = correct / predicted
    recall = correct / gold_relations
    return 2.0 * precision * recall / (precision + recall)


def default_metric(label_space: LabelSpace) -> Metric:
    """Pick the metric the dataset's label structure calls for.

    Two labels with a designated no-relation class get positive-class F1;
    anything larger gets micro F1 excluding no-relation.
    """
    no_rel = label_space.no_relation_index
    if no_rel is None:
        raise DataError("label space has no designated no-relation label")
    if len(label_space.labels) == 2:
        positive = 1 - no_rel
        return lambda preds, golds: f1_binary(preds, golds, positive)
    return lambda preds, golds: f1_micro_excluding_no_relation(preds, golds, no_rel)


@dataclass(frozen=True)
class AggregateResult:
    """Mean and 95% confidence half-width over per-run F1 scores."""

    run_f1s: tuple[float, ...]
    mean: float
    ci_half_width: float
    protocol: str

    def as_record(self, model: str = "", dataset: str = "") -> dict:
        return {
            "model": model,
            "dataset": dataset,
            "mean_f1": self.mean,
            "ci_half_width": self.ci_half_width,
            "runs": list(self.run_f1s),
        }


def aggregate_runs(f1_list: Sequence[float], protocol: str = "ci_runs") -> AggregateResult:
    """Two-sided 95% t-interval over per-run F1s (k-1 degrees of freedom)."""
    k = len(f1_list)
    if k < 2:
        raise DataError(f"aggregation needs at least 2 runs, got {k}")
    runs = tuple(float(f) for f in f1_list)
    mean = float(np.mean(runs))
    sd = float(np.std(runs, ddof=1))
    half_width = float(stats.t.ppf(0.975, k - 1) * sd / math.sqrt(k))
    return AggregateResult(run_f1s=runs, mean=mean, ci_half_width=half_width,
                           protocol=protocol)


def tacred_protocol(runs: Sequence) -> float:
    """Test F1 of the run whose early-stopped validation F1 is the median of 5.

    Accepts any objects carrying early_stopped_val_f1, test_f1, and seed.
    Ordering is by (validation F1, seed), so the selection is invariant to
    the order runs are supplied in and deterministic under validation ties.
    """
    if len(runs) != 5:
        raise DataError(f"median protocol requires exactly 5 runs, got {len(runs)}")
    ranked = sorted(runs, key=lambda r: (r.early_stopped_val_f1, r.seed))
    return float(ranked[2].test_f1)
