"""Metrics and protocols against independent brute-force oracles."""

from __future__ import annotations

import itertools
import math
from types import SimpleNamespace

import numpy as np
import pytest

from exprep import (
    DataError,
    Label,
    LabelSpace,
    aggregate_runs,
    default_metric,
    f1_binary,
    f1_micro_excluding_no_relation,
    tacred_protocol,
)

from helpers import binary_label_space


def oracle_binary_f1(preds, golds, pos) -> float:
    tp = sum(1 for p, g in zip(preds, golds) if p == pos and g == pos)
    fp = sum(1 for p, g in zip(preds, golds) if p == pos and g != pos)
    fn = sum(1 for p, g in zip(preds, golds) if p != pos and g == pos)
    if tp == 0:
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2.0 * precision * recall / (precision + recall)


def oracle_micro_f1(preds, golds, no_rel) -> float:
    """Set-intersection formulation of micro F1 excluding no-relation."""
    predicted = {(i, p) for i, p in enumerate(preds) if p != no_rel}
    gold = {(i, g) for i, g in enumerate(golds) if g != no_rel}
    correct = predicted & gold
    if not correct:
        return 0.0
    precision = len(correct) / len(predicted)
    recall = len(correct) / len(gold)
    return 2.0 * precision * recall / (precision + recall)


class TestBinaryF1:
    def test_perfect_predictions(self):
        assert f1_binary([1, 0, 1], [1, 0, 1], positive_label=1) == 1.0

    def test_no_true_positives_is_zero(self):
        assert f1_binary([0, 0], [1, 1], positive_label=1) == 0.0
        assert f1_binary([1, 1], [0, 0], positive_label=1) == 0.0
        assert f1_binary([0, 0], [0, 0], positive_label=1) == 0.0

    def test_hand_computed_case(self):
        # tp=2 fp=1 fn=1: precision 2/3, recall 2/3, F1 2/3.
        preds = [1, 1, 1, 0, 0]
        golds = [1, 1, 0, 1, 0]
        assert f1_binary(preds, golds, positive_label=1) == pytest.approx(2 / 3)

    def test_matches_oracle_on_random_trials(self):
        rng = np.random.default_rng(0)
        for _ in range(300):
            n = int(rng.integers(1, 40))
            preds = rng.integers(0, 2, size=n).tolist()
            golds = rng.integers(0, 2, size=n).tolist()
            assert f1_binary(preds, golds, 1) == oracle_binary_f1(preds, golds, 1)

    def test_length_mismatch_rejected(self):
        with pytest.raises(DataError):
            f1_binary([0, 1], [0], positive_label=1)


class TestMicroF1:
    def test_correct_no_relation_contributes_nothing(self):
        # Everything predicted no-relation: no predicted relations, F1 0.
        assert f1_micro_excluding_no_relation([0, 0, 0], [0, 1, 2], no_relation_id=0) == 0.0
        # All no-relation gold and predictions: vacuous, still 0 by convention.
        assert f1_micro_excluding_no_relation([0, 0], [0, 0], no_relation_id=0) == 0.0

    def test_hand_computed_case(self):
        # predicted relations: 3 (two correct); gold relations: 4.
        preds = [1, 2, 0, 2, 0]
        golds = [1, 2, 2, 1, 0]
        f1 = f1_micro_excluding_no_relation(preds, golds, no_relation_id=0)
        precision, recall = 2 / 3, 2 / 4
        assert f1 == pytest.approx(2 * precision * recall / (precision + recall))

    def test_matches_oracle_on_random_trials(self):
        rng = np.random.default_rng(1)
        for _ in range(300):
            n = int(rng.integers(1, 60))
            n_labels = int(rng.integers(2, 8))
            preds = rng.integers(0, n_labels, size=n).tolist()
            golds = rng.integers(0, n_labels, size=n).tolist()
            got = f1_micro_excluding_no_relation(preds, golds, 0)
            assert got == oracle_micro_f1(preds, golds, 0)

    def test_forty_two_label_space(self):
        rng = np.random.default_rng(2)
        preds = rng.integers(0, 42, size=500).tolist()
        golds = rng.integers(0, 42, size=500).tolist()
        got = f1_micro_excluding_no_relation(preds, golds, 0)
        assert got == oracle_micro_f1(preds, golds, 0)

    def test_length_mismatch_rejected(self):
        with pytest.raises(DataError):
            f1_micro_excluding_no_relation([0], [0, 1], no_relation_id=0)


class TestDefaultMetric:
    def test_two_labels_use_positive_class_f1(self):
        metric = default_metric(binary_label_space())  # no_relation at index 0
        preds, golds = [1, 1, 0], [1, 0, 1]
        assert metric(preds, golds) == f1_binary(preds, golds, positive_label=1)

    def test_positive_class_is_complement_of_no_relation(self):
        flipped = LabelSpace(
            labels=(Label("spouse", "married"), Label("no_relation", "none")),
            no_relation_index=1,
        )
        metric = default_metric(flipped)
        preds, golds = [0, 0, 1], [0, 1, 0]
        assert metric(preds, golds) == f1_binary(preds, golds, positive_label=0)

    def test_many_labels_use_micro(self):
        labels = tuple(Label(f"l{i}", f"d{i}") for i in range(5))
        space = LabelSpace(labels=labels, no_relation_index=2)
        metric = default_metric(space)
        rng = np.random.default_rng(3)
        preds = rng.integers(0, 5, size=50).tolist()
        golds = rng.integers(0, 5, size=50).tolist()
        assert metric(preds, golds) == f1_micro_excluding_no_relation(preds, golds, 2)

    def test_missing_no_relation_rejected(self):
        space = LabelSpace(labels=(Label("a", "x"), Label("b", "y")), no_relation_index=None)
        with pytest.raises(DataError, match="no-relation"):
            default_metric(space)


class TestAggregateRuns:
    def test_worked_example(self):
        agg = aggregate_runs([0.60, 0.62, 0.64, 0.66, 0.68])
        assert agg.mean == pytest.approx(0.64, abs=1e-12)
        # 95% two-sided t-interval with 4 degrees of freedom.
        assert agg.ci_half_width == pytest.approx(0.03926486322955125, abs=1e-9)
        assert agg.ci_half_width == pytest.approx(0.0393, abs=1e-3)

    def test_constant_runs_have_zero_width(self):
        agg = aggregate_runs([0.5, 0.5, 0.5])
        assert agg.mean == 0.5
        assert agg.ci_half_width == 0.0

    def test_two_runs_minimum(self):
        with pytest.raises(DataError, match="at least 2"):
            aggregate_runs([0.7])
        agg = aggregate_runs([0.4, 0.6])
        # t(0.975, 1) = 12.706..., sd = sqrt(0.02), width = t * sd / sqrt(2).
        assert agg.mean == pytest.approx(0.5)
        assert agg.ci_half_width == pytest.approx(
            12.706204736432095 * math.sqrt(0.02) / math.sqrt(2), rel=1e-9)

    def test_record_fields(self):
        record = aggregate_runs([0.6, 0.7]).as_record(model="m", dataset="d")
        assert set(record) == {"model", "dataset", "mean_f1", "ci_half_width", "runs"}
        assert record["runs"] == [0.6, 0.7]

    def test_order_invariant(self):
        a = aggregate_runs([0.1, 0.5, 0.9])
        b = aggregate_runs([0.9, 0.1, 0.5])
        assert a.mean == b.mean and a.ci_half_width == pytest.approx(b.ci_half_width)


def run(val: float, test: float, seed: int) -> SimpleNamespace:
    return SimpleNamespace(early_stopped_val_f1=val, test_f1=test, seed=seed)


class TestTacredProtocol:
    def test_median_validation_run_selected(self):
        runs = [run(0.50, 0.11, 0), run(0.60, 0.22, 1), run(0.70, 0.33, 2),
                run(0.80, 0.44, 3), run(0.90, 0.55, 4)]
        assert tacred_protocol(runs) == 0.33

    def test_order_invariant_over_all_permutations(self):
        base = [run(0.52, 0.1, 0), run(0.61, 0.2, 1), run(0.64, 0.3, 2),
                run(0.66, 0.4, 3), run(0.71, 0.5, 4)]
        expected = tacred_protocol(base)
        for perm in itertools.permutations(base):
            assert tacred_protocol(list(perm)) == expected

    def test_validation_ties_broken_by_seed(self):
        runs = [run(0.6, 0.1, 3), run(0.6, 0.2, 1), run(0.6, 0.3, 4),
                run(0.6, 0.4, 0), run(0.6, 0.5, 2)]
        # Sorted by (val, seed): seeds 0,1,2,3,4 -> median is seed 2.
        assert tacred_protocol(runs) == 0.5

    @pytest.mark.parametrize("k", [0, 3, 4, 6])
    def test_exactly_five_runs_required(self, k):
        runs = [run(0.5 + i / 100, 0.5, i) for i in range(k)]
        with pytest.raises(DataError, match="exactly 5"):
            tacred_protocol(runs)
