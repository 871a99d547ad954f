"""Explanation-set ablations: cumulative groups, randomization, combination."""

from __future__ import annotations

from pathlib import Path

import pytest

from exprep import (
    AblationPlan,
    ConfigError,
    DataError,
    Explanation,
    combine_orig_random,
    cumulative_groups,
    load_explanations,
    randomize_explanations,
    training_vocabulary,
)
from helpers import tiny_dataset, tiny_explanations

DATA_DIR = Path(__file__).resolve().parents[1] / "data"

VOCAB = ["alpha", "beta", "gamma", "delta", "epsilon"]


def spouse_explanations() -> list[Explanation]:
    return load_explanations(DATA_DIR / "spouse" / "explanations.jsonl")


class TestCumulativeGroups:
    def test_spouse_subset_sizes(self):
        explanations = spouse_explanations()
        order = ("Married", "Children", "Engaged", "Negatives", "Misc")
        subsets = cumulative_groups(explanations, order)
        assert [len(s) for s in subsets] == [0, 10, 15, 18, 31, 40]

    def test_first_subset_is_empty_baseline(self):
        subsets = cumulative_groups(tiny_explanations(), ("positive",))
        assert subsets[0] == []

    def test_subsets_are_nested(self):
        explanations = spouse_explanations()
        order = ("Married", "Children", "Engaged", "Negatives", "Misc")
        subsets = cumulative_groups(explanations, order)
        for smaller, larger in zip(subsets, subsets[1:]):
            ids = {exp.id for exp in larger}
            assert all(exp.id in ids for exp in smaller)

    def test_file_order_preserved_within_subsets(self):
        explanations = spouse_explanations()
        positions = {exp.id: i for i, exp in enumerate(explanations)}
        order = ("Negatives", "Married", "Misc", "Children", "Engaged")
        for subset in cumulative_groups(explanations, order):
            indices = [positions[exp.id] for exp in subset]
            assert indices == sorted(indices)

    def test_full_order_recovers_whole_set(self):
        explanations = spouse_explanations()
        order = ("Married", "Children", "Engaged", "Negatives", "Misc")
        subsets = cumulative_groups(explanations, order)
        assert subsets[-1] == explanations

    def test_unknown_group_rejected(self):
        with pytest.raises(DataError, match="Typos"):
            cumulative_groups(tiny_explanations(), ("Typos",))

    def test_duplicate_group_rejected(self):
        with pytest.raises(DataError, match="duplicate"):
            cumulative_groups(tiny_explanations(), ("positive", "positive"))


class TestRandomizeExplanations:
    def test_structure_survives_over_many_seeds(self):
        originals = spouse_explanations()
        for seed in range(100):
            randomized = randomize_explanations(originals, VOCAB, seed)
            assert len(randomized) == len(originals)
            for orig, rand in zip(originals, randomized):
                assert rand.id == orig.id
                assert rand.group == orig.group
                orig_tokens = orig.template.split()
                rand_tokens = rand.template.split()
                assert len(rand_tokens) == len(orig_tokens)
                for o_tok, r_tok in zip(orig_tokens, rand_tokens):
                    if "{o1}" in o_tok or "{o2}" in o_tok:
                        assert r_tok == o_tok
                    else:
                        assert r_tok in VOCAB

    def test_same_seed_reproduces(self):
        originals = tiny_explanations()
        a = randomize_explanations(originals, VOCAB, 7)
        b = randomize_explanations(originals, VOCAB, 7)
        assert a == b

    def test_different_seeds_differ(self):
        originals = spouse_explanations()
        a = randomize_explanations(originals, VOCAB, 0)
        b = randomize_explanations(originals, VOCAB, 1)
        assert a != b

    def test_content_words_actually_replaced(self):
        original = [Explanation(id="e", template="{o1} is married to {o2}",
                                group="g")]
        randomized = randomize_explanations(original, ["zzz"], 0)[0]
        assert randomized.template == "{o1} zzz zzz zzz {o2}"

    def test_empty_vocabulary_rejected(self):
        with pytest.raises(DataError, match="empty"):
            randomize_explanations(tiny_explanations(), [], 0)


class TestCombineOrigRandom:
    def test_spouse_plus_ten(self):
        originals = spouse_explanations()
        combined = combine_orig_random(originals, 10, VOCAB, seed=0)
        assert len(combined) == 50
        assert combined[:40] == originals
        tail = combined[40:]
        assert [exp.id for exp in tail] == [f"random-{i}" for i in range(10)]
        assert all(exp.group == "random" for exp in tail)

    def test_appended_items_mirror_cyclic_base_structure(self):
        originals = tiny_explanations()  # three explanations
        combined = combine_orig_random(originals, 5, VOCAB, seed=3)
        tail = combined[len(originals):]
        for i, exp in enumerate(tail):
            base = originals[i % len(originals)]
            assert len(exp.template.split()) == len(base.template.split())

    def test_zero_random_returns_originals(self):
        originals = tiny_explanations()
        assert combine_orig_random(originals, 0, VOCAB, seed=0) == originals

    def test_negative_k_rejected(self):
        with pytest.raises(DataError):
            combine_orig_random(tiny_explanations(), -1, VOCAB, seed=0)

    def test_empty_originals_rejected_when_k_positive(self):
        with pytest.raises(DataError, match="empty"):
            combine_orig_random([], 3, VOCAB, seed=0)


class TestTrainingVocabulary:
    def test_sorted_unique_train_tokens(self):
        dataset = tiny_dataset()
        vocab = training_vocabulary(dataset)
        expected = sorted({t for inst in dataset.train for t in inst.tokens})
        assert vocab == expected
        assert len(vocab) == len(set(vocab))

    def test_ignores_val_and_test_tokens(self):
        dataset = tiny_dataset()
        vocab = set(training_vocabulary(dataset))
        train_tokens = {t for inst in dataset.train for t in inst.tokens}
        assert vocab == train_tokens


class TestAblationPlan:
    def test_valid_plans(self):
        AblationPlan(mode="group_cumulative", group_order=("a",))
        AblationPlan(mode="random_only", k_random=0)
        AblationPlan(mode="orig_plus_random", k_random=10, runs=5)
        AblationPlan(mode="ontology")

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"mode": "everything"},
            {"mode": "group_cumulative"},
            {"mode": "random_only", "runs": 0},
            {"mode": "random_only", "k_random": -1},
            {"mode": "random_only", "vocabulary_source": "wordnet"},
        ],
    )
    def test_invalid_plans_rejected(self, kwargs):
        with pytest.raises(ConfigError):
            AblationPlan(**kwargs)
