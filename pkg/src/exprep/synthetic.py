"""Planted-rule synthetic corpus for offline end-to-end checks.

Every sentence is drawn from one of two small pools (3 templates x 4 entity
pairs per class), so the corpus contains at most 24 distinct sentences and
each sentence maps to exactly one label. Under any pure per-sentence
interpreter of dimension >= 24 the distinct sentences become distinct
feature points in general position, hence *some* linear rule classifies them
perfectly; tests verify that by interpolating labels with least squares.
"""

from __future__ import annotations

import numpy as np

from .data import Dataset, Explanation, Instance, Label, LabelSpace

LABELS = LabelSpace(
    labels=(
        Label(name="no_relation", description="{o1} is not the spouse of {o2}"),
        Label(name="spouse", description="{o1} is the spouse of {o2}"),
    ),
    no_relation_index=0,
)

_NEGATIVE_TEMPLATES = (
    ("<A>", "visited", "the", "museum", "with", "<B>"),
    ("<A>", "and", "<B>", "work", "at", "the", "same", "factory"),
    ("<A>", "debated", "<B>", "on", "the", "main", "stage"),
)
_POSITIVE_TEMPLATES = (
    ("<A>", "is", "married", "to", "<B>"),
    ("<A>", "and", "<B>", "celebrated", "their", "wedding", "anniversary"),
    ("<A>", "tied", "the", "knot", "with", "<B>"),
)
_NEGATIVE_PAIRS = (("iris", "jack"), ("kate", "liam"), ("mona", "nate"), ("olga", "pete"))
_POSITIVE_PAIRS = (("alice", "ben"), ("carol", "david"), ("erin", "frank"), ("grace", "henry"))

EXPLANATIONS = (
    Explanation(id="wed-1", template="{o1} is married to {o2}", group="positive"),
    Explanation(id="wed-2", template="{o1} and {o2} had a wedding", group="positive"),
    Explanation(id="neg-1", template="{o1} works with {o2}", group="negative"),
    Explanation(id="neg-2", template="{o1} and {o2} are different people", group="negative"),
)


def _make_instance(split: str, i: int, label: int, template_i: int, pair_i: int) -> Instance:
    if label == 1:
        template = _POSITIVE_TEMPLATES[template_i]
        pair = _POSITIVE_PAIRS[pair_i]
    else:
        template = _NEGATIVE_TEMPLATES[template_i]
        pair = _NEGATIVE_PAIRS[pair_i]
    tokens = tuple(pair[0] if t == "<A>" else pair[1] if t == "<B>" else t
                   for t in template)
    span1 = (template.index("<A>"),) * 2
    span2 = (template.index("<B>"),) * 2
    return Instance(id=f"{split}-{i:04d}", tokens=tokens,
                    span1=span1, span2=span2, gold=label)


def make_planted_corpus(
    n_train: int = 500,
    n_val: int = 200,
    n_test: int = 200,
    seed: int = 0,
) -> tuple[Dataset, list[Explanation]]:
    """Seeded corpus of planted-rule sentences plus matching explanations."""
    rng = np.random.default_rng(seed)
    splits = {}
    for split, n in (("train", n_train), ("val", n_val), ("test", n_test)):
        instances = []
        for i in range(n):
            # Alternate labels so every split is balanced by construction.
            label = i % 2
            template_i = int(rng.integers(0, 3))
            pair_i = int(rng.integers(0, 4))
            instances.append(_make_instance(split, i, label, template_i, pair_i))
        splits[split] = tuple(instances)
    dataset = Dataset(name="planted", train=splits["train"], val=splits["val"],
                      test=splits["test"], label_space=LABELS)
    return dataset, list(EXPLANATIONS)
