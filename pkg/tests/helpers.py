"""Shared factories for the test suite."""

from __future__ import annotations

import numpy as np

from exprep import Dataset, Explanation, Instance, Label, LabelSpace


def make_instance(
    id: str = "inst-0",
    sentence: str = "Alice Smith married Bob Jones in 1990",
    span1: tuple[int, int] = (0, 1),
    span2: tuple[int, int] = (3, 4),
    gold: int | None = 1,
) -> Instance:
    return Instance(id=id, tokens=tuple(sentence.split()), span1=span1, span2=span2, gold=gold)


def binary_label_space() -> LabelSpace:
    return LabelSpace(
        labels=(
            Label(name="no_relation", description="{o1} and {o2} are unrelated people"),
            Label(name="spouse", description="{o1} is married to {o2}"),
        ),
        no_relation_index=0,
    )


def tiny_dataset(n_train: int = 8, n_val: int = 4, n_test: int = 4) -> Dataset:
    """A minimal deterministic dataset with distinct entity pairs per instance."""
    space = binary_label_space()
    firsts = ["Ann", "Ben", "Cara", "Dan", "Eve", "Finn", "Gina", "Hal",
              "Iris", "Jon", "Kay", "Liam", "Mona", "Ned", "Opal", "Pete"]

    def build(prefix: str, count: int, start: int) -> tuple[Instance, ...]:
        out = []
        for i in range(count):
            a = firsts[(start + 2 * i) % len(firsts)]
            b = firsts[(start + 2 * i + 1) % len(firsts)]
            verb = "married" if i % 2 else "met"
            sentence = f"{a} Stone {verb} {b} Reed yesterday"
            out.append(
                Instance(
                    id=f"{prefix}-{i}",
                    tokens=tuple(sentence.split()),
                    span1=(0, 1),
                    span2=(3, 4),
                    gold=i % 2,
                )
            )
        return tuple(out)

    return Dataset(
        name="tiny",
        train=build("tr", n_train, 0),
        val=build("va", n_val, 3),
        test=build("te", n_test, 6),
        label_space=space,
    )


def tiny_explanations() -> list[Explanation]:
    return [
        Explanation(id="wed-a", template="{o1} and {o2} are married", group="positive"),
        Explanation(id="wed-b", template="{o1} is the spouse of {o2}", group="positive"),
        Explanation(id="neg-a", template="{o1} has never met {o2}", group="negative"),
    ]


def random_labels(rng: np.random.Generator, n: int, n_classes: int) -> np.ndarray:
    return rng.integers(0, n_classes, size=n)
