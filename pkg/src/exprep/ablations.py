"""Explanation-set manipulations behind the ablation experiments.

Three transformations: cumulative group subsets for measuring the marginal
value of each explanation group, seeded word randomization for testing how
much explanation *content* matters, and original-plus-random combination.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset, Explanation
from .errors import ConfigError, DataError

ABLATION_MODES = ("group_cumulative", "random_only", "orig_plus_random", "ontology")
RANDOM_GROUP = "random"


@dataclass(frozen=True)
class AblationPlan:
    """Declarative description of one ablation experiment."""

    mode: str
    group_order: tuple[str, ...] = ()
    random_seed: int = 0
    k_random: int = 10
    vocabulary_source: str = "train_tokens"
    runs: int = 1

    def __post_init__(self):
        if self.mode not in ABLATION_MODES:
            raise ConfigError(f"unknown ablation mode '{self.mode}'")
        if self.runs < 1:
            raise ConfigError(f"runs must be >= 1, got {self.runs}")
        if self.mode == "group_cumulative" and not self.group_order:
            raise ConfigError("group_cumulative requires a group order")
        if self.k_random < 0:
            raise ConfigError(f"k_random must be >= 0, got {self.k_random}")
        if self.vocabulary_source != "train_tokens":
            raise ConfigError(
                f"unknown vocabulary source '{self.vocabulary_source}'")


def cumulative_groups(
    explanations: list[Explanation],
    order: list[str] | tuple[str, ...],
) -> list[list[Explanation]]:
    """Nested subsets: empty, then each group added cumulatively.

    Subset k contains every explanation whose group is among the first k
    entries of ``order``, preserving file order within. The leading empty
    subset is the no-explanation baseline row.
    """
    present = {exp.group for exp in explanations}
    seen: set[str] = set()
    for tag in order:
        if tag not in present:
            raise DataError(f"unknown explanation group '{tag}'")
        if tag in seen:
            raise DataError(f"duplicate explanation group '{tag}' in order")
        seen.add(tag)
    subsets: list[list[Explanation]] = [[]]
    allowed: set[str] = set()
    for tag in order:
        allowed.add(tag)
        subsets.append([exp for exp in explanations if exp.group in allowed])
    return subsets


def _randomize_template(template: str, vocabulary: list[str],
                        rng: np.random.Generator) -> str:
    tokens = template.split()
    out = []
    for token in tokens:
        if "{o1}" in token or "{o2}" in token:
            out.append(token)
        else:
            out.append(str(vocabulary[int(rng.integers(0, len(vocabulary)))]))
    return " ".join(out)


def randomize_explanations(
    explanations: list[Explanation],
    vocabulary: list[str],
    seed: int,
) -> list[Explanation]:
    """Replace every non-placeholder word with a seeded vocabulary draw.

    Tokens carrying a placeholder are kept whole, so placeholder count and
    token count survive; ids and group tags are preserved.
    """
    if not vocabulary:
        raise DataError("randomization vocabulary is empty")
    rng = np.random.default_rng(seed)
    return [
        Explanation(id=exp.id,
                    template=_randomize_template(exp.template, vocabulary, rng),
                    group=exp.group)
        for exp in explanations
    ]


def combine_orig_random(
    original: list[Explanation],
    k_random: int,
    vocabulary: list[str],
    seed: int,
) -> list[Explanation]:
    """Originals in order, then k randomized explanations appended.

    The appended items reuse the first k originals (cyclically) as
    structural templates, get ids "random-{i}", and carry the group tag
    "random".
    """
    if k_random < 0:
        raise DataError(f"k_random must be >= 0, got {k_random}")
    if k_random == 0:
        return list(original)
    if not original:
        raise DataError("cannot derive random explanations from an empty set")
    bases = [
        Explanation(id=f"random-{i}",
                    template=original[i % len(original)].template,
                    group=RANDOM_GROUP)
        for i in range(k_random)
    ]
    return list(original) + randomize_explanations(bases, vocabulary, seed)


def training_vocabulary(dataset: Dataset) -> list[str]:
    """Sorted unique token set of the training split."""
    vocab = {token for instance in dataset.train for token in instance.tokens}
    if not vocab:
        raise DataError("training split has no tokens")
    return sorted(vocab)
