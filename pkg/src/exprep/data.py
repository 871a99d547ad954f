"""Domain types and ingestion for relation-extraction corpora.

A corpus lives in a directory with one file per split (``train``, ``val``,
``test``) plus a ``labels.jsonl`` file describing the label space. Two split
formats are supported:

* ``jsonl`` -- one record per line:
  ``{"id", "tokens": [...], "span1": [a, b], "span2": [c, d], "label": name-or-null}``
* ``tsv`` -- a header row ``id  tokens  span1_start  span1_end  span2_start
  span2_end  label`` followed by one row per instance, tokens space-joined.

Spans are inclusive token-index intervals. Datasets are immutable after
loading and safe for concurrent reads.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import DataError

SPLIT_NAMES = ("train", "val", "test")
NO_RELATION_NAME = "no_relation"

_TSV_HEADER = ["id", "tokens", "span1_start", "span1_end", "span2_start", "span2_end", "label"]
_PLACEHOLDER_RE = re.compile(r"\{([^{}]*)\}")
_VALID_PLACEHOLDERS = ("o1", "o2")


@dataclass(frozen=True)
class Instance:
    """One sentence with two entity spans and an optional gold label id."""

    id: str
    tokens: tuple[str, ...]
    span1: tuple[int, int]
    span2: tuple[int, int]
    gold: int | None = None


@dataclass(frozen=True)
class Label:
    name: str
    description: str


@dataclass(frozen=True)
class LabelSpace:
    """Ordered labels; the label id of ``labels[i]`` is ``i``."""

    labels: tuple[Label, ...]
    no_relation_index: int | None = None

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(label.name for label in self.labels)

    def index_of(self, name: str) -> int:
        for i, label in enumerate(self.labels):
            if label.name == name:
                return i
        raise KeyError(name)


@dataclass(frozen=True)
class Explanation:
    """A global natural-language template with {o1}/{o2} placeholders."""

    id: str
    template: str
    group: str


@dataclass(frozen=True)
class Dataset:
    name: str
    train: tuple[Instance, ...]
    val: tuple[Instance, ...]
    test: tuple[Instance, ...]
    label_space: LabelSpace

    def split(self, name: str) -> tuple[Instance, ...]:
        if name not in SPLIT_NAMES:
            raise KeyError(name)
        return getattr(self, name)

    def splits(self) -> dict[str, tuple[Instance, ...]]:
        return {name: getattr(self, name) for name in SPLIT_NAMES}


def validate_template(template: str, where: str) -> None:
    """Reject empty templates and brace groups other than {o1}/{o2}."""
    if not template:
        raise DataError(f"{where}: empty template")
    for match in _PLACEHOLDER_RE.finditer(template):
        if match.group(1) not in _VALID_PLACEHOLDERS:
            raise DataError(f"{where}: malformed placeholder {{{match.group(1)}}}")


def _check_instance(inst: Instance, where: str) -> None:
    n = len(inst.tokens)
    if not inst.id:
        raise DataError(f"{where}: empty instance id")
    for field_name, (a, b) in (("span1", inst.span1), ("span2", inst.span2)):
        if a > b:
            raise DataError(f"{where}: {field_name} is empty ({a} > {b})")
        if a < 0 or b >= n:
            raise DataError(f"{where}: {field_name} [{a}, {b}] out of bounds for {n} tokens")
    if inst.span1 == inst.span2:
        raise DataError(f"{where}: span1 and span2 are the identical interval")


def _parse_span(value: object, where: str, field_name: str) -> tuple[int, int]:
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or not all(isinstance(v, int) and not isinstance(v, bool) for v in value)
    ):
        raise DataError(f"{where}: {field_name} must be a pair of token indices")
    return (value[0], value[1])


def instance_from_record(record: dict, label_space: LabelSpace, where: str) -> Instance:
    if not isinstance(record, dict):
        raise DataError(f"{where}: expected an object")
    unknown = set(record) - {"id", "tokens", "span1", "span2", "label"}
    if unknown:
        raise DataError(f"{where}: unknown keys {sorted(unknown)}")
    for key in ("id", "tokens", "span1", "span2"):
        if key not in record:
            raise DataError(f"{where}: missing key '{key}'")
    tokens = record["tokens"]
    if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):
        raise DataError(f"{where}: tokens must be a list of strings")
    label_name = record.get("label")
    gold: int | None = None
    if label_name is not None:
        if not isinstance(label_name, str):
            raise DataError(f"{where}: label must be a string or null")
        try:
            gold = label_space.index_of(label_name)
        except KeyError:
            raise DataError(f"{where}: unknown label name '{label_name}'") from None
    inst = Instance(
        id=str(record["id"]),
        tokens=tuple(tokens),
        span1=_parse_span(record["span1"], where, "span1"),
        span2=_parse_span(record["span2"], where, "span2"),
        gold=gold,
    )
    _check_instance(inst, where)
    return inst


def instance_to_record(inst: Instance, label_space: LabelSpace) -> dict:
    return {
        "id": inst.id,
        "tokens": list(inst.tokens),
        "span1": list(inst.span1),
        "span2": list(inst.span2),
        "label": None if inst.gold is None else label_space.labels[inst.gold].name,
    }


def _read_jsonl(path: Path) -> list[tuple[int, dict]]:
    if not path.exists():
        raise DataError(f"missing file: {path}")
    rows: list[tuple[int, dict]] = []
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append((line_no, json.loads(line)))
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{line_no}: invalid JSON ({exc.msg})") from None
    return rows


def load_label_space(path: Path) -> LabelSpace:
    labels: list[Label] = []
    for line_no, record in _read_jsonl(path):
        where = f"{path}:{line_no}"
        if not isinstance(record, dict) or set(record) != {"name", "description"}:
            raise DataError(f"{where}: label record must have exactly 'name' and 'description'")
        name, description = record["name"], record["description"]
        if not isinstance(name, str) or not name:
            raise DataError(f"{where}: label name must be a non-empty string")
        if not isinstance(description, str) or not description:
            raise DataError(f"{where}: label '{name}' has an empty description")
        validate_template(description, where)
        if any(label.name == name for label in labels):
            raise DataError(f"{where}: duplicate label name '{name}'")
        labels.append(Label(name=name, description=description))
    names = [label.name for label in labels]
    no_rel = names.index(NO_RELATION_NAME) if NO_RELATION_NAME in names else None
    return LabelSpace(labels=tuple(labels), no_relation_index=no_rel)


def _load_split_jsonl(path: Path, label_space: LabelSpace) -> list[Instance]:
    return [
        instance_from_record(record, label_space, f"{path}:{line_no}")
        for line_no, record in _read_jsonl(path)
    ]


def _load_split_tsv(path: Path, label_space: LabelSpace) -> list[Instance]:
    if not path.exists():
        raise DataError(f"missing file: {path}")
    instances: list[Instance] = []
    with path.open(encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        return instances
    if lines[0].split("\t") != _TSV_HEADER:
        expected = "\t".join(_TSV_HEADER)
        raise DataError(f"{path}:1: expected header {expected!r}")
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        where = f"{path}:{line_no}"
        cols = line.split("\t")
        if len(cols) != len(_TSV_HEADER):
            raise DataError(f"{where}: expected {len(_TSV_HEADER)} columns, got {len(cols)}")
        try:
            spans = [int(cols[i]) for i in (2, 3, 4, 5)]
        except ValueError:
            raise DataError(f"{where}: span columns must be integers") from None
        record = {
            "id": cols[0],
            "tokens": cols[1].split(" ") if cols[1] else [],
            "span1": spans[:2],
            "span2": spans[2:],
            "label": cols[6] or None,
        }
        instances.append(instance_from_record(record, label_space, where))
    return instances


def load_dataset(path: str | Path, format: str = "jsonl") -> Dataset:
    """Load a corpus directory, validating every row.

    Raises DataError with file and line number for malformed rows, out-of-bound
    spans, unknown label names, and ids duplicated within or across splits.
    """
    if format not in ("jsonl", "tsv"):
        raise DataError(f"unknown dataset format '{format}'")
    root = Path(path)
    if not root.is_dir():
        raise DataError(f"missing dataset directory: {root}")
    label_space = load_label_space(root / "labels.jsonl")
    loader = _load_split_jsonl if format == "jsonl" else _load_split_tsv
    splits: dict[str, tuple[Instance, ...]] = {}
    seen: dict[str, str] = {}
    for split_name in SPLIT_NAMES:
        split_path = root / f"{split_name}.{format}"
        instances = loader(split_path, label_space)
        for inst in instances:
            if inst.id in seen:
                raise DataError(
                    f"{split_path}: duplicate instance id '{inst.id}' (also in {seen[inst.id]})"
                )
            seen[inst.id] = split_name
        splits[split_name] = tuple(instances)
    return Dataset(name=root.name, label_space=label_space, **splits)


def save_dataset(dataset: Dataset, path: str | Path, format: str = "jsonl") -> None:
    """Serialize a dataset back to the interchange layout loaded by load_dataset."""
    if format not in ("jsonl", "tsv"):
        raise DataError(f"unknown dataset format '{format}'")
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    with (root / "labels.jsonl").open("w", encoding="utf-8") as fh:
        for label in dataset.label_space.labels:
            fh.write(json.dumps({"name": label.name, "description": label.description},
                                ensure_ascii=False) + "\n")
    for split_name in SPLIT_NAMES:
        out = root / f"{split_name}.{format}"
        with out.open("w", encoding="utf-8") as fh:
            if format == "jsonl":
                for inst in dataset.split(split_name):
                    record = instance_to_record(inst, dataset.label_space)
                    fh.write(json.dumps(record, ensure_ascii=False) + "\n")
            else:
                fh.write("\t".join(_TSV_HEADER) + "\n")
                for inst in dataset.split(split_name):
                    if any(" " in t or "\t" in t for t in inst.tokens):
                        raise DataError(
                            f"instance '{inst.id}': tokens with whitespace cannot round-trip tsv"
                        )
                    label = "" if inst.gold is None else dataset.label_space.labels[inst.gold].name
                    fh.write("\t".join([
                        inst.id, " ".join(inst.tokens),
                        str(inst.span1[0]), str(inst.span1[1]),
                        str(inst.span2[0]), str(inst.span2[1]), label,
                    ]) + "\n")


def load_explanations(path: str | Path) -> list[Explanation]:
    """Load explanation templates, preserving file order.

    File order matters downstream: it fixes the concatenation order of
    explanation feature blocks.
    """
    path = Path(path)
    explanations: list[Explanation] = []
    seen: set[str] = set()
    for line_no, record in _read_jsonl(path):
        where = f"{path}:{line_no}"
        if not isinstance(record, dict) or set(record) != {"id", "template", "group"}:
            raise DataError(f"{where}: explanation record must have exactly id/template/group")
        exp_id, template, group = record["id"], record["template"], record["group"]
        if not isinstance(exp_id, str) or not exp_id:
            raise DataError(f"{where}: explanation id must be a non-empty string")
        if not isinstance(template, str):
            raise DataError(f"{where}: template must be a string")
        if not isinstance(group, str) or not group:
            raise DataError(f"{where}: group must be a non-empty string")
        validate_template(template, where)
        if exp_id in seen:
            raise DataError(f"{where}: duplicate explanation id '{exp_id}'")
        seen.add(exp_id)
        explanations.append(Explanation(id=exp_id, template=template, group=group))
    return explanations


def save_explanations(explanations: list[Explanation], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for exp in explanations:
            fh.write(json.dumps({"id": exp.id, "template": exp.template, "group": exp.group},
                                ensure_ascii=False) + "\n")


def subsample_split(dataset: Dataset, fraction: float, seed: int) -> Dataset:
    """Reduce the training split to floor(fraction * N) seeded-random instances.

    Subsets are nested: for a fixed seed, the subset at a smaller fraction is
    contained in the subset at any larger fraction. Relative train order is
    preserved, so fraction 1.0 returns the dataset unchanged. Val and test are
    never touched.
    """
    if not 0.0 < fraction <= 1.0:
        raise DataError(f"fraction must be in (0, 1], got {fraction}")
    n = len(dataset.train)
    k = int(np.floor(fraction * n))
    order = np.random.default_rng(seed).permutation(n)
    keep = np.sort(order[:k])
    train = tuple(dataset.train[i] for i in keep)
    return replace(dataset, train=train)
