"""Experiment configuration: a strict, versioned JSON format.

Unknown keys anywhere in the file are errors, so typos in hyperparameter
names fail loudly instead of silently using defaults. A config object
serializes to a canonical full form and loads back to an equal object.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path

from .ablations import AblationPlan
from .errors import ConfigError
from .interpreters import InterpreterSpec
from .mlp import MlpConfig, enumerate_grid

CONFIG_VERSION = 1
DATASET_FORMATS = ("jsonl", "tsv")
PROTOCOL_KINDS = ("ci_runs", "tacred_median")
TACRED_RUN_COUNT = 5


def _check_keys(record: dict, required: set[str], optional: set[str], where: str) -> None:
    if not isinstance(record, dict):
        raise ConfigError(f"{where}: expected an object")
    unknown = set(record) - required - optional
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    missing = required - set(record)
    if missing:
        raise ConfigError(f"{where}: missing keys {sorted(missing)}")


def interpreter_spec_from_dict(record: dict, where: str) -> InterpreterSpec:
    _check_keys(record, {"kind"},
                {"dim", "seed", "endpoint", "batch_size", "store_path", "dictionary_paths"},
                where)
    kwargs = dict(record)
    if "dictionary_paths" in kwargs:
        kwargs["dictionary_paths"] = tuple(kwargs["dictionary_paths"])
    try:
        return InterpreterSpec(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def interpreter_spec_to_dict(spec: InterpreterSpec) -> dict:
    return {
        "kind": spec.kind,
        "dim": spec.dim,
        "seed": spec.seed,
        "endpoint": spec.endpoint,
        "batch_size": spec.batch_size,
        "store_path": spec.store_path,
        "dictionary_paths": list(spec.dictionary_paths),
    }


@dataclass(frozen=True)
class GridSpec:
    """Classifier hyperparameter axes to search over.

    ``full=True`` enumerates the complete 64-point grid; otherwise the
    cartesian product of the listed axes is used (defaults give one config).
    """

    full: bool = False
    hidden_layers: tuple[int, ...] = (1,)
    hidden_dim: tuple[int, ...] = (64,)
    dropout: tuple[float, ...] = (0.0,)
    project_to_64: tuple[bool, ...] = (False,)
    batch_size: tuple[int, ...] = (32,)
    learning_rate: float = 1e-3
    max_epochs: int = 100
    patience: int | None = 10

    def enumerate(self) -> tuple[MlpConfig, ...]:
        if self.full:
            return enumerate_grid(learning_rate=self.learning_rate,
                                  max_epochs=self.max_epochs, patience=self.patience)
        configs = []
        for hl, hd, dr, proj, bs in itertools.product(
                self.hidden_layers, self.hidden_dim, self.dropout,
                self.project_to_64, self.batch_size):
            configs.append(MlpConfig(
                hidden_layers=hl, hidden_dim=hd, dropout=dr, project_to_64=proj,
                batch_size=bs, learning_rate=self.learning_rate,
                max_epochs=self.max_epochs, patience=self.patience))
        return tuple(configs)

    @staticmethod
    def from_dict(record: dict, where: str) -> GridSpec:
        _check_keys(record, set(),
                    {"full", "hidden_layers", "hidden_dim", "dropout", "project_to_64",
                     "batch_size", "learning_rate", "max_epochs", "patience"},
                    where)
        kwargs = dict(record)
        for axis in ("hidden_layers", "hidden_dim", "dropout", "project_to_64", "batch_size"):
            if axis in kwargs:
                if not isinstance(kwargs[axis], list) or not kwargs[axis]:
                    raise ConfigError(f"{where}: '{axis}' must be a non-empty list")
                kwargs[axis] = tuple(kwargs[axis])
        if "full" in kwargs and not isinstance(kwargs["full"], bool):
            raise ConfigError(f"{where}: 'full' must be a boolean")
        if "learning_rate" in kwargs and (isinstance(kwargs["learning_rate"], bool)
                                          or not isinstance(kwargs["learning_rate"], (int, float))):
            raise ConfigError(f"{where}: 'learning_rate' must be a number")
        if "max_epochs" in kwargs and (isinstance(kwargs["max_epochs"], bool)
                                       or not isinstance(kwargs["max_epochs"], int)):
            raise ConfigError(f"{where}: 'max_epochs' must be an integer")
        if "patience" in kwargs and kwargs["patience"] is not None \
                and (isinstance(kwargs["patience"], bool)
                     or not isinstance(kwargs["patience"], int)):
            raise ConfigError(f"{where}: 'patience' must be null or an integer")
        spec = GridSpec(**kwargs)
        spec.enumerate()  # surface invalid axis values now
        return spec

    def to_dict(self) -> dict:
        return {
            "full": self.full,
            "hidden_layers": list(self.hidden_layers),
            "hidden_dim": list(self.hidden_dim),
            "dropout": list(self.dropout),
            "project_to_64": list(self.project_to_64),
            "batch_size": list(self.batch_size),
            "learning_rate": self.learning_rate,
            "max_epochs": self.max_epochs,
            "patience": self.patience,
        }


@dataclass(frozen=True)
class ProtocolSpec:
    """How per-seed runs turn into the reported number."""

    kind: str

    def __post_init__(self):
        if self.kind not in PROTOCOL_KINDS:
            raise ConfigError(f"unknown protocol kind '{self.kind}'")


def ablation_plan_from_dict(record: dict, where: str) -> AblationPlan:
    _check_keys(record, {"mode"},
                {"group_order", "random_seed", "k_random", "vocabulary_source", "runs"},
                where)
    kwargs = dict(record)
    if "group_order" in kwargs:
        kwargs["group_order"] = tuple(kwargs["group_order"])
    return AblationPlan(**kwargs)


def ablation_plan_to_dict(plan: AblationPlan) -> dict:
    return {
        "mode": plan.mode,
        "group_order": list(plan.group_order),
        "random_seed": plan.random_seed,
        "k_random": plan.k_random,
        "vocabulary_source": plan.vocabulary_source,
        "runs": plan.runs,
    }


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one experiment needs, resolvable from a single file."""

    dataset_path: str
    dataset_format: str
    explanations_path: str | None
    u_interpreter: InterpreterSpec
    v_interpreter: InterpreterSpec | None
    extras: tuple[tuple[str, InterpreterSpec], ...]
    cache_dir: str
    out_dir: str
    seeds: tuple[int, ...]
    fractions: tuple[float, ...]
    grid: GridSpec
    protocol: ProtocolSpec
    ablation: AblationPlan | None
    workers: int
    version: int = CONFIG_VERSION

    def __post_init__(self):
        if self.version != CONFIG_VERSION:
            raise ConfigError(f"unsupported config version {self.version}")
        if self.dataset_format not in DATASET_FORMATS:
            raise ConfigError(f"dataset format must be one of {DATASET_FORMATS}")
        if not self.seeds:
            raise ConfigError("seeds must be non-empty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be unique")
        for fraction in self.fractions:
            if not 0.0 < fraction <= 1.0:
                raise ConfigError(f"fractions must lie in (0, 1], got {fraction}")
        if self.protocol.kind == "tacred_median" and len(self.seeds) != TACRED_RUN_COUNT:
            raise ConfigError(
                f"tacred_median protocol requires exactly {TACRED_RUN_COUNT} seeds, "
                f"got {len(self.seeds)}")
        if self.protocol.kind == "ci_runs" and len(self.seeds) < 2:
            raise ConfigError("ci_runs protocol requires at least 2 seeds")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.explanations_path is None and self.v_interpreter is not None:
            raise ConfigError("v_interpreter given without an explanations file")
        seen_sources = set()
        for source_id, spec in self.extras:
            if spec.kind != "ontology":
                raise ConfigError(
                    f"extras support only ontology interpreters, got '{spec.kind}'")
            if source_id in seen_sources:
                raise ConfigError(f"duplicate extras source_id '{source_id}'")
            seen_sources.add(source_id)

    # -- serialization ------------------------------------------------------

    @staticmethod
    def from_json_dict(record: dict) -> ExperimentConfig:
        _check_keys(
            record,
            {"version", "dataset", "u_interpreter", "cache_dir", "out_dir",
             "seeds", "protocol"},
            {"explanations", "v_interpreter", "extras", "fractions", "grid",
             "ablation", "workers"},
            "config")
        dataset = record["dataset"]
        _check_keys(dataset, {"path", "format"}, set(), "config.dataset")

        v_raw = record.get("v_interpreter")
        extras_raw = record.get("extras", [])
        if not isinstance(extras_raw, list):
            raise ConfigError("config.extras: expected a list")
        extras = []
        for i, entry in enumerate(extras_raw):
            where = f"config.extras[{i}]"
            _check_keys(entry, {"source_id", "interpreter"}, set(), where)
            extras.append((entry["source_id"],
                           interpreter_spec_from_dict(entry["interpreter"], where)))

        protocol_raw = record["protocol"]
        _check_keys(protocol_raw, {"kind"}, set(), "config.protocol")

        ablation_raw = record.get("ablation")
        grid_raw = record.get("grid", {})

        return ExperimentConfig(
            version=record["version"],
            dataset_path=dataset["path"],
            dataset_format=dataset["format"],
            explanations_path=record.get("explanations"),
            u_interpreter=interpreter_spec_from_dict(record["u_interpreter"],
                                                     "config.u_interpreter"),
            v_interpreter=None if v_raw is None
            else interpreter_spec_from_dict(v_raw, "config.v_interpreter"),
            extras=tuple(extras),
            cache_dir=record["cache_dir"],
            out_dir=record["out_dir"],
            seeds=tuple(record["seeds"]),
            fractions=tuple(record.get("fractions", [])),
            grid=GridSpec.from_dict(grid_raw, "config.grid"),
            protocol=ProtocolSpec(kind=protocol_raw["kind"]),
            ablation=None if ablation_raw is None
            else ablation_plan_from_dict(ablation_raw, "config.ablation"),
            workers=record.get("workers", 1),
        )

    def to_json_dict(self) -> dict:
        return {
            "version": self.version,
            "dataset": {"path": self.dataset_path, "format": self.dataset_format},
            "explanations": self.explanations_path,
            "u_interpreter": interpreter_spec_to_dict(self.u_interpreter),
            "v_interpreter": None if self.v_interpreter is None
            else interpreter_spec_to_dict(self.v_interpreter),
            "extras": [{"source_id": source_id,
                        "interpreter": interpreter_spec_to_dict(spec)}
                       for source_id, spec in self.extras],
            "cache_dir": self.cache_dir,
            "out_dir": self.out_dir,
            "seeds": list(self.seeds),
            "fractions": list(self.fractions),
            "grid": self.grid.to_dict(),
            "protocol": {"kind": self.protocol.kind},
            "ablation": None if self.ablation is None
            else ablation_plan_to_dict(self.ablation),
            "workers": self.workers,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n"

    @staticmethod
    def loads(text: str) -> ExperimentConfig:
        try:
            record = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        return ExperimentConfig.from_json_dict(record)

    @staticmethod
    def load(path: str | Path) -> ExperimentConfig:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        return ExperimentConfig.loads(text)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    # -- filesystem checks --------------------------------------------------

    def validate_paths(self) -> None:
        """Check that every referenced input path exists."""
        if not Path(self.dataset_path).is_dir():
            raise ConfigError(f"dataset directory not found: {self.dataset_path}")
        if self.explanations_path is not None and not Path(self.explanations_path).is_file():
            raise ConfigError(f"explanations file not found: {self.explanations_path}")
        for spec in self._all_interpreter_specs():
            if spec.kind == "feature_store" and not Path(spec.store_path).is_file():
                raise ConfigError(f"feature store not found: {spec.store_path}")
            if spec.kind == "ontology":
                for p in spec.dictionary_paths:
                    if not Path(p).is_file():
                        raise ConfigError(f"ontology dictionary not found: {p}")

    def _all_interpreter_specs(self) -> list[InterpreterSpec]:
        specs = [self.u_interpreter]
        if self.v_interpreter is not None:
            specs.append(self.v_interpreter)
        specs.extend(spec for _sid, spec in self.extras)
        return specs


def cache_file(cache_dir: str | Path, role: str, spec: InterpreterSpec) -> Path:
    """Cache path convention: {role}_{kind}_d{dim}.expf under cache_dir."""
    return Path(cache_dir) / f"{role}_{spec.kind}_d{spec.dim}.expf"
