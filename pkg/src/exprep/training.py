"""Training loop, early stopping, run records, grid search, checkpoints.

A run is fully determined by (config, data): one generator seeded from the
config drives parameter init, the per-epoch shuffle, and dropout masks, in
that order. Training rows are first sorted by a content hash so the incoming
row order has no effect at all.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from . import cache as cachefmt
from .errors import ConfigError, DataError, TrainingDiverged
from .evaluation import Metric
from .mlp import (AdamState, MlpConfig, ModelParams, adam_step, classifier_input_dim,
                  init_adam_state, init_params, loss_and_grad, make_dropout_masks, predict)

CHECKPOINT_FILE = "checkpoint.json"


@dataclass(frozen=True)
class RunResult:
    """Outcome of one seeded training run."""

    best_epoch: int
    val_f1_curve: tuple[float, ...]
    early_stopped_val_f1: float
    test_f1: float | None
    config_hash: str
    seed: int

    def __post_init__(self):
        if not self.val_f1_curve:
            raise DataError("a run must record at least one validation epoch")
        if not 0 <= self.best_epoch < len(self.val_f1_curve):
            raise DataError(f"best_epoch {self.best_epoch} outside the recorded curve")
        if self.early_stopped_val_f1 != max(self.val_f1_curve):
            raise DataError("early_stopped_val_f1 must equal the curve maximum")

    def to_json_dict(self) -> dict:
        return {
            "best_epoch": self.best_epoch,
            "val_f1_curve": list(self.val_f1_curve),
            "early_stopped_val_f1": self.early_stopped_val_f1,
            "test_f1": self.test_f1,
            "config_hash": self.config_hash,
            "seed": self.seed,
        }

    @staticmethod
    def from_json_dict(record: dict) -> RunResult:
        expected = {"best_epoch", "val_f1_curve", "early_stopped_val_f1",
                    "test_f1", "config_hash", "seed"}
        if set(record) != expected:
            raise DataError(f"run record keys {sorted(record)} != {sorted(expected)}")
        return RunResult(
            best_epoch=record["best_epoch"],
            val_f1_curve=tuple(record["val_f1_curve"]),
            early_stopped_val_f1=record["early_stopped_val_f1"],
            test_f1=record["test_f1"],
            config_hash=record["config_hash"],
            seed=record["seed"],
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n",
            encoding="utf-8")

    @staticmethod
    def load(path: str | Path) -> RunResult:
        return RunResult.from_json_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass(frozen=True)
class TrainOutput:
    """RunResult plus the trained parameters and the per-epoch mean loss."""

    result: RunResult
    params: ModelParams
    train_loss_curve: tuple[float, ...]


def canonical_order(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Indices sorting rows by a content hash of (features, label).

    Applying this before the seeded shuffle makes training invariant to the
    order rows arrived in: any permutation of (x, y) sorts back to the same
    sequence.
    """
    keys = []
    for row, label in zip(np.ascontiguousarray(x, dtype=np.float32), y):
        h = hashlib.blake2b(row.tobytes(), digest_size=16)
        h.update(int(label).to_bytes(8, "little", signed=True))
        keys.append(h.hexdigest())
    return np.argsort(np.array(keys), kind="stable")


def train(
    config: MlpConfig,
    train_x: np.ndarray,
    train_y: np.ndarray,
    val_x: np.ndarray,
    val_y: np.ndarray,
    metric: Metric,
    test_x: np.ndarray | None = None,
    test_y: np.ndarray | None = None,
    n_classes: int | None = None,
    block_lengths: tuple[int, ...] | None = None,
) -> TrainOutput:
    """Train with early stopping on validation F1.

    Improvement means strictly greater validation F1; after ``patience``
    consecutive non-improving epochs the run stops (patience=None never
    stops early). The test score, when test data is given, is computed with
    the best epoch's parameters.
    """
    train_x = np.ascontiguousarray(train_x, dtype=np.float32)
    val_x = np.ascontiguousarray(val_x, dtype=np.float32)
    train_y = np.asarray(train_y, dtype=np.int64)
    val_y = np.asarray(val_y, dtype=np.int64)
    if train_x.ndim != 2 or val_x.ndim != 2 or train_x.shape[1] != val_x.shape[1]:
        raise DataError("train and val matrices must be 2-D with equal widths")
    if len(train_x) != len(train_y) or len(val_x) != len(val_y):
        raise DataError("feature/label row counts differ")
    if (test_x is None) != (test_y is None):
        raise DataError("test features and labels must be given together")
    if n_classes is None:
        n_classes = int(max(train_y.max(), val_y.max())) + 1
        if test_y is not None and len(test_y):
            n_classes = max(n_classes, int(np.asarray(test_y).max()) + 1)

    order = canonical_order(train_x, train_y)
    train_x = train_x[order]
    train_y = train_y[order]

    rng = np.random.default_rng(config.seed)
    params = init_params(config, train_x.shape[1], n_classes, rng, block_lengths)
    state: AdamState = init_adam_state(params)
    width = classifier_input_dim(config, train_x.shape[1], block_lengths)

    n = len(train_x)
    best_f1 = -math.inf
    best_epoch = -1
    best_params: ModelParams = {k: v.copy() for k, v in params.items()}
    stale = 0
    curve: list[float] = []
    loss_curve: list[float] = []

    for epoch in range(config.max_epochs):
        perm = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            idx = perm[start : start + config.batch_size]
            masks = make_dropout_masks(config, rng, len(idx), width)
            loss, grads = loss_and_grad(params, config, train_x[idx], train_y[idx], masks)
            epoch_loss += loss * len(idx)
            params, state = adam_step(
                params, grads, state,
                lr=config.learning_rate,
                betas=(config.beta1, config.beta2),
                eps=config.epsilon)
        loss_curve.append(epoch_loss / n)
        for tensor in params.values():
            if not np.isfinite(tensor).all():
                raise TrainingDiverged(f"non-finite parameters after epoch {epoch}")
        val_f1 = float(metric(predict(params, config, val_x), val_y))
        curve.append(val_f1)
        if val_f1 > best_f1:
            best_f1 = val_f1
            best_epoch = epoch
            best_params = {k: v.copy() for k, v in params.items()}
            stale = 0
        else:
            stale += 1
            if config.patience is not None and stale >= config.patience:
                break

    test_f1 = None
    if test_x is not None:
        test_x = np.ascontiguousarray(test_x, dtype=np.float32)
        test_y = np.asarray(test_y, dtype=np.int64)
        test_f1 = float(metric(predict(best_params, config, test_x), test_y))

    result = RunResult(
        best_epoch=best_epoch,
        val_f1_curve=tuple(curve),
        early_stopped_val_f1=best_f1,
        test_f1=test_f1,
        config_hash=config.config_hash(),
        seed=config.seed,
    )
    return TrainOutput(result=result, params=best_params, train_loss_curve=tuple(loss_curve))


@dataclass(frozen=True)
class GridRow:
    config: MlpConfig
    mean_val_f1: float
    per_seed: tuple[float, ...]


@dataclass(frozen=True)
class GridSelection:
    chosen: MlpConfig
    mean_val_f1: float
    table: tuple[GridRow, ...]


def grid_select(
    configs: list[MlpConfig] | tuple[MlpConfig, ...],
    seeds: list[int] | tuple[int, ...],
    train_x: np.ndarray,
    train_y: np.ndarray,
    val_x: np.ndarray,
    val_y: np.ndarray,
    metric: Metric,
    n_classes: int | None = None,
    block_lengths: tuple[int, ...] | None = None,
    workers: int = 1,
) -> GridSelection:
    """Pick the config with the best mean early-stopped validation F1.

    Each config trains once per seed (no test evaluation). Ties break toward
    the smaller config hash, so the choice is deterministic and independent
    of grid or completion order.
    """
    if not configs:
        raise ConfigError("grid is empty")
    if not seeds:
        raise ConfigError("grid selection needs at least one seed")

    jobs = [(ci, replace(config, seed=seed))
            for ci, config in enumerate(configs) for seed in seeds]

    def run(job):
        _ci, config = job
        out = train(config, train_x, train_y, val_x, val_y, metric,
                    n_classes=n_classes, block_lengths=block_lengths)
        return out.result.early_stopped_val_f1

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            scores = list(pool.map(run, jobs))
    else:
        scores = [run(job) for job in jobs]

    rows = []
    k = len(seeds)
    for ci, config in enumerate(configs):
        per_seed = tuple(scores[ci * k : (ci + 1) * k])
        rows.append(GridRow(config=config, mean_val_f1=float(np.mean(per_seed)),
                            per_seed=per_seed))
    best = min(rows, key=lambda r: (-r.mean_val_f1, r.config.config_hash()))
    return GridSelection(chosen=best.config, mean_val_f1=best.mean_val_f1,
                         table=tuple(rows))


def save_checkpoint(directory: str | Path, config: MlpConfig, params: ModelParams) -> None:
    """Config as JSON plus one binary matrix file per parameter tensor."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    meta = {
        "config": asdict(config),
        "tensors": {name: list(tensor.shape) for name, tensor in params.items()},
    }
    for name, tensor in params.items():
        flat = np.asarray(tensor, dtype=np.float32).reshape(1, -1)
        cachefmt.write_matrix(directory / f"{name}.expf", flat)
    (directory / CHECKPOINT_FILE).write_text(
        json.dumps(meta, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def load_checkpoint(directory: str | Path) -> tuple[MlpConfig, ModelParams]:
    directory = Path(directory)
    meta = json.loads((directory / CHECKPOINT_FILE).read_text(encoding="utf-8"))
    raw = dict(meta["config"])
    if raw.get("patience") is not None:
        raw["patience"] = int(raw["patience"])
    config = MlpConfig(**raw)
    params: ModelParams = {}
    for name, shape in meta["tensors"].items():
        flat = cachefmt.read_matrix(directory / f"{name}.expf")
        params[name] = flat.reshape(shape)
    return config, params
