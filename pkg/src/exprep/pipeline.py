"""Command implementations behind the CLI: featurize, train, sweep, ablate.

Every command takes a validated ExperimentConfig, writes its JSON outputs
under the config's out_dir, and returns the structured result so callers and
tests can use the data directly. Output files carry no timestamps or other
run-specific noise: identical configs produce byte-identical files.
"""

from __future__ import annotations

import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .ablations import combine_orig_random, cumulative_groups, randomize_explanations, \
    training_vocabulary
from .cache import FeatureCache
from .config import ExperimentConfig, cache_file
from .data import Dataset, Explanation, load_dataset, load_explanations, \
    save_explanations, subsample_split
from .errors import ConfigError, DataError
from .evaluation import aggregate_runs, default_metric, tacred_protocol
from .featurize import featurize_corpus
from .interpreters import Interpreter, InterpreterSpec, build_interpreter
from .representation import assemble_matrix
from .training import grid_select, train

CACHEABLE_KINDS = ("hash", "nli_features", "nli_prob")

_MODEL_NAMES = {
    "nli_features": "exp-features",
    "nli_prob": "exp-prob",
    "pattern": "patterns",
    "hash": "exp-hash",
    "feature_store": "exp-store",
}


def load_experiment(config: ExperimentConfig) -> tuple[Dataset, list[Explanation]]:
    dataset = load_dataset(config.dataset_path, config.dataset_format)
    explanations = [] if config.explanations_path is None \
        else load_explanations(config.explanations_path)
    return dataset, explanations


def model_label(config: ExperimentConfig) -> str:
    """Human-readable name of the representation variant being trained."""
    if config.v_interpreter is None:
        base = "noexp"
    else:
        base = _MODEL_NAMES[config.v_interpreter.kind]
    for source_id, _spec in config.extras:
        base += f"+{source_id}"
    return base


def _safe(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.+-]", "-", name)


def _map_jobs(fn, items, workers: int) -> list:
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n",
                    encoding="utf-8")


# ---------------------------------------------------------------------------
# featurize
# ---------------------------------------------------------------------------

def assembled_dim(config: ExperimentConfig, dataset: Dataset,
                  explanations: list[Explanation]) -> int:
    """Total per-instance representation width this config will produce."""
    dim = config.u_interpreter.dim * len(dataset.label_space)
    v = config.v_interpreter
    if v is not None and explanations:
        if v.kind == "pattern":
            dim += len(build_interpreter(v, explanations).pattern_set)
        else:
            dim += v.dim * len(explanations)
    for _sid, spec in config.extras:
        dim += build_interpreter(spec).dim
    return dim


def cmd_featurize(config: ExperimentConfig) -> dict:
    """Write feature caches for the u and v texts; report work done."""
    config.validate_paths()
    dataset, explanations = load_experiment(config)
    instances = list(dataset.train + dataset.val + dataset.test)
    Path(config.cache_dir).mkdir(parents=True, exist_ok=True)

    jobs: list[tuple[str, InterpreterSpec, list[tuple[str, str]]]] = [
        ("u", config.u_interpreter,
         [(f"label:{label.name}", label.description)
          for label in dataset.label_space.labels]),
    ]
    if config.v_interpreter is not None and explanations:
        jobs.append(("v", config.v_interpreter,
                     [(f"exp:{exp.id}", exp.template) for exp in explanations]))

    summary: dict = {}
    for role, spec, templates in jobs:
        if spec.kind not in CACHEABLE_KINDS:
            summary[role] = {"kind": spec.kind, "skipped": "computed at assembly time"}
            continue
        interpreter = build_interpreter(spec)
        path = cache_file(config.cache_dir, role, spec)
        with FeatureCache(path, dim=interpreter.dim, mode="a") as cache:
            stats = featurize_corpus(instances, templates, interpreter, cache)
            rows = cache.rows
        summary[role] = {
            "kind": spec.kind,
            "path": str(path),
            "dim": interpreter.dim,
            "rows": rows,
            "pairs": stats.pairs,
            "computed": stats.computed,
            "cache_hits": stats.cache_hits,
        }
    summary["assembled_dim"] = assembled_dim(config, dataset, explanations)
    return summary


# ---------------------------------------------------------------------------
# assembly
# ---------------------------------------------------------------------------

def _assembly_interpreter(
    config: ExperimentConfig,
    role: str,
    spec: InterpreterSpec,
    explanations: list[Explanation],
) -> Interpreter:
    """Resolve an interpreter for matrix assembly.

    Remote kinds are served from their featurize cache; everything else is
    built directly (hash and the per-instance kinds are cheap to compute
    inline).
    """
    if spec.kind in ("hash", "ontology", "feature_store"):
        return build_interpreter(spec)
    if spec.kind == "pattern":
        return build_interpreter(spec, explanations)
    path = cache_file(config.cache_dir, role, spec)
    if not path.is_file():
        raise DataError(
            f"feature cache for role '{role}' ({spec.kind}) not found at {path}; "
            f"run 'exprep featurize --config <config>' first")
    return build_interpreter(
        InterpreterSpec(kind="feature_store", dim=spec.dim, store_path=str(path)))


def _assemble_all(config: ExperimentConfig, dataset: Dataset,
                  explanations: list[Explanation]):
    """Matrices and labels for every split, plus the shared manifest."""
    label_space = dataset.label_space
    u_interp = _assembly_interpreter(config, "u", config.u_interpreter, explanations)
    v_interp = None
    if config.v_interpreter is not None and explanations:
        v_interp = _assembly_interpreter(config, "v", config.v_interpreter, explanations)
    extra_interps = tuple((source_id, build_interpreter(spec))
                          for source_id, spec in config.extras)
    matrices = {}
    manifest = None
    for split_name, instances in dataset.splits().items():
        if not instances:
            raise DataError(f"split '{split_name}' is empty")
        labels = []
        for instance in instances:
            if instance.gold is None:
                raise DataError(
                    f"instance '{instance.id}' in split '{split_name}' has no gold label")
            labels.append(instance.gold)
        x, split_manifest = assemble_matrix(
            list(instances), label_space, u_interp, explanations, v_interp, extra_interps)
        if manifest is None:
            manifest = split_manifest
        elif split_manifest != manifest:
            raise DataError("splits produced different manifests")
        matrices[split_name] = (x, np.asarray(labels, dtype=np.int64))
    return matrices, manifest


# ---------------------------------------------------------------------------
# train / sweep / ablate
# ---------------------------------------------------------------------------

def _execute(
    config: ExperimentConfig,
    dataset: Dataset,
    explanations: list[Explanation],
    label: str,
    file_prefix: str,
    extra_fields: dict | None = None,
) -> dict:
    """Grid-select, run the protocol seeds, write run files, build a report row."""
    matrices, manifest = _assemble_all(config, dataset, explanations)
    metric = default_metric(dataset.label_space)
    block_lengths = tuple(block.length for block in manifest)
    n_classes = len(dataset.label_space)
    train_x, train_y = matrices["train"]
    val_x, val_y = matrices["val"]
    test_x, test_y = matrices["test"]

    grid = config.grid.enumerate()
    if len(grid) == 1:
        chosen = grid[0]
    else:
        chosen = grid_select(list(grid), list(config.seeds), train_x, train_y,
                             val_x, val_y, metric, n_classes=n_classes,
                             block_lengths=block_lengths,
                             workers=config.workers).chosen

    def one_seed(seed: int):
        return train(replace(chosen, seed=seed), train_x, train_y, val_x, val_y,
                     metric, test_x, test_y, n_classes=n_classes,
                     block_lengths=block_lengths).result

    results = _map_jobs(one_seed, list(config.seeds), config.workers)

    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    short_hash = chosen.config_hash()[:8]
    for result in results:
        result.save(out_dir / f"run_{_safe(file_prefix)}_{short_hash}_s{result.seed}.json")

    report = {
        "model": label,
        "dataset": dataset.name,
        "protocol": config.protocol.kind,
        "config_hash": chosen.config_hash(),
        "runs": [result.test_f1 for result in results],
    }
    if config.protocol.kind == "ci_runs":
        agg = aggregate_runs([result.test_f1 for result in results])
        report["mean_f1"] = agg.mean
        report["ci_half_width"] = agg.ci_half_width
    else:
        report["test_f1"] = tacred_protocol(results)
    if extra_fields:
        report.update(extra_fields)
    return report


def cmd_train(config: ExperimentConfig) -> dict:
    """Grid search, protocol runs, and a report row for the configured model."""
    config.validate_paths()
    dataset, explanations = load_experiment(config)
    label = model_label(config)
    report = _execute(config, dataset, explanations, label, file_prefix=label)
    _write_json(Path(config.out_dir) / "report.json", report)
    return report


def cmd_sweep(config: ExperimentConfig,
              fractions: tuple[float, ...] | None = None) -> list[dict]:
    """Data-efficiency sweep: train on nested fractions of the training split.

    All fractions subsample with the same seed (the first config seed), so
    smaller fractions are subsets of larger ones; each row records its train
    size and that nestedness held.
    """
    config.validate_paths()
    chosen_fractions = tuple(fractions) if fractions is not None else config.fractions
    if not chosen_fractions:
        raise ConfigError("sweep requires fractions in the config or on the command line")
    for fraction in chosen_fractions:
        if not 0.0 < fraction <= 1.0:
            raise ConfigError(f"fractions must lie in (0, 1], got {fraction}")

    dataset, explanations = load_experiment(config)
    label = model_label(config)
    subsample_seed = config.seeds[0]
    rows = []
    previous_ids: set[str] | None = None
    for fraction in sorted(chosen_fractions):
        sub = subsample_split(dataset, fraction, subsample_seed)
        ids = {instance.id for instance in sub.train}
        nested = previous_ids is None or previous_ids <= ids
        previous_ids = ids
        row = _execute(
            config, sub, explanations, label,
            file_prefix=f"{label}_f{fraction}",
            extra_fields={
                "fraction": fraction,
                "train_size": len(sub.train),
                "nested": nested,
            })
        rows.append(row)
    _write_json(Path(config.out_dir) / "sweep.json", rows)
    return rows


def cmd_ablate(config: ExperimentConfig, plan=None) -> list[dict]:
    """Run the configured ablation and emit one report row per point."""
    plan = plan if plan is not None else config.ablation
    if plan is None:
        raise ConfigError("no ablation plan in the config and none supplied")
    config.validate_paths()
    dataset, explanations = load_experiment(config)
    if not explanations:
        raise ConfigError("ablation requires an explanations file")

    rows = []
    if plan.mode == "group_cumulative":
        subsets = cumulative_groups(explanations, plan.group_order)
        names = ["noexp"] + [f"+{group}" for group in plan.group_order]
        for name, subset in zip(names, subsets):
            rows.append(_execute(
                config, dataset, subset, name,
                file_prefix=f"ablate_{name}",
                extra_fields={"n_explanations": len(subset)}))
    elif plan.mode == "random_only":
        vocabulary = training_vocabulary(dataset)
        randomized = randomize_explanations(explanations, vocabulary, plan.random_seed)
        rows.append(_execute(
            config, dataset, randomized, "random",
            file_prefix="ablate_random",
            extra_fields={"n_explanations": len(randomized)}))
    elif plan.mode == "orig_plus_random":
        vocabulary = training_vocabulary(dataset)
        combined = combine_orig_random(explanations, plan.k_random, vocabulary,
                                       plan.random_seed)
        rows.append(_execute(
            config, dataset, combined, f"orig+random{plan.k_random}",
            file_prefix="ablate_orig_random",
            extra_fields={"n_explanations": len(combined)}))
    else:  # ontology
        if not config.extras:
            raise ConfigError("ontology ablation requires 'extras' in the config")
        label = model_label(config)
        rows.append(_execute(
            config, dataset, explanations, label,
            file_prefix="ablate_ontology",
            extra_fields={"n_explanations": len(explanations)}))
    _write_json(Path(config.out_dir) / "ablation.json", rows)
    return rows


def cmd_random_explanations(config: ExperimentConfig,
                            out_path: str | None = None) -> Path:
    """Write a seeded randomized copy of the explanation file."""
    config.validate_paths()
    dataset, explanations = load_experiment(config)
    if not explanations:
        raise ConfigError("random-explanations requires an explanations file")
    seed = config.ablation.random_seed if config.ablation is not None else 0
    vocabulary = training_vocabulary(dataset)
    randomized = randomize_explanations(explanations, vocabulary, seed)
    out = Path(out_path) if out_path else Path(config.out_dir) / "random_explanations.jsonl"
    out.parent.mkdir(parents=True, exist_ok=True)
    save_explanations(randomized, out)
    return out


def cmd_report(config: ExperimentConfig) -> list[dict]:
    """Collect previously written result rows into one flat, plot-ready table."""
    out_dir = Path(config.out_dir)
    rows: list[dict] = []

    def flatten(source: str, record: dict) -> dict:
        return {
            "source": source,
            "model": record.get("model", ""),
            "dataset": record.get("dataset", ""),
            "fraction": record.get("fraction", ""),
            "n_explanations": record.get("n_explanations", ""),
            "f1": record.get("mean_f1", record.get("test_f1", "")),
            "ci_half_width": record.get("ci_half_width", ""),
            "runs": len(record.get("runs", [])),
        }

    report_file = out_dir / "report.json"
    if report_file.is_file():
        rows.append(flatten("train", json.loads(report_file.read_text(encoding="utf-8"))))
    sweep_file = out_dir / "sweep.json"
    if sweep_file.is_file():
        for record in json.loads(sweep_file.read_text(encoding="utf-8")):
            rows.append(flatten("sweep", record))
    ablation_file = out_dir / "ablation.json"
    if ablation_file.is_file():
        for record in json.loads(ablation_file.read_text(encoding="utf-8")):
            rows.append(flatten("ablate", record))
    if not rows:
        raise DataError(f"no result files found under {out_dir}")
    return rows
