"""Command-line entry point.

Exit codes: 0 success, 2 configuration problems, 3 data problems, 4 remote
service problems, 1 any other toolkit error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .config import ExperimentConfig
from .errors import ConfigError, DataError, ExprepError, ServiceError
from .pipeline import (cmd_ablate, cmd_featurize, cmd_random_explanations,
                       cmd_report, cmd_sweep, cmd_train)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_SERVICE = 4


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", required=True, help="experiment config JSON file")
    sub.add_argument("--workers", type=int, default=None,
                     help="parallel run workers (overrides the config)")
    sub.add_argument("--out", default=None,
                     help="output directory (overrides the config)")
    sub.add_argument("--seed-list", default=None,
                     help="comma-separated seeds (overrides the config)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="exprep",
        description="Explanation-guided representation experiments.")
    subs = parser.add_subparsers(dest="command", required=True)

    _add_common(subs.add_parser("featurize", help="write feature caches"))
    _add_common(subs.add_parser("train", help="grid-select, train, and report"))

    sweep = subs.add_parser("sweep", help="data-efficiency sweep over train fractions")
    _add_common(sweep)
    sweep.add_argument("--fractions", default=None,
                       help="comma-separated train fractions in (0, 1]")

    _add_common(subs.add_parser("ablate", help="run the configured ablation plan"))

    rand = subs.add_parser("random-explanations",
                           help="write a seeded randomized explanation file")
    _add_common(rand)
    rand.add_argument("--out-file", default=None, help="output jsonl path")

    _add_common(subs.add_parser("report", help="tabulate previously written results"))
    return parser


def _parse_seeds(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip() != "")
    except ValueError as exc:
        raise ConfigError(f"bad --seed-list '{text}': {exc}") from exc


def _parse_fractions(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(",") if part.strip() != "")
    except ValueError as exc:
        raise ConfigError(f"bad --fractions '{text}': {exc}") from exc


def _load_config(args) -> ExperimentConfig:
    config = ExperimentConfig.load(args.config)
    overrides = {}
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.out is not None:
        overrides["out_dir"] = args.out
    if args.seed_list is not None:
        overrides["seeds"] = _parse_seeds(args.seed_list)
    return replace(config, **overrides) if overrides else config


def _print_featurize(summary: dict) -> None:
    for role in ("u", "v"):
        if role not in summary:
            continue
        info = summary[role]
        if "skipped" in info:
            print(f"{role}: kind {info['kind']} {info['skipped']}, nothing cached")
        else:
            print(f"{role}: {info['pairs']} pairs, {info['computed']} computed, "
                  f"{info['cache_hits']} cache hits, {info['rows']} rows of dim "
                  f"{info['dim']} -> {info['path']}")
    print(f"assembled dim per instance: {summary['assembled_dim']}")


def _print_row(row: dict) -> None:
    parts = [f"model={row['model']}", f"dataset={row['dataset']}"]
    if "fraction" in row:
        parts.append(f"fraction={row['fraction']}")
    if "n_explanations" in row:
        parts.append(f"explanations={row['n_explanations']}")
    if "mean_f1" in row:
        parts.append(f"mean_f1={row['mean_f1']:.4f} +/- {row['ci_half_width']:.4f}")
    else:
        parts.append(f"test_f1={row['test_f1']:.4f}")
    parts.append(f"runs={len(row['runs'])}")
    print("  ".join(parts))


def _print_report(rows: list[dict]) -> None:
    columns = ["source", "model", "dataset", "fraction", "n_explanations",
               "f1", "ci_half_width", "runs"]
    print("\t".join(columns))
    for row in rows:
        print("\t".join(str(row[c]) for c in columns))


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _load_config(args)
        if args.command == "featurize":
            _print_featurize(cmd_featurize(config))
        elif args.command == "train":
            _print_row(cmd_train(config))
        elif args.command == "sweep":
            fractions = _parse_fractions(args.fractions) if args.fractions else None
            for row in cmd_sweep(config, fractions):
                _print_row(row)
        elif args.command == "ablate":
            for row in cmd_ablate(config):
                _print_row(row)
        elif args.command == "random-explanations":
            out = cmd_random_explanations(config, args.out_file)
            print(f"wrote randomized explanations to {out}")
        elif args.command == "report":
            _print_report(cmd_report(config))
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ServiceError as exc:
        print(f"service error: {exc}", file=sys.stderr)
        return EXIT_SERVICE
    except ExprepError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
