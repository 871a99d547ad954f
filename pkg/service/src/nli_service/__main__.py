"""Command-line launcher: load the model, then serve."""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, ServiceConfig


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nli-service",
        description="Serve sentence-pair NLI features and entailment probabilities.")
    parser.add_argument("--model", required=True,
                        help="model identifier or local checkpoint directory")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    parser.add_argument("--max-batch", type=int, default=32)
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--dim", type=int, default=None,
                        help="expected feature dimension (startup cross-check)")
    parser.add_argument("--entailment-index", type=int, default=None,
                        help="explicit entailment class index on the head")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = ServiceConfig(
            model_id=args.model, host=args.host, port=args.port,
            max_batch=args.max_batch, device=args.device, dim=args.dim,
            entailment_index=args.entailment_index)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    import uvicorn

    from .app import create_app
    from .model import ModelError, NliModel

    try:
        model = NliModel(config)
    except ModelError as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return 1
    app = create_app(model)
    uvicorn.run(app, host=config.host, port=config.port)
    return 0


if __name__ == "__main__":
    sys.exit(main())
