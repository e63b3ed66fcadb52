"""Entry point: load config, build the adapter, serve."""

from __future__ import annotations

import argparse
import sys

import uvicorn

from .adapters import ModelLoadError
from .app import create_app
from .config import ADAPTERS, load_config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="genswap-modelserver",
        description="Serve the four model capabilities over HTTP.",
    )
    parser.add_argument("--config", default=None, help="key=value config file")
    parser.add_argument("--adapter", choices=ADAPTERS, default=None)
    parser.add_argument("--host", default=None)
    parser.add_argument("--port", type=int, default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(
            args.config,
            {"adapter": args.adapter, "host": args.host, "port": args.port},
        )
        adapter = config.build_adapter()
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ModelLoadError as exc:
        # Refuse to start: a half-loaded server would fail per request.
        print(f"error: {exc}", file=sys.stderr)
        return 1
    app = create_app(adapter, workers=config.workers)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    return 0


if __name__ == "__main__":
    sys.exit(main())
