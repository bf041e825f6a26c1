"""Adapter process launcher: one model per process."""

from __future__ import annotations

import argparse
import sys

from .server import AdapterConfig, registry_names, serve_adapter


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bev2ego-adapter",
        description="serve one model behind the bev2ego /v1/* protocol")
    parser.add_argument("--model", required=True, choices=registry_names())
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--port", type=int, default=9000)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--controlnet-weight", type=float, default=1.0)
    args = parser.parse_args(argv)
    config = AdapterConfig(model=args.model, device=args.device,
                           port=args.port, host=args.host,
                           controlnet_weight=args.controlnet_weight)
    serve_adapter(config)
    return 0


if __name__ == "__main__":
    sys.exit(main())
