"""Command-line entry points: ``casescope serve`` and ``casescope synth``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from casescope.errors import ConfigError, EngineError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="casescope",
        description="Multimodal diagnostic-case analytics engine",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP service over a data directory")
    serve.add_argument("--data-dir", help="directory holding bundle.json and artifacts")
    serve.add_argument("--records-path", help="JSON file used to persist analysis records")
    serve.add_argument("--coords-file", help="external 2D coordinate file (overrides coords.json)")
    serve.add_argument("--host")
    serve.add_argument("--port", type=int)
    serve.add_argument("--k", type=int, help="default neighborhood size")
    serve.add_argument("--seed", type=int)
    serve.add_argument("--config", help="JSON config file (flags > env > file)")

    synth = sub.add_parser("synth", help="generate a synthetic bundle with planted structure")
    synth.add_argument("--config", required=True, help="synth config JSON file")
    synth.add_argument("--out-dir", required=True, help="output directory for the artifacts")
    return parser


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from casescope.config import resolve_config
    from casescope.service import create_app

    flags = {
        "data_dir": args.data_dir,
        "records_path": args.records_path,
        "coords_file": args.coords_file,
        "host": args.host,
        "port": args.port,
        "k": args.k,
        "seed": args.seed,
        "config": args.config,
    }
    config = resolve_config(flags)
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    from casescope.synth import SynthConfig, generate, write_outputs

    path = Path(args.config)
    if not path.exists():
        raise ConfigError(f"synth config {path} does not exist")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"synth config {path}: invalid JSON ({exc})") from None
    config = SynthConfig.from_dict(doc)
    result = generate(config)
    paths = write_outputs(result, args.out_dir)
    print(f"wrote {len(result.bundle.cases)} cases to {Path(args.out_dir).resolve()}")
    for name, out_path in paths.items():
        print(f"  {name}: {out_path}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "serve":
            return _cmd_serve(args)
        return _cmd_synth(args)
    except EngineError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
