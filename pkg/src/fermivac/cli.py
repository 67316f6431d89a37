"""Command-line entry point: ``fermivac <experiment> --config FILE [--set key=value]...``.

Exit codes: 0 all checks pass, 1 a check failed, 2 configuration error,
3 runtime error.  Errors are also written as JSON to stderr and, when the
output directory is known, to ``error.json`` there.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import EXPERIMENTS, ConfigError, load_config, parse_config
from .runner import SCHEMA_VERSION, output_dir, run

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fermivac", description=__doc__.splitlines()[0])
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", metavar="FILE", help="YAML config file (defaults apply when omitted)")
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override one config key; repeatable")
    return parser


def _error(kind: str, exc: BaseException, code: int, out: Path | None) -> int:
    doc = {"schema_version": SCHEMA_VERSION, "error": kind, "type": type(exc).__name__, "message": str(exc),
           "exit_code": code}
    text = json.dumps(doc, sort_keys=True)
    print(text, file=sys.stderr)
    if out is not None:
        try:
            out.mkdir(parents=True, exist_ok=True)
            (out / "error.json").write_text(text + "\n")
        except OSError:
            pass
    return code


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config:
            cfg = load_config(args.config, args.overrides, args.experiment)
        else:
            cfg = parse_config("", args.overrides, args.experiment)
    except ConfigError as exc:
        return _error("config", exc, EXIT_CONFIG, None)

    out = output_dir(cfg)
    try:
        report = run(cfg, out)
    except Exception as exc:  # surfaced as a machine-readable runtime error
        return _error("runtime", exc, EXIT_RUNTIME, out)

    for c in report["checks"]:
        status = "PASS" if c["passed"] else "FAIL"
        print(f"{status} [{c['tag']}] {c['name']} = {c['value']}")
    print(f"report: {out / (cfg.experiment + '.json')}")
    return EXIT_PASS if report["passed"] else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
