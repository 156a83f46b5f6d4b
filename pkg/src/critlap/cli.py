"""Command line entry point: ``critlap <task> --config <file> [--deterministic] [--out <dir>]``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import TASKS, load_config
from .errors import ConfigInvalid, UnknownSuite
from .runner import EXIT_CONFIG, SUITES, reproduce_suite, run

__all__ = ["main"]


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="critlap", description=__doc__)
    ap.add_argument("task", choices=list(TASKS) + ["suite"], help="task to run, or 'suite' for a bundled scenario set")
    ap.add_argument("--config", help="TOML run configuration (required unless task is 'suite')")
    ap.add_argument("--suite", choices=sorted(SUITES), help="suite name for task 'suite'")
    ap.add_argument("--deterministic", action="store_true", help="single-threaded, no timings in the report")
    ap.add_argument("--out", default="critlap-out", help="output directory (default: critlap-out)")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if args.task == "suite":
        if not args.suite:
            print("critlap: --suite is required for task 'suite'", file=sys.stderr)
            return EXIT_CONFIG
        try:
            res = reproduce_suite(args.suite, args.out, args.deterministic)
        except UnknownSuite as exc:
            print(f"critlap: unknown suite {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(res.summary())
        return 0 if res.passed else 1
    if not args.config:
        print("critlap: --config is required", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
    except ConfigInvalid as exc:
        print(f"critlap: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"critlap: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if cfg.task != args.task:
        print(f"critlap: config task {cfg.task!r} does not match {args.task!r}", file=sys.stderr)
        return EXIT_CONFIG
    name = Path(args.config).stem
    try:
        rep = run(cfg, args.out, args.deterministic, name=name, base=Path(args.config).resolve().parent)
    except ConfigInvalid as exc:
        print(f"critlap: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"{rep.path}: exit code {rep.exit_code}")
    return rep.exit_code


if __name__ == "__main__":
    sys.exit(main())
