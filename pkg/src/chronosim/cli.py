"""Command-line entry point: ``chronosim run | list | validate``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from pathlib import Path

from .config import ConfigError, load_config
from .errors import ChronosimError
from .output import emit_outputs
from .scenarios import BUILTINS, builtin_config, list_scenarios, run_scenario

EXIT_OK, EXIT_INVALID, EXIT_COMPUTE, EXIT_VERDICT = 0, 1, 2, 3
DEFAULT_OUT = "chronosim-out"

log = logging.getLogger("chronosim")


def _output_root(cli_out, cfg_dir) -> Path:
    if cli_out:
        return Path(cli_out)
    if os.environ.get("CHRONOSIM_OUT"):
        return Path(os.environ["CHRONOSIM_OUT"])
    return Path(cfg_dir or DEFAULT_OUT)


def _resolve(target: str):
    if target in BUILTINS:
        return builtin_config(target)
    return load_config(target)


def _report_config_error(target, exc: ConfigError):
    print(f"{target}: invalid configuration", file=sys.stderr)
    for path, msg in exc.problems:
        print(f"  {path}: {msg}", file=sys.stderr)


def cmd_run(args) -> int:
    targets = args.targets
    if args.all:
        targets = list(BUILTINS) + targets
    if not targets:
        print("run: give a config file, a builtin name, or --all", file=sys.stderr)
        return EXIT_INVALID
    worst = EXIT_OK
    for target in targets:
        try:
            cfg = _resolve(target).with_overrides(args.grid_n, args.tol)
        except ConfigError as exc:
            _report_config_error(target, exc)
            worst = max(worst, EXIT_INVALID)
            continue
        start = time.perf_counter()
        try:
            record = run_scenario(cfg)
            out = _output_root(args.out, cfg.output.dir) / cfg.name
            emit_outputs(record, out)
        except ChronosimError as exc:
            print(f"{cfg.name}: compute failure: {exc}", file=sys.stderr)
            worst = max(worst, EXIT_COMPUTE)
            continue
        elapsed = time.perf_counter() - start
        if record.compute_failed:
            status, code = "COMPUTE-FAIL", EXIT_COMPUTE
        elif not record.passed:
            status, code = "VERDICT-FAIL", EXIT_VERDICT
        else:
            status, code = "ok", EXIT_OK
        failing = [k for k, v in record.verdicts.items() if not v]
        detail = f" ({', '.join(failing)})" if failing else ""
        print(f"{status:12s} {cfg.name:32s} {elapsed:7.2f}s -> {out}{detail}")
        worst = max(worst, code)
    return worst


def cmd_list(args) -> int:
    for name, desc in list_scenarios():
        print(f"{name:32s} {desc}")
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        _report_config_error(args.config, exc)
        return EXIT_INVALID
    print(f"{args.config}: ok (scenario {cfg.name}, hash {cfg.config_hash()[:12]})")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chronosim", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run config files and/or builtin scenarios")
    run.add_argument("targets", nargs="*", metavar="CONFIG|BUILTIN")
    run.add_argument("--all", action="store_true", help="run every builtin scenario")
    run.add_argument("--out", metavar="DIR", help="output root (default $CHRONOSIM_OUT or ./chronosim-out)")
    run.add_argument("--grid-n", type=int, metavar="N", help="override grid.n")
    run.add_argument("--tol", type=float, metavar="X", help="override the verdict tolerance")
    run.set_defaults(func=cmd_run)

    lst = sub.add_parser("list", help="list builtin scenarios")
    lst.set_defaults(func=cmd_list)

    val = sub.add_parser("validate", help="validate a config file without running it")
    val.add_argument("config")
    val.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
