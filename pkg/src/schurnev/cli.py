"""Command-line driver.

    schurnev <command> --config cfg.json --out DIR [--grid N] [--seed K] [--oracle on|off]

Commands: schur-forward, inverse, distance-compare, riesz-diagnose, hankel.
Exit codes: 0 success, 2 configuration error, 3 numerical failure.  On
failure a machine-readable ``error.json`` is written to the output
directory and echoed on stderr.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from .config import COMMANDS, ConfigError, parse_config
from .errors import NumericalError, SchurNevError
from .reports import RUNNERS, write_result

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, metavar="PATH", help="JSON experiment config")
    common.add_argument("--out", default="out", metavar="DIR", help="output directory")
    common.add_argument("--grid", type=int, metavar="N", help="quadrature grid size (overrides config)")
    common.add_argument("--seed", type=int, metavar="K", help="random seed (overrides config)")
    common.add_argument("--oracle", choices=("on", "off"), help="compute oracle columns")
    common.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    parser = argparse.ArgumentParser(prog="schurnev", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def _load_raw(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def _config_from_args(args):
    raw = _load_raw(args.config)
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    if raw.get("command", args.command) != args.command:
        raise ConfigError(f"config is for {raw['command']!r}, not {args.command!r}")
    raw = dict(raw, command=args.command)
    if args.grid is not None:
        raw["grid"] = args.grid
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.oracle is not None:
        raw["oracle"] = args.oracle == "on"
    return parse_config(raw)


def _fail(out_dir, kind, exc, code):
    err = {"status": "error", "kind": kind, "type": type(exc).__name__, "message": str(exc)}
    for attr in ("at", "condition"):
        if getattr(exc, attr, None) is not None:
            err[attr] = getattr(exc, attr)
    text = json.dumps(err, sort_keys=True)
    try:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "error.json"), "w") as fh:
            fh.write(text + "\n")
    except OSError:
        pass
    print(text, file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
        res = RUNNERS[args.command](cfg)
    except NumericalError as exc:
        return _fail(args.out, "numerical", exc, EXIT_NUMERICAL)
    except (ConfigError, SchurNevError, ValueError) as exc:
        return _fail(args.out, "config", exc, EXIT_CONFIG)
    write_result(res, args.out, args.command, plots=not args.no_figures)
    print(json.dumps({"status": "ok", "out": args.out}))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
