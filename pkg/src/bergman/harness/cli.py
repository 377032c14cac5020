"""Command line entry point: ``bergman <experiment> [options]``.

Exit codes: 0 PASS, 1 FAIL or INDETERMINATE, 2 configuration error,
3 numeric-consistency error in at least one row.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from ..exceptions import BergmanError, ConfigError
from .config import EXPERIMENTS, load_config, parse_config
from .experiments import run
from .report import emit

log = logging.getLogger("bergman")

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def parse_group(text: str) -> dict:
    """``trivial``, ``cyclic:<w1,w2,...>:<k>``, or a JSON group object."""
    text = text.strip()
    if text == "trivial":
        return {"type": "trivial"}
    if text.startswith("cyclic:"):
        try:
            _, weights, k = text.split(":")
            return {
                "type": "cyclic-diagonal",
                "weights": [int(w) for w in weights.split(",")],
                "order": int(k),
            }
        except ValueError:
            raise ConfigError("--group", f"cannot parse {text!r}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        raise ConfigError("--group", f"cannot parse {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bergman",
        description="Bergman kernel, Kahler-Einstein and Monge-Ampere diagnostics "
        "on the unit ball and its finite quotients.",
    )
    sub = parser.add_subparsers(dest="experiment", required=True, metavar="EXPERIMENT")
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", help="JSON experiment config")
        p.add_argument("--dim", type=int, help="complex dimension n")
        p.add_argument("--group", help="trivial | cyclic:w1,..,wn:k | JSON object")
        p.add_argument("--variant", help="averaged | closed-form-disc | closed-form-b3-example")
        p.add_argument("--tol", type=float, help="verdict tolerance")
        p.add_argument("--order", type=int, help="jet order cap for the run")
        p.add_argument("--seed", type=int, help="seed for random sampling")
        p.add_argument("--count", type=int, help="number of random sample points")
        p.add_argument("--output", help="output path ('-' for stdout)")
        p.add_argument("--format", choices=("json", "csv"))
        p.add_argument("--cross-check", action="store_true",
                       help="append finite-difference oracle columns")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _merge(args, raw: dict, experiment: str) -> dict:
    raw = dict(raw)
    if args.dim is not None:
        raw["dimension"] = args.dim
    if args.group is not None:
        raw["group"] = parse_group(args.group)
    if args.variant is not None:
        raw["variant"] = args.variant
    if args.tol is not None:
        raw["tolerance"] = args.tol
    if args.order is not None:
        raw["jet_order"] = args.order
    if args.seed is not None or args.count is not None:
        default = None if experiment in ("b-limit", "fefferman") else {"type": "random"}
        sampling = dict(raw.get("sampling") or default or {})
        if sampling.get("type") != "random":
            raise ConfigError("--seed/--count", "only apply to random sampling")
        if args.seed is not None:
            sampling["seed"] = args.seed
        if args.count is not None:
            sampling["count"] = args.count
        raw["sampling"] = sampling
    output = dict(raw.get("output", {}))
    if args.output is not None:
        output["path"] = args.output
    if args.format is not None:
        output["format"] = args.format
    raw["output"] = output
    if args.cross_check:
        raw["cross_check"] = True
    return raw


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        raw = load_config(args.config) if args.config else {}
        cfg = parse_config(_merge(args, raw, args.experiment), experiment=args.experiment)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        report = run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BergmanError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    try:
        emit(report, cfg.output["format"], cfg.output["path"])
    except OSError as exc:
        print(f"cannot write report: {exc}", file=sys.stderr)
        return EXIT_FAIL
    log.info("%s: %s in %.2fs", cfg.experiment, report.verdict, report.wall_time)

    if report.summary.get("numeric_consistency_errors"):
        return EXIT_NUMERIC
    return EXIT_PASS if report.verdict == "PASS" else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
