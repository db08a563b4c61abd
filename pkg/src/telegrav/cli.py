"""Command line entry point: ``telegrav run --preset NAME | --manifest PATH``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

from .checks import DEFAULT_TOLERANCES, SUITES, RunOptions, run_checks
from .scenario import PRESETS, ManifestError, load_manifest, preset


def _checks_arg(text: str) -> list[str]:
    if text == "all":
        return list(SUITES)
    items = [t.strip() for t in text.split(",") if t.strip()]
    bad = [t for t in items if t not in SUITES]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown checks {bad}; choose from {', '.join(SUITES)} or all")
    return items


def _tol_arg(text: str) -> tuple[str, float]:
    name, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError("tolerances are given as NAME=VALUE")
    if name not in DEFAULT_TOLERANCES:
        raise argparse.ArgumentTypeError(f"unknown tolerance {name!r}")
    try:
        return name, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tolerance {value!r} is not a number") from None


def _radii_arg(text: str) -> list[float]:
    try:
        radii = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("radii are a comma separated list of numbers") from None
    if len(radii) < 4 or any(b <= a for a, b in zip(radii, radii[1:])) or radii[0] <= 0:
        raise argparse.ArgumentTypeError("need at least 4 increasing positive radii")
    return radii


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="telegrav", description="Certify tetrad-gravity identities on a scenario.")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run check suites on a preset or manifest")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", help=f"one of: {', '.join(sorted(PRESETS))}, random")
    src.add_argument("--manifest", type=Path, help="scenario manifest (TOML)")
    run.add_argument("--checks", type=_checks_arg, default=list(SUITES), help="comma separated suites or 'all'")
    run.add_argument("--points", type=int, default=100)
    run.add_argument("--seed", type=int, default=42)
    run.add_argument("--tol", type=_tol_arg, action="append", default=[], metavar="NAME=VALUE")
    run.add_argument("--radii", type=_radii_arg, default=None, help="r1,r2,... for energy series")
    run.add_argument("--format", choices=("text", "json", "both"), default="text")
    run.add_argument("--out", type=Path, default=None, help="directory for report.txt / report.json")
    run.add_argument("-v", "--verbose", action="store_true")
    sub.add_parser("presets", help="list built-in presets")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "presets":
        for name in sorted(PRESETS):
            print(name)
        print("random")
        return 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if args.points < 1:
        print("error: --points must be positive", file=sys.stderr)
        return 2
    try:
        scenario = preset(args.preset, args.seed) if args.preset else load_manifest(args.manifest)
    except ManifestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    opts = RunOptions(checks=args.checks, points=args.points, seed=args.seed, tolerances=dict(args.tol), radii=args.radii)
    try:
        report = run_checks(scenario, opts)
    except ManifestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text, js = report.to_text(), report.to_json()
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        if args.format in ("text", "both"):
            (args.out / "report.txt").write_text(text)
        if args.format in ("json", "both"):
            (args.out / "report.json").write_text(js)
    if args.format in ("text", "both"):
        sys.stdout.write(text)
    if args.format == "json":
        sys.stdout.write(js)
    return 0 if report.passed else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
