"""Command line entry point: ``emforms run | verify | selftest``.

Exit status is 0 when every pass flag is true, 1 when a check fails and 2 for
bad arguments or unreadable input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from .errors import EmformsError, ParseError
from .scenarios import ScenarioConfig, run, run_custom
from .selftest import run_selftest


def _boost(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("boost takes three comma-separated numbers FX,FY,FZ")
    try:
        return tuple(float(p) for p in parts)  # type: ignore[return-value]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad boost {text!r}") from None


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", type=Path, help="write the report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="emforms", description="Induction-law scenarios on differential forms.")
    sub = parser.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a built-in scenario")
    r.add_argument("scenario", choices=("translating_body", "sliding_bar", "faraday_disc"))
    r.add_argument("--b0", type=float, default=1.0, help="magnetic vortex magnitude")
    r.add_argument("--v0", type=float, default=1.0, help="body speed")
    r.add_argument("--omega", type=float, default=1.0, help="disc angular rate")
    r.add_argument("--length", type=float, default=1.0, help="bar length")
    r.add_argument("--radius", type=float, default=1.0, help="disc radius")
    r.add_argument("--depth", type=int, default=4, help="chain refinement depth")
    r.add_argument("--boost", type=_boost, default=None, metavar="FX,FY,FZ",
                   help="observer velocity for the invariance check")
    r.add_argument("--tolerance", type=float, default=1e-5)
    _add_output(r)

    v = sub.add_parser("verify", help="evaluate law residuals for a spec file")
    v.add_argument("spec", type=Path)
    v.add_argument("--depth", type=int, default=4)
    v.add_argument("--tolerance", type=float, default=1e-5)
    _add_output(v)

    s = sub.add_parser("selftest", help="run the deterministic invariant suite")
    s.add_argument("--out", type=Path)
    return parser


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        out.write_text(text, encoding="utf-8")


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "selftest":
            report = run_selftest()
            _emit(json.dumps(report, indent=2), args.out)
            return 0 if report["pass"] else 1
        if args.command == "run":
            cfg = ScenarioConfig(
                args.scenario, b0=args.b0, v0=args.v0, omega=args.omega, length=args.length,
                radius=args.radius, depth=args.depth, tolerance=args.tolerance, boost=args.boost,
            )
            result = run(cfg)
        else:
            text = args.spec.read_text(encoding="utf-8")
            cfg = ScenarioConfig("custom", depth=args.depth, tolerance=args.tolerance)
            result = run_custom(cfg, text)
    except ParseError as exc:
        print(f"emforms: {getattr(args, 'spec', '')}:{exc.line}:{exc.column}: {exc.reason}", file=sys.stderr)
        return 2
    except (EmformsError, OSError) as exc:
        print(f"emforms: {exc}", file=sys.stderr)
        return 2
    _emit(result.to_json() if args.format == "json" else result.to_csv(), args.out)
    return 0 if result.passed else 1


if __name__ == "__main__":
    sys.exit(main())
