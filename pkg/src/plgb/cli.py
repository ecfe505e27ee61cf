"""Command line interface: ``plgb check``, ``plgb induce`` and ``plgb validate``.

Exit codes: 0 when every identity holds, 1 when at least one fails, 2 for
input or usage errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bundle import BundleError, induce_base
from .checks import CHECK_NAMES, UsageError, emit_report, run_checks
from .spec import SpecError, dump_json, load_spec
from .symkernel import RingError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="plgb", description="Exact verification of Poisson principal bundle identities.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    check = sub.add_parser("check", help="run identity checks on a spec")
    check.add_argument("spec", help="spec JSON path or bundled dataset name")
    check.add_argument("--checks", default="all", help=f"comma list of {', '.join(CHECK_NAMES)}, or all")
    check.add_argument("--degree-bound", type=int, default=4, help="degree of random instances (default 4)")
    check.add_argument("--seed", type=int, default=0, help="seed for random instances (default 0)")
    check.add_argument("--format", choices=("text", "json"), default="text")
    check.add_argument("--out", help="write the report here instead of stdout")
    check.add_argument("--timings", action="store_true", help="record wall time per check")

    induce = sub.add_parser("induce", help="induce the base Poisson structure and connection")
    induce.add_argument("spec")
    induce.add_argument("--out", required=True, help="path for the base spec JSON")
    induce.add_argument("--degree-bound", type=int, default=None, help="override the bundle degree bound")

    validate = sub.add_parser("validate", help="check load-time invariants only")
    validate.add_argument("spec")
    return parser


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_check(args) -> int:
    if args.degree_bound < 0:
        raise UsageError("--degree-bound must be non-negative")
    spec = load_spec(args.spec)
    report = run_checks(spec, args.checks, degree_bound=args.degree_bound, seed=args.seed)
    _write(emit_report(report, args.format, timings=args.timings), args.out)
    return EXIT_OK if report.failed == 0 else EXIT_FAIL


def _cmd_induce(args) -> int:
    spec = load_spec(args.spec)
    try:
        base = induce_base(spec, args.degree_bound)
    except BundleError as exc:
        print(f"induce failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    Path(args.out).write_text(dump_json(base.raw))
    print(f"wrote base spec with generators {', '.join(base.spec.ring.visible)} to {args.out}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    spec = load_spec(args.spec)
    blocks = [b for b in ("fibre", "action", "bundle", "spin") if getattr(spec, b) is not None]
    print(
        f"{spec.name}: valid; {len(spec.ring.visible)} generators, {spec.frame.dim} frame elements"
        + (f", blocks: {', '.join(blocks)}" if blocks else "")
    )
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"check": _cmd_check, "induce": _cmd_induce, "validate": _cmd_validate}[args.command]
    try:
        return handler(args)
    except SpecError as exc:
        print(f"invalid spec: {exc}", file=sys.stderr)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
    except (OSError, ValueError, RingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
