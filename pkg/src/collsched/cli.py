"""Command-line front-end.

Subcommands: optimality, generate, verify, synth, export-dot.  All output
is deterministic for identical inputs and flags; --threads bounds internal
parallelism but never affects results (the current implementation is
sequential regardless).

Exit codes: 0 success; 1 parse/validation/pipeline errors; 2 oracle
disagreement (optimality --brute-force) or failed verification (verify);
3 self-validation failure in generate (never expected).
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .errors import CollschedError
from .optimality import bottleneck_search
from .pipeline import COLLECTIVES, generate
from .schedule import export, parse_schedule
from .topology import parse_topology, serialize_topology, synth_topology
from .verify import brute_force_bottleneck, congestion_time, validate_schedule


def _frac(f: Fraction) -> str:
    f = Fraction(f)
    return f"{f.numerator}/{f.denominator}"


class _ScheduleMeta:
    """Optimality-result stand-in reconstructed from a schedule's own
    metadata, for verifying schedules without rerunning the search."""

    def __init__(self, s) -> None:
        self.inv_x_star = s.inv_x_star
        self.U = s.U
        self.k = s.k
        self.y = s.y
        self.exact = s.exact


def _read(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise CollschedError(f"cannot read {path}: {exc}") from None


def _write(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise CollschedError(f"cannot write {path}: {exc}") from None


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="collsched",
        description="Throughput-optimal collective communication schedules.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def topology_arg(p: argparse.ArgumentParser) -> None:
        p.add_argument("-t", "--topology", required=True, help="topology JSON file")

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--threads", type=_positive_int, default=1,
                       help="parallelism bound (results never depend on it)")
        p.add_argument("--json", action="store_true", help="machine-readable output")

    p = sub.add_parser("optimality", help="optimal throughput ratio of a topology")
    topology_arg(p)
    p.add_argument("--brute-force", action="store_true",
                   help="also run the exhaustive cut oracle and compare")
    common(p)

    p = sub.add_parser("generate", help="generate a collective schedule")
    topology_arg(p)
    p.add_argument("-o", "--output", help="schedule file (default: stdout)")
    p.add_argument(
        "--collective",
        choices=[c.replace("_", "-") for c in COLLECTIVES],
        default="allgather",
    )
    p.add_argument("--fixed-k", type=_positive_int, metavar="K",
                   help="force exactly K trees per root")
    p.add_argument("--no-multicast", action="store_true",
                   help="skip multicast/aggregation pruning")
    p.add_argument("--groups", metavar="PATH",
                   help="JSON node-id to group map for the splitting heuristic")
    common(p)

    p = sub.add_parser("verify", help="validate a schedule against a topology")
    topology_arg(p)
    p.add_argument("schedule", help="schedule JSON file")
    common(p)

    p = sub.add_parser("synth", help="generate a topology from a named family")
    p.add_argument("family", help="boxes | ring | fat-tree")
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                   help="family parameter (repeatable), e.g. --param boxes=2")
    p.add_argument("-o", "--output", help="topology file (default: stdout)")
    common(p)

    p = sub.add_parser("export-dot", help="render a schedule's trees as DOT")
    p.add_argument("schedule", help="schedule JSON file")
    p.add_argument("-o", "--output", help="DOT file (default: stdout)")
    common(p)

    return parser


def cmd_optimality(args) -> int:
    try:
        t = parse_topology(_read(args.topology))
        result = bottleneck_search(t)
    except CollschedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    doc = {
        "inv_x_star": _frac(result.inv_x_star),
        "U": _frac(result.U),
        "k": result.k,
        "y": _frac(result.y),
        "iterations": result.search_iterations,
    }
    agree = True
    if args.brute_force:
        try:
            oracle, witness = brute_force_bottleneck(t)
        except CollschedError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        agree = oracle == result.inv_x_star
        doc["brute_force"] = _frac(oracle)
        doc["witness"] = sorted(witness.S)
        doc["agreement"] = agree
    if args.json:
        print(json.dumps(doc, indent=2))
    else:
        print(
            f"1/x* = {doc['inv_x_star']}, k = {doc['k']}, y = {doc['y']}"
        )
        print(f"U = {doc['U']}, iterations = {doc['iterations']}")
        if args.brute_force:
            members = ", ".join(doc["witness"])
            print(f"brute force = {doc['brute_force']}, witness = {{{members}}}")
            print(f"agreement: {'yes' if agree else 'NO'}")
    return 0 if agree else 2


def cmd_generate(args) -> int:
    try:
        t = parse_topology(_read(args.topology))
        groups = None
        if args.groups:
            raw = json.loads(_read(args.groups))
            if not isinstance(raw, dict):
                raise CollschedError("--groups file must hold a JSON object")
            groups = {str(k): str(v) for k, v in raw.items()}
        s, meta = generate(
            t,
            collective=args.collective.replace("-", "_"),
            fixed_k=args.fixed_k,
            prune=not args.no_multicast,
            groups=groups,
        )
    except CollschedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    report = validate_schedule(s, t, meta)
    if not report.ok:
        print("error: generated schedule failed self-validation:", file=sys.stderr)
        for v in report.violations:
            print(f"  {v.kind}: {v.detail}", file=sys.stderr)
        print(
            f"  achieved {_frac(report.achieved_T_comm)} vs bound {_frac(report.bound_T_comm)}",
            file=sys.stderr,
        )
        return 3
    _write(args.output, export(s, "json"))
    time = congestion_time(s, t)
    summary = {
        "collective": s.collective,
        "inv_x_star": _frac(s.inv_x_star),
        "k": s.k,
        "U": _frac(s.U),
        "y": _frac(s.y),
        "time_per_unit": _frac(time),
        "self_validation": "ok",
        "output": args.output,
    }
    out = sys.stdout if args.output is not None else sys.stderr
    if args.json:
        print(json.dumps(summary, indent=2), file=out)
    else:
        print(
            f"{s.collective}: 1/x* = {summary['inv_x_star']}, k = {s.k}, "
            f"time = {summary['time_per_unit']} per unit",
            file=out,
        )
        print("self-validation: ok", file=out)
        if args.output is not None:
            print(f"wrote {args.output}", file=out)
    return 0


def cmd_verify(args) -> int:
    try:
        t = parse_topology(_read(args.topology))
        s = parse_schedule(_read(args.schedule))
    except CollschedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    report = validate_schedule(s, t, _ScheduleMeta(s))
    if args.json:
        print(json.dumps(report.to_dict(), indent=2))
    else:
        print("ok" if report.ok else "FAIL")
        for v in report.violations:
            print(f"  {v.kind}: {v.detail}")
        print(f"achieved T_comm = {_frac(report.achieved_T_comm)} per unit")
        print(f"bound T_comm = {_frac(report.bound_T_comm)} per unit")
    return 0 if report.ok else 2


def _parse_param(text: str):
    if "=" not in text:
        raise CollschedError(f"--param expects KEY=VALUE, got {text!r}")
    key, _, raw = text.partition("=")
    if raw.lower() in ("true", "false"):
        return key, raw.lower() == "true"
    try:
        return key, int(raw)
    except ValueError:
        return key, raw


def cmd_synth(args) -> int:
    try:
        params = dict(_parse_param(p) for p in args.param)
        t = synth_topology(args.family, **params)
        _write(args.output, serialize_topology(t))
    except (CollschedError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def cmd_export_dot(args) -> int:
    try:
        s = parse_schedule(_read(args.schedule))
        _write(args.output, export(s, "dot"))
    except CollschedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "optimality": cmd_optimality,
        "generate": cmd_generate,
        "verify": cmd_verify,
        "synth": cmd_synth,
        "export-dot": cmd_export_dot,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
