"""Command-line front end: ``mcalpha <subcommand> [flags]``.

Every report is a single JSON object written with sorted keys, and every number
in it is a canonical "p/q" string, so identical invocations give byte-identical
output.  Exit status: 0 success/pass, 1 verification fail, 2 usage or domain
error, 3 resource budget exceeded (including undecidable enclosures).

Point sets use a small language:

``nodes:q:k<=N``   endpoints of every level-k closed interval, k <= N
``gaps:q:k<=N``    endpoints of every level-k gap, k <= N
``powers:q:k<=N``  the step sizes q^-1, ..., q^-N (handy for h grids)
``list:p1,p2,..``  explicit rationals
``csv:path``       the ``x`` column of a CSV dump (e.g. from ``sweep --format csv``)
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .cantor import CantorSystem
from .constructions import M1Triple, ConstructedTriple, load_triple, m3_build, m4_build, perron_from_control
from .exact import (
    BudgetError,
    DomainError,
    Enclosure,
    IndeterminateError,
    fmt_rat,
    parse_rat,
    value_to_json,
)
from .verify import (
    DEFAULT_PROBE_CAP,
    derivative_check,
    divergence_probe,
    mc_sweep,
    osc_sum,
    perron_validity_check,
    sm_check,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    """Malformed command line."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would print text and exit 2 itself
        raise UsageError(message)


# ---------------------------------------------------------------------------
# Flag parsing


def _rational(text: str) -> Fraction:
    try:
        return parse_rat(text)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _rational_list(text: str) -> list[Fraction]:
    values = [_rational(t) for t in text.split(",") if t != ""]
    if not values:
        raise argparse.ArgumentTypeError(f"empty list {text!r}")
    return values


_LEVEL_SPEC = re.compile(r"^(nodes|gaps|powers):(\d+):k<=(\d+)$")


def parse_points(spec: str) -> list[Fraction]:
    """Expand a point-set spec into a sorted list of distinct rationals."""
    match = _LEVEL_SPEC.match(spec)
    if match:
        kind, q, n = match.group(1), int(match.group(2)), int(match.group(3))
        if kind == "powers":
            if q < 2 or n < 1:
                raise DomainError("powers:q:k<=N needs q >= 2 and N >= 1")
            return sorted(Fraction(1, q**k) for k in range(1, n + 1))
        system = CantorSystem(q)
        pts = system.endpoints(n) if kind == "nodes" else system.gap_endpoints(n)
        return sorted(set(pts))
    if spec.startswith("list:"):
        return sorted(set(_parse_list(spec[len("list:"):])))
    if spec.startswith("csv:"):
        return sorted(set(_read_csv_points(Path(spec[len("csv:"):]))))
    raise DomainError(f"unknown point set {spec!r}; expected nodes:, gaps:, powers:, list: or csv:")


def _parse_list(body: str) -> list[Fraction]:
    items = [t for t in body.split(",") if t != ""]
    if not items:
        raise DomainError("empty point list")
    return [parse_rat(t) for t in items]


def _read_csv_points(path: Path) -> list[Fraction]:
    try:
        text = path.read_text()
    except OSError as exc:
        raise DomainError(f"cannot read {path}: {exc.strerror}") from None
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise DomainError(f"{path} is empty")
    header, body = rows[0], rows[1:]
    col = header.index("x") if "x" in header else 0
    if "x" not in header:
        body = rows
    return [parse_rat(r[col]) for r in body if r]


def _load_fn(path: str) -> ConstructedTriple:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DomainError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return load_triple(json.loads(text))
    except json.JSONDecodeError as exc:
        raise DomainError(f"{path} is not JSON: {exc.msg}") from None


def _region(text: str) -> tuple[Fraction, Fraction]:
    parts = _rational_list(text)
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("region must be 'lo,hi'")
    return parts[0], parts[1]


def _levels(text: str) -> tuple[int, int]:
    match = re.match(r"^(\d+)(?:-(\d+))?$", text)
    if not match:
        raise argparse.ArgumentTypeError("levels must be 'k' or 'k1-k2'")
    lo = int(match.group(1))
    hi = int(match.group(2) or lo)
    if lo < 1 or hi < lo:
        raise argparse.ArgumentTypeError("levels must satisfy 1 <= k1 <= k2")
    return lo, hi


# ---------------------------------------------------------------------------
# Output


def _dumps(payload) -> str:
    return json.dumps(payload, sort_keys=True) + "\n"


def _emit(text: str, out: str | None, stdout) -> None:
    if out:
        Path(out).write_text(text)
    else:
        stdout.write(text)


def _cell(value) -> str:
    if isinstance(value, Enclosure):
        return fmt_rat(value.lo) if value.is_point else f"{fmt_rat(value.lo)}..{fmt_rat(value.hi)}"
    return "" if value is None else fmt_rat(value)


def _sweep_csv(triple, report) -> str:
    worst: dict[Fraction, Fraction | None] = {}
    for row in report.details["per_point"]:
        x, w = row["x"], row["worst"]
        prev = worst.get(x)
        worst[x] = w if prev is None or (w is not None and w > prev) else prev
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x", "F", "f", "phi", "ratio"])
    for x in sorted(worst):
        writer.writerow([fmt_rat(x), _cell(triple.F(x)), _cell(triple.f(x)), _cell(triple.phi(x)), _cell(worst[x])])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Subcommands; each returns (exit status, text)


def cmd_psi(args):
    system = CantorSystem(args.q)
    if args.depth is None:
        return EXIT_OK, _dumps(value_to_json(system.psi(args.x)))
    return EXIT_OK, _dumps(value_to_json(system.psi_enclose(args.x, args.depth)))


def cmd_build(args):
    if args.construction == "m3":
        if args.alpha is None:
            raise UsageError("build m3 needs --alpha")
        triple = m3_build(args.alpha, args.depth)
    elif args.construction == "m4":
        triple = m4_build(args.depth)
    else:
        triple = M1Triple(args.depth, args.interval)
    return EXIT_OK, triple.dumps() + "\n"


def cmd_eval(args):
    triple = _load_fn(args.fn)
    part = {"F": triple.F, "f": triple.f, "phi": triple.phi}[args.part]
    return EXIT_OK, _dumps(value_to_json(part(args.x)))


def _mc_report(args):
    triple = _load_fn(args.fn)
    pts = parse_points(args.points)
    return triple, mc_sweep(triple, args.alpha, args.eps, pts, args.delta_rule, args.extra_levels)


def _verdict(report) -> tuple[int, str]:
    return (EXIT_OK if report.passed else EXIT_FAIL), report.dumps() + "\n"


def cmd_verify(args):
    if args.check == "mc":
        _, report = _mc_report(args)
        return _verdict(report)
    triple = _load_fn(args.fn)
    if args.check == "sm":
        report = sm_check(triple.F, triple.phi, args.alpha, parse_points(args.points), parse_points(args.h))
    elif args.check == "derivative":
        report = derivative_check(triple.F, triple.f, args.x, parse_points(args.h))
    else:
        U, V = perron_from_control(triple.F, triple.phi, args.eps)
        report = perron_validity_check(U, V, triple.f, parse_points(args.points))
    return _verdict(report)


def cmd_sweep(args):
    triple, report = _mc_report(args)
    status = EXIT_OK if report.passed else EXIT_FAIL
    if args.format == "csv":
        return status, _sweep_csv(triple, report)
    return status, report.dumps() + "\n"


def cmd_osc_sum(args):
    triple = _load_fn(args.fn)
    if triple.system is None:
        raise DomainError(f"{triple.name} has no gaps")
    lo, hi = args.levels
    gaps = [g for k in range(lo, hi + 1) for g in triple.system.gaps(k)]
    total = osc_sum(triple, gaps, plateau_aware=args.plateau_aware)
    return EXIT_OK, _dumps({"value": fmt_rat(total), "gaps": len(gaps), "levels": [lo, hi]})


def cmd_probe(args):
    level = divergence_probe(args.source, args.region, args.target, args.cap)
    payload = {"level": level, "source": args.source, "target": fmt_rat(args.target)}
    return EXIT_OK, _dumps(payload)


# ---------------------------------------------------------------------------
# Parser


def _add_mc_flags(p):
    p.add_argument("--fn", required=True, help="construction JSON written by `build`")
    p.add_argument("--alpha", "--beta", dest="alpha", type=_rational, required=True, help="shift factor")
    p.add_argument("--eps", type=_rational_list, required=True, help="eps or comma-separated ladder")
    p.add_argument("--points", required=True, help="point-set spec")
    p.add_argument("--delta-rule", default="m3-proof-delta", help="m3-proof-delta, m4-proof-delta or fixed:p/q")
    p.add_argument("--extra-levels", type=int, default=3, help="grid refinement below the window scale")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mcalpha", description="Exact constructions and checks for controlled integrals.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("psi", help="Cantor function value (or enclosure with --depth)")
    p.add_argument("--q", type=int, default=3)
    p.add_argument("--x", type=_rational, required=True)
    p.add_argument("--depth", type=int)
    p.set_defaults(run=cmd_psi)

    p = sub.add_parser("build", help="write a construction's JSON description")
    p.add_argument("construction", choices=["m1", "m3", "m4"])
    p.add_argument("--alpha", type=_rational)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--interval", type=_region, default=(Fraction(0), Fraction(1)))
    p.add_argument("--out")
    p.set_defaults(run=cmd_build)

    p = sub.add_parser("eval", help="evaluate F, f or phi at a rational")
    p.add_argument("--fn", required=True)
    p.add_argument("--x", type=_rational, required=True)
    p.add_argument("--part", choices=["F", "f", "phi"], default="F")
    p.add_argument("--out")
    p.set_defaults(run=cmd_eval)

    p = sub.add_parser("verify", help="run one verification check")
    checks = p.add_subparsers(dest="check", required=True, parser_class=_Parser)
    c = checks.add_parser("mc")
    _add_mc_flags(c)
    c.add_argument("--out")
    c = checks.add_parser("sm")
    c.add_argument("--fn", required=True)
    c.add_argument("--alpha", type=_rational, required=True)
    c.add_argument("--points", required=True)
    c.add_argument("--h", required=True, help="point-set spec of step sizes")
    c.add_argument("--out")
    c = checks.add_parser("derivative")
    c.add_argument("--fn", required=True)
    c.add_argument("--x", type=_rational, required=True)
    c.add_argument("--h", required=True)
    c.add_argument("--out")
    c = checks.add_parser("perron")
    c.add_argument("--fn", required=True)
    c.add_argument("--eps", type=_rational, required=True)
    c.add_argument("--points", required=True)
    c.add_argument("--out")
    p.set_defaults(run=cmd_verify)

    p = sub.add_parser("sweep", help="mc check over a point set and eps ladder")
    _add_mc_flags(p)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--out")
    p.set_defaults(run=cmd_sweep)

    p = sub.add_parser("osc-sum", help="sum of |F(b)-F(a)| over gaps of the given levels")
    p.add_argument("--fn", required=True)
    p.add_argument("--levels", type=_levels, required=True)
    p.add_argument("--plateau-aware", action="store_true", help="use the oscillation on each closed gap")
    p.add_argument("--out")
    p.set_defaults(run=cmd_osc_sum)

    p = sub.add_parser("probe", help="least level at which a divergent partial sum reaches a target")
    p.add_argument("--source", choices=["m3-weights", "m4-oscillations"], required=True)
    p.add_argument("--region", type=_region, default=(Fraction(0), Fraction(1)))
    p.add_argument("--target", "--M", dest="target", type=_rational, required=True)
    p.add_argument("--cap", type=int, default=DEFAULT_PROBE_CAP)
    p.add_argument("--out")
    p.set_defaults(run=cmd_probe)
    return parser


def _error(kind: str, message: str, **extra) -> str:
    return _dumps({"kind": kind, "message": message, **extra})


@dataclass(frozen=True)
class CommandConfig:
    """One invocation: subcommand words, flag map ("p/q" strings for rationals),
    optional output path and format."""

    subcommand: tuple[str, ...]
    parameters: dict = field(default_factory=dict)
    output: str | None = None
    format: str = "json"

    def argv(self) -> list[str]:
        words = list(self.subcommand)
        for key in sorted(self.parameters):
            value = self.parameters[key]
            flag = f"--{key.replace('_', '-')}"
            if value is True:
                words.append(flag)
            elif value not in (None, False):
                words += [flag, fmt_rat(value) if isinstance(value, (int, Fraction)) else str(value)]
        if self.output:
            words += ["--out", self.output]
        if self.format != "json":
            words += ["--format", self.format]
        return words


def execute(config: CommandConfig) -> tuple[int, str]:
    """Run one command in-process; returns (exit status, everything printed)."""
    buf = io.StringIO()
    status = main(config.argv(), stdout=buf)
    return status, buf.getvalue()


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        status, text = args.run(args)
    except UsageError as exc:
        stdout.write(_error("usage", str(exc)))
        return EXIT_USAGE
    except DomainError as exc:
        stdout.write(_error("domain", str(exc)))
        return EXIT_USAGE
    except IndeterminateError as exc:
        undecided = [[fmt_rat(v) for v in pair] if isinstance(pair, tuple) else fmt_rat(pair)
                     for pair in exc.undecided[:20]]
        stdout.write(_error("indeterminate", str(exc), undecided=undecided))
        return EXIT_BUDGET
    except BudgetError as exc:
        stdout.write(_error("budget", str(exc)))
        return EXIT_BUDGET
    _emit(text, getattr(args, "out", None), stdout)
    return status


if __name__ == "__main__":
    sys.exit(main())
