"""Command-line interface: ``setvote merge | simulate | pmerge``.

Exit codes are 0 on success, 2 for usage, parse or domain errors and 3 when
an internal invariant is violated.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from typing import List, Optional

from .estimators import merge
from .intervals import Interval, WeightedFamily
from .pvalues import ruger, ruger_median, ruger_randomized
from .simulation import SCENARIOS, SCHEMA, ExperimentConfig, run_experiment
from .vote import Rule

__all__ = ["main", "parse_intervals", "UsageError"]

DEFAULT_SEED = 0
_FLAGS = re.compile(r"^(?:[oc]{2}|[\[\(][\]\)])$")


class UsageError(Exception):
    """Bad input; reported on stderr with exit code 2."""


def _number(text: str, what: str, lineno: int) -> float:
    try:
        v = float(text)
    except ValueError:
        raise UsageError(f"line {lineno}: {what} {text!r} is not a number") from None
    if math.isnan(v):
        raise UsageError(f"line {lineno}: {what} is NaN")
    return v


def parse_intervals(text: str):
    """Parse ``lower,upper[,weight[,alpha]][,flags]`` records.

    Blank lines and ``#`` comments are skipped. Empty weight or alpha fields
    are placeholders, but each column must be filled on every line or on none.
    Returns the intervals, the weights (or None) and the levels (or None).
    """
    sets, weights, levels = [], [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = [f.strip() for f in line.split(",")]
        flags = "cc"
        if len(fields) > 2 and _FLAGS.match(fields[-1]):
            flags = fields.pop()
        if len(fields) < 2 or len(fields) > 4:
            raise UsageError(f"line {lineno}: expected lower,upper[,weight[,alpha]][,flags], got {raw!r}")
        lo = _number(fields[0], "lower", lineno)
        hi = _number(fields[1], "upper", lineno)
        try:
            sets.append(Interval.from_flags(lo, hi, flags))
        except ValueError as e:
            raise UsageError(f"line {lineno}: {e}") from None
        w = fields[2] if len(fields) > 2 else ""
        a = fields[3] if len(fields) > 3 else ""
        weights.append(_number(w, "weight", lineno) if w else None)
        levels.append(_number(a, "alpha", lineno) if a else None)
    if not sets:
        raise UsageError("no intervals")

    def column(values, name):
        given = [v is not None for v in values]
        if not any(given):
            return None
        if not all(given):
            raise UsageError(f"{name} must be given on every line or on none")
        return tuple(values)

    return sets, column(weights, "weight"), column(levels, "alpha")


def _seed(args, needed: bool) -> Optional[int]:
    if not needed:
        return args.seed
    if args.seed is None:
        print(f"warning: no --seed given; using the fixed default {DEFAULT_SEED}", file=sys.stderr)
        return DEFAULT_SEED
    return args.seed


def _cmd_merge(args) -> int:
    try:
        if args.input == "-":
            text = sys.stdin.read()
        else:
            with open(args.input, encoding="utf-8") as f:
                text = f.read()
    except OSError as e:
        raise UsageError(f"cannot read {args.input}: {e.strerror}") from None
    sets, weights, levels = parse_intervals(text)
    rule = Rule(args.method)
    if weights is not None and rule in (Rule.INDEPENDENT, Rule.MEDIAN_MIDPOINTS):
        print(f"warning: weights are ignored by the {rule.value} rule", file=sys.stderr)
    alpha = args.alpha
    if rule is Rule.INDEPENDENT and alpha is None:
        if levels is None or len(set(levels)) != 1:
            raise UsageError("the independent rule needs --alpha or one common alpha column")
        alpha = levels[0]
    chain = [int(c) for c in args.chain.split(",") if c.strip()] if args.chain else []
    family = WeightedFamily(tuple(sets), weights, levels)
    seed = _seed(args, rule.randomized or rule is Rule.PERMUTED)
    out = merge(family, rule, tau=args.tau, seed=seed, alpha=alpha, chain=chain)
    doc = {"schema": SCHEMA, "method": rule.value, "n_sets": len(sets)}
    doc.update(out.to_json())
    print(json.dumps(doc))
    return 0


def _parse_params(items: List[str]) -> dict:
    params = {}
    for item in items or []:
        if "=" not in item:
            raise UsageError(f"--param expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        params[k.strip()] = v.strip()
    return params


def _cmd_simulate(args) -> int:
    seed = _seed(args, True)
    config = ExperimentConfig(args.scenario, args.reps, seed, _parse_params(args.param), args.jobs)
    print("config: " + json.dumps(config.to_json()), file=sys.stderr)
    report = run_experiment(config)
    if args.out:
        report.write(args.out + ".csv", args.out + ".json")
        print(f"wrote {args.out}.csv and {args.out}.json", file=sys.stderr)
    else:
        sys.stdout.write(report.csv_text())
    for c in report.bound_checks:
        if not c["ok"]:
            print(
                f"warning: {c['rule']} {c['metric']} {c['estimate']:.4f} violates the "
                f"{c['kind']} bound {c['bound']:.4f} by more than 3 standard errors",
                file=sys.stderr,
            )
    return 0


def _cmd_pmerge(args) -> int:
    p = []
    for v in args.pvalues:
        try:
            p.append(float(v))
        except ValueError:
            raise UsageError(f"not a number: {v!r}") from None
    if any(not 0 <= x <= 1 for x in p):
        raise UsageError("p-values must lie in [0, 1]")
    if args.rule == "median":
        out = ruger_median(p)
    else:
        if args.k is None:
            raise UsageError(f"rule {args.rule} needs --k")
        if args.rule == "ruger":
            out = ruger(p, args.k)
        else:
            out = ruger_randomized(p, args.k, _seed(args, True))
    print(f"{out:.12g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="setvote", description="Merge dependent uncertainty sets by voting.")
    sub = parser.add_subparsers(dest="command", required=True)

    m = sub.add_parser("merge", help="merge intervals read from a CSV file")
    m.add_argument("input", help="CSV file of lower,upper[,weight[,alpha]][,flags] lines, or - for stdin")
    m.add_argument("--method", default="majority", choices=[r.value for r in Rule])
    m.add_argument("--tau", type=float, default=None)
    m.add_argument("--seed", type=int, default=None)
    m.add_argument("--alpha", type=float, default=None, help="per-set miscoverage for the independent rule")
    m.add_argument("--chain", default=None, help="comma-separated indices of nested sets")
    m.set_defaults(func=_cmd_merge)

    s = sub.add_parser("simulate", help="run a seeded Monte Carlo scenario")
    s.add_argument("--scenario", required=True, choices=sorted(SCENARIOS))
    s.add_argument("--reps", type=int, default=None, help="replications (scenario default if omitted)")
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--out", default=None, help="write OUT.csv and OUT.json instead of printing the CSV")
    s.add_argument("--param", action="append", metavar="KEY=VALUE", help="scenario parameter (repeatable)")
    s.add_argument("--jobs", type=int, default=1, help="worker processes; results do not depend on it")
    s.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("pmerge", help="combine p-values by an order statistic")
    p.add_argument("pvalues", nargs="+")
    p.add_argument("--rule", default="median", choices=["ruger", "median", "ruger-randomized"])
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_pmerge)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except (UsageError, ValueError, TypeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except AssertionError as e:
        print(f"internal error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
