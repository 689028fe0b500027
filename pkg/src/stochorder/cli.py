"""Command-line interface.

Exit codes are shared by every command: 0 the checked statement holds,
1 it fails, 2 input error, 3 the statement's hypotheses are not met.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from pathlib import Path
from typing import Any

from . import couplings, families
from .errors import DefectBudgetError, HypothesisError
from .majorization import ExponentTuple, leq, potential, satisfies_S, transfer_chain
from .measures import FiniteMeasure, Scalar, dirac, mean, scalar_to_json
from .muirhead import (
    DistributionPolynomial,
    GapReport,
    continuous_rasa_gap,
    eval_operator,
    eval_poly,
    rasa_gap,
    verify_muirhead,
)
from .orders import DEFAULT_TOL, ConvexTestFunction, check_cx, check_st, convex_battery
from .reproduce import REPRODUCTIONS

EXIT_HOLDS, EXIT_FAILS, EXIT_INPUT, EXIT_HYPOTHESIS = 0, 1, 2, 3


class InputError(ValueError):
    pass


# ----------------------------------------------------------------------
# parsing helpers

_SPEC = re.compile(r"^\s*([a-z]+)\s*\((.*)\)\s*$")
_ARITY = {
    "binom": 2, "poiss": 1, "nb": 2, "geom": 1,
    "gamma": 2, "beta": 2, "norm": 2, "delta": 1,
}


def parse_number(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise InputError(f"bad number {text!r}") from None


def parse_family(spec: str, tail_eps: float) -> FiniteMeasure | families.ContinuousFamily:
    """``binom(n,x)``, ``poiss(l)``, ``nb(r,p)``, ``geom(p)``, ``gamma(a,b)``,
    ``beta(a,b)``, ``norm(m,v)``, ``delta(x)`` or ``@measure.json``."""
    if spec.startswith("@"):
        try:
            return FiniteMeasure.from_json(json.loads(Path(spec[1:]).read_text()))
        except (OSError, KeyError, ValueError, TypeError) as exc:
            raise InputError(f"cannot read measure {spec!r}: {exc}") from None
    match = _SPEC.match(spec)
    if not match or match.group(1) not in _ARITY:
        raise InputError(f"bad family spec {spec!r}")
    name = match.group(1)
    args = [parse_number(a) for a in match.group(2).split(",") if a.strip()]
    if len(args) != _ARITY[name]:
        raise InputError(f"{name} takes {_ARITY[name]} argument(s), got {len(args)}")
    try:
        if name == "binom":
            if args[0].denominator != 1:
                raise InputError("binomial n must be an integer")
            return families.binomial(int(args[0]), args[1])
        if name == "poiss":
            return families.poisson(args[0], tail_eps)
        if name == "nb":
            return families.negative_binomial(args[0], args[1], tail_eps)
        if name == "geom":
            return families.geometric(args[0], tail_eps)
        if name == "delta":
            return dirac(args[0])
        kind = {"gamma": "gamma", "beta": "beta", "norm": "normal"}[name]
        return families.continuous(kind, *args)
    except InputError:
        raise
    except ValueError as exc:
        raise InputError(str(exc)) from None


def as_measures(laws: Sequence[Any], grid_n: int, tail: float) -> list[FiniteMeasure]:
    """Discretize any continuous laws onto one grid spanning all of them."""
    conts = [f for f in laws if isinstance(f, families.ContinuousFamily)]
    if not conts:
        return list(laws)
    lo = min(_quantile_lo(f, tail) for f in conts)
    hi = max(_quantile_hi(f, tail) for f in conts)
    if lo == hi:
        hi = lo + 1.0
    return [
        families.discretize(f, grid_n, lo, hi, max_tail=4 * tail)
        if isinstance(f, families.ContinuousFamily)
        else f
        for f in laws
    ]


def _quantile_lo(f: families.ContinuousFamily, tail: float) -> float:
    if f.atom is not None:
        return f.atom
    lo = f.support_bounds()[0]
    return lo if math.isfinite(lo) else float(f.ppf(tail))


def _quantile_hi(f: families.ContinuousFamily, tail: float) -> float:
    if f.atom is not None:
        return f.atom
    hi = f.support_bounds()[1]
    return hi if math.isfinite(hi) else float(f.ppf(1 - tail))


def parse_tuple(text: str) -> ExponentTuple:
    try:
        return ExponentTuple.parse(text)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def parse_grid(text: str, use_float: bool = False) -> list[Scalar]:
    """``start:stop:count`` (inclusive, equispaced) or a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise InputError(f"grid {text!r} is not start:stop:count")
        start, stop = parse_number(parts[0]), parse_number(parts[1])
        try:
            count = int(parts[2])
        except ValueError:
            raise InputError(f"bad grid count in {text!r}") from None
        if count < 1:
            raise InputError("grid count must be at least 1")
        if count == 1:
            vals = [start]
        else:
            vals = [start + (stop - start) * Fraction(i, count - 1) for i in range(count)]
    else:
        vals = [parse_number(t) for t in text.split(",") if t.strip()]
    if not vals:
        raise InputError(f"empty grid {text!r}")
    return [float(v) for v in vals] if use_float else vals


_PHI = re.compile(r"^\s*([a-z_]+)\s*(?:\((.*)\))?\s*$")


def parse_phi(text: str) -> ConvexTestFunction:
    """``square``, ``stoploss(t)``, ``absdev(c)`` or ``exp(s)``."""
    match = _PHI.match(text)
    kinds = {"square": "square", "stoploss": "stop_loss", "stop_loss": "stop_loss",
             "absdev": "abs_dev", "abs_dev": "abs_dev", "exp": "exp_scaled"}
    if not match or match.group(1) not in kinds:
        raise InputError(f"bad test function {text!r}")
    kind = kinds[match.group(1)]
    param = parse_number(match.group(2)) if match.group(2) else None
    try:
        return ConvexTestFunction(kind, param)
    except ValueError as exc:
        raise InputError(str(exc)) from None


# ----------------------------------------------------------------------
# output


def emit(args: argparse.Namespace, payload: Any) -> None:
    text = json.dumps(payload, indent=2, default=_json_default) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _json_default(obj: Any) -> Any:
    if isinstance(obj, Fraction):
        return scalar_to_json(obj)
    raise TypeError(f"{type(obj).__name__} is not JSON serializable")


def _tol(args: argparse.Namespace) -> float | None:
    return args.tol


# ----------------------------------------------------------------------
# commands


def cmd_check(args: argparse.Namespace, order: str) -> int:
    laws = [parse_family(s, args.tail_eps) for s in (args.a, args.b)]
    a, b = as_measures(laws, args.grid_n, args.tail_eps)
    verdict = (check_st if order == "st" else check_cx)(a, b, _tol(args))
    emit(args, verdict.to_json())
    return EXIT_HOLDS if verdict.holds else EXIT_FAILS


@dataclass
class SweepSpec:
    """One Rasa-gap sweep: a family, its parameter grid pairs, a battery and a scale."""

    family: str
    points: list[dict[str, Scalar]]
    battery: list[ConvexTestFunction]
    scale: Scalar
    tol: float
    exact: bool
    grid_n: int = 4000


def _fmt_params(p1: dict, p2: dict) -> str:
    def one(p: dict, suffix: str) -> list[str]:
        return [f"{k}{suffix}={v}" for k, v in p.items()]

    return ";".join(one(p1, "1") + one(p2, "2"))


def _hypothesis(family: str, p1: dict, p2: dict) -> bool:
    if family == "nb":
        return (p1["r"] - p2["r"]) * (p1["p"] - p2["p"]) >= 0
    if family in ("gamma", "beta"):
        return (p1["a"] - p2["a"]) * (p1["b"] - p2["b"]) <= 0
    return True


def build_sweep(args: argparse.Namespace) -> SweepSpec:
    fam = args.family
    use_float = args.float
    need = {
        "binom": ("n", "x"), "poiss": ("x",), "baskakov": ("n", "x"), "nb": ("r", "p"),
        "gamma": ("a", "b"), "beta": ("a", "b"), "norm": ("x", "var"),
    }
    if fam not in need:
        raise InputError(f"unknown sweep family {fam!r}")
    for name in need[fam]:
        if getattr(args, name) is None:
            raise InputError(f"{fam} sweeps need --{name}")
    n = int(args.n) if args.n is not None else 1
    if n < 1:
        raise InputError("--n must be positive")
    if fam in ("binom", "poiss", "baskakov"):
        xs = parse_grid(args.x, use_float)
        points = [{"x": x} for x in xs]
        scale = Fraction(1, 2 * n)
    elif fam == "norm":
        points = [{"m": m} for m in parse_grid(args.x, use_float)]
        scale = Fraction(1, 2)
    else:
        first = parse_grid(args.r if fam == "nb" else args.a, use_float)
        second = parse_grid(args.p if fam == "nb" else args.b, use_float)
        names = ("r", "p") if fam == "nb" else ("a", "b")
        points = [dict(zip(names, v)) for v in product(first, second)]
        scale = Fraction(1, 2)
    if args.scale is not None:
        scale = parse_number(args.scale)
    exact = fam == "binom" and not use_float
    lo, hi = _domain(fam, points, n, args)
    battery = convex_battery(lo, hi, args.battery, exp_scale=None if exact else args.exp_scale)
    tol = args.tol if args.tol is not None else (0.0 if exact else 1e-8)
    if tol < 0 or (not exact and tol == 0):
        raise InputError("tolerance must be positive in the float regime")
    return SweepSpec(fam, points, battery, scale, tol, exact, args.grid_n)


def _domain(fam: str, points: list[dict], n: int, args: argparse.Namespace) -> tuple[Scalar, Scalar]:
    if args.domain:
        parts = args.domain.split(":")
        if len(parts) != 2:
            raise InputError("--domain must be lo:hi")
        lo, hi = parse_number(parts[0]), parse_number(parts[1])
        if not lo < hi:
            raise InputError("--domain needs lo < hi")
        return lo, hi
    if fam in ("binom", "beta"):
        return Fraction(0), Fraction(1)
    if fam in ("poiss", "baskakov"):
        top = max(float(p["x"]) for p in points)
        return Fraction(0), Fraction(math.ceil(max(2 * top, 1)))
    if fam == "nb":
        top = max(float(p["r"]) * float(p["p"]) / (1 - float(p["p"])) for p in points)
        return Fraction(0), Fraction(math.ceil(max(2 * top, 1)))
    if fam == "gamma":
        top = max(float(p["a"]) / float(p["b"]) for p in points)
        return Fraction(0), Fraction(math.ceil(max(2 * top, 1)))
    ms = [float(p["m"]) for p in points]
    sd = math.sqrt(float(args.var))
    return Fraction(math.floor(min(ms) - 3 * sd)), Fraction(math.ceil(max(ms) + 3 * sd))


def _law(fam: str, point: dict, n: int, args: argparse.Namespace):
    if fam == "binom":
        return families.binomial(n, point["x"])
    if fam == "poiss":
        return families.poisson(point["x"], args.tail_eps)
    if fam == "baskakov":
        x = point["x"]
        return families.negative_binomial(n, x / (1 + x), args.tail_eps)
    if fam == "nb":
        return families.negative_binomial(point["r"], point["p"], args.tail_eps)
    if fam == "gamma":
        return families.continuous("gamma", point["a"], point["b"])
    if fam == "beta":
        return families.continuous("beta", point["a"], point["b"])
    return families.continuous("normal", point["m"], parse_number(args.var))


def run_sweep(spec: SweepSpec, args: argparse.Namespace) -> tuple[list[GapReport], dict[str, Any]]:
    n = int(args.n) if args.n is not None else 1
    rows: list[GapReport] = []
    violations = 0
    failures = 0
    # worst row among those satisfying the hypothesis, and among those that do not
    worst: tuple[Any, str, str] | None = None
    worst_outside: tuple[Any, str, str] | None = None
    laws = [_law(spec.family, pt, n, args) for pt in spec.points]
    regime = "exact" if spec.exact else "float"
    for (i, p1), (j, p2) in product(enumerate(spec.points), repeat=2):
        ok = _hypothesis(spec.family, p1, p2)
        label = _fmt_params(p1, p2)
        if not ok:
            violations += 1
            print(f"warning: hypothesis violated at {label}", file=sys.stderr)
        f1, f2 = laws[i], laws[j]
        if isinstance(f1, families.ContinuousFamily):
            gaps, budget, _ = continuous_rasa_gap(
                f1, f2, spec.battery, spec.scale, grid_n=spec.grid_n
            )
            allowed = budget + spec.tol
        else:
            gaps = [rasa_gap(f1, f2, phi, spec.scale) for phi in spec.battery]
            allowed = spec.tol
        for phi, gap in zip(spec.battery, gaps):
            rows.append(GapReport(spec.family, label, phi, spec.scale, gap, regime))
            if ok:
                if worst is None or gap < worst[0]:
                    worst = (gap, label, phi.name)
                if gap < -allowed:
                    failures += 1
            elif worst_outside is None or gap < worst_outside[0]:
                worst_outside = (gap, label, phi.name)
    summary = {
        "family": spec.family,
        "rows": len(rows),
        "min_gap": scalar_to_json(worst[0]) if worst else None,
        "argmin": {"params": worst[1], "phi": worst[2]} if worst else None,
        "tol": spec.tol,
        "regime": regime,
        "hypothesis_violations": violations,
        "min_gap_outside_hypothesis": scalar_to_json(worst_outside[0]) if worst_outside else None,
        "failures": failures,
        "holds": failures == 0,
    }
    return rows, summary


def cmd_rasa_sweep(args: argparse.Namespace) -> int:
    spec = build_sweep(args)
    rows, summary = run_sweep(spec, args)
    if args.format == "json":
        payload = {
            "summary": summary,
            "rows": [dict(zip(GapReport.CSV_COLUMNS, r.csv_row())) for r in rows],
        }
        emit(args, payload)
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(GapReport.CSV_COLUMNS)
        writer.writerows(r.csv_row() for r in rows)
        summary_text = json.dumps(summary, indent=2) + "\n"
        if args.out:
            Path(args.out).write_text(buf.getvalue())
            sys.stdout.write(summary_text)
        else:
            sys.stdout.write(buf.getvalue())
            sys.stderr.write(summary_text)
    return EXIT_HOLDS if summary["holds"] else EXIT_FAILS


def cmd_muirhead(args: argparse.Namespace) -> int:
    p, q = parse_tuple(args.p), parse_tuple(args.q)
    if len(p) != len(args.measures) or len(q) != len(args.measures):
        raise InputError(f"--p and --q need {len(args.measures)} entries")
    if not leq(p, q):
        raise InputError(f"{p} is not majorized by {q}")
    laws = [parse_family(s, args.tail_eps) for s in args.measures]
    measures = as_measures(laws, args.grid_n, args.tail_eps)
    try:
        report = verify_muirhead(measures, p, q, _tol(args), unconditional=args.unconditional)
    except HypothesisError as exc:
        emit(args, {"hypothesis_failure": str(exc)})
        return EXIT_HYPOTHESIS
    emit(args, report.to_json())
    return EXIT_HOLDS if report.holds and report.consistent else EXIT_FAILS


def cmd_chain(args: argparse.Namespace) -> int:
    p, q = parse_tuple(args.p), parse_tuple(args.q)
    if len(p) != len(q):
        raise InputError("--p and --q differ in length")
    if not leq(p, q):
        raise InputError(f"{p} is not majorized by {q}")
    chain = transfer_chain(p, q)
    emit(args, {
        "chain": [list(t) for t in chain],
        "potential": [potential(t, q) for t in chain],
        "transfers": [list(satisfies_S(a, b)) for a, b in zip(chain, chain[1:])],
    })
    return EXIT_HOLDS


def cmd_counterexample(args: argparse.Namespace) -> int:
    if args.name not in REPRODUCTIONS:
        raise InputError(f"unknown counterexample {args.name!r}; choose from {sorted(REPRODUCTIONS)}")
    checks = REPRODUCTIONS[args.name]()
    ok = all(c.passed for c in checks)
    emit(args, {"name": args.name, "passed": ok, "checks": [c.to_json() for c in checks]})
    return EXIT_HOLDS if ok else EXIT_FAILS


_COUPLE_KINDS = {"poisson": "poisson", "nb": "negative_binomial",
                 "negative_binomial": "negative_binomial", "gamma": "gamma",
                 "beta": "beta", "normal": "normal"}


def cmd_couple(args: argparse.Namespace) -> int:
    if args.kind not in _COUPLE_KINDS:
        raise InputError(f"unknown coupling {args.kind!r}")
    kind = _COUPLE_KINDS[args.kind]
    params = [float(parse_number(v)) for v in args.params]
    if len(params) != len(couplings.PARAMS[kind]):
        raise InputError(f"{kind} takes {', '.join(couplings.PARAMS[kind])}")
    if args.n < 1:
        raise InputError("--n must be positive")
    try:
        sampler = couplings.CouplingSampler(kind, tuple(params))
    except HypothesisError as exc:
        raise InputError(str(exc)) from None
    seed = args.seed if args.seed is not None else 0
    report = couplings.audit(sampler, args.n, seed)
    threshold = couplings.ks_threshold(args.n)
    payload = report.to_json()
    payload["ks_threshold"] = threshold
    if args.pairs:
        import numpy as np

        x, y = sampler.draw(args.n, np.random.default_rng(seed))
        payload["pairs"] = [[float(a), float(b)] for a, b in zip(x, y)]
    ok = (
        report.dominance_violations == 0
        and report.ks_distance_x < threshold
        and report.ks_distance_y < threshold
    )
    payload["passed"] = ok
    emit(args, payload)
    return EXIT_HOLDS if ok else EXIT_FAILS


def cmd_eval_op(args: argparse.Namespace) -> int:
    phi = parse_phi(args.phi)
    x = parse_number(args.x)
    if args.kind == "beta":
        if args.t is None:
            raise InputError("beta operators need --t")
        params = (parse_number(args.t),)
    else:
        if args.n is None or int(args.n) < 1:
            raise InputError(f"{args.kind} operators need a positive --n")
        params = (int(args.n),)
    try:
        value = eval_operator(args.kind, params, phi, x, tail_eps=args.tail_eps)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    emit(args, {"operator": args.kind, "params": [str(v) for v in params],
                "phi": phi.name, "x": str(x), "value": scalar_to_json(value)})
    return EXIT_HOLDS


def cmd_eval_poly(args: argparse.Namespace) -> int:
    raw = args.poly
    try:
        data = json.loads(Path(raw[1:]).read_text() if raw.startswith("@") else raw)
        poly = DistributionPolynomial.from_json(data)
    except (OSError, KeyError, ValueError, TypeError) as exc:
        raise InputError(f"bad polynomial: {exc}") from None
    laws = [parse_family(s, args.tail_eps) for s in args.measures]
    measures = as_measures(laws, args.grid_n, args.tail_eps)
    try:
        result = eval_poly(poly, measures)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    payload = result.to_json()
    payload["mean"] = scalar_to_json(mean(result))
    emit(args, payload)
    return EXIT_HOLDS


# ----------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None,
                        help=f"comparison tolerance (default: 0 exact, {DEFAULT_TOL:g} float, 1e-08 float sweeps)")
    common.add_argument("--tail-eps", type=float, default=families.DEFAULT_TAIL_EPS,
                        help="truncation mass for Poisson / negative binomial laws")
    common.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="sweep output format (other commands always emit JSON)")
    common.add_argument("--out", default=None, help="write the main output here")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--grid-n", type=int, default=4000,
                        help="cells used to discretize continuous laws")

    parser = argparse.ArgumentParser(
        prog="stochorder", description="Verify stochastic and convex order statements."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, helptext in (("check-st", "decide A <=st B"), ("check-cx", "decide A <=cx B")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("a")
        p.add_argument("b")

    p = sub.add_parser("rasa-sweep", parents=[common], help="sweep Rasa-type gaps over a grid")
    p.add_argument("family", help="binom, poiss, baskakov, nb, gamma, beta or norm")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--x", default=None, help="grid of x (or of means for norm)")
    p.add_argument("--r", default=None)
    p.add_argument("--p", default=None)
    p.add_argument("--a", default=None)
    p.add_argument("--b", default=None)
    p.add_argument("--var", default=None)
    p.add_argument("--battery", type=int, default=9, help="number of stop-loss kinks")
    p.add_argument("--exp-scale", type=float, default=1.0)
    p.add_argument("--scale", default=None)
    p.add_argument("--domain", default=None, help="battery domain lo:hi")
    p.add_argument("--float", action="store_true", help="use float grids")

    p = sub.add_parser("muirhead", parents=[common], help="verify mu^(p) <=cx mu^(q)")
    p.add_argument("measures", nargs="+")
    p.add_argument("--p", required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--unconditional", action="store_true",
                   help="run even if the measures are not pairwise st-comparable")

    p = sub.add_parser("chain", parents=[common], help="print a transfer chain from p to q")
    p.add_argument("--p", required=True)
    p.add_argument("--q", required=True)

    p = sub.add_parser("counterexample", parents=[common], help="reproduce ex2.4 or ex3.9")
    p.add_argument("name")

    p = sub.add_parser("couple", parents=[common], help="audit a monotone coupling")
    p.add_argument("kind", help="poisson, nb, gamma, beta or normal")
    p.add_argument("params", nargs="+")
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--pairs", action="store_true", help="include the drawn pairs")

    p = sub.add_parser("eval-op", parents=[common], help="evaluate an operator at x")
    p.add_argument("kind", choices=("bernstein", "szasz", "baskakov", "beta"))
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--t", default=None)
    p.add_argument("--phi", required=True)
    p.add_argument("--x", required=True)

    p = sub.add_parser("eval-poly", parents=[common], help="substitute measures into a polynomial")
    p.add_argument("poly", help="polynomial JSON or @file")
    p.add_argument("measures", nargs="+")

    return parser


COMMANDS = {
    "check-st": lambda a: cmd_check(a, "st"),
    "check-cx": lambda a: cmd_check(a, "cx"),
    "rasa-sweep": cmd_rasa_sweep,
    "muirhead": cmd_muirhead,
    "chain": cmd_chain,
    "counterexample": cmd_counterexample,
    "couple": cmd_couple,
    "eval-op": cmd_eval_op,
    "eval-poly": cmd_eval_poly,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_HOLDS
    try:
        return COMMANDS[args.command](args)
    except (InputError, DefectBudgetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
