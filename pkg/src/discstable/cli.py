"""Command-line front end: ``discstable <subcommand> [options]``.

Exit codes: 0 success, 1 invalid parameters or usage, 2 a verification failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Any, Sequence

from . import moments as mom
from . import verify as ver
from .distributions import FAMILIES, SDS, DiscreteStableDist, from_dict
from .errors import DiscStableError, DomainError
from .pmf import pmf
from .sampler import RandomStream, sample
from .thinning import Bernoulli, ChebyshevPortly, ChebyshevThin, ModGeometric

OUTPUT_DIR_ENV = "DISCSTABLE_OUTPUT_DIR"
EXIT_OK, EXIT_DOMAIN, EXIT_FAILED = 0, 1, 2

_DIST_FLAGS = {
    "gamma": "gamma",
    "lambda": "lambda",
    "kappa": "kappa",
    "beta": "beta",
    "q": "q",
    "b": "b",
    "m": "m",
    "M": "M",
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of exiting with status 2."""

    def error(self, message: str):
        raise _UsageError(f"{self.prog}: {message}")


def _decimal(text: str) -> float:
    try:
        value = Decimal(text)
    except InvalidOperation:
        raise argparse.ArgumentTypeError(f"not a decimal number: {text!r}") from None
    if not value.is_finite():
        raise argparse.ArgumentTypeError(f"not a finite number: {text!r}")
    return float(value)


def _add_dist_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("distribution")
    g.add_argument("--family", choices=sorted(FAMILIES), required=False)
    g.add_argument("--dist", help="distribution as JSON, e.g. '{\"family\": \"PDS\", \"gamma\": 0.5, \"lambda\": 1}'")
    for flag in _DIST_FLAGS:
        g.add_argument(f"--{flag}", dest=f"d_{flag}", type=_decimal, default=None)


def _dist_from_args(args) -> DiscreteStableDist:
    if args.dist is not None:
        if args.family is not None or any(getattr(args, f"d_{f}") is not None for f in _DIST_FLAGS):
            raise _UsageError("--dist cannot be combined with --family or parameter flags")
        try:
            data = json.loads(args.dist)
        except json.JSONDecodeError as exc:
            raise _UsageError(f"--dist is not valid JSON: {exc}") from None
        return from_dict(data)
    if args.family is None:
        raise _UsageError("one of --family or --dist is required")
    data: dict[str, Any] = {"family": args.family}
    for flag, key in _DIST_FLAGS.items():
        v = getattr(args, f"d_{flag}")
        if v is not None:
            data[key] = v
    return from_dict(data)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="discstable", description="Discrete stable distributions.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--output", help=f"output file (relative paths resolve against ${OUTPUT_DIR_ENV})")

    p = sub.add_parser("pmf", help="probability mass function on a window")
    _add_dist_args(p)
    p.add_argument("--k-range", nargs=2, type=int, metavar=("LO", "HI"), required=True)
    common(p)

    p = sub.add_parser("sample", help="random draws")
    _add_dist_args(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--stream-id", type=int, default=0)
    common(p)

    p = sub.add_parser("moments", help="factorial and fractional moments")
    _add_dist_args(p)
    p.add_argument("--order", type=int, action="append", default=[], help="factorial moment order")
    p.add_argument("--r", type=_decimal, action="append", default=[], help="absolute moment order")
    p.add_argument("--at-one", choices=("reject", "limit"), default="reject")
    common(p)

    p = sub.add_parser("tail", help="tail constant check for SDS")
    _add_dist_args(p)
    p.add_argument("--x", type=int, action="append", default=[], help="tail points (default 50 100 200)")
    common(p)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", required=True, choices=sorted(_SUITES))
    _add_dist_args(p)
    p.add_argument("--op", choices=("Bernoulli", "ModGeometric", "ChebyshevThin", "ChebyshevPortly"))
    p.add_argument("--rule", choices=sorted(ver.LIMIT_RULES))
    p.add_argument("--p1", type=_decimal, default=None)
    p.add_argument("--p2", type=_decimal, default=None)
    p.add_argument("--gamma-prime", type=_decimal, default=None)
    p.add_argument("--seed", type=int, default=0)
    common(p)

    p = sub.add_parser("limits", help="(a, sup residual) table for a continuous-limit rule")
    p.add_argument("--rule", required=True, choices=sorted(ver.LIMIT_RULES))
    p.add_argument("--param", action="append", default=[], metavar="NAME=VALUE",
                   help="override a rule parameter (repeatable)")
    p.add_argument("--a", type=_decimal, action="append", default=[], help="scale sequence")
    common(p)
    return parser


# --- output -----------------------------------------------------------------------


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _csv_text(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _emit(args, text: str) -> None:
    if args.output is None:
        sys.stdout.write(text)
        return
    path = Path(args.output)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not path.is_absolute():
        path = Path(base) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# --- subcommands --------------------------------------------------------------------


def _cmd_pmf(args) -> int:
    dist = _dist_from_args(args)
    lo, hi = args.k_range
    if hi < lo:
        raise DomainError(f"k-range must satisfy LO <= HI, got {lo} {hi}")
    res = pmf(dist, lo, hi)
    pairs = [(int(k), float(p)) for k, p in zip(res.ks, res.probs)]
    if args.format == "csv":
        _emit(args, _csv_text(("k", "p_k"), pairs))
    else:
        _emit(args, _json_text({
            "dist": dist.to_dict(),
            "method": res.method,
            "k": [k for k, _ in pairs],
            "p_k": [p for _, p in pairs],
        }))
    return EXIT_OK


def _cmd_sample(args) -> int:
    dist = _dist_from_args(args)
    batch = sample(dist, args.n, RandomStream(args.seed, args.stream_id))
    if args.format == "csv":
        _emit(args, _csv_text(("value",), ((int(v),) for v in batch.values)))
    else:
        _emit(args, _json_text(batch.to_dict()))
    return EXIT_OK


def _cmd_moments(args) -> int:
    dist = _dist_from_args(args)
    if not args.order and not args.r:
        raise _UsageError("moments needs at least one --order or --r")
    rows = []
    for n in args.order:
        rows.append({"kind": "factorial", "order": n, "value": mom.factorial_moment(dist, n), "infinite": False})
    for r in args.r:
        ex = mom.moment_existence(dist, r)
        entry = {"kind": "absolute", "order": r, "exists": ex.exists, "threshold": ex.threshold, "basis": ex.basis}
        if isinstance(dist, SDS):
            mv = mom.fractional_moment_sds(dist.gamma, dist.lam, dist.kappa, r, m=dist.m, at_one=args.at_one)
            entry.update(value=None if mv.infinite else mv.value, infinite=mv.infinite, abs_error=mv.abs_error)
        rows.append(entry)
    rows = [{k: ("inf" if v == float("inf") else v) for k, v in row.items()} for row in rows]
    if args.format == "csv":
        _emit(args, _csv_text(("kind", "order", "value"), ((r["kind"], r["order"], r.get("value")) for r in rows)))
    else:
        _emit(args, _json_text({"dist": dist.to_dict(), "moments": rows}))
    return EXIT_OK


def _report_output(args, reports: list[ver.VerificationReport], suite: str) -> int:
    passed = all(r.passed for r in reports)
    if args.format == "csv":
        _emit(args, _csv_text(
            ("identity", "max_abs_residual", "tolerance", "passed"),
            ((r.identity, float(r.max_abs_residual), float(r.tolerance), str(r.passed).lower()) for r in reports),
        ))
    else:
        _emit(args, _json_text({"suite": suite, "passed": passed, "reports": [r.to_dict() for r in reports]}))
    return EXIT_OK if passed else EXIT_FAILED


def _cmd_tail(args) -> int:
    dist = _dist_from_args(args)
    if not isinstance(dist, SDS):
        raise DomainError(f"tail constants are available for family SDS, got {dist.family}")
    xs = tuple(args.x) or (50, 100, 200)
    rep = ver.verify_tail_constant(dist.gamma, dist.lam, dist.kappa, xs)
    return _report_output(args, [rep], "tail-constant")


_OPS = {
    "Bernoulli": (Bernoulli, {}),
    "ModGeometric": (ModGeometric, {"kappa": 0.5}),
    "ChebyshevThin": (ChebyshevThin, {"b": 0.0}),
    "ChebyshevPortly": (ChebyshevPortly, {}),
}


def _suite_first(args):
    return [ver.verify_first_sense(_dist_from_args(args))]


def _suite_second(args):
    return [ver.verify_second_sense(_dist_from_args(args))]


def _suite_third(args):
    dist = _dist_from_args(args)
    if hasattr(dist, "gamma"):
        default = 2.0 ** (-1.0 / dist.gamma)
    else:
        default = 1.0
    p1 = default if args.p1 is None else args.p1
    p2 = default if args.p2 is None else args.p2
    return [ver.verify_third_sense(dist, None, p1, p2)]


def _suite_commutativity(args):
    name = args.op or "ModGeometric"
    cls, shared = _OPS[name]
    if name == "ChebyshevPortly":
        pairs = [(2, 3), (1, 4), (3, 3), (2, 5), (4, 2)]
    else:
        pairs = [(0.3, 0.7), (0.5, 0.25), (0.1, 0.9), (0.45, 0.6), (0.8, 0.2)]
    return [ver.verify_commutativity(cls, pairs, **shared)]


def _suite_divisibility(args):
    return [ver.verify_infinite_divisibility(_dist_from_args(args))]


def _suite_limit(args):
    rules = [args.rule] if args.rule else sorted(ver.LIMIT_RULES)
    return [ver.verify_limit(ver.standard_limit_spec(r)) for r in rules]


def _suite_attraction(args):
    return [ver.verify_attraction(_dist_from_args(args))]


def _suite_mixture(args):
    dist = _dist_from_args(args)
    gp = args.gamma_prime if args.gamma_prime is not None else dist.gamma / 2.0
    return [
        ver.verify_mixture_characterization(gp, dist.gamma, dist.lam, dist.kappa),
        ver.verify_mixture_characterization(
            gp, dist.gamma, dist.lam, dist.kappa, method="monte_carlo", seed=args.seed
        ),
    ]


_SUITES = {
    "first-sense": _suite_first,
    "second-sense": _suite_second,
    "third-sense": _suite_third,
    "commutativity": _suite_commutativity,
    "infinite-divisibility": _suite_divisibility,
    "limit": _suite_limit,
    "attraction": _suite_attraction,
    "mixture": _suite_mixture,
}


def _cmd_verify(args) -> int:
    return _report_output(args, _SUITES[args.suite](args), args.suite)


def _cmd_limits(args) -> int:
    spec = ver.standard_limit_spec(args.rule)
    params = dict(spec.params)
    for item in args.param:
        name, sep, value = item.partition("=")
        if not sep or name not in params:
            raise DomainError(f"--param must be NAME=VALUE with NAME in {sorted(params)}, got {item!r}")
        params[name] = _decimal(value)
    spec = ver.LimitSpec(args.rule, params, tuple(args.a) or spec.a)
    rows = ver.limit_table(spec)
    if args.format == "csv":
        _emit(args, _csv_text(("a", "residual"), rows))
    else:
        _emit(args, _json_text({
            "rule": args.rule,
            "coupling": ver.LIMIT_RULES[args.rule].coupling,
            "params": params,
            "table": [{"a": a, "residual": r} for a, r in rows],
        }))
    return EXIT_OK


_COMMANDS = {
    "pmf": _cmd_pmf,
    "sample": _cmd_sample,
    "moments": _cmd_moments,
    "tail": _cmd_tail,
    "verify": _cmd_verify,
    "limits": _cmd_limits,
}


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (DiscStableError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


def main() -> None:
    sys.exit(run())
