"""Batch command-line interface.

Every command prints one JSON document (or CSV table) on stdout and
diagnostics on stderr.  Exit status: 0 on success, 1 on a numerical
failure (non-convergence, degenerate parameters, failed verification),
2 on bad arguments.
"""
from __future__ import annotations

import argparse
import cmath
import contextlib
import csv
import io
import json
import math
import sys
import time
import warnings
from typing import Sequence

from .blocks import BlockParams, coeff_direct, coeff_product_form
from .errors import BlocksError, MissingParameterError
from .matrixmodel import moments, mgf
from .partitions import Partition
from .specfun import SeriesControl
from .tau import REQUIRED_THETAS, ROUTES, Equation, TauConfig, block_partial_sum, tau_series
from .verify import IDENTITIES, rel_err, run_identity_suite

SCHEMA_VERSION = 1
# pairwise relative difference below which two routes are reported as agreeing
ROUTE_AGREEMENT_TOL = 1e-7

THETA_FLAGS = {
    "theta_0": "--theta-0",
    "theta_t": "--theta-t",
    "theta_1": "--theta-1",
    "theta_inf": "--theta-inf",
    "theta_star": "--theta-star",
    "theta_star2": "--theta-star2",
}


class UsageError(Exception):
    """Argument problem detected after parsing; maps to exit status 2."""


def parse_complex(text: str) -> complex:
    """Parse ``"a+bi"``, ``"a-bi"``, ``"a"``, ``"bi"`` or ``"i"`` (``j`` is accepted for ``i``)."""
    s = text.strip().replace(" ", "")
    if not s:
        raise ValueError("empty complex literal")
    if s[-1] in "iI" and not s.lower().endswith("inf"):
        s = s[:-1] + "j"
    try:
        z = complex(s)
    except ValueError:
        raise ValueError(f"not a complex literal: {text!r}") from None
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"complex literal must be finite: {text!r}")
    return z


def format_complex(z: complex) -> str:
    """Inverse of :func:`parse_complex`: ``parse_complex(format_complex(z)) == z`` exactly."""
    z = complex(z)
    sign = "+" if math.copysign(1.0, z.imag) > 0 else "-"
    return f"{z.real!r}{sign}{abs(z.imag)!r}i"


def parse_complex_list(text: str) -> tuple[complex, ...]:
    text = text.strip()
    if not text:
        return ()
    return tuple(parse_complex(part) for part in text.split(","))


def _arg_type(fn, what: str):
    def convert(text: str):
        try:
            return fn(text)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"invalid {what}: {exc}") from None

    convert.__name__ = what
    return convert


COMPLEX = _arg_type(parse_complex, "complex")
COMPLEX_LIST = _arg_type(parse_complex_list, "complex list")
PARTITION = _arg_type(Partition.parse, "partition")


def _positive_int(text: str) -> int:
    n = int(text)
    if n < 1:
        raise ValueError("must be >= 1")
    return n


def _nonneg_int(text: str) -> int:
    n = int(text)
    if n < 0:
        raise ValueError("must be >= 0")
    return n


def _precision(text: str):
    if text in ("auto", "double"):
        return text
    n = int(text)
    if n < 16:
        raise ValueError("explicit precision must be at least 16 digits")
    return n


POS_INT = _arg_type(_positive_int, "positive integer")
NONNEG_INT = _arg_type(_nonneg_int, "non-negative integer")
PRECISION = _arg_type(_precision, "precision")
REL_TOL = _arg_type(lambda s: SeriesControl(rel_tol=float(s)).rel_tol, "relative tolerance")


def _add_output(p: argparse.ArgumentParser):
    p.add_argument("--output", choices=("json", "csv"), default="json", help="output format")
    p.add_argument("--out", metavar="FILE", help="also write the output to FILE")


def _add_block_params(p: argparse.ArgumentParser, K_default: int | None = 1):
    p.add_argument("--a", type=COMPLEX_LIST, default=(), help='parameter list, e.g. "0.1+0.2i,-0.3" ("" for none)')
    p.add_argument("--sigma", type=COMPLEX, required=True, help="shift sigma (2*sigma must not be an integer)")
    if K_default is None:
        p.add_argument("--K", type=POS_INT, default=None, help="length cap (default: longest input partition, >= 1)")
    else:
        p.add_argument("--K", type=POS_INT, default=K_default, help="length cap on the partitions")


def _add_point(p: argparse.ArgumentParser):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--t", type=COMPLEX, help="expansion variable t")
    g.add_argument("--u", type=COMPLEX, help="log-variable u, t = exp(u)")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(
        prog="painleve-blocks",
        description="Length-restricted Painleve conformal blocks, matrix-model moments and tau expansions.",
        formatter_class=fmt,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coeff", help="one coefficient B_{lambda,mu}(a; sigma)", formatter_class=fmt)
    p.add_argument("--lambda", dest="lam", type=PARTITION, default=Partition(()), help='partition, e.g. "3,1"')
    p.add_argument("--mu", type=PARTITION, default=Partition(()), help='partition ("" for the empty one)')
    _add_block_params(p, K_default=None)
    p.add_argument(
        "--route",
        choices=("direct", "product", "all"),
        default="direct",
        help="direct box product, particle product form, or both",
    )
    _add_output(p)

    p = sub.add_parser("partial-sum", help="K-restricted partial sum B_K(a; sigma; t)", formatter_class=fmt)
    _add_block_params(p)
    _add_point(p)
    p.add_argument("--route", choices=ROUTES + ("all",), default="hankel", help="evaluation route")
    p.add_argument("--max-weight", type=NONNEG_INT, default=20, help="weight cutoff for direct/balanced")
    p.add_argument("--rel-tol", type=REL_TOL, default=1e-14, help="series stopping tolerance (hankel)")
    p.add_argument("--precision", type=PRECISION, default="auto", help="hankel precision: auto, double or digits")
    _add_output(p)

    p = sub.add_parser("mgf", help="moment generating function psi(u)", formatter_class=fmt)
    _add_block_params(p)
    _add_point(p)
    p.add_argument("--q", type=COMPLEX, default=1 + 0j, help="value of the bookkeeping variable q")
    p.add_argument("--rel-tol", type=REL_TOL, default=1e-14, help="series stopping tolerance")
    _add_output(p)

    p = sub.add_parser("tau", help="truncated tau-function expansion", formatter_class=fmt)
    p.add_argument("--equation", choices=[e.value for e in Equation], required=True)
    for name, flag in THETA_FLAGS.items():
        p.add_argument(flag, dest=name, type=COMPLEX, default=None, help=f"{name} (when the equation needs it)")
    p.add_argument("--sigma", type=COMPLEX, required=True, help="sigma")
    p.add_argument("--s", type=COMPLEX, default=1 + 0j, help="integration constant s")
    p.add_argument("--t", type=COMPLEX, required=True, help="time variable t")
    p.add_argument("--K", type=POS_INT, default=2, help="length cap on the partitions")
    p.add_argument("--n-range", type=NONNEG_INT, default=2, help="sum over n in [-n_range, n_range]")
    p.add_argument("--route", choices=ROUTES + ("all",), default="hankel", help="block evaluation route")
    p.add_argument("--max-weight", type=NONNEG_INT, default=20, help="weight cutoff for direct/balanced")
    _add_output(p)

    p = sub.add_parser("verify", help="randomised identity sweep", formatter_class=fmt)
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--K", type=POS_INT, default=3, help="largest length cap drawn")
    p.add_argument("--max-weight", type=NONNEG_INT, default=6, help="weight bound on each partition")
    p.add_argument("--trials", type=POS_INT, default=10, help="number of random parameter sets")
    p.add_argument("--tol", type=float, default=1e-9, help="relative tolerance for a pass")
    _add_output(p)
    return parser


def _plain(x):
    """Recursively convert to JSON-safe values (complex -> {re, im}, non-finite floats -> strings)."""
    if isinstance(x, complex):
        return {"re": _plain(x.real), "im": _plain(x.imag)}
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, float):
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, Partition):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if hasattr(x, "item"):  # numpy scalars
        return _plain(x.item())
    return str(x)


def _echo(args) -> dict:
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in ("output", "out") or v is None:
            continue
        if isinstance(v, complex):
            v = format_complex(v)
        elif isinstance(v, tuple) and all(isinstance(c, complex) for c in v):
            v = ",".join(format_complex(c) for c in v)
        elif isinstance(v, Partition):
            v = str(v)
        out[k] = v
    return out


def _point(args) -> tuple[complex, complex | None]:
    """(t, u); u is None when t = 0."""
    if args.u is not None:
        return cmath.exp(args.u), args.u
    t = args.t
    return t, (cmath.log(t) if t != 0 else None)


def _pairwise(values: dict[str, complex]) -> dict[str, float]:
    names = list(values)
    return {
        f"{a}-{b}": rel_err(values[a], values[b]) for i, a in enumerate(names) for b in names[i + 1 :]
    }


def _cmd_coeff(args, notes: list[str]) -> dict:
    K = args.K or max(1, args.lam.length, args.mu.length)
    if max(args.lam.length, args.mu.length) > K:
        raise UsageError(f"partitions must have at most K={K} parts")
    routes = ("direct", "product") if args.route == "all" else (args.route,)
    try:
        params = BlockParams(args.a, args.sigma, K)
        values = {}
        for r in routes:
            fn = coeff_direct if r == "direct" else coeff_product_form
            values[r] = fn(args.lam, args.mu, params)
    except ValueError as exc:
        if isinstance(exc, BlocksError):
            raise
        raise UsageError(str(exc)) from None
    out = {"value": values[routes[0]], "route": args.route, "tail_estimate": 0.0}
    if len(routes) > 1:
        out["routes"] = {r: {"value": v} for r, v in values.items()}
        out["pairwise_rel_diff"] = _pairwise(values)
    return out


def _partial_sum(route: str, params: BlockParams, t: complex, u: complex | None, args):
    ctl = SeriesControl(rel_tol=args.rel_tol)
    if route == "hankel" and u is not None:
        return block_partial_sum(t, params, route, args.max_weight, ctl=ctl, precision=args.precision)
    return block_partial_sum(t, params, route, args.max_weight)


def _cmd_partial_sum(args, notes: list[str]) -> dict:
    t, u = _point(args)
    params = BlockParams(args.a, args.sigma, args.K)
    routes = ROUTES if args.route == "all" else (args.route,)
    results = {r: _partial_sum(r, params, t, u, args) for r in routes}
    for res in results.values():
        notes.extend(res.warnings)
    first = results[routes[0]]
    out = {"value": first.value, "route": args.route, "tail_estimate": first.tail_estimate}
    if len(routes) > 1:
        out["routes"] = {
            r: {"value": res.value, "tail_estimate": res.tail_estimate, "extra": _route_extra(res)}
            for r, res in results.items()
        }
        diffs = _pairwise({r: res.value for r, res in results.items()})
        out["pairwise_rel_diff"] = diffs
        out["agreement_tolerance"] = ROUTE_AGREEMENT_TOL
        bad = [k for k, d in diffs.items() if d > ROUTE_AGREEMENT_TOL]
        if bad:
            notes.append(f"routes disagree beyond {ROUTE_AGREEMENT_TOL:g}: {', '.join(bad)}")
    else:
        out["extra"] = _route_extra(first)
    return out


def _route_extra(res) -> dict:
    keep = ("dps", "lost_digits", "samples")
    return {k: v for k, v in res.extra.items() if k in keep}


def _cmd_mgf(args, notes: list[str]) -> dict:
    t, u = _point(args)
    if u is None:
        raise UsageError("mgf needs t != 0")
    params = BlockParams(args.a, args.sigma, args.K)
    ctl = SeriesControl(rel_tol=args.rel_tol)
    val = mgf(u, params, ctl)
    lattice = moments(u, params, count=1, ctl=ctl)
    direct = args.q * lattice.plus[0] + lattice.minus[0] / args.q
    value = val.at(args.q)
    return {
        "value": value,
        "route": "pfq",
        "tail_estimate": abs(args.q) * val.tail_plus + val.tail_minus / abs(args.q),
        "components": {"q": val.plus, "q^-1": val.minus},
        "lattice_sum": direct,
        "lattice_rel_diff": rel_err(value, direct),
    }


def _tau_config(args, route: str) -> TauConfig:
    thetas = {name: getattr(args, name) for name in THETA_FLAGS if getattr(args, name) is not None}
    eq = Equation(args.equation)
    missing = [THETA_FLAGS[n] for n in REQUIRED_THETAS[eq] if n not in thetas]
    if missing:
        raise UsageError(f"{eq.value} needs {', '.join(missing)}")
    return TauConfig(eq, thetas, args.sigma, args.s, args.n_range, args.K, route, args.max_weight)


def _cmd_tau(args, notes: list[str]) -> dict:
    if args.t == 0:
        raise UsageError("tau needs t != 0")
    routes = ROUTES if args.route == "all" else (args.route,)
    results = {r: tau_series(_tau_config(args, r), args.t) for r in routes}
    for res in results.values():
        notes.extend(res.warnings)
    first = results[routes[0]]
    out = {
        "value": first.value,
        "route": args.route,
        "tail_estimate": first.truncation_estimate,
        "prefactor": first.prefactor,
        "terms": [
            {
                "n": tm.n,
                "value": tm.value,
                "block": tm.block,
                "block_tail": tm.block_tail,
                "structure_constant": tm.structure_constant,
            }
            for tm in first.terms
        ],
    }
    if len(routes) > 1:
        out["routes"] = {r: {"value": res.value, "tail_estimate": res.truncation_estimate} for r, res in results.items()}
        out["pairwise_rel_diff"] = _pairwise({r: res.value for r, res in results.items()})
        out["agreement_tolerance"] = ROUTE_AGREEMENT_TOL
    return out


def _cmd_verify(args, notes: list[str]) -> dict:
    reports = run_identity_suite(
        seed=args.seed, max_weight=args.max_weight, K=args.K, trials=args.trials, tolerance=args.tol
    )
    ok = all(r.passed for r in reports.values())
    return {
        "value": None,
        "route": None,
        "tail_estimate": None,
        "passed": ok,
        "identities": {
            name: {
                "passed": r.passed,
                "max_rel_error": r.max_rel_error,
                "checks": r.checks,
                "worst_case": r.worst,
            }
            for name, r in reports.items()
        },
    }


COMMANDS = {
    "coeff": _cmd_coeff,
    "partial-sum": _cmd_partial_sum,
    "mgf": _cmd_mgf,
    "tau": _cmd_tau,
    "verify": _cmd_verify,
}


def _csv_rows(command: str, doc: dict) -> list[list]:
    def cell(z):
        z = complex(z)
        return [repr(z.real), repr(z.imag)]

    if command == "verify":
        rows = [["identity", "passed", "max_rel_error", "checks"]]
        for name in IDENTITIES:
            r = doc["identities"][name]
            rows.append([name, r["passed"], repr(r["max_rel_error"]), r["checks"]])
        return rows
    if command == "tau":
        rows = [["n", "re", "im", "block_re", "block_im"]]
        for tm in doc["terms"]:
            rows.append([tm["n"], *cell(tm["value"]), *cell(tm["block"])])
        rows.append(["total", *cell(doc["value"]), "", ""])
        return rows
    rows = [["route", "re", "im", "tail_estimate"]]
    if "routes" in doc:
        for r, d in doc["routes"].items():
            rows.append([r, *cell(d["value"]), repr(d.get("tail_estimate", 0.0))])
    else:
        rows.append([doc["route"], *cell(doc["value"]), repr(doc["tail_estimate"])])
    return rows


def _render(command: str, doc: dict, fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(_csv_rows(command, doc))
        return buf.getvalue()
    return json.dumps(_plain(doc), indent=2) + "\n"


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    """Parse ``argv``, run the command, write the output; returns the exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
            args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    notes: list[str] = []
    start = time.perf_counter()
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            body = COMMANDS[args.command](args, notes)
        notes.extend(str(w.message) for w in caught)
    except (UsageError, MissingParameterError) as exc:
        print(f"{parser.prog} {args.command}: error: {exc.args[0] if exc.args else exc}", file=stderr)
        return 2
    except (BlocksError, ArithmeticError) as exc:
        print(f"{parser.prog} {args.command}: numerical failure: {exc}", file=stderr)
        return 1
    except ValueError as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=stderr)
        return 2
    elapsed = (time.perf_counter() - start) * 1000

    # de-duplicate while keeping first-seen order
    seen: dict[str, None] = {}
    for n in notes:
        seen.setdefault(n, None)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": args.command,
        "inputs": _echo(args),
        **body,
        "warnings": list(seen),
        "timing_ms": round(elapsed, 3),
    }
    for n in seen:
        print(f"warning: {n}", file=stderr)
    text = _render(args.command, doc, args.output)
    stdout.write(text)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    if args.command == "verify" and not doc["passed"]:
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
