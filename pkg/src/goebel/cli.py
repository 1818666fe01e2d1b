"""Command-line front end.

Exit codes: 0 success, 1 runtime failure (step budget, or a scan with no
usable row), 2 usage error, 3 only a lower bound on N_k was established,
4 theorem verification failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time

from goebel.exact import DEFAULT_DIGIT_BUDGET, DigitBudgetExceeded, exact_terms
from goebel.solver import (
    DEFAULT_INITIAL_BOUND,
    DEFAULT_MAX_BOUND,
    BoundPolicy,
    BudgetExceeded,
    compute_Nk,
    construct_k_for_m,
    sweep,
    verify_theorem,
)

SCHEMA_VERSION = "1.0"
CSV_COLUMNS = ("k", "n_k", "witness_prime", "n_k_is_prime", "cache_hit")
MAX_BOUND_ENV = "GOEBEL_MAX_BOUND"

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_LOWER_BOUND = 3
EXIT_NOT_VERIFIED = 4


def envelope(command: str, parameters: dict, results, timings: dict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "parameters": parameters,
        "results": results,
        "timings": timings,
    }


def _emit_json(payload: dict, out=None) -> None:
    out = out or sys.stdout
    json.dump(payload, out, indent=2)
    out.write("\n")


def _default_max_bound(parser: argparse.ArgumentParser) -> int:
    raw = os.environ.get(MAX_BOUND_ENV)
    if raw is None:
        return DEFAULT_MAX_BOUND
    try:
        return int(raw)
    except ValueError:
        parser.error(f"{MAX_BOUND_ENV} must be an integer, got {raw!r}")


def _resolve_bounds(parser, args) -> BoundPolicy:
    max_bound = args.max_bound if args.max_bound is not None else _default_max_bound(parser)
    if max_bound < 2:
        parser.error(f"max bound must be >= 2, got {max_bound}")
    if args.initial_bound < 2:
        parser.error(f"--initial-bound must be >= 2, got {args.initial_bound}")
    if args.step_budget is not None and args.step_budget < 1:
        parser.error("--step-budget must be positive")
    return BoundPolicy(min(args.initial_bound, max_bound), max_bound, args.step_budget)


def _bound_params(policy: BoundPolicy) -> dict:
    return {
        "initial_bound": policy.initial_bound,
        "max_bound": policy.max_bound,
        "step_budget": policy.step_budget,
    }


def _bool_cell(value) -> str:
    if value is None:
        return ""
    return "true" if value else "false"


# -- term ---------------------------------------------------------------


def cmd_term(parser, args) -> int:
    if args.k < 2:
        parser.error("--k must be >= 2")
    if args.l < 2:
        parser.error("--l must be >= 2")
    if args.n < 1:
        parser.error("--n must be >= 1")
    if args.max_digits < 1:
        parser.error("--max-digits must be >= 1")
    start = time.perf_counter()
    try:
        terms = exact_terms(args.k, args.l, args.n, args.max_digits)
        truncated = False
    except DigitBudgetExceeded as exc:
        terms = exc.terms
        truncated = True
    elapsed = time.perf_counter() - start

    if args.json:
        rows = [
            {
                "n": t.n,
                "numerator": str(t.numerator),
                "denominator": str(t.denominator),
                "is_integer": t.is_integer,
                "digit_count": t.digit_count,
            }
            for t in terms
        ]
        params = {"k": args.k, "l": args.l, "n": args.n, "max_digits": args.max_digits}
        results = {"terms": rows, "reached": len(terms), "truncated": truncated}
        _emit_json(envelope("term", params, results, {"total": elapsed}))
    else:
        for t in terms:
            print(f"{t.n}\t{t.value}\tdigits={t.digit_count}")
        if truncated:
            print(
                f"# truncated after n={len(terms)}: next term exceeds {args.max_digits} digits",
                file=sys.stderr,
            )
    return EXIT_OK


# -- nk -----------------------------------------------------------------


def nk_payload(res) -> dict:
    return {
        "k": res.k,
        "l": res.l,
        "exact": res.is_exact,
        "n_k": res.n_k,
        "witness_prime": res.witness_prime,
        "lower_bound": res.lower_bound,
        "bound_used": res.bound_used,
    }


def cmd_nk(parser, args) -> int:
    if args.k < 2:
        parser.error("--k must be >= 2")
    if args.l < 2:
        parser.error("--l must be >= 2")
    policy = _resolve_bounds(parser, args)
    try:
        res = compute_Nk(
            args.k, args.l, policy.initial_bound, policy.max_bound,
            step_budget=policy.step_budget,
        )
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    if args.json:
        params = {"k": args.k, "l": args.l, **_bound_params(policy)}
        _emit_json(envelope("nk", params, nk_payload(res), {"total": res.elapsed}))
    else:
        line = str(res)
        if res.is_exact:
            line += f" (witness prime {res.witness_prime})"
        print(line)
    return EXIT_OK if res.is_exact else EXIT_LOWER_BOUND


# -- scan ---------------------------------------------------------------


def scan_row(rec) -> dict:
    return {
        "k": rec.k,
        "n_k": rec.n_k_field,
        "witness_prime": rec.witness_prime,
        "n_k_is_prime": rec.n_k_is_prime,
        "cache_hit": rec.cache_hit,
    }


def write_csv(records, out) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        writer.writerow(
            [
                rec.k,
                rec.n_k_field,
                "" if rec.witness_prime is None else rec.witness_prime,
                _bool_cell(rec.n_k_is_prime),
                _bool_cell(rec.cache_hit),
            ]
        )


def summary_line(k_from, k_to, summary) -> str:
    if summary["min_n_k"] is None:
        head = "no exact N_k"
    else:
        argmin = ",".join(map(str, summary["argmin_k"][:10]))
        if len(summary["argmin_k"]) > 10:
            argmin += ",..."
        head = f"min N_k = {summary['min_n_k']} at k={argmin}; max N_k = {summary['max_n_k']}"
    frac = summary["prime_fraction"]
    frac_text = "n/a" if frac is None else f"{frac:.4f}"
    return (
        f"scan k={k_from}..{k_to}: {head}; prime fraction {frac_text} "
        f"({summary['prime_count']}/{summary['exact_count']}); "
        f"lower bounds {summary['lower_bound_count']}; errors {summary['error_count']}"
    )


def cmd_scan(parser, args) -> int:
    if args.k_from < 2:
        parser.error("--k-from must be >= 2")
    if args.k_to < args.k_from:
        parser.error("--k-to must be >= --k-from")
    if args.l < 2:
        parser.error("--l must be >= 2")
    if args.jobs < 1:
        parser.error("--jobs must be >= 1")
    policy = _resolve_bounds(parser, args)
    start = time.perf_counter()
    result = sweep(
        args.k_from, args.k_to, args.l, policy, args.jobs,
        accelerate=not args.no_accelerate,
    )
    compute_time = time.perf_counter() - start

    buf = io.StringIO()
    if args.out == "csv":
        write_csv(result.records, buf)
    else:
        params = {
            "k_from": args.k_from,
            "k_to": args.k_to,
            "l": args.l,
            "jobs": args.jobs,
            **_bound_params(policy),
        }
        results = {
            "rows": [scan_row(rec) for rec in result.records],
            "summary": result.summary,
        }
        timings = {"sweep": compute_time, "total": time.perf_counter() - start}
        _emit_json(envelope("scan", params, results, timings), buf)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    print(summary_line(args.k_from, args.k_to, result.summary), file=sys.stderr)
    if not any(rec.ok for rec in result.records):
        return EXIT_FAILURE
    return EXIT_OK


# -- construct / verify-theorem -------------------------------------------


def cmd_construct(parser, args) -> int:
    if args.m < 1:
        parser.error("--m must be >= 1")
    w = construct_k_for_m(args.m)
    if args.json:
        results = {"m": w.m, "modulus": w.modulus, "k": w.k}
        _emit_json(envelope("construct", {"m": args.m}, results, {"total": 0.0}))
    else:
        print(f"m = {w.m}\tm!/m# = {w.modulus}\tk = {w.k}")
    return EXIT_OK


def cmd_verify_theorem(parser, args) -> int:
    if args.m_max < 1:
        parser.error("--m-max must be >= 1")
    if args.l < 2:
        parser.error("--l must be >= 2")
    policy = _resolve_bounds(parser, args)
    start = time.perf_counter()
    checks = verify_theorem(args.m_max, policy, args.l)
    elapsed = time.perf_counter() - start
    all_ok = all(c.verified for c in checks)
    if args.json:
        rows = [
            {
                "m": c.m,
                "modulus": c.modulus,
                "k": c.k,
                "n_k": c.result.n_k if c.result else None,
                "lower_bound": c.result.lower_bound if c.result else None,
                "witness_prime": c.result.witness_prime if c.result else None,
                "verified": c.verified,
                "error": c.error,
            }
            for c in checks
        ]
        params = {"m_max": args.m_max, "l": args.l, **_bound_params(policy)}
        results = {"rows": rows, "all_verified": all_ok}
        _emit_json(envelope("verify-theorem", params, results, {"total": elapsed}))
    else:
        print("m\tm!/m#\tk\tresult\tverified")
        for c in checks:
            outcome = str(c.result) if c.result else f"error: {c.error}"
            print(f"{c.m}\t{c.modulus}\t{c.k}\t{outcome}\t{'yes' if c.verified else 'NO'}")
    return EXIT_OK if all_ok else EXIT_NOT_VERIFIED


# -- parser ---------------------------------------------------------------


def _add_bound_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--max-bound", type=int, default=None,
        help=f"deepening cap (default ${MAX_BOUND_ENV} or {DEFAULT_MAX_BOUND})",
    )
    p.add_argument("--initial-bound", type=int, default=DEFAULT_INITIAL_BOUND)
    p.add_argument("--step-budget", type=int, default=None,
                   help="abort after this many modular steps")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="goebel", description="Integrality of k-Göbel sequences."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("term", help="exact terms of the sequence")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--l", type=int, default=2)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--max-digits", type=int, default=DEFAULT_DIGIT_BUDGET)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_term)

    p = sub.add_parser("nk", help="first non-integer index N_k")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--l", type=int, default=2)
    _add_bound_flags(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_nk)

    p = sub.add_parser("scan", help="N_k over a range of k")
    p.add_argument("--k-from", type=int, required=True)
    p.add_argument("--k-to", type=int, required=True)
    p.add_argument("--l", type=int, default=2)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", choices=("csv", "json"), default="csv")
    p.add_argument("--output", help="write to this file instead of stdout")
    p.add_argument("--no-accelerate", action="store_true",
                   help="skip the compiled kernel for word-sized moduli")
    _add_bound_flags(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("construct", help="k with N_k > m")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("verify-theorem", help="check N_k > m for the constructed k, m = 1..m_max")
    p.add_argument("--m-max", type=int, required=True)
    p.add_argument("--l", type=int, default=2)
    _add_bound_flags(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify_theorem)
    return parser


def main(argv=None) -> int:
    if hasattr(sys, "set_int_max_str_digits"):
        sys.set_int_max_str_digits(0)
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(parser, args)


if __name__ == "__main__":
    sys.exit(main())
