"""Command-line interface.

Subcommands:
  bound      compute a certified multiplicity bound c_n (writes report + certificate)
  verify     independently re-verify a certificate file
  corollary  turn a certified c_n and a simple-zero proportion into a
             distinct-zero proportion lower bound
  paircorr   empirical pair-correlation table for a zeros file

Exit codes: 0 success (bound: certified), 1 usage/input error,
2 solver succeeded but certification failed.
Default precision can be set with the ZETAMULT_PRECISION environment
variable; flags override it.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from .ball import decimal_lower, decimal_upper
from .bounds import (
    BoundQuery,
    compute_cn,
    distinct_zero_bound,
    write_report,
)
from .certify import CertificationError, CertificateInvalid, verify_certificate_file, write_certificate
from .paircorr import (
    ZeroDataError,
    compare_report,
    load_zeros,
    write_paircorr_report,
)

DEFAULT_PRECISION_ENV = "ZETAMULT_PRECISION"


def _default_precision() -> int:
    raw = os.environ.get(DEFAULT_PRECISION_ENV)
    if raw:
        try:
            return int(raw)
        except ValueError:
            pass
    return 256


def _fraction_arg(s: str) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational: {s!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zetamult",
        description="Certified multiplicity bounds for zeros of Dedekind zeta "
        "functions and empirical pair-correlation tools.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bound", help="compute a certified c_n bound")
    b.add_argument("--n", type=int, required=True, help="field degree (>= 1)")
    b.add_argument("--d", type=int, default=20, help="polynomial degree parameter")
    b.add_argument("--method", choices=("gauss", "bandlimit"), default="gauss")
    b.add_argument("--support-T", type=_fraction_arg, default=Fraction(1),
                   help="bandlimit support parameter T (f supported on [-T, T])")
    b.add_argument("--precision", type=int, default=None, help="working precision bits")
    b.add_argument("--digits", type=int, default=10, help="certified digits target")
    b.add_argument("--sigma", type=_fraction_arg, default=Fraction(1),
                   help="extra geometric basis scale (gauss)")
    b.add_argument("--out", default=None, help="report path (JSON)")
    b.add_argument("--cert", default=None, help="certificate path")
    b.add_argument("--format", choices=("json", "text"), default="text")

    v = sub.add_parser("verify", help="re-verify a certificate independently")
    v.add_argument("certificate", help="certificate file path")

    c = sub.add_parser("corollary", help="distinct-zero proportion from c_n and s_n")
    src = c.add_mutually_exclusive_group(required=True)
    src.add_argument("--c-report", help="bound report JSON (uses certified upper)")
    src.add_argument("--c", type=_fraction_arg, help="literal c_n value")
    c.add_argument("--s", type=_fraction_arg, required=True,
                   help="simple-zero proportion lower bound s_n in [0,1]")
    c.add_argument("--s-provenance", default="",
                   help="where s_n comes from (recorded in the output)")

    p = sub.add_parser("paircorr", help="empirical pair correlation of a zeros file")
    p.add_argument("--zeros", required=True, help="ordinates file (one per line, # comments)")
    p.add_argument("--n", type=int, required=True, help="field degree")
    p.add_argument("--T", type=float, required=True, help="window height")
    p.add_argument("--alpha", required=True,
                   help="grid spec start:stop:step (inclusive) or comma list")
    p.add_argument("--multiset", action="store_true",
                   help="allow repeated ordinates (multiplicities by repetition)")
    p.add_argument("--out", default=None, help="report path")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    return parser


def parse_alpha_grid(spec: str) -> list[float]:
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError("grid spec must be start:stop:step")
        start, stop, step = (float(x) for x in parts)
        if step <= 0:
            raise ValueError("grid step must be positive")
        out = []
        k = 0
        while True:
            val = start + k * step
            if val > stop + 1e-12:
                break
            out.append(round(val, 12))
            k += 1
        return out
    return [float(x) for x in spec.split(",") if x.strip()]


def cmd_bound(args) -> int:
    precision = args.precision if args.precision is not None else _default_precision()
    try:
        query = BoundQuery(
            n=args.n,
            d=args.d,
            method=args.method,
            support_T=args.support_T,
            precision=precision,
            digits=args.digits,
            sigma=args.sigma,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        report = compute_cn(query)
    except CertificationError as exc:
        print(f"certification failed: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    cert_path = args.cert or (args.out or f"bound_n{args.n}_{args.method}_d{args.d}") + ".cert"
    write_certificate(report.certificate, cert_path)
    if args.out:
        write_report(report, args.out)

    upper = decimal_upper(report.certified_upper, 15)
    if args.format == "json":
        print(json.dumps(report.to_json_dict(), indent=2, sort_keys=True))
    else:
        print(f"certified c_{args.n} <= {upper}   [{args.method}, d={args.d}]")
        print(f"solver objective {report.solver_objective!r} ({report.solver_status}, "
              f"{report.solver_iterations} iterations)")
        print(f"certificate: {cert_path}")
    return 0


def cmd_verify(args) -> int:
    try:
        result = verify_certificate_file(args.certificate)
    except FileNotFoundError:
        print(f"error: no such certificate: {args.certificate}", file=sys.stderr)
        return 1
    except CertificateInvalid as exc:
        print(f"INVALID: {exc}", file=sys.stderr)
        return 1
    print(f"OK: {result['method']} n={result['n']} d={result['d']} "
          f"bound_upper={decimal_upper(result['bound_upper'], 15)}")
    return 0


def cmd_corollary(args) -> int:
    if not (0 <= args.s <= 1):
        print("error: --s must lie in [0, 1]", file=sys.stderr)
        return 1
    if args.c_report:
        try:
            with open(args.c_report) as fh:
                data = json.load(fh)
            from .ball import parse_decimal

            c_value = parse_decimal(data["certified_upper"])
            origin = f"report {args.c_report}"
        except (OSError, KeyError, ValueError) as exc:
            print(f"error reading report: {exc}", file=sys.stderr)
            return 1
    else:
        c_value = args.c
        origin = "literal"
    bound = distinct_zero_bound(c_value, args.s)
    lo = bound.lower()
    display = max(lo, Fraction(0))
    print(f"distinct-zero proportion >= {decimal_lower(display, 10)}")
    print(f"  derivation: (5 - c + 2 s)/6 with c <= {decimal_upper(Fraction(c_value), 15)} ({origin}),")
    prov = f" ({args.s_provenance})" if args.s_provenance else ""
    print(f"  s = {args.s}{prov}")
    if lo < 0:
        print("  note: bound is vacuous (negative) at this c_n")
    return 0


def cmd_paircorr(args) -> int:
    try:
        grid = parse_alpha_grid(args.alpha)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        dataset = load_zeros(args.zeros, multiset=args.multiset)
        report = compare_report(dataset, args.n, grid, args.T)
    except FileNotFoundError:
        print(f"error: no such file: {args.zeros}", file=sys.stderr)
        return 1
    except (ZeroDataError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.out:
        write_paircorr_report(report, args.out, args.format)
        print(f"wrote {args.out} ({len(report.alphas)} rows, window {report.window_count})")
    else:
        if args.format == "csv":
            sys.stdout.write(report.to_csv())
        else:
            json.dump(report.to_json_dict(), sys.stdout, indent=2, sort_keys=True)
            sys.stdout.write("\n")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    handlers = {
        "bound": cmd_bound,
        "verify": cmd_verify,
        "corollary": cmd_corollary,
        "paircorr": cmd_paircorr,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
