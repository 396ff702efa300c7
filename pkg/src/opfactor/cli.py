"""Command-line entry point: ``opfactor check|verify|gen|suite|scale``.

Exit codes: 0 success (feasible or unconstrained), 1 usage or parse error,
2 infeasible, 3 verification failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .certify import run_check, verify_file
from .errors import OpFactorError
from .instances import KINDS, VARIANTS, InstanceSpec, gen_instance
from .io import MODES, read_certificate, read_matrix, write_certificate, write_matrix
from .linalg import DEFAULT_TOL, Tolerance
from .suite import property_suite, scaling_csv, scaling_report

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_VERIFY_FAILED = 3

TOL_ENV = "OPFACTOR_TOL"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _tolerance(arg: str | None) -> Tolerance:
    # flag beats environment beats default
    text = arg if arg is not None else os.environ.get(TOL_ENV)
    return Tolerance.parse(text) if text else DEFAULT_TOL


def _int_list(text: str) -> list[int]:
    try:
        return [int(p) for p in text.replace(" ", "").split(",") if p]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="opfactor", description="Certified operator factorizations.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("check", help="decide feasibility and write a certificate")
    p.add_argument("--mode", required=True, choices=MODES)
    p.add_argument("--t", required=True, type=Path, help="matrix T (.csv or .json)")
    p.add_argument("--b", required=True, type=Path, help="matrix B (.csv or .json)")
    p.add_argument("--tol", help=f"eig_rel, or eig_rel,rank_rel,residual_rel (default from ${TOL_ENV})")
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("verify", help="re-verify a certificate file")
    p.add_argument("cert", type=Path)

    p = sub.add_parser("gen", help="generate a seeded instance")
    p.add_argument("--kind", required=True, choices=KINDS)
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--variant", choices=VARIANTS, default="identity", help="difference-operator Gram variant")
    p.add_argument("--index", type=int, default=0, help="instance index within the seeded stream")
    p.add_argument("--t", required=True, type=Path)
    p.add_argument("--b", required=True, type=Path)
    p.add_argument("--truth", type=Path, help="where to write the known factor, if any")

    p = sub.add_parser("suite", help="run the property suite")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--count", type=int, default=500)
    p.add_argument("--n-max", type=int, default=16)
    p.add_argument("--tol")

    p = sub.add_parser("scale", help="difference-operator scaling table (CSV)")
    p.add_argument("--n", required=True, type=_int_list, help="ascending list, e.g. 4,8,16")
    p.add_argument("--kind", choices=VARIANTS, default="identity")
    p.add_argument("--out", type=Path, help="CSV path; stdout if omitted")
    p.add_argument("--tol")
    return parser


def cmd_check(args) -> int:
    tol = _tolerance(args.tol)
    T = read_matrix(args.t)
    B = read_matrix(args.b)
    cf = run_check(args.mode, T, B, tol)
    write_certificate(args.out, cf)
    if cf.verdict == "infeasible":
        w = cf.witness
        where = f" (column {w['column']})" if w.get("column") is not None else ""
        print(f"{args.mode}: infeasible, reason {w['reason']}{where}; witness written to {args.out}")
        return EXIT_INFEASIBLE
    key = "m_max" if args.mode == "reversed" else "lambda_min"
    print(f"{args.mode}: {cf.verdict}, {key} = {cf.payload[key]}; certificate written to {args.out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    cf = read_certificate(args.cert)
    report = verify_file(cf)
    print(report.table())
    print("verified" if report.passed else "FAILED: " + ", ".join(c.name for c in report.failures()))
    return EXIT_OK if report.passed else EXIT_VERIFY_FAILED


def cmd_gen(args) -> int:
    spec = InstanceSpec(args.kind, args.n, args.seed, args.scale, args.variant)
    if args.index < 0:
        raise OpFactorError("index must be nonnegative")
    inst = gen_instance(spec, args.index)
    write_matrix(args.t, inst.T)
    write_matrix(args.b, inst.B)
    if args.truth is not None and inst.ground_truth is not None:
        write_matrix(args.truth, inst.ground_truth)
    return EXIT_OK


def cmd_suite(args) -> int:
    report = property_suite(args.seed, args.count, n_max=args.n_max, tol=_tolerance(args.tol))
    print(report.summary())
    print(f"{report.failures} failures")
    return EXIT_OK if report.failures == 0 else EXIT_VERIFY_FAILED


def cmd_scale(args) -> int:
    text = scaling_csv(scaling_report(args.n, args.kind, _tolerance(args.tol)))
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.write_text(text)
    return EXIT_OK


COMMANDS = {"check": cmd_check, "verify": cmd_verify, "gen": cmd_gen, "suite": cmd_suite, "scale": cmd_scale}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # usage errors (and --help) end here; report the code instead of raising
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (OpFactorError, ValueError, OSError) as exc:
        print(f"opfactor {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
