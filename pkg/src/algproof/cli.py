"""Command-line front end.

Exit status: 0 success, 1 verification or check failure, 2 usage/input error.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import asdict
from fractions import Fraction
from itertools import combinations
from pathlib import Path

from . import formats
from .core import CoefficientTooLarge, Monomial
from .experiment import VerificationFailed, run_growth_experiment
from .families import (
    generate_qn_pcr_refutation, generate_qn_sos_refutation, knapsack_system, qn_system,
)
from .pcr import is_r_bounded, pcr_metrics, verify_pcr
from .pseudo import (
    check_product_properties, check_s_pe_axioms, is_psd, knapsack_pe,
)
from .sos import bound_certificate, sos_metrics, verify_sos


class UsageError(Exception):
    pass


def _print_report(report) -> int:
    print(report.describe())
    if report.residual is not None:
        print(f"residual: {formats.format_polynomial(report.residual)}")
    return 0 if report.ok else 1


def _print_metrics(d: dict, as_csv: bool) -> None:
    d = {k: formats.format_rational(v) if isinstance(v, Fraction) else v for k, v in d.items()}
    if as_csv:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(d.keys())
        w.writerow(d.values())
    else:
        for k, v in d.items():
            print(f"{k}: {v}")


def cmd_gen(args) -> int:
    out = Path(args.output)
    if args.what == "system":
        if args.family == "qn":
            if args.n is None:
                raise UsageError("--n is required for the qn family")
            system = qn_system(args.n)
        else:
            if args.vars is None or args.k is None:
                raise UsageError("--vars and --k are required for the knapsack family")
            system = knapsack_system(args.vars, formats.parse_rational(args.k))
        formats.write_text(out, formats.format_system(system))
        return 0
    if args.n is None or args.kind is None:
        raise UsageError("gen proof needs --n and --kind")
    sys_path = out.with_name(out.stem + ".system")
    if args.kind == "pcr":
        proof = generate_qn_pcr_refutation(args.n)
        text = formats.format_pcr(proof, system_ref=sys_path.name)
        system = proof.system
    else:
        cert = generate_qn_sos_refutation(args.n)
        text = formats.format_sos(cert, system_ref=sys_path.name)
        system = cert.system
    formats.write_text(sys_path, formats.format_system(system))
    formats.write_text(out, text)
    return 0


def cmd_verify(args) -> int:
    if args.kind == "pcr":
        return _print_report(verify_pcr(formats.read_pcr(args.file)))
    return _print_report(verify_sos(formats.read_sos(args.file)))


def cmd_metrics(args) -> int:
    if args.kind == "pcr":
        obj = formats.read_pcr(args.file)
        report = verify_pcr(obj)
        if not report:
            return _print_report(report)
        _print_metrics(asdict(pcr_metrics(obj, verified=True)), args.csv)
    else:
        obj = formats.read_sos(args.file)
        report = verify_sos(obj)
        if not report:
            return _print_report(report)
        m = asdict(sos_metrics(obj, verified=True))
        norms = m.pop("lift_norms")
        for name, val in norms.items():
            m[f"lift_norm[{name}]"] = val
        _print_metrics(m, args.csv)
    return 0


def cmd_bounded(args) -> int:
    proof = formats.read_pcr(args.file)
    R = formats.parse_rational(args.R)
    if R <= 0:
        raise UsageError("--R must be positive")
    ok = is_r_bounded(proof, R)
    print(f"{'bounded' if ok else 'not bounded'} by R = {formats.format_rational(R)}")
    return 0 if ok else 1


def cmd_pe(args) -> int:
    if args.what == "check":
        k = formats.parse_rational(args.k)
        system = knapsack_system(args.vars, k)
        S = [Monomial.multilinear(c) for r in range(args.degree + 1)
             for c in combinations(range(1, args.vars + 1), r)]
        report = check_s_pe_axioms(knapsack_pe(args.vars, k), system, S)
    elif args.what == "product":
        _, S = formats.parse_monomial_list(Path(args.monomials).read_text(encoding="utf-8"))
        report = check_product_properties(args.n, S, seed=args.seed)
    else:
        rows = formats.parse_matrix(Path(args.matrix).read_text(encoding="utf-8"))
        ok = is_psd(rows)
        print("psd" if ok else "not psd")
        return 0 if ok else 1
    for line in report.lines():
        print(line)
    print("ok" if report.ok else "FAILED")
    return 0 if report.ok else 1


def cmd_bound_cert(args) -> int:
    space, S = formats.parse_monomial_list(Path(args.monomials).read_text(encoding="utf-8"))
    p = formats.parse_polynomial(args.poly, space)
    r, cert = bound_certificate(p, S)
    text = formats.format_sos(cert)
    if args.output:
        formats.write_text(args.output, text)
    else:
        sys.stdout.write(text)
    print(f"r = {formats.format_rational(r)}", file=sys.stderr)
    return 0 if verify_sos(cert) else 1


def cmd_experiment(args) -> int:
    rows = run_growth_experiment(args.n_max, args.output, allow_large=args.allow_large)
    for row in rows:
        print(f"n={row.n} {row.system}: degree={row.degree} monomial_size={row.monomial_size} "
              f"max_coeff_bits={row.max_coeff_bits} bit_complexity={row.bit_complexity}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="algproof", description="SOS and PCR/Q refutation workbench")
    ap.add_argument("--seed", type=int, default=0, help="seed for randomized sampling")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate constraint systems and refutations")
    g.add_argument("what", choices=["system", "proof"])
    g.add_argument("--family", choices=["qn", "knapsack"], default="qn")
    g.add_argument("--system", choices=["qn"], default="qn")
    g.add_argument("--n", type=int)
    g.add_argument("--vars", type=int)
    g.add_argument("--k")
    g.add_argument("--kind", choices=["pcr", "sos"])
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(func=cmd_gen)

    v = sub.add_parser("verify", help="verify a proof or certificate")
    v.add_argument("kind", choices=["pcr", "sos"])
    v.add_argument("file")
    v.set_defaults(func=cmd_verify)

    m = sub.add_parser("metrics", help="measure a verified proof or certificate")
    m.add_argument("kind", choices=["pcr", "sos"])
    m.add_argument("file")
    m.add_argument("--csv", action="store_true")
    m.set_defaults(func=cmd_metrics)

    b = sub.add_parser("bounded", help="check R-boundedness of a PCR proof")
    b.add_argument("kind", choices=["pcr"])
    b.add_argument("file")
    b.add_argument("--R", required=True)
    b.set_defaults(func=cmd_bounded)

    pe = sub.add_parser("pe", help="pseudoexpectation checks")
    pe.add_argument("what", choices=["check", "product", "psd"])
    pe.add_argument("--family", choices=["knapsack"], default="knapsack")
    pe.add_argument("--vars", type=int)
    pe.add_argument("--k")
    pe.add_argument("--degree", type=int, default=1)
    pe.add_argument("--n", type=int)
    pe.add_argument("--monomials")
    pe.add_argument("--matrix")
    pe.set_defaults(func=cmd_pe)

    bc = sub.add_parser("bound-cert", help="certificate of r - p >= 0 over a monomial set")
    bc.add_argument("--poly", required=True)
    bc.add_argument("--monomials", required=True)
    bc.add_argument("-o", "--output")
    bc.set_defaults(func=cmd_bound_cert)

    ex = sub.add_parser("experiment", help="growth experiment over n = 1..n_max")
    ex.add_argument("--n-max", type=int, default=4)
    ex.add_argument("-o", "--output", required=True)
    ex.add_argument("--allow-large", action="store_true")
    ex.set_defaults(func=cmd_experiment)
    return ap


def _check_pe_args(args) -> None:
    if args.command != "pe":
        return
    need = {"check": ("vars", "k"), "product": ("n", "monomials"), "psd": ("matrix",)}[args.what]
    missing = [f"--{a}" for a in need if getattr(args, a) is None]
    if missing:
        raise UsageError(f"pe {args.what} needs {' '.join(missing)}")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _check_pe_args(args)
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (formats.ParseError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except VerificationFailed as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return 1
    except CoefficientTooLarge as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        return 1


dispatch = main


if __name__ == "__main__":
    sys.exit(main())
