"""Command line front end.

Exit codes: 0 certified / pass, 2 not certified / fail, 1 usage or I/O error.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import reporting
from .certificate import AS_DERIVED, AS_PRINTED, DEFAULT_M_MAX, certify, find_m
from .errors import DwellCertError
from .switching_sim import (DEFAULT_MAX_EXTRA, brute_force_bound_check, compute_basis_c,
                            monte_carlo, write_trajectory_csv)
from .word_rewriter import audit_counts, decompose, evaluate_decomposition, parse_word, validate_dwell

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2

_MODES = {"printed": AS_PRINTED, "derived": AS_DERIVED}


def _emit(text: str, out_path) -> None:
    if out_path:
        reporting.atomic_write_text(out_path, text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def _lambda_arg(args):
    return None if args.search_lambda or args.lam is None else args.lam


def cmd_analyze(args) -> int:
    fam = reporting.load_family(args.family)
    cert = certify(fam, args.delta, lam=_lambda_arg(args), m_max=args.m_max,
                   exponent_mode=_MODES[args.exponent_mode])
    if args.basis_c and cert.certified:
        cert.c = compute_basis_c(fam, args.delta, cert.lam, cert.m)
    inputs = {"family": str(args.family), "delta": args.delta, "lambda": _lambda_arg(args),
              "m_max": args.m_max, "exponent_mode": _MODES[args.exponent_mode]}
    doc = reporting.build_report(fam, cert, inputs)
    _emit(json.dumps(doc, indent=2) if args.json else reporting.format_report(doc), args.out)
    return EXIT_OK if cert.certified else EXIT_FAIL


def _rate_and_c(fam, args):
    """Decay rate and constant for bound checks: user-supplied or certified."""
    lam = args.lam
    if lam is None or args.search_lambda:
        cert = certify(fam, args.delta, lam=None, m_max=args.m_max)
        if not cert.certified:
            raise DwellCertError("not-certified", f"no certified rate to check against ({cert.reason}); "
                                                  "pass --lambda and --c")
        lam, m = cert.lam, cert.m
    else:
        m = None
    c = args.c
    if c is None:
        if m is None:
            m, _ = find_m(fam, args.delta, args.m_max)
        c = compute_basis_c(fam, args.delta, lam, m)
    return lam, c


def _parse_x0(text, d):
    if text is None:
        return None
    vals = [float(v) for v in text.split(",")]
    if len(vals) != d:
        raise DwellCertError("dim-mismatch", f"--x0 needs {d} comma-separated values")
    return vals


def cmd_simulate(args) -> int:
    fam = reporting.load_family(args.family)
    lam, c = _rate_and_c(fam, args)
    summary = monte_carlo(fam, args.delta, args.trials, args.horizon, args.seed,
                          x0_box=(-args.box, args.box), c=c, lam=lam, max_extra=args.max_extra,
                          x0=_parse_x0(args.x0, fam.d))
    if args.out:
        write_trajectory_csv(summary.records, args.out)
    if args.svg:
        norms = np.array([r.norms for r in summary.records])
        reporting.atomic_write_text(args.svg, reporting.norms_svg(norms.mean(axis=0), norms.max(axis=0)))
    result = {
        "trials": summary.trials, "horizon": summary.horizon, "seed": args.seed,
        "lambda": lam, "c": c, "violations": summary.violations,
        "max_ratio_overall": float(summary.max_ratio.max()),
        "bound_pass": summary.all_pass,
    }
    if args.json:
        print(json.dumps(result, indent=2))
    else:
        for k, v in result.items():
            print(f"{k:<18}: {v}")
    return EXIT_OK if summary.all_pass else EXIT_FAIL


def cmd_decompose(args) -> int:
    word = parse_word(args.word)
    dec = decompose(word, args.target, args.m, args.delta)
    print(dec)
    if args.family:
        fam = reporting.load_family(args.family)
        _, _, res = evaluate_decomposition(dec, fam)
        print(f"residual norm: {res:.3e}")
    n_sub = args.n_subsystems or max(i for i, _ in word.runs)
    if n_sub >= 2 and args.m >= args.delta:
        audit = audit_counts(dec, n_sub, args.m, args.delta)
        print(f"dwell-admissible: {validate_dwell(word, args.delta)}")
        for cat in audit.actual:
            mark = "ok" if audit.within[cat] else "EXCEEDS"
            print(f"  {cat}: {audit.actual[cat]} (bound {audit.bound[cat]}) {mark}")
        print(f"  total: {audit.total_actual} (bound {audit.total_bound})")
    return EXIT_OK


def cmd_reproduce_example(args) -> int:
    tables = reporting.reproduce_example()
    _emit(reporting.comparison_to_json(tables) if args.json else reporting.format_comparison(tables), args.out)
    ok = all(r.passed for rows in tables.values() for r in rows)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_enumerate(args) -> int:
    fam = reporting.load_family(args.family)
    lam, c = _rate_and_c(fam, args)
    rep = brute_force_bound_check(fam, args.delta, lam, c, args.max_len)
    result = {"lambda": lam, "c": c, "words_checked": rep.words_checked,
              "max_violation": rep.max_violation,
              "max_relative_violation": rep.max_relative_violation, "pass": rep.passed,
              "worst_word": str(rep.worst_word) if rep.worst_word else None}
    if args.json:
        print(json.dumps(result, indent=2))
    else:
        for k, v in result.items():
            print(f"{k:<22}: {v}")
    return EXIT_OK if rep.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dwellcert", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, family_required=True):
        p.add_argument("--family", required=family_required, help="family JSON file")
        p.add_argument("--delta", type=int, default=1, help="minimum dwell time")
        p.add_argument("--lambda", dest="lam", type=float, help="fixed decay rate")
        p.add_argument("--search-lambda", action="store_true", help="maximize the decay rate (default)")
        p.add_argument("--m-max", type=int, default=DEFAULT_M_MAX)
        p.add_argument("--json", action="store_true")
        p.add_argument("--out", help="output path")

    p = sub.add_parser("analyze", help="certify GUES under the dwell time")
    common(p)
    p.add_argument("--exponent-mode", choices=sorted(_MODES), default="printed")
    p.add_argument("--basis-c", action="store_true", help="also compute the constant c by enumeration")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="Monte Carlo trajectories with bound check")
    common(p)
    p.add_argument("--c", type=float, help="bound constant (computed if omitted)")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--horizon", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-extra", type=int, default=DEFAULT_MAX_EXTRA)
    p.add_argument("--box", type=float, default=100.0, help="x0 drawn from [-box, box]^d")
    p.add_argument("--x0", help="fixed initial state, comma separated")
    p.add_argument("--svg", help="write a mean/max norm chart")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("decompose", help="rewrite a word as A_t^m L1 plus commutator terms")
    p.add_argument("--word", required=True, help='e.g. "3^2 2^2 1^3"')
    p.add_argument("--target", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--delta", type=int, default=1)
    p.add_argument("--family", help="family JSON file for the numeric residual")
    p.add_argument("--n-subsystems", type=int, help="N for the count audit (default: largest index)")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("reproduce-example", help="compare against the published worked example")
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_reproduce_example)

    p = sub.add_parser("enumerate", help="brute-force check of ||W|| <= c e^(-lambda |W|)")
    common(p)
    p.add_argument("--c", type=float)
    p.add_argument("--max-len", type=int, default=12)
    p.set_defaults(func=cmd_enumerate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    try:
        return args.func(args)
    except DwellCertError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
