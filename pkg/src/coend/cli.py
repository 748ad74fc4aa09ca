"""Command-line interface: ``coend <command> ...``.

Exit codes: 0 when no check fails, 1 when some check fails, 2 for usage
errors and unreadable input.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from . import bundled
from .blackbox import SubprocessMorphism, parse_nat_function
from .encoding import (
    TensorMorphism,
    analyze_morphism,
    build_presheaf_encoding,
    check_presheaf,
    check_unique_tau,
)
from .errors import CoendError
from .functor import iota_star, is_in_essential_image, resolve, restrict
from .pairing import (
    augment_with_pairing,
    cantor_pairing_system,
    check_pairing_system,
    projection_certificate,
)
from .relational import RIGIDITY_MODES, dump_structure, hat_expand
from .report import CheckResult, Report, check, passed, skipped
from .tensor import Tensor, make_carrier, required_bound, verify_section2
from .verify import VerifyConfig, verify_all


def _carrier(text: str) -> tuple[str, ...]:
    if text.isdigit():
        return make_carrier(int(text))
    return tuple(t for t in text.split(",") if t)


def _functor(spec: str, bound: int):
    return resolve(spec, bound)


def _emit(report: Report, args) -> int:
    if args.report == "text":
        sys.stdout.write(report.to_text())
    else:
        sys.stdout.write(report.dumps(timing=not args.no_timing))
    return 0 if report.ok else 1


# -- commands ------------------------------------------------------------------


def cmd_tensor(args) -> Report:
    carrier = _carrier(args.carrier)
    x = len(carrier)
    bound = args.bound or required_bound(x)
    F = _functor(args.functor, bound)
    cap = 3 if args.cap is None else args.cap
    report = Report("tensor", {"carrier": list(carrier), "functor": args.functor, "bound": bound, "cap": cap})
    T = Tensor(carrier, F, bound=bound, stability_rounds=2)
    report.data["classes"] = T.table()
    report.data["essential_image"] = is_in_essential_image(F).to_json()
    if x <= cap:
        results, _ = verify_section2(carrier, F, cap=cap, T=T)
        report.extend(results)
    else:
        report.results.append(skipped("lemma checks", f"bound: |X| = {x} exceeds --cap {cap}"))
    return report


def cmd_minexpr(args) -> Report:
    carrier = _carrier(args.carrier)
    bound = args.bound or required_bound(len(carrier))
    F = _functor(args.functor, max(bound, len(args.map)))
    T = Tensor(carrier, F, bound=max(bound, len(args.map)))
    expr = (tuple(args.map), args.element)
    t = T.class_of(expr)
    report = Report("minexpr", {"carrier": list(carrier), "functor": args.functor, "bound": T.bound})
    report.data = {
        "expression": {"map": list(args.map), "element": args.element},
        "class": t.to_json(),
        "length": t.length,
        "minimal_expressions": [e.to_json() for e in T.minimal_expressions(t)],
    }
    return report


def cmd_functor_check(args) -> Report:
    bound = args.bound or 4
    F = _functor(args.functor, bound)
    report = Report("functor check", {"functor": args.functor, "bound": F.bound, "exhaustive": args.exhaustive})
    bad = F.functoriality_violations(exhaustive=args.exhaustive)
    report.results.append(check("functoriality", not bad, bad or None,
                                "all composable pairs" if args.exhaustive else "generators against all maps"))
    if F.start == 0:
        res = is_in_essential_image(F)
        report.data["essential_image"] = res.to_json()
        if res.holds:
            G = iota_star(restrict(F))
            report.results.append(check("iota_* of the restriction has the same sizes", G.sizes() == F.sizes()))
    else:
        report.data["iota_star_sizes"] = iota_star(F).sizes()
    report.data["sizes"] = F.sizes()
    return report


def cmd_rigidity(args) -> Report:
    A = bundled.resolve_structure(args.structure)
    cap = args.cap or (1 << 20)
    res = RIGIDITY_MODES[args.mode](A, args.nmax, cap)
    report = Report("rigidity check", {"structure": args.structure, "mode": args.mode, "n_max": args.nmax, "cap": cap})
    report.results.append(CheckResult(
        f"{args.mode} up to n={args.nmax}", "PASS" if res.holds else "FAIL", witness=res.witness,
    ))
    report.data["result"] = res.to_json()
    return report


def cmd_hat_expand(args) -> Report:
    A = bundled.resolve_structure(args.structure)
    B = hat_expand(A, args.formula, nullary_free=args.nullary_free)
    report = Report("hat-expand", {"structure": args.structure, "formulas": args.formula,
                                   "nullary_free": args.nullary_free})
    report.data["structure"] = B.to_json()
    if args.out:
        dump_structure(B, args.out)
        report.data["written"] = args.out
    report.results.append(passed("expansion built", f"{len(B.language.symbols)} symbols"))
    return report


def cmd_pairing(args) -> Report:
    n = args.arity
    ps = cantor_pairing_system(sorted(set(range(1, max(n, 2) + 1))))
    report = Report("pairing", {"arity": n, "pairing": ps.name, "seed": args.seed, "samples": args.samples})
    if args.pair is not None:
        if len(args.pair) != n:
            raise SystemExit(f"--pair needs {n} values")
        report.data["pair"] = ps.pair(tuple(args.pair))
    if args.unpair is not None:
        report.data["unpair"] = list(ps.unpair(n, args.unpair))
    if args.check:
        report.extend(check_pairing_system(ps, samples=args.samples, seed=args.seed))
    if args.certify:
        f = parse_nat_function(args.certify, n)
        aug = augment_with_pairing(None, ps)
        cert = projection_certificate(f, aug, n, samples=args.samples, seed=args.seed)
        report.data["certificate"] = cert.to_json()
        report.results.append(CheckResult(
            f"projection certificate for {args.certify}",
            "PASS" if cert.consistent else "FAIL", str(cert), cert.witness,
        ))
    return report


def cmd_encode_build(args) -> Report:
    A = bundled.resolve_nat_structure(args.structure)
    Xp = build_presheaf_encoding(A, n_trunc=args.nmax)
    report = Report("encode build", {"structure": args.structure, "n_trunc": args.nmax})
    report.data["encoding"] = Xp.to_json()
    report.results.append(passed("encoding built", f"{len(Xp.graph.edges)} edges"))
    return report


def cmd_encode_check(args) -> Report:
    A = bundled.resolve_nat_structure(args.structure)
    Xp = build_presheaf_encoding(A, n_trunc=args.nmax)
    report = Report("encode check", {"structure": args.structure, "n_trunc": args.nmax,
                                     "seed": args.seed, "samples": args.samples})
    report.extend(check_presheaf(Xp, samples=args.samples, seed=args.seed))
    report.data["retraction_default"] = Xp.default_code
    return report


def cmd_encode_analyze(args) -> Report:
    A = bundled.resolve_nat_structure(args.structure)
    Xp = build_presheaf_encoding(A, n_trunc=max(args.nmax, args.n))
    F = _functor(args.functor, max(args.bound or 0, args.n + 1, 3))
    if args.fn.startswith("tensor:"):
        f = TensorMorphism(F, args.fn[len("tensor:"):], args.n, args.perm)
        close = None
    else:
        f = SubprocessMorphism(args.fn, F, args.n, A.language.names)
        close = f.close
    try:
        analysis = analyze_morphism(f, Xp, F, args.n, samples=args.samples, seed=args.seed)
    finally:
        if close:
            close()
    report = Report("encode analyze", {"fn": args.fn, "functor": args.functor, "n": args.n,
                                       "structure": args.structure, "n_trunc": Xp.graph.n_trunc,
                                       "seed": args.seed, "samples": args.samples})
    report.extend(analysis.checks)
    report.data["analysis"] = analysis.to_json()
    report.data["verdict"] = str(analysis)
    if analysis.verdict == "REFUTED" and not any(r.failed for r in analysis.checks):
        report.results.append(CheckResult("analysis", "FAIL", analysis.reason, analysis.witness))
    return report


def cmd_encode_unique_tau(args) -> Report:
    P = bundled.resolve_presheaf(args.presheaf)
    bound = args.bound or 4
    functors = [_functor(s, bound) for s in (args.functor or ["rep:1", "rep:2"])]
    res = check_unique_tau(P, functors, args.nmax, cap=args.cap or 10**6)
    report = Report("encode unique-tau", {"presheaf": args.presheaf, "functors": [F.name for F in functors],
                                          "n_max": args.nmax})
    report.extend(res.checks)
    return report


def cmd_verify_all(args) -> Report:
    cfg = VerifyConfig(seed=args.seed, samples=args.samples)
    if args.cap is not None:
        cfg.carrier_cap = args.cap
    if args.bound is not None:
        cfg.bound = args.bound
    return verify_all(cfg)


# -- parser --------------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0, help="PRNG seed (default 0)")
    p.add_argument("--bound", type=int, default=None, help="functor truncation bound")
    p.add_argument("--cap", type=int, default=None, help="size cap for exhaustive searches")
    p.add_argument("--report", choices=("json", "text"), default="json")
    p.add_argument("--no-timing", action="store_true", help="omit timing from JSON reports")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="coend", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tensor", parents=[common], help="classes of X (x) F with lemma checks")
    p.add_argument("--carrier", required=True, help="size N or comma-separated labels")
    p.add_argument("--functor", required=True, help="rep:S, pow, ine, ine2 or file:PATH")
    p.set_defaults(func=cmd_tensor)

    p = sub.add_parser("minexpr", parents=[common], help="length and minimal expressions of one element")
    p.add_argument("--carrier", required=True)
    p.add_argument("--functor", required=True)
    p.add_argument("--map", nargs="*", default=[], help="f(0) ... f(k-1) as carrier labels")
    p.add_argument("--element", required=True, help="label of an element of F[k]")
    p.set_defaults(func=cmd_minexpr)

    p = sub.add_parser("functor", help="functor utilities")
    fsub = p.add_subparsers(dest="action", required=True)
    q = fsub.add_parser("check", parents=[common], help="functoriality and essential image")
    q.add_argument("--functor", required=True)
    q.add_argument("--exhaustive", action="store_true", help="check every composable pair")
    q.set_defaults(func=cmd_functor_check)

    p = sub.add_parser("rigidity", help="bounded rigidity checks")
    rsub = p.add_subparsers(dest="action", required=True)
    q = rsub.add_parser("check", parents=[common])
    q.add_argument("--structure", required=True, help="JSON file or bundled:NAME")
    q.add_argument("--mode", choices=sorted(RIGIDITY_MODES), default="inhabited-lex")
    q.add_argument("--nmax", type=int, default=3)
    q.set_defaults(func=cmd_rigidity)

    p = sub.add_parser("hat-expand", parents=[common], help="one relation per formula")
    p.add_argument("--structure", required=True)
    p.add_argument("--formula", action="append", default=[])
    p.add_argument("--nullary-free", action="store_true")
    p.add_argument("--out", help="write the expanded structure here")
    p.set_defaults(func=cmd_hat_expand)

    p = sub.add_parser("pairing", parents=[common], help="Cantor pairing utilities")
    p.add_argument("--arity", type=int, default=2)
    p.add_argument("--pair", type=int, nargs="+")
    p.add_argument("--unpair", type=int)
    p.add_argument("--check", action="store_true", help="round-trip and injectivity checks")
    p.add_argument("--certify", help="expression in x0..x{n-1} to test for being a projection")
    p.add_argument("--samples", type=int, default=10_000)
    p.set_defaults(func=cmd_pairing)

    p = sub.add_parser("encode", help="presheaf encodings over N")
    esub = p.add_subparsers(dest="action", required=True)
    for name, func, helptext in (
        ("build", cmd_encode_build, "build the encoding and print its shape"),
        ("check", cmd_encode_check, "check the presheaf laws on samples"),
        ("analyze", cmd_encode_analyze, "analyze a morphism family"),
    ):
        q = esub.add_parser(name, parents=[common], help=helptext)
        q.add_argument("--structure", default="bundled:succ-even", help="JSON file or bundled:NAME")
        q.add_argument("--nmax", type=int, default=4, help="pairing truncation N")
        q.add_argument("--samples", type=int, default=1000)
        q.set_defaults(func=func)
        if name == "analyze":
            q.add_argument("--fn", required=True, help="program speaking the line protocol, or tensor:<tau>")
            q.add_argument("--functor", required=True)
            q.add_argument("--n", type=int, required=True)
            q.add_argument("--perm", type=int, nargs="+", help="coordinate permutation for tensor:<tau>")
    q = esub.add_parser("unique-tau", parents=[common], help="unique tau on a finite presheaf")
    q.add_argument("--presheaf", required=True, help=f"one of {sorted(bundled.PRESHEAVES)}")
    q.add_argument("--functor", action="append")
    q.add_argument("--nmax", type=int, default=2)
    q.set_defaults(func=cmd_encode_unique_tau)

    p = sub.add_parser("verify-all", parents=[common], help="run every check")
    p.add_argument("--samples", type=int, default=1000)
    p.set_defaults(func=cmd_verify_all)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    t0 = time.perf_counter()
    try:
        report = args.func(args)
    except (CoendError, OSError, json.JSONDecodeError) as exc:
        print(f"coend: error: {exc}", file=sys.stderr)
        return 2
    report.timing.setdefault("total_seconds", round(time.perf_counter() - t0, 4))
    return _emit(report, args)


if __name__ == "__main__":
    sys.exit(main())
