"""The ``verify-all`` suite: every check, one report."""

from __future__ import annotations

import random
import time
from dataclasses import asdict, dataclass

from . import bundled
from .encoding import (
    TensorMorphism,
    analyze_morphism,
    build_presheaf_encoding,
    check_presheaf,
    check_unique_tau,
)
from .finset import iter_functions
from .functor import builtin, iota_star, is_in_essential_image, restrict
from .pairing import cantor_pairing_system, check_pairing_system
from .relational import RIGIDITY_MODES
from .report import EXPECTED, CheckResult, Report, check, passed
from .tensor import Tensor, make_carrier, verify_section2

BUILTIN_FUNCTORS = ("rep:0", "rep:1", "rep:2", "rep:3", "pow", "ine", "ine2")
# functors known to lie outside the essential image of iota_*
EXCEPTIONAL = ("ine", "ine2")


@dataclass
class VerifyConfig:
    seed: int = 0
    carrier_cap: int = 3
    bound: int = 4
    samples: int = 1000
    rigidity_n_max: int = bundled.SUITE_N_MAX
    search_cap: int = 1 << 20
    unique_tau_n_max: int = 2
    analyzer_taus: int = 3

    def to_json(self) -> dict:
        return asdict(self)


def _functor_checks(cfg: VerifyConfig) -> list[CheckResult]:
    out = []
    for spec in BUILTIN_FUNCTORS:
        F = builtin(spec, cfg.bound)
        bad = F.functoriality_violations(limit=1)
        out.append(check(f"{spec}: functorial up to [{cfg.bound}]", not bad, bad[0] if bad else None))
        res = is_in_essential_image(F)
        expected = spec not in EXCEPTIONAL
        label = "in" if expected else "outside"
        out.append(check(f"{spec}: {label} the essential image of iota_*", res.holds == expected, res.to_json()))
        if expected:
            G = iota_star(restrict(F))
            same = G.sizes() == F.sizes() and is_in_essential_image(G).holds
            out.append(check(f"{spec}: iota_* of the restriction has the same sizes", same))
    return out


def _model_cases(cfg: VerifyConfig) -> list[CheckResult]:
    out = []
    for x in range(1, cfg.carrier_cap + 1):
        for s in range(3):
            T = Tensor(x, builtin(f"rep:{s}", cfg.bound))
            carrier = make_carrier(x)
            ident = "<" + ",".join(map(str, range(s))) + ">"
            # the class of g (x) id_S has length #Im(g)
            bad = next(
                (list(g) for g in iter_functions(s, x)
                 if T.length((tuple(carrier[v] for v in g), ident)) != len(set(g))),
                None,
            )
            ok = len(T) == x**s and bad is None
            out.append(check(f"X(x)rep:{s}, |X|={x}: |X|^{s} classes, length = #Im", ok,
                             None if ok else {"classes": len(T), "map": bad}))
        T = Tensor(x, builtin("pow", cfg.bound))
        carrier = make_carrier(x)
        ok = len(T) == 2**x
        if ok:
            # class of S is the identity map tensored with S; its length is |S|
            for sigma in T.functor.values(x):
                S = [carrier[int(i)] for i in sigma.strip("{}").split(",") if i]
                if T.length((carrier, sigma)) != len(S):
                    ok = False
        out.append(check(f"X(x)pow, |X|={x}: 2^|X| classes, length of S = |S|", ok))
    return out


def _exceptional(cfg: VerifyConfig) -> list[CheckResult]:
    out = []
    if cfg.carrier_cap >= 2:
        T = Tensor(2, builtin("ine", cfg.bound))
        mins = T.minimal_expressions(0)
        ok = len(T) == 1 and T.length(0) == 1 and len(mins) >= 2
        out.append(CheckResult(
            "ine, |X|=2: one class of length 1 with several minimal expressions",
            EXPECTED if ok else "FAIL", witness=[e.to_json() for e in mins],
        ))
    if cfg.carrier_cap >= 1:
        T = Tensor(1, builtin("ine2", cfg.bound))
        zero = [c for c in T if c.length == 0]
        mins = T.minimal_expressions(zero[0]) if zero else []
        ok = len(zero) == 1 and len(mins) == 2
        out.append(CheckResult(
            "ine2, |X|=1: length-0 class with two minimal expressions",
            EXPECTED if ok else "FAIL", witness=[e.to_json() for e in mins],
        ))
    return out


def _section2(cfg: VerifyConfig) -> list[CheckResult]:
    out = []
    for spec in BUILTIN_FUNCTORS:
        F = builtin(spec, cfg.bound)
        for x in range(cfg.carrier_cap + 1):
            results, _ = verify_section2(x, F, cap=cfg.carrier_cap)
            for r in results:
                out.append(CheckResult(f"{spec} |X|={x}: {r.name}", r.status, r.detail, r.witness, r.reason))
    if cfg.carrier_cap == 0:
        out.append(passed("carrier cap 0", "only X = empty set was examined; checks hold vacuously"))
    return out


def _rigidity(cfg: VerifyConfig) -> list[CheckResult]:
    out = []
    for name, b in bundled.STRUCTURES.items():
        A = b.load()
        for mode, fn in RIGIDITY_MODES.items():
            res = fn(A, cfg.rigidity_n_max, cfg.search_cap)
            want = b.expected[mode]
            verdict = "holds" if res.holds else "refuted"
            out.append(check(
                f"{name}: {mode} up to n={cfg.rigidity_n_max} {verdict} as expected",
                res.holds == want,
                res.to_json() if (res.holds != want or res.witness) else None,
            ))
    return out


def _encoding(cfg: VerifyConfig) -> list[CheckResult]:
    out = []
    Xp = build_presheaf_encoding(bundled.NAT_STRUCTURES["succ-even"](), n_trunc=4)
    out.extend(check_presheaf(Xp, samples=cfg.samples, seed=cfg.seed))
    rng = random.Random(cfg.seed)
    for spec in ("rep:1", "rep:2"):
        F = builtin(spec, cfg.bound)
        for n in (1, 2):
            taus = sorted(rng.sample(F.values(n), min(cfg.analyzer_taus, F.size(n))))
            for tau in taus:
                A = analyze_morphism(TensorMorphism(F, tau, n), Xp, F, n,
                                     samples=cfg.samples, seed=rng.randrange(1 << 30))
                out.append(check(f"analyzer {spec} n={n}: -(x){tau} gives NAIVE({tau})",
                                 A.verdict == "NAIVE" and A.tau == tau,
                                 None if A.tau == tau else A.to_json()))
    F2 = builtin("rep:2", cfg.bound)
    A = analyze_morphism(TensorMorphism(F2, "<0,1>", 2, perm=(1, 0)), Xp, F2, 2,
                         samples=cfg.samples, seed=cfg.seed)
    out.append(check("analyzer rep:2 n=2: swapped inputs give NAIVE(<1,0>)", A.tau == "<1,0>",
                     None if A.tau == "<1,0>" else A.to_json()))

    functors = [builtin("rep:1", cfg.bound), builtin("rep:2", cfg.bound)]
    res = check_unique_tau(bundled.resolve_presheaf("rigid-one-in-three"), functors, cfg.unique_tau_n_max)
    for r in res.checks:
        out.append(CheckResult(f"rigid-one-in-three: {r.name}", r.status, r.detail, r.witness))
    res = check_unique_tau(bundled.resolve_presheaf("two-point"), functors[:1], 1)
    swap = [w for w in res.witnesses
            if w["components"]["v"] == {"(x)": "(y)(x)<0>", "(y)": "(x)(x)<0>"}]
    out.append(CheckResult(
        "two-point: unique tau fails with the swap",
        EXPECTED if swap and not res.holds else "FAIL",
        witness=swap[0] if swap else res.witnesses,
    ))
    return out


def _pairing(cfg: VerifyConfig) -> list[CheckResult]:
    return check_pairing_system(cantor_pairing_system([1, 2, 3, 4]), samples=10_000, seed=cfg.seed)


SECTIONS = (
    ("functor", _functor_checks),
    ("model", _model_cases),
    ("exceptional", _exceptional),
    ("tensor", _section2),
    ("rigidity", _rigidity),
    ("pairing", _pairing),
    ("encoding", _encoding),
)


def verify_all(config: VerifyConfig | None = None) -> Report:
    cfg = config or VerifyConfig()
    report = Report("verify-all", cfg.to_json())
    for name, fn in SECTIONS:
        t0 = time.perf_counter()
        report.extend(fn(cfg), prefix=f"{name}/")
        report.timing[name] = round(time.perf_counter() - t0, 4)
    report.data["pairing"] = "cantor-right-nested"
    return report

