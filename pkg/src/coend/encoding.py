"""Encoding graphs, presheaf encodings of structures over ℕ, and the morphism analyzer.

Everything over ℕ is checked on seeded samples; finite carriers are checked
exhaustively. Pairing arities are truncated at ``n_trunc``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Protocol, Sequence

from .errors import (
    BoundTooSmall,
    ExpressionParseError,
    NullarySymbolError,
    PreconditionError,
    SearchTooLarge,
)
from .finset import FinFunction
from .functor import TruncatedFunctor, is_in_essential_image
from .pairing import PairingSystem, cantor_pair, cantor_pairing_system, cantor_unpair, sample_ints
from .presheaf import FinitePresheaf, natural_transformations
from .relational import RelLanguage
from .report import CheckResult, check, failed, passed
from .tensor import Tensor, make_carrier, presheaf_tensor, required_bound

DEFAULT_SAMPLES = 1000
DEFAULT_EQUIVARIANCE_SAMPLES = 200


# -- relations over ℕ -------------------------------------------------------


class DecidableRelation:
    """A relation on ℕ given by a membership test and an enumeration.

    ``nth(j)`` is the ``j``-th tuple and ``index(q)`` its inverse on members.
    ``size`` is None for infinite relations.
    """

    def __init__(
        self,
        arity: int,
        contains: Callable[[tuple], bool],
        nth: Callable[[int], tuple] | None = None,
        index: Callable[[tuple], int] | None = None,
        size: int | None = None,
        description: str = "",
    ):
        self.arity = arity
        self._contains = contains
        self.nth = nth
        self.index = index
        self.size = size
        self.description = description

    def __contains__(self, q) -> bool:
        q = tuple(q)
        return len(q) == self.arity and bool(self._contains(q))

    @property
    def enumerable(self) -> bool:
        return self.nth is not None and self.index is not None

    def is_empty(self) -> bool:
        return self.size == 0

    def to_json(self) -> dict:
        return {"arity": self.arity, "size": self.size, "description": self.description}


class FiniteRelation(DecidableRelation):
    def __init__(self, arity: int, tuples: Iterable[Sequence[int]]):
        members = sorted({tuple(int(v) for v in t) for t in tuples})
        if any(len(t) != arity for t in members):
            raise ValueError(f"tuples must have length {arity}")
        if any(v < 0 for t in members for v in t):
            raise ValueError("relations over ℕ need non-negative entries")
        pos = {t: j for j, t in enumerate(members)}
        super().__init__(
            arity, pos.__contains__, members.__getitem__, pos.__getitem__, len(members),
            f"finite, {len(members)} tuples",
        )
        self.tuples = members


@dataclass
class ComputableStructure:
    """A structure with carrier ℕ and decidable, enumerable relations."""

    language: RelLanguage
    relations: dict[str, DecidableRelation]
    name: str = ""

    def __post_init__(self):
        for s, a in self.language.symbols:
            if s not in self.relations:
                raise ValueError(f"missing relation {s}")
            if self.relations[s].arity != a:
                raise ValueError(f"relation {s} has arity {self.relations[s].arity}, expected {a}")

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "carrier": "N",
            "relations": {s: self.relations[s].to_json() for s in self.language.names},
        }


def succ_even_structure() -> ComputableStructure:
    """ℕ with the successor graph and the unary predicate "even"."""
    succ = DecidableRelation(
        2, lambda q: q[1] == q[0] + 1, lambda j: (j, j + 1), lambda q: q[0], None, "{(j, j+1)}"
    )
    even = DecidableRelation(
        1, lambda q: q[0] % 2 == 0, lambda j: (2 * j,), lambda q: q[0] // 2, None, "{2j}"
    )
    return ComputableStructure(
        RelLanguage((("succ", 2), ("even", 1))), {"succ": succ, "even": even}, "succ-even"
    )


def structure_over_nat(data: Mapping) -> ComputableStructure:
    """Finite relations over ℕ from the JSON structure format (``"carrier": "N"``)."""
    if data.get("carrier", "N") not in ("N", "nat", "ℕ"):
        raise ValueError('encodings need "carrier": "N"')
    symbols, rels = [], {}
    for name, spec in data.get("relations", {}).items():
        tuples = spec["tuples"] if isinstance(spec, Mapping) else spec
        arity = spec.get("arity") if isinstance(spec, Mapping) else None
        if arity is None:
            if not tuples:
                raise ValueError(f"{name}: arity required for an empty relation")
            arity = len(tuples[0])
        symbols.append((name, int(arity)))
        rels[name] = FiniteRelation(int(arity), tuples)
    return ComputableStructure(RelLanguage(tuple(symbols)), rels, data.get("name", ""))


# -- carriers ---------------------------------------------------------------


class FiniteCarrier:
    def __init__(self, elements: Sequence):
        self.elements = tuple(elements)
        self._set = set(self.elements)

    def contains(self, x) -> bool:
        return x in self._set

    def sample(self, rng: random.Random):
        return rng.choice(self.elements)

    def describe(self) -> str:
        return f"finite({len(self.elements)})"


class NatCarrier:
    elements = None

    def contains(self, x) -> bool:
        return isinstance(x, int) and x >= 0

    def sample(self, rng: random.Random) -> int:
        return sample_ints(rng, 1)[0]

    def describe(self) -> str:
        return "N"


class CodeCarrier:
    """``X × Q`` inside ℕ as the codes ``pair2(x, j)`` with ``q = Q.nth(j)``."""

    elements = None

    def __init__(self, rel: DecidableRelation):
        self.rel = rel

    def contains(self, c) -> bool:
        if not isinstance(c, int) or c < 0:
            return False
        _, j = cantor_unpair(c)
        return self.rel.size is None or j < self.rel.size

    def sample(self, rng: random.Random) -> int:
        x = sample_ints(rng, 1)[0]
        j = rng.randrange(self.rel.size) if self.rel.size else sample_ints(rng, 1, 16, 10**4)[0]
        return cantor_pair(x, j)

    def describe(self) -> str:
        return "N x Q"


def _as_carrier(c):
    if isinstance(c, (FiniteCarrier, NatCarrier, CodeCarrier)):
        return c
    if c in ("N", None):
        return NatCarrier()
    return FiniteCarrier(c)


# -- the graph --------------------------------------------------------------


MAIN = "v"


def vertex(symbol: str) -> str:
    return f"v_{symbol}"


@dataclass(frozen=True)
class EncodingGraph:
    language: RelLanguage
    n_trunc: int

    @property
    def vertices(self) -> tuple[str, ...]:
        return (MAIN,) + tuple(vertex(s) for s in self.language.names)

    @property
    def edges(self) -> dict[str, tuple[str, str]]:
        out = {}
        for n in range(1, self.n_trunc + 1):
            for i in range(n):
                out[f"p^{n}_{i}"] = (MAIN, MAIN)
        for n in range(1, self.n_trunc + 1):
            for i in range(n):
                out[f"p'^{n}_{i}"] = (MAIN, MAIN)
        for s in self.language.names:
            out[f"s'_{s}"] = (vertex(s), MAIN)
            out[f"r_{s}"] = (MAIN, vertex(s))
        return out

    def to_json(self) -> dict:
        return {
            "language": self.language.to_json(),
            "n_trunc": self.n_trunc,
            "vertices": list(self.vertices),
            "edges": {e: list(v) for e, v in self.edges.items()},
            "edge_count": len(self.edges),
        }


def build_encoding_graph(language: RelLanguage, n_trunc: int) -> EncodingGraph:
    if language.has_nullary:
        raise NullarySymbolError("the encoding graph needs a language without nullary symbols")
    if n_trunc < 2:
        raise ValueError("pairing truncation must be at least 2")
    return EncodingGraph(language, n_trunc)


# -- presheaves on the graph ------------------------------------------------


class EncodingPresheaf:
    """Carriers per vertex and a total function per edge."""

    def __init__(self, graph: EncodingGraph, carriers: Mapping[str, object], actions: Mapping[str, Callable]):
        self.graph = graph
        self.carriers = {v: _as_carrier(carriers[v]) for v in graph.vertices}
        missing = set(graph.edges) - set(actions)
        if missing:
            raise PreconditionError(f"no action for edges {sorted(missing)}")
        self.actions = dict(actions)

    def act(self, edge: str, x):
        return self.actions[edge](x)

    def carrier(self, v: str):
        return self.carriers[v]

    def is_inhabited(self) -> bool:
        return check_inhabited(self)


class PresheafEncoding(EncodingPresheaf):
    """The presheaf attached to a structure over ℕ and a pairing system."""

    def __init__(self, structure: ComputableStructure, ps: PairingSystem, n_trunc: int):
        graph = build_encoding_graph(structure.language, n_trunc)
        needed = set(range(1, n_trunc + 1)) | {2} | {a for _, a in structure.language.symbols}
        if not needed <= set(ps.arities):
            raise PreconditionError(f"pairing must cover arities {sorted(needed)}")
        for s, rel in structure.relations.items():
            if rel.is_empty():
                raise PreconditionError(f"relation {s} is empty")
            if not rel.enumerable:
                raise PreconditionError(f"relation {s} needs an enumerator")
        self.structure = structure
        self.pairing = ps
        # stray elements retract onto the least code, pair2(0, 0)
        self.default_code = cantor_pair(0, 0)
        carriers: dict[str, object] = {MAIN: NatCarrier()}
        actions: dict[str, Callable] = {}
        for n in range(1, n_trunc + 1):
            for i in range(n):
                actions[f"p^{n}_{i}"] = lambda x, n=n, i=i: ps.p(n, i, x)
                actions[f"p'^{n}_{i}"] = lambda x, n=n, i=i: self._p_prime(n, i, x)
        for s in structure.language.names:
            carriers[vertex(s)] = CodeCarrier(structure.relations[s])
            actions[f"s'_{s}"] = lambda c, s=s: self.s_prime(s, c)
            actions[f"r_{s}"] = lambda y, s=s: self.retract(s, y)
        super().__init__(graph, carriers, actions)

    def _p_prime(self, n, i, x):
        a, b = self.pairing.unpair(2, x)
        return self.pairing.pair((a, self.pairing.p(n, i, b)))

    def s(self, symbol: str, q: Sequence[int]) -> int:
        return self.pairing.pair(tuple(q))

    def code(self, symbol: str, x: int, q: Sequence[int]) -> int:
        return self.pairing.pair((x, self.structure.relations[symbol].index(tuple(q))))

    def decode(self, symbol: str, c: int) -> tuple[int, tuple]:
        x, j = self.pairing.unpair(2, c)
        return x, self.structure.relations[symbol].nth(j)

    def s_prime(self, symbol: str, c: int) -> int:
        x, q = self.decode(symbol, c)
        return self.pairing.pair((x, self.s(symbol, q)))

    def retract(self, symbol: str, y: int) -> int:
        rel = self.structure.relations[symbol]
        a, b = self.pairing.unpair(2, y)
        q = self.pairing.unpair(rel.arity, b)
        if q in rel:
            return self.code(symbol, a, q)
        return self.default_code

    def to_json(self) -> dict:
        return {
            "structure": self.structure.to_json(),
            "pairing": self.pairing.to_json(),
            "graph": self.graph.to_json(),
            "retraction_default": self.default_code,
            "carriers": {v: c.describe() for v, c in self.carriers.items()},
        }


def build_presheaf_encoding(
    structure: ComputableStructure, ps: PairingSystem | None = None, n_trunc: int = 4
) -> PresheafEncoding:
    if ps is None:
        arities = set(range(1, n_trunc + 1)) | {2} | {a for _, a in structure.language.symbols}
        ps = cantor_pairing_system(sorted(arities))
    return PresheafEncoding(structure, ps, n_trunc)


def check_inhabited(P) -> bool:
    """Every carrier non-empty (vacuous for an empty category)."""
    if isinstance(P, FinitePresheaf):
        return P.is_inhabited()
    return all(c.elements is None or len(c.elements) > 0 for c in P.carriers.values())


def _elements(carrier, rng, samples):
    if carrier.elements is not None:
        return list(carrier.elements), "exhaustive"
    return [carrier.sample(rng) for _ in range(samples)], f"{samples} samples"


def check_presheaf(Xp: EncodingPresheaf, samples: int = DEFAULT_SAMPLES, seed: int = 0) -> list[CheckResult]:
    """Retraction law and closure of every action; the pairing laws for encodings."""
    rng = random.Random(seed)
    results = []
    for s in Xp.graph.language.names:
        src = Xp.carrier(vertex(s))
        xs, how = _elements(src, rng, samples)
        bad = None
        for c in xs:
            back = Xp.act(f"r_{s}", Xp.act(f"s'_{s}", c))
            if back != c:
                bad = {"element": c, "s'": Xp.act(f"s'_{s}", c), "r(s'(c))": back}
                break
        results.append(check(f"retraction r_{s} . s'_{s} = id", bad is None, bad, how))
    for e, (a, b) in Xp.graph.edges.items():
        xs, how = _elements(Xp.carrier(a), rng, min(samples, 200))
        bad = next(({"element": x, "image": Xp.act(e, x)} for x in xs if not Xp.carrier(b).contains(Xp.act(e, x))), None)
        if bad is not None:
            results.append(failed(f"action {e} lands in the carrier of {b}", bad, how))
    if not any(r.name.startswith("action ") for r in results):
        results.append(passed("every action lands in its target carrier"))
    if isinstance(Xp, PresheafEncoding):
        results.extend(_encoding_laws(Xp, rng, samples))
    return results


def _encoding_laws(Xp: PresheafEncoding, rng: random.Random, samples: int) -> list[CheckResult]:
    ps, N = Xp.pairing, Xp.graph.n_trunc
    out = []
    for n in range(1, N + 1):
        bad = None
        for _ in range(samples):
            xs = tuple(sample_ints(rng, n))
            z = ps.pair(xs)
            if ps.unpair(n, z) != xs or any(Xp.act(f"p^{n}_{i}", z) != xs[i] for i in range(n)):
                bad = {"tuple": list(xs), "code": z}
                break
        out.append(check(f"pairing law p^{n}_i<x_0..x_{n - 1}> = x_i", bad is None, bad, f"{samples} samples"))
    for n in range(1, N + 1):
        bad = None
        for _ in range(samples):
            x = sample_ints(rng, 1)[0]
            xs = tuple(sample_ints(rng, n))
            arg = ps.pair((x, ps.pair(xs)))
            for i in range(n):
                got = Xp.act(f"p'^{n}_{i}", arg)
                if got != ps.pair((x, xs[i])):
                    bad = {"edge": f"p'^{n}_{i}", "x": x, "tuple": list(xs), "got": got}
                    break
            if bad:
                break
        out.append(check(f"p' law p'^{n}_i<x,<x_0..x_{n - 1}>> = <x,x_i>", bad is None, bad, f"{samples} samples"))
    for s in Xp.graph.language.names:
        rel = Xp.structure.relations[s]
        qs = _sample_relation(rel, rng, samples)
        bad = next(({"q": list(q)} for q in qs if Xp.s(s, q) != ps.pair(q) or ps.unpair(rel.arity, Xp.s(s, q)) != q), None)
        images = {}
        for q in qs:
            if bad is None and images.setdefault(Xp.s(s, q), q) != q:
                bad = {"collision": [list(images[Xp.s(s, q)]), list(q)]}
        out.append(check(f"s law s_{s}(q) = <q>, injective", bad is None, bad, f"{len(qs)} samples"))
        bad = None
        for q in qs:
            x = sample_ints(rng, 1)[0]
            c = Xp.code(s, x, q)
            if Xp.act(f"s'_{s}", c) != ps.pair((x, Xp.s(s, q))):
                bad = {"x": x, "q": list(q), "code": c}
                break
        out.append(check(f"s' law s'_{s}(x,q) = <x,s_{s}(q)>", bad is None, bad, f"{len(qs)} samples"))
    return out


def _sample_relation(rel: DecidableRelation, rng: random.Random, count: int) -> list[tuple]:
    if rel.size is not None:
        return [rel.nth(rng.randrange(rel.size)) for _ in range(count)]
    return [rel.nth(j) for j in sample_ints(rng, count, 64, 10**5)]


# -- X (x) F over ℕ ------------------------------------------------------------

Expr = tuple  # (tuple of ints, label)


class NatTensor:
    """Canonical forms in ``ℕ (x) F`` for ``F`` in the essential image.

    An expression ``(values, sigma)`` factors through the sorted support
    ``S`` of ``values``; its canonical form is the canonical expression of
    ``[|S|] (x) F`` relabelled by ``S``. This does not depend on the choice of
    finite subset because all minimal expressions of a class share one image.
    """

    def __init__(self, F: TruncatedFunctor):
        if F.start != 0:
            raise PreconditionError("functor must be defined at [0]")
        res = is_in_essential_image(F)
        if not res.holds:
            raise PreconditionError(f"functor {F.name} is not in the essential image: {res.reason}")
        self.F = F
        self._canon: dict[int, list[tuple[tuple[int, ...], str]]] = {}

    def _functor(self, k: int) -> TruncatedFunctor:
        if self.F.bound < k:
            G = self.F.with_bound(k)
            if G is None:
                raise BoundTooSmall(f"functor {self.F.name} is only known up to [{self.F.bound}]")
            self.F = G
        return self.F

    def _canonical_table(self, s: int):
        table = self._canon.get(s)
        if table is None:
            F = self._functor(required_bound(s))
            T = Tensor(s, F, bound=required_bound(s))
            ids = make_carrier(s)
            pos = {c: i for i, c in enumerate(ids)}
            table = []
            for rho in F.values(s):
                e = T.class_of((ids, rho)).canonical
                table.append((tuple(pos[v] for v in e.map), e.element))
            self._canon[s] = table
        return table

    def check_expression(self, expr) -> tuple[tuple[int, ...], str]:
        try:
            values, label = expr
            values = tuple(int(v) for v in values)
        except (TypeError, ValueError):
            raise ExpressionParseError(f"not an expression: {expr!r}") from None
        if any(v < 0 for v in values):
            raise ExpressionParseError(f"negative value in {expr!r}")
        F = self._functor(len(values))
        if label not in F.values(len(values)):
            raise ExpressionParseError(f"{label!r} is not an element of F[{len(values)}]")
        return values, label

    def normalize(self, expr) -> tuple[tuple[int, ...], str]:
        values, label = self.check_expression(expr)
        support = sorted(set(values))
        pos = {v: i for i, v in enumerate(support)}
        s = len(support)
        F = self._functor(max(len(values), s))
        rho = F.index(s, F.act(FinFunction(tuple(pos[v] for v in values), s), label))
        idx, el = self._canonical_table(s)[rho]
        return tuple(support[i] for i in idx), el

    def length(self, expr) -> int:
        return len(self.normalize(expr)[0])

    def push(self, fn: Callable[[int], int], expr) -> tuple[tuple[int, ...], str]:
        values, label = self.check_expression(expr)
        return self.normalize((tuple(fn(v) for v in values), label))

    def tensor_with(self, xs: Sequence[int], tau: str) -> tuple[tuple[int, ...], str]:
        return self.normalize((tuple(xs), tau))


def expr_to_json(expr) -> dict:
    return {"map": list(expr[0]), "element": expr[1]}


# -- morphism families -------------------------------------------------------


class MorphismFamily(Protocol):
    """Components ``f_v: X^n -> (X (x) F)`` and ``f_{v_s}`` on the symbol carriers."""

    n: int

    def main(self, xs: tuple[int, ...]) -> Expr: ...

    def component(self, symbol: str, xs: tuple[int, ...]) -> Expr: ...


class TensorMorphism:
    """``xs -> (xs . perm) (x) tau`` at every vertex; ``perm`` defaults to the identity."""

    def __init__(self, F: TruncatedFunctor, tau: str, n: int, perm: Sequence[int] | None = None):
        self.F = F
        self.tau = tau
        self.n = n
        self.perm = tuple(range(n)) if perm is None else tuple(perm)
        if len(self.perm) != n or any(not 0 <= p < n for p in self.perm):
            raise ValueError("perm must be a map [n] -> [n]")
        if tau not in F.values(n):
            raise ValueError(f"{tau!r} is not in F[{n}]")

    def main(self, xs):
        return tuple(xs[p] for p in self.perm), self.tau

    def component(self, symbol, xs):
        return self.main(xs)


class FunctionMorphism:
    """Wrap plain callables; ``component`` falls back to ``main``."""

    def __init__(self, n: int, main: Callable, components: Mapping[str, Callable] | None = None):
        self.n = n
        self._main = main
        self._components = dict(components or {})

    def main(self, xs):
        return self._main(xs)

    def component(self, symbol, xs):
        return self._components.get(symbol, self._main)(xs)


# -- the analyzer --------------------------------------------------------------

NAIVE, INCONCLUSIVE, REFUTED = "NAIVE", "INCONCLUSIVE", "REFUTED"


@dataclass
class Analysis:
    verdict: str
    n: int
    functor: str
    tau: str | None = None
    max_length: int | None = None
    plateau: bool | None = None
    first_max_at: int | None = None
    argmax: list[int] | None = None
    minimal_expression: dict | None = None
    h: list[int] | None = None
    witness: dict | None = None
    reason: str = ""
    checks: list[CheckResult] = field(default_factory=list)
    config: dict = field(default_factory=dict)

    def __str__(self):
        return f"NAIVE({self.tau})" if self.verdict == NAIVE else self.verdict

    def to_json(self) -> dict:
        out = {
            "verdict": self.verdict,
            "n": self.n,
            "functor": self.functor,
            "config": self.config,
            "checks": [c.to_json() for c in self.checks],
        }
        for k in ("tau", "max_length", "plateau", "first_max_at", "argmax", "minimal_expression", "h", "witness"):
            v = getattr(self, k)
            if v is not None:
                out[k] = v
        if self.reason:
            out["reason"] = self.reason
        return out


def _sample_tuple(carrier, rng, n):
    return tuple(carrier.sample(rng) for _ in range(n))


def analyze_morphism(
    f: MorphismFamily,
    Xp: PresheafEncoding,
    F: TruncatedFunctor,
    n: int,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    equivariance_samples: int = DEFAULT_EQUIVARIANCE_SAMPLES,
    edges: Sequence[str] | None = None,
) -> Analysis:
    """Sampled replay of the argument that an equivariant ``f`` is ``- (x) tau``.

    Steps: equivariance spot checks on every truncated edge; the maximum
    length ``m`` over the samples; a sampled argmax ``a`` with its canonical
    minimal expression ``alpha (x) sigma``; the induced ``beta`` and ``phi_i``
    for fresh ``b`` via ``f(<a_i, b_i>) = (<alpha_j, beta_j>) (x) sigma``;
    matching each ``phi_i`` with a projection to get ``h``; and a final check
    of ``f = - (x) F(h)(sigma)`` on fresh samples.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if n > Xp.graph.n_trunc or 2 not in Xp.pairing.arities:
        raise PreconditionError(f"n={n} needs pairing of arity 2 and n <= n_trunc")
    NT = NatTensor(F)
    rng = random.Random(seed)
    ps = Xp.pairing
    config = {
        "seed": seed,
        "samples": samples,
        "equivariance_samples": equivariance_samples,
        "pairing": ps.name,
        "n_trunc": Xp.graph.n_trunc,
        "retraction_default": Xp.default_code,
    }
    A = Analysis(INCONCLUSIVE, n, F.name, config=config)
    nat = Xp.carrier(MAIN)

    def main(xs):
        return NT.normalize(f.main(tuple(xs)))

    # (0) equivariance
    chosen = list(Xp.graph.edges) if edges is None else list(edges)
    for e in chosen:
        if e not in Xp.graph.edges:
            raise ValueError(f"unknown edge {e}")
        src, dst = Xp.graph.edges[e]
        fn = Xp.actions[e]
        for _ in range(equivariance_samples):
            xs = _sample_tuple(Xp.carrier(src), rng, n)
            moved = tuple(fn(x) for x in xs)
            before = main(xs) if src == MAIN else NT.normalize(f.component(src[2:], xs))
            after = main(moved) if dst == MAIN else NT.normalize(f.component(dst[2:], moved))
            pushed = NT.push(fn, before)
            if after != pushed:
                A.verdict = REFUTED
                A.reason = f"not equivariant for {e}"
                A.witness = {
                    "edge": e,
                    "sample": list(xs),
                    "f(edge(sample))": expr_to_json(after),
                    "edge(f(sample))": expr_to_json(pushed),
                }
                A.checks.append(failed(f"equivariance {e}", A.witness))
                return A
            if src == dst == MAIN and len(pushed[0]) > len(before[0]):
                A.verdict = REFUTED
                A.reason = f"length increased along {e}"
                A.witness = {"edge": e, "sample": list(xs)}
                A.checks.append(failed(f"length along {e}", A.witness))
                return A
    A.checks.append(passed("equivariance", f"{len(chosen)} edges x {equivariance_samples} samples"))

    # (1) lengths
    points = [_sample_tuple(nat, rng, n) for _ in range(samples)]
    outputs = [main(xs) for xs in points]
    lengths = [len(o[0]) for o in outputs]
    m = max(lengths)
    first = lengths.index(m)
    A.max_length, A.first_max_at = m, first
    A.plateau = first < samples // 2
    A.checks.append(
        check("length plateau", A.plateau, {"max": m, "first_at": first}, f"max length {m} first seen at sample {first}")
    )

    # (2) argmax and its minimal expression
    a = points[first]
    alpha, sigma = outputs[first]
    A.argmax = list(a)
    A.minimal_expression = expr_to_json((alpha, sigma))

    # (3) beta and phi
    fresh = [_sample_tuple(nat, rng, n) for _ in range(samples)]
    phis: list[list[int]] = []
    for b in fresh:
        y = main(tuple(ps.pair((a[i], b[i])) for i in range(n)))
        gamma, _ = y
        if len(gamma) > m:
            A.reason = "a sample exceeded the observed maximum length"
            A.witness = {"b": list(b), "length": len(gamma), "max": m}
            return A
        firsts = [ps.p(2, 0, g) for g in gamma]
        if len(gamma) < m or sorted(firsts) != sorted(alpha):
            A.verdict = REFUTED
            A.reason = "f(<a,b>) does not lie over f(a)"
            A.witness = {"b": list(b), "f(<a,b>)": expr_to_json(y)}
            return A
        where = {v: j for j, v in enumerate(firsts)}
        beta = [ps.p(2, 1, gamma[where[al]]) for al in alpha]
        if NT.normalize((tuple(ps.pair((alpha[j], beta[j])) for j in range(m)), sigma)) != y:
            A.verdict = REFUTED
            A.reason = "no beta with f(<a,b>) = (<alpha_j,beta_j>) (x) sigma"
            A.witness = {"b": list(b), "f(<a,b>)": expr_to_json(y)}
            return A
        phis.append(beta)
    A.checks.append(passed("induced beta exists", f"{len(fresh)} samples"))

    # (4) each phi_i against the projections
    h = []
    for j in range(m):
        matches = [i for i in range(n) if all(beta[j] == b[i] for beta, b in zip(phis, fresh))]
        if not matches:
            A.verdict = REFUTED
            k = next(k for k, (beta, b) in enumerate(zip(phis, fresh)) if beta[j] not in b)
            A.reason = f"phi_{j} is not a projection"
            A.witness = {"phi": j, "b": list(fresh[k]), "value": phis[k][j]}
            A.checks.append(failed(f"phi_{j} is a projection", A.witness))
            return A
        if len(matches) > 1:
            A.reason = f"phi_{j} agrees with several projections on the samples"
            A.witness = {"phi": j, "projections": matches}
            return A
        h.append(matches[0])
    A.h = h
    A.checks.append(passed("phi_i are projections", f"h = {h}"))

    # (5) tau = F(h)(sigma), verified on fresh samples
    G = NT._functor(max(m, n))
    tau = G.act(FinFunction(tuple(h), n), sigma)
    for _ in range(samples):
        xs = _sample_tuple(nat, rng, n)
        got, want = main(xs), NT.tensor_with(xs, tau)
        if got != want:
            A.verdict = REFUTED
            A.reason = "f differs from - (x) tau"
            A.witness = {"sample": list(xs), "f": expr_to_json(got), "expected": expr_to_json(want)}
            A.checks.append(failed("f = - (x) tau", A.witness))
            return A
    A.checks.append(passed("f = - (x) tau", f"{samples} fresh samples"))
    A.verdict, A.tau = NAIVE, tau
    return A


# -- unique tau on finite presheaves ----------------------------------------------


@dataclass
class UniqueTauResult:
    holds: bool
    checks: list[CheckResult]
    witnesses: list[dict]
    functors: list[str]
    n_max: int

    def __bool__(self):
        return self.holds


def _render(x) -> str:
    if isinstance(x, tuple):
        return "(" + ",".join(_render(v) for v in x) + ")"
    return str(x)


def check_unique_tau(
    P: FinitePresheaf,
    functors: Sequence[TruncatedFunctor],
    n_max: int,
    cap: int = 10**6,
    max_witnesses: int = 10,
) -> UniqueTauResult:
    """Every natural ``P^n -> P (x) F`` is ``- (x) tau`` for exactly one ``tau``.

    Exhaustive over natural transformations for ``1 <= n <= n_max``; ``cap``
    bounds the number of transformations examined per ``(F, n)``.
    """
    if not P.is_inhabited():
        raise PreconditionError("presheaf is not inhabited")
    for F in functors:
        res = is_in_essential_image(F)
        if not res.holds:
            raise PreconditionError(f"functor {F.name} is not in the essential image: {res.reason}")
    checks, witnesses = [], []
    for F in functors:
        Q = presheaf_tensor(P, F)
        for n in range(1, n_max + 1):
            Pn = P.power(n)
            need = max([n] + [len(P.carrier(c)) for c in P.objects])
            G = F if F.bound >= need else F.with_bound(need)
            if G is None:
                raise BoundTooSmall(f"functor {F.name} is only known up to [{F.bound}]")
            naive = {}
            for tau in G.values(n):
                # the class of xs (x) tau is F(xs)(tau) read in F[|P(c)|]
                comps = {}
                for c in P.objects:
                    T, car = Q.tensors[c], P.carrier(c)
                    pos = {v: i for i, v in enumerate(car)}
                    comps[c] = tuple(
                        T.class_of((car, G.act(FinFunction(tuple(pos[v] for v in xs), len(car)), tau))).class_id
                        for xs in Pn.carrier(c)
                    )
                naive.setdefault(_key(comps, P.objects), []).append(tau)
            count = 0
            bad = []
            for eta in natural_transformations(Pn, Q):
                count += 1
                if count > cap:
                    raise SearchTooLarge(f"more than {cap} natural transformations for F={F.name}, n={n}")
                taus = naive.get(_key(eta, P.objects), [])
                if len(taus) != 1:
                    bad.append({
                        "functor": F.name,
                        "n": n,
                        "components": {
                            c: {_render(xs): str(Q.carrier(c)[eta[c][i]]) for i, xs in enumerate(Pn.carrier(c))}
                            for c in P.objects
                        },
                        "matching_taus": taus,
                    })
            name = f"unique tau F={F.name} n={n}"
            detail = f"{count} natural transformations, {count - len(bad)} of the form - (x) tau"
            checks.append(check(name, not bad, bad[:max_witnesses] or None, detail))
            witnesses.extend(bad)
    holds = not witnesses
    names = [F.name for F in functors]
    checks.append(
        check(
            f"inhabited-topos-rigid up to (F in {names}, n <= {n_max})",
            holds,
            None,
            "bounded check",
        )
    )
    return UniqueTauResult(holds, checks, witnesses, names, n_max)


def _key(comps: Mapping[str, Sequence[int]], objects) -> tuple:
    return tuple(tuple(comps[c]) for c in objects)

