"""Relational structures, homomorphism search and bounded rigidity checks."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from .errors import (
    FormulaError,
    LanguageMismatch,
    LoadError,
    NullarySymbolError,
    SearchTooLarge,
)
from .formula import Formula, eval_formula, parse_formula

DEFAULT_CAP = 1 << 20


@dataclass(frozen=True)
class RelLanguage:
    symbols: tuple[tuple[str, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple((str(s), int(a)) for s, a in self.symbols))
        names = [s for s, _ in self.symbols]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate relation symbols in {names}")
        if any(a < 0 for _, a in self.symbols):
            raise ValueError("arities must be non-negative")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(s for s, _ in self.symbols)

    @property
    def has_nullary(self) -> bool:
        return any(a == 0 for _, a in self.symbols)

    def arity(self, name: str) -> int:
        return dict(self.symbols)[name]

    def to_json(self) -> list:
        return [[s, a] for s, a in self.symbols]


class RelStructure:
    """A finite carrier with one relation ``Q_s ⊆ X^arity`` per symbol."""

    def __init__(
        self,
        language: RelLanguage,
        carrier: Sequence[Hashable],
        relations: Mapping[str, Iterable[Sequence[Hashable]]],
    ):
        self.language = language
        self.carrier = tuple(carrier)
        self._index = {x: i for i, x in enumerate(self.carrier)}
        if len(self._index) != len(self.carrier):
            raise ValueError("carrier has duplicate elements")
        extra = set(relations) - set(language.names)
        if extra:
            raise LanguageMismatch(f"relations for unknown symbols {sorted(extra)}")
        rels = {}
        for name, arity in language.symbols:
            tuples = frozenset(tuple(t) for t in relations.get(name, ()))
            for t in tuples:
                if len(t) != arity:
                    raise ValueError(f"{name}: tuple {t} does not have length {arity}")
                for x in t:
                    if x not in self._index:
                        raise ValueError(f"{name}: {x!r} is not in the carrier")
            rels[name] = tuples
        self.relations: dict[str, frozenset] = rels

    def index(self, x) -> int:
        return self._index[x]

    def __len__(self):
        return len(self.carrier)

    def __eq__(self, other):
        return (
            isinstance(other, RelStructure)
            and self.language == other.language
            and self.carrier == other.carrier
            and self.relations == other.relations
        )

    def __repr__(self):
        sizes = {s: len(q) for s, q in self.relations.items()}
        return f"RelStructure(|X|={len(self.carrier)}, relations={sizes})"

    def to_json(self) -> dict:
        return {
            "carrier": [_jsonable(x) for x in self.carrier],
            "relations": {
                s: {
                    "arity": a,
                    "tuples": sorted(
                        ([_jsonable(x) for x in t] for t in self.relations[s]),
                        key=lambda t: [str(x) for x in t],
                    ),
                }
                for s, a in self.language.symbols
            },
        }


def _jsonable(x):
    if isinstance(x, tuple):
        return [_jsonable(y) for y in x]
    return x


def _hashable(x):
    if isinstance(x, list):
        return tuple(_hashable(y) for y in x)
    return x


def structure_from_json(data: Mapping) -> RelStructure:
    carrier = [_hashable(x) for x in data["carrier"]]
    symbols, relations = [], {}
    for name, spec in data.get("relations", {}).items():
        if isinstance(spec, Mapping):
            tuples = [tuple(_hashable(x) for x in t) for t in spec.get("tuples", [])]
            arity = spec.get("arity")
            if arity is None:
                if not tuples:
                    raise ValueError(f"{name}: arity required for an empty relation")
                arity = len(tuples[0])
        else:
            tuples = [tuple(_hashable(x) for x in t) for t in spec]
            if not tuples:
                raise ValueError(f"{name}: arity required for an empty relation")
            arity = len(tuples[0])
        symbols.append((name, arity))
        relations[name] = tuples
    return RelStructure(RelLanguage(tuple(symbols)), carrier, relations)


def load_structure(path: str | Path) -> RelStructure:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise LoadError(exc.msg, str(path), exc.lineno, exc.colno) from None
    try:
        return structure_from_json(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise LoadError(f"invalid structure: {exc}", str(path)) from None


def dump_structure(A: RelStructure, path: str | Path) -> None:
    Path(path).write_text(json.dumps(A.to_json(), indent=2, sort_keys=True) + "\n")


def product_structure(*structures: RelStructure) -> RelStructure:
    """Cartesian product; a tuple of tuples is related iff every coordinate slice is.

    With no factors this is the terminal structure: one point, all relations full.
    """
    if structures:
        lang = structures[0].language
        if any(s.language != lang for s in structures):
            raise LanguageMismatch("product of structures over different languages")
    else:
        raise ValueError("use power(A, 0) for the empty product")
    return _product(lang, structures)


def _product(lang: RelLanguage, structures: Sequence[RelStructure]) -> RelStructure:
    carrier = list(product(*(s.carrier for s in structures)))
    relations = {}
    for name, arity in lang.symbols:
        rel = []
        for choice in product(*(sorted(s.relations[name], key=repr) for s in structures)):
            rel.append(tuple(tuple(q[j] for q in choice) for j in range(arity)))
        relations[name] = rel
    return RelStructure(lang, carrier, relations)


def power(A: RelStructure, n: int) -> RelStructure:
    """``A^n`` with carrier ``itertools.product(A.carrier, repeat=n)``."""
    if n < 0:
        raise ValueError("power must be non-negative")
    return _product(A.language, [A] * n)


def _check_same_language(A: RelStructure, B: RelStructure):
    if A.language != B.language:
        raise LanguageMismatch("structures have different languages")


def hom_enum(
    A: RelStructure,
    B: RelStructure,
    cap: int = DEFAULT_CAP,
    limit: int | None = None,
) -> list[tuple[int, ...]]:
    """All homomorphisms ``A -> B`` as tuples of indices into ``B.carrier``.

    The list is in lexicographic order of those index tuples. Backtracking
    checks each related tuple of ``A`` once its last element is assigned.
    """
    return list(iter_homs(A, B, cap, limit))


def iter_homs(A: RelStructure, B: RelStructure, cap: int = DEFAULT_CAP, limit: int | None = None):
    _check_same_language(A, B)
    m, k = len(A.carrier), len(B.carrier)
    if k ** m > cap:
        raise SearchTooLarge(f"{k}^{m} candidate functions exceed the cap {cap}")
    checks: list[list[tuple[tuple[int, ...], frozenset]]] = [[] for _ in range(m)]
    for name, _ in A.language.symbols:
        target = frozenset(tuple(B.index(x) for x in t) for t in B.relations[name])
        for t in A.relations[name]:
            idx = tuple(A.index(x) for x in t)
            if not idx:
                if () not in target:
                    return
                continue
            checks[max(idx)].append((idx, target))
    value = [0] * m
    count = 0

    def search(i):
        nonlocal count
        if i == m:
            count += 1
            yield tuple(value)
            return
        for v in range(k):
            value[i] = v
            if all(tuple(value[j] for j in idx) in target for idx, target in checks[i]):
                yield from search(i + 1)
                if limit is not None and count >= limit:
                    return

    yield from search(0)


def is_morphism(A: RelStructure, B: RelStructure, f: Mapping | Sequence | Callable) -> bool:
    """Whether ``f`` (element map, index tuple or callable on elements) preserves every relation."""
    _check_same_language(A, B)
    g = _as_element_map(A, B, f)
    for name, _ in A.language.symbols:
        target = B.relations[name]
        for t in A.relations[name]:
            if tuple(g[x] for x in t) not in target:
                return False
    return True


def _as_element_map(A, B, f) -> dict:
    if callable(f) and not isinstance(f, Mapping):
        return {x: f(x) for x in A.carrier}
    if isinstance(f, Mapping):
        return dict(f)
    return {x: B.carrier[i] for x, i in zip(A.carrier, f)}


def hom_enum_bruteforce(A: RelStructure, B: RelStructure) -> list[tuple[int, ...]]:
    """Reference enumeration over every function; used as a test oracle."""
    return [
        f
        for f in product(range(len(B.carrier)), repeat=len(A.carrier))
        if is_morphism(A, B, f)
    ]


@dataclass
class RigidityResult:
    """Outcome of a bounded rigidity check; only arities up to ``n_max`` were examined."""

    mode: str
    holds: bool
    n_max: int
    checked: list[int] = field(default_factory=list)
    witness: dict | None = None

    def __bool__(self):
        return self.holds

    def to_json(self) -> dict:
        out = {"mode": self.mode, "holds": self.holds, "up_to_n": self.n_max, "checked": self.checked}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


def _describe(A: RelStructure, n: int, f: tuple[int, ...], source) -> dict:
    return {
        "n": n,
        "map": [[_jsonable(x), _jsonable(A.carrier[v])] for x, v in zip(source.carrier, f)],
    }


def is_rigid(A: RelStructure, cap: int = DEFAULT_CAP) -> RigidityResult:
    identity = tuple(range(len(A.carrier)))
    for f in iter_homs(A, A, cap):
        if f != identity:
            w = _describe(A, 1, f, A)
            w["reason"] = "non-identity endomorphism"
            return RigidityResult("rigid", False, 1, [1], w)
    return RigidityResult("rigid", True, 1, [1])


def projection_indices(A: RelStructure, n: int, f: Sequence[int]) -> list[int]:
    """Indices ``i`` with ``f`` equal to the i-th projection ``A^n -> A``."""
    points = list(product(range(len(A.carrier)), repeat=n))
    return [i for i in range(n) if all(f[k] == p[i] for k, p in enumerate(points))]


def _check_projections(A, ns, mode, n_max, cap) -> RigidityResult:
    checked = []
    for n in ns:
        if len(A.carrier) ** (len(A.carrier) ** n) > cap:
            raise SearchTooLarge(
                f"|A|^(|A|^{n}) = {len(A.carrier)}^{len(A.carrier) ** n} exceeds the cap {cap}"
            )
        An = power(A, n)
        for f in iter_homs(An, A, cap):
            matches = projection_indices(A, n, f)
            if len(matches) != 1:
                w = _describe(A, n, f, An)
                w["projections"] = matches
                w["reason"] = (
                    "not a projection" if not matches else "equal to several projections"
                )
                return RigidityResult(mode, False, n_max, checked + [n], w)
        checked.append(n)
    return RigidityResult(mode, True, n_max, checked)


def is_lex_rigid(A: RelStructure, n_max: int, cap: int = DEFAULT_CAP) -> RigidityResult:
    """Every map ``A^n -> A`` with ``0 <= n <= n_max`` is uniquely a projection.

    For ``n = 0`` there are no projections, so any point ``1 -> A`` refutes.
    """
    return _check_projections(A, range(0, n_max + 1), "lex-rigid", n_max, cap)


def is_inhabited_lex_rigid(A: RelStructure, n_max: int, cap: int = DEFAULT_CAP) -> RigidityResult:
    return _check_projections(A, range(1, n_max + 1), "inhabited-lex-rigid", n_max, cap)


RIGIDITY_MODES = {
    "rigid": lambda A, n_max, cap: is_rigid(A, cap),
    "lex": is_lex_rigid,
    "inhabited-lex": is_inhabited_lex_rigid,
}


def fill_empty_relations(A: RelStructure) -> RelStructure:
    """Drop nullary symbols and replace each empty relation by the full one."""
    symbols = tuple((s, a) for s, a in A.language.symbols if a > 0)
    relations = {}
    for s, a in symbols:
        q = A.relations[s]
        relations[s] = q if q else list(product(A.carrier, repeat=a))
    return RelStructure(RelLanguage(symbols), A.carrier, relations)


def restrict_language(A: RelStructure, names: Iterable[str]) -> RelStructure:
    keep = set(names)
    symbols = tuple((s, a) for s, a in A.language.symbols if s in keep)
    return RelStructure(RelLanguage(symbols), A.carrier, {s: A.relations[s] for s, _ in symbols})


def hat_expand(
    A: RelStructure,
    formulas: Sequence[Formula | str],
    nullary_free: bool = False,
    names: Sequence[str] | None = None,
) -> RelStructure:
    """Same carrier, one relation per formula: the tuples satisfying it.

    A formula with free variables ``(x_1..x_k)`` becomes a ``k``-ary symbol.
    """
    parsed = [parse_formula(f) if isinstance(f, str) else f for f in formulas]
    if names is None:
        names = [str(f) for f in parsed]
    if len(names) != len(parsed):
        raise ValueError("one name per formula required")
    symbols, relations = [], {}
    for name, phi in zip(names, parsed):
        if phi.arity == 0 and nullary_free:
            raise NullarySymbolError(f"formula {phi} has no free variables")
        if name in relations:
            raise FormulaError(f"duplicate formula name {name!r}")
        symbols.append((name, phi.arity))
        relations[name] = [
            t
            for t in product(A.carrier, repeat=phi.arity)
            if eval_formula(A, phi, dict(zip(phi.free_vars, t)))
        ]
    return RelStructure(RelLanguage(tuple(symbols)), A.carrier, relations)
