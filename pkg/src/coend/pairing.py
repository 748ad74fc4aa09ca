"""Pairing systems and the ``T_n``/``S_n`` augmentation of a structure over ℕ.

The bijection ℕ -> ℕ^n used here is iterated Cantor pairing, nested to the
right: ``pair_3(a, b, c) = pair_2(a, pair_2(b, c))`` and ``pair_1 = id``.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Hashable, Mapping, Sequence

from .errors import PreconditionError
from .report import CheckResult, check

PAIRING_NAME = "cantor-right-nested"


def cantor_pair(a: int, b: int) -> int:
    s = a + b
    return s * (s + 1) // 2 + b


def cantor_unpair(z: int) -> tuple[int, int]:
    w = (math.isqrt(8 * z + 1) - 1) // 2
    b = z - w * (w + 1) // 2
    return w - b, b


def pair_n(xs: Sequence[int]) -> int:
    if not xs:
        raise ValueError("pairing needs at least one coordinate")
    out = xs[-1]
    for x in reversed(xs[:-1]):
        out = cantor_pair(x, out)
    return out


def unpair_n(n: int, z: int) -> tuple[int, ...]:
    if n < 1:
        raise ValueError("pairing needs at least one coordinate")
    out = []
    for _ in range(n - 1):
        a, z = cantor_unpair(z)
        out.append(a)
    out.append(z)
    return tuple(out)


class PairingSystem:
    """Functions ``p^n_i: X -> X`` whose assembled map ``X -> X^n`` is bijective."""

    name = "abstract"
    carrier: tuple | None = None  # None means ℕ

    def __init__(self, arities: Sequence[int]):
        arities = tuple(sorted(set(arities)))
        if not arities or arities[0] < 1:
            raise ValueError("arities must be positive")
        self.arities = arities

    def _check_arity(self, n: int):
        if n not in self.arities:
            raise PreconditionError(f"no pairing of arity {n} (available {list(self.arities)})")

    def pair(self, xs: Sequence) -> Hashable:
        raise NotImplementedError

    def unpair(self, n: int, x) -> tuple:
        raise NotImplementedError

    def p(self, n: int, i: int, x):
        if not 0 <= i < n:
            raise ValueError(f"index {i} out of range for arity {n}")
        return self.unpair(n, x)[i]

    def to_json(self) -> dict:
        return {"name": self.name, "arities": list(self.arities)}


class CantorPairingSystem(PairingSystem):
    name = PAIRING_NAME

    def pair(self, xs):
        self._check_arity(len(xs))
        return pair_n(xs)

    def unpair(self, n, x):
        self._check_arity(n)
        return unpair_n(n, x)


def cantor_pairing_system(n_list: Sequence[int]) -> CantorPairingSystem:
    return CantorPairingSystem(n_list)


class FinitePairingSystem(PairingSystem):
    """Pairing on a finite carrier given by tables ``{n: [p^n_0, ..., p^n_{n-1}]}``.

    Each ``p^n_i`` is a mapping (or a list indexed like the carrier).
    Bijectivity of every assembled map is checked on construction.
    """

    name = "finite-table"

    def __init__(self, carrier: Sequence[Hashable], tables: Mapping[int, Sequence]):
        super().__init__(list(tables))
        self.carrier = tuple(carrier)
        self._unpair: dict[int, dict] = {}
        self._pair: dict[int, dict] = {}
        for n, projections in tables.items():
            if len(projections) != n:
                raise PreconditionError(f"arity {n} needs {n} projection tables")
            maps = [
                p if isinstance(p, Mapping) else dict(zip(self.carrier, p)) for p in projections
            ]
            assembled = {x: tuple(m[x] for m in maps) for x in self.carrier}
            inverse = {v: x for x, v in assembled.items()}
            if len(inverse) != len(self.carrier) or len(self.carrier) ** n != len(self.carrier):
                raise PreconditionError(f"assembled map X -> X^{n} is not a bijection")
            if any(c not in inverse for c in product(self.carrier, repeat=n)):
                raise PreconditionError(f"assembled map X -> X^{n} is not a bijection")
            self._unpair[n] = assembled
            self._pair[n] = inverse

    def pair(self, xs):
        self._check_arity(len(xs))
        return self._pair[len(xs)][tuple(xs)]

    def unpair(self, n, x):
        self._check_arity(n)
        return self._unpair[n][x]


def check_pairing_system(
    ps: PairingSystem, samples: int = 10_000, seed: int = 0, grid: bool = True
) -> list[CheckResult]:
    """Round-trip and bijectivity checks, exhaustive on finite carriers.

    Over ℕ: ``pair(unpair(x)) = x`` on sampled ``x``; ``unpair(pair(t)) = t`` on
    sampled tuples; and the assembled map is injective on the sample set. With
    ``grid`` the tuples also include a full grid of about ``samples`` points.
    """
    results = []
    rng = random.Random(seed)
    for n in ps.arities:
        name = f"pairing arity {n}"
        if ps.carrier is not None:
            seen = {}
            bad = None
            for x in ps.carrier:
                t = ps.unpair(n, x)
                if t in seen or ps.pair(t) != x:
                    bad = {"x": x, "tuple": list(t)}
                    break
                seen[t] = x
            results.append(check(f"{name}: bijection (exhaustive)", bad is None, bad))
            continue
        xs = sample_ints(rng, samples)
        bad = next(({"x": x} for x in xs if ps.pair(ps.unpair(n, x)) != x), None)
        results.append(check(f"{name}: pair(unpair(x)) = x", bad is None, bad, f"{len(xs)} samples"))
        tuples = [tuple(sample_ints(rng, n)) for _ in range(samples)]
        if grid:
            side = max(2, round(samples ** (1 / n)))
            tuples += list(product(range(side), repeat=n))
        bad = next(
            ({"tuple": list(t)} for t in tuples if ps.unpair(n, ps.pair(t)) != t), None
        )
        results.append(
            check(f"{name}: unpair(pair(t)) = t", bad is None, bad, f"{len(tuples)} tuples")
        )
        images: dict[int, tuple] = {}
        bad = None
        for t in tuples:
            z = ps.pair(t)
            if images.setdefault(z, t) != t:
                bad = {"value": z, "tuples": [list(images[z]), list(t)]}
                break
        distinct = {ps.unpair(n, x) for x in set(xs)}
        if bad is None and len(distinct) != len(set(xs)):
            bad = {"reason": "two sampled values share an unpairing"}
        results.append(check(f"{name}: assembled map injective on samples", bad is None, bad))
    return results


def sample_ints(rng: random.Random, count: int, small: int = 64, large: int = 10**6) -> list[int]:
    """Half small values (to exercise collisions), half spread out."""
    return [rng.randrange(small) if rng.random() < 0.5 else rng.randrange(large) for _ in range(count)]


class OracleRelation:
    """A relation given only by a membership test."""

    def __init__(self, arity: int, contains: Callable[[tuple], bool]):
        self.arity = arity
        self._contains = contains

    def __contains__(self, t) -> bool:
        t = tuple(t)
        return len(t) == self.arity and bool(self._contains(t))


class AugmentedStructure:
    """A structure over ℕ extended by ``T_n`` and ``S_n`` for each pairing arity.

    ``T_n = {c_0, ..., c_{n-1}}``; ``(x, y, z) ∈ S_n`` iff ``y = c_i`` for some
    ``i < n`` and ``p^n_i(x) = z``.
    """

    def __init__(self, base, ps: PairingSystem, constants: Sequence[int] | None = None):
        top = max(ps.arities)
        if constants is None:
            constants = list(range(top))
        constants = list(constants)
        if len(constants) < top:
            raise PreconditionError(f"need at least {top} constants, got {len(constants)}")
        if len(set(constants)) != len(constants):
            raise PreconditionError("constants must be pairwise distinct")
        self.base = base
        self.pairing = ps
        self.constants = constants
        self._position = {c: i for i, c in enumerate(constants)}
        self.relations: dict[str, object] = dict(getattr(base, "relations", {}) or {})
        for n in ps.arities:
            self.relations[f"T_{n}"] = OracleRelation(1, lambda t, n=n: self.in_T(n, t[0]))
            self.relations[f"S_{n}"] = OracleRelation(3, lambda t, n=n: self.in_S(n, *t))

    def in_T(self, n: int, x: int) -> bool:
        i = self._position.get(x)
        return i is not None and i < n

    def in_S(self, n: int, x: int, y: int, z: int) -> bool:
        i = self._position.get(y)
        return i is not None and i < n and self.pairing.p(n, i, x) == z

    def to_json(self) -> dict:
        return {
            "pairing": self.pairing.to_json(),
            "constants": self.constants,
            "relations": sorted(self.relations),
        }


def augment_with_pairing(base, ps: PairingSystem, constants: Sequence[int] | None = None):
    return AugmentedStructure(base, ps, constants)


@dataclass
class Certificate:
    verdict: str  # "CONSISTENT" or "REFUTED"
    index: int | None = None
    witness: dict | None = None
    checks: list[str] = field(default_factory=list)

    @property
    def consistent(self) -> bool:
        return self.verdict == "CONSISTENT"

    def __str__(self):
        return f"CONSISTENT({self.index})" if self.consistent else "REFUTED"

    def to_json(self) -> dict:
        out = {"verdict": self.verdict, "checks": self.checks}
        if self.index is not None:
            out["index"] = self.index
        if self.witness is not None:
            out["witness"] = self.witness
        return out


def projection_certificate(
    f: Callable[..., int],
    aug: AugmentedStructure,
    n: int,
    samples: int | Sequence[Sequence[int]] = 1000,
    seed: int = 0,
) -> Certificate:
    """Sample-based replay of the argument that a T_n/S_n-preserving ``f`` is a projection.

    Checks, in order: the diagonal law ``f(x,..,x) = x``; that ``f`` maps
    tuples of constants into ``T_n``; that ``c = f(c_0..c_{n-1})`` equals some
    ``c_i``; that ``S_n`` is preserved on ``(x, c_j, x_j)`` rows with
    ``x = pair(x_0..x_{n-1})``; and finally ``f(xs) = xs[i]``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    rng = random.Random(seed)
    if isinstance(samples, int):
        tuples = [tuple(sample_ints(rng, n)) for _ in range(samples)]
    else:
        tuples = [tuple(t) for t in samples]
    ps = aug.pairing
    cs = aug.constants[:n]
    done = []

    diag_points = sorted({x for t in tuples for x in t} | set(cs))
    for x in diag_points:
        fx = f(*([x] * n))
        if fx != x:
            return Certificate("REFUTED", witness={"law": "diagonal", "x": x, "f": fx}, checks=done)
    done.append("diagonal")

    for _ in range(min(len(tuples), 200)):
        args = [rng.choice(cs) for _ in range(n)]
        v = f(*args)
        if not aug.in_T(n, v):
            return Certificate("REFUTED", witness={"law": f"T_{n}", "args": args, "f": v}, checks=done)
    c = f(*cs)
    if not aug.in_T(n, c):
        return Certificate("REFUTED", witness={"law": f"T_{n}", "args": cs, "f": c}, checks=done)
    i = cs.index(c)
    done.append(f"T_{n}")

    for t in tuples:
        x = ps.pair(t)
        fx = f(*([x] * n))
        z = f(*t)
        rows = [[x, cs[j], t[j]] for j in range(n)]
        if not aug.in_S(n, fx, c, z):
            return Certificate(
                "REFUTED",
                witness={"law": f"S_{n}", "rows": rows, "image": [fx, c, z], "sample": list(t)},
                checks=done,
            )
    done.append(f"S_{n}")

    for t in tuples:
        if f(*t) != t[i]:
            return Certificate(
                "REFUTED", i, {"law": "projection", "sample": list(t), "f": f(*t)}, done
            )
    done.append("projection")
    return Certificate("CONSISTENT", i, None, done)
