"""Finite sets as initial segments ``[n] = {0, ..., n-1}`` and functions between them.

The canonical order on functions ``[m] -> [n]`` is lexicographic on the
values list; every search in the package that reports "the first" witness
uses this order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Iterator, Sequence

from .errors import DomainMismatch, InvalidFunction


@dataclass(frozen=True, order=True)
class FinFunction:
    """A function ``[dom_size] -> [cod_size]`` stored as its values list."""

    values: tuple[int, ...]
    cod_size: int

    def __post_init__(self):
        values = tuple(int(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if self.cod_size < 0:
            raise InvalidFunction(f"negative codomain size {self.cod_size}")
        for v in values:
            if not 0 <= v < self.cod_size:
                raise InvalidFunction(
                    f"value {v} out of range for codomain [{self.cod_size}]"
                )

    @property
    def dom_size(self) -> int:
        return len(self.values)

    def __call__(self, i: int) -> int:
        return self.values[i]

    def __len__(self):
        return len(self.values)

    def __repr__(self):
        return f"FinFunction({list(self.values)}: [{self.dom_size}]->[{self.cod_size}])"

    @classmethod
    def identity(cls, n: int) -> "FinFunction":
        return cls(tuple(range(n)), n)

    @classmethod
    def constant(cls, m: int, value: int, n: int) -> "FinFunction":
        return cls((value,) * m, n)

    @classmethod
    def empty(cls, n: int) -> "FinFunction":
        """The unique map ``[0] -> [n]``."""
        return cls((), n)

    def key(self) -> str:
        """Compact string used in JSON action tables, e.g. ``"3->2:0,1,1"``."""
        return f"{self.dom_size}->{self.cod_size}:" + ",".join(map(str, self.values))

    @classmethod
    def from_key(cls, key: str) -> "FinFunction":
        head, _, body = key.partition(":")
        dom, arrow, cod = head.partition("->")
        if not arrow:
            raise InvalidFunction(f"malformed function key {key!r}")
        values = tuple(int(v) for v in body.split(",")) if body.strip() else ()
        f = cls(values, int(cod))
        if f.dom_size != int(dom):
            raise InvalidFunction(f"key {key!r} lists {f.dom_size} values, expected {dom}")
        return f


def compose(g: FinFunction, f: FinFunction) -> FinFunction:
    """Return ``g . f``."""
    if f.cod_size != g.dom_size:
        raise DomainMismatch(
            f"cannot compose {g!r} after {f!r}: [{f.cod_size}] != [{g.dom_size}]"
        )
    gv = g.values
    return FinFunction(tuple(gv[i] for i in f.values), g.cod_size)


def image(f: FinFunction) -> list[int]:
    return sorted(set(f.values))


def is_injective(f: FinFunction) -> bool:
    return len(set(f.values)) == f.dom_size


def is_surjective(f: FinFunction) -> bool:
    return len(set(f.values)) == f.cod_size


def enumerate_functions(m: int, n: int) -> list[FinFunction]:
    """All ``n**m`` functions ``[m] -> [n]`` in lexicographic order."""
    if m < 0 or n < 0:
        raise InvalidFunction("sizes must be non-negative")
    return [FinFunction(v, n) for v in product(range(n), repeat=m)]


def iter_functions(m: int, n: int) -> Iterator[tuple[int, ...]]:
    return product(range(n), repeat=m)


def all_functions_within(bound: int, start: int = 0) -> Iterator[FinFunction]:
    for k in range(start, bound + 1):
        for l in range(start, bound + 1):
            yield from enumerate_functions(k, l)


# Elementary generators of the skeleton of FinSet.
#   face       [k]   -> [k+1]  skips i            (0 <= i <= k)
#   degeneracy [k+1] -> [k]    merges i and i+1   (0 <= i < k)
#   transposition [k] -> [k]   swaps i and i+1    (0 <= i < k-1)
# Every function [k] -> [l] is a composite of these through sizes between
# |Im| and max(k, l), so closures computed with them agree with closures
# computed with all functions below any bound >= max(k, l).


def face(k: int, i: int) -> FinFunction:
    return FinFunction(tuple(j if j < i else j + 1 for j in range(k)), k + 1)


def degeneracy(k: int, i: int) -> FinFunction:
    return FinFunction(tuple(j if j <= i else j - 1 for j in range(k + 1)), k)


def transposition(k: int, i: int) -> FinFunction:
    v = list(range(k))
    v[i], v[i + 1] = v[i + 1], v[i]
    return FinFunction(tuple(v), k)


@lru_cache(maxsize=None)
def elementary_maps(bound: int, start: int = 0) -> tuple[FinFunction, ...]:
    """All elementary generators with domain and codomain in ``[start, bound]``."""
    out = []
    for k in range(start, bound + 1):
        if k + 1 <= bound:
            out.extend(face(k, i) for i in range(k + 1))
        if k >= max(start, 1) and k + 1 <= bound:
            out.extend(degeneracy(k, i) for i in range(k))
        out.extend(transposition(k, i) for i in range(k - 1))
    return tuple(out)


def factor_elementary(g: FinFunction) -> list[FinFunction]:
    """Write ``g`` as a composite of elementary generators.

    Returns ``[e_1, ..., e_t]`` with ``g = e_t . ... . e_1``; an identity
    yields ``[]``. Intermediate sizes stay within ``[min(k,l,|Im g|), max(k,l)]``
    except that ``[0] -> [l]`` passes through ``[1], ..., [l]``.
    """
    k, l = g.dom_size, g.cod_size
    im = image(g)
    rank = {v: r for r, v in enumerate(im)}
    r = len(im)
    # g . perm is non-decreasing; perm lists domain points ordered by value
    perm = sorted(range(k), key=lambda j: (g.values[j], j))
    steps: list[FinFunction] = []

    # perm^{-1} as adjacent transpositions. perm^{-1}(j) = position of j in perm.
    inv = [0] * k
    for pos, j in enumerate(perm):
        inv[j] = pos
    steps.extend(_transpositions_for(inv))

    # order-preserving surjection s: [k] -> [r]
    s = [rank[g.values[j]] for j in perm]
    steps.extend(_degeneracies_for(s))

    # order-preserving injection [r] -> [l] with image im
    missing = [v for v in range(l) if v not in rank]
    size = r
    for m in missing:
        steps.append(face(size, m))
        size += 1
    return steps


def _transpositions_for(p: Sequence[int]) -> list[FinFunction]:
    """Adjacent transpositions whose composite is the permutation ``p``."""
    k = len(p)
    work = list(p)
    swaps = []
    # bubble sort by precomposition: work . t_i swaps entries i, i+1
    changed = True
    while changed:
        changed = False
        for i in range(k - 1):
            if work[i] > work[i + 1]:
                work[i], work[i + 1] = work[i + 1], work[i]
                swaps.append(i)
                changed = True
    # p . t_i1 . ... . t_in = id, so p = t_in . ... . t_i1 and t_i1 acts first
    return [transposition(k, i) for i in swaps]


def _degeneracies_for(s: Sequence[int]) -> list[FinFunction]:
    """Degeneracies whose composite is the non-decreasing surjection ``s``."""
    s = list(s)
    steps = []
    while True:
        k = len(s)
        for j in range(k - 1):
            if s[j] == s[j + 1]:
                break
        else:
            return steps
        steps.append(degeneracy(k - 1, j))
        s = s[: j + 1] + s[j + 2 :]


def compose_all(steps: Sequence[FinFunction], dom: int) -> FinFunction:
    """Composite ``steps[-1] . ... . steps[0]`` (identity on ``[dom]`` if empty)."""
    out = FinFunction.identity(dom)
    for e in steps:
        out = compose(e, out)
    return out
