"""Set-valued functors on the free category of a finite directed graph.

These are called presheaves even though they are covariant: an arrow ``a: c -> d`` acts as ``P(c) -> P(d)``.
Naturality and functoriality only need checking on the generating arrows.
"""

from __future__ import annotations

from itertools import product
from typing import Hashable, Mapping, Sequence

from .errors import PreconditionError


class FinitePresheaf:
    def __init__(
        self,
        objects: Sequence[str],
        arrows: Mapping[str, tuple[str, str]],
        carriers: Mapping[str, Sequence[Hashable]],
        actions: Mapping[str, Sequence | Mapping],
    ):
        self.objects = tuple(objects)
        self.arrows = {a: (src, dst) for a, (src, dst) in arrows.items()}
        for a, (src, dst) in self.arrows.items():
            if src not in self.objects or dst not in self.objects:
                raise PreconditionError(f"arrow {a} has an unknown endpoint")
        self._carriers = {c: tuple(carriers[c]) for c in self.objects}
        self._index = {c: {x: i for i, x in enumerate(v)} for c, v in self._carriers.items()}
        for c, idx in self._index.items():
            if len(idx) != len(self._carriers[c]):
                raise PreconditionError(f"carrier of {c} has duplicate elements")
        self._actions: dict[str, tuple[int, ...]] = {}
        for a, (src, dst) in self.arrows.items():
            table = actions[a]
            if isinstance(table, Mapping):
                table = [table[x] for x in self._carriers[src]]
            table = list(table)
            if len(table) != len(self._carriers[src]):
                raise PreconditionError(f"action of {a} has the wrong length")
            try:
                self._actions[a] = tuple(self._index[dst][y] for y in table)
            except KeyError as exc:
                raise PreconditionError(f"action of {a} leaves P({dst}): {exc}") from None

    @classmethod
    def from_indices(cls, objects, arrows, carriers, actions: Mapping[str, Sequence[int]]):
        """Like the constructor, but action tables are always index lists."""
        tables = {}
        for a, (src, dst) in arrows.items():
            tables[a] = [carriers[dst][i] for i in actions[a]]
        return cls(objects, arrows, carriers, tables)

    @classmethod
    def discrete(cls, carriers: Mapping[str, Sequence[Hashable]]):
        """One object per key and no non-identity arrows."""
        return cls(list(carriers), {}, carriers, {})

    def carrier(self, c: str) -> tuple:
        return self._carriers[c]

    def index(self, c: str, x) -> int:
        return self._index[c][x]

    def action(self, a: str) -> tuple[int, ...]:
        return self._actions[a]

    def act(self, a: str, x):
        src, dst = self.arrows[a]
        return self._carriers[dst][self._actions[a][self._index[src][x]]]

    def is_inhabited(self) -> bool:
        return all(len(self._carriers[c]) > 0 for c in self.objects)

    def power(self, n: int) -> "FinitePresheaf":
        """Pointwise ``n``-fold product; elements are ``n``-tuples."""
        carriers = {c: list(product(self._carriers[c], repeat=n)) for c in self.objects}
        actions = {}
        for a in self.arrows:
            actions[a] = {xs: tuple(self.act(a, x) for x in xs) for xs in carriers[self.arrows[a][0]]}
        return FinitePresheaf(self.objects, self.arrows, carriers, actions)

    def relabel(self, renaming: Mapping[str, Mapping]) -> "FinitePresheaf":
        """Rename carrier elements object-wise; unlisted objects and elements keep their labels."""

        def rename(c, x):
            return renaming.get(c, {}).get(x, x)

        carriers = {c: [rename(c, x) for x in self._carriers[c]] for c in self.objects}
        actions = {}
        for a, (src, dst) in self.arrows.items():
            actions[a] = [rename(dst, self.act(a, x)) for x in self._carriers[src]]
        return FinitePresheaf(self.objects, self.arrows, carriers, actions)

    def sizes(self) -> dict[str, int]:
        return {c: len(self._carriers[c]) for c in self.objects}

    def to_json(self) -> dict:
        return {
            "objects": list(self.objects),
            "arrows": {a: list(e) for a, e in sorted(self.arrows.items())},
            "carriers": {c: [str(x) for x in v] for c, v in self._carriers.items()},
            "actions": {a: list(t) for a, t in sorted(self._actions.items())},
        }

    def __repr__(self):
        return f"FinitePresheaf(objects={self.objects}, sizes={self.sizes()})"


def is_natural(P: FinitePresheaf, Q: FinitePresheaf, components: Mapping[str, Sequence[int]]):
    """First failing naturality square ``(arrow, element)`` or None."""
    for a, (src, dst) in P.arrows.items():
        pa, qa = P.action(a), Q.action(a)
        ec, ed = components[src], components[dst]
        for i in range(len(P.carrier(src))):
            if ed[pa[i]] != qa[ec[i]]:
                return a, P.carrier(src)[i]
    return None


def natural_transformations(P: FinitePresheaf, Q: FinitePresheaf, limit: int | None = None):
    """Enumerate every natural transformation ``P -> Q`` exhaustively.

    Each element ``(c, x)`` is a variable with domain ``Q(c)``; a generating
    arrow ``a: c -> d`` imposes ``eta_d(P(a) x) = Q(a)(eta_c(x))``. Variables
    are assigned object by object and every constraint is tested as soon as
    both ends are assigned, so dead branches are cut early.
    Yields dicts ``object -> tuple of indices into Q(object)``.
    """
    if P.objects != Q.objects or P.arrows != Q.arrows:
        raise PreconditionError("presheaves live over different graphs")
    variables = [(c, i) for c in P.objects for i in range(len(P.carrier(c)))]
    pos = {v: k for k, v in enumerate(variables)}
    # constraints[k]: list of (other_var, forward?, table)
    #   forward: value[other] = table[value[k]]
    #   backward: table[value[k]] = value[other]
    constraints: list[list] = [[] for _ in variables]
    for a, (src, dst) in P.arrows.items():
        pa, qa = P.action(a), Q.action(a)
        for i in range(len(P.carrier(src))):
            u, w = pos[(src, i)], pos[(dst, pa[i])]
            constraints[u].append((w, True, qa))
            constraints[w].append((u, False, qa))
    domains = [range(len(Q.carrier(c))) for c, _ in variables]
    if any(len(d) == 0 for d in domains):
        return
    count = 0
    value = [-1] * len(variables)

    def consistent(k):
        v = value[k]
        for other, forward, table in constraints[k]:
            o = value[other]
            if o < 0:
                continue
            if forward and table[v] != o:
                return False
            if not forward and table[o] != v:
                return False
        return True

    def search(k):
        nonlocal count
        if k == len(variables):
            yield {c: tuple(value[pos[(c, i)]] for i in range(len(P.carrier(c)))) for c in P.objects}
            count += 1
            return
        for v in domains[k]:
            value[k] = v
            if consistent(k):
                yield from search(k + 1)
                if limit is not None and count >= limit:
                    value[k] = -1
                    return
        value[k] = -1

    yield from search(0)
