"""The tensor ``X (x) F`` of a finite set with a truncated functor.

Elements of ``X (x) F`` are classes of expressions ``(f: [k] -> X, s in F[k])``
under the equivalence generated by ``(f . g, s) ~ (f, g . s)``. The closure
is computed over all expressions of arity ``<= N`` as a connectivity problem:
expressions are numbered densely, each elementary generator ``e: [k] -> [l]``
contributes the edges ``(f . e, s) -- (f, e . s)`` for every ``f`` and ``s``,
and connected components are the classes.

Numbering: an expression of arity ``k`` with map digits ``f`` (base ``|X|``,
most significant first) and element index ``s`` has id
``offset[k] + code(f) * |F[k]| + s``. Ids for arity ``<= N`` do not depend on
the bound, which makes restriction of a larger partition a prefix slice.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Callable, Hashable, Mapping, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from . import finset
from .errors import BoundTooSmall, PreconditionError
from .finset import FinFunction
from .functor import TruncatedFunctor, is_in_essential_image
from .presheaf import FinitePresheaf
from .report import EXPECTED, CheckResult, check, skipped

Carrier = Sequence[Hashable]


def make_carrier(n: int) -> tuple[str, ...]:
    return tuple(f"x{i}" for i in range(n))


def required_bound(carrier_size: int) -> int:
    return max(carrier_size, 2) + 1


@dataclass(frozen=True)
class Expression:
    """``map`` lists ``f(0), ..., f(k-1)`` as carrier elements."""

    map: tuple
    element: str

    @property
    def arity(self) -> int:
        return len(self.map)

    def __str__(self):
        return "(" + ",".join(map(str, self.map)) + ")(x)" + str(self.element)

    def to_json(self):
        return {"map": [str(x) for x in self.map], "element": self.element}


@dataclass(frozen=True)
class TensorElement:
    class_id: int
    canonical: Expression
    length: int
    size: int

    def __str__(self):
        return str(self.canonical)

    def to_json(self):
        return {
            "class_id": self.class_id,
            "canonical": self.canonical.to_json(),
            "length": self.length,
            "size": self.size,
        }


def _digits(base: int, k: int) -> np.ndarray:
    """All ``base**k`` digit rows of length ``k``, lexicographically."""
    if k == 0:
        return np.zeros((1, 0), dtype=np.int64)
    if base == 0:
        return np.zeros((0, k), dtype=np.int64)
    grids = np.indices((base,) * k, dtype=np.int64).reshape(k, -1)
    return grids.T.copy()


def _layout(x: int, F: TruncatedFunctor, bound: int):
    counts = []
    for k in range(bound + 1):
        maps = 1 if k == 0 else x**k
        counts.append(maps * F.size(k))
    offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    return offsets


def _partition(x: int, F: TruncatedFunctor, bound: int) -> tuple[np.ndarray, np.ndarray]:
    """Component label of every expression id, plus the offsets array."""
    offsets = _layout(x, F, bound)
    total = int(offsets[-1])
    digits = [_digits(x, k) for k in range(bound + 1)]
    srcs, dsts = [], []
    for e in finset.elementary_maps(bound, 0):
        k, l = e.dom_size, e.cod_size
        nk, nl = F.size(k), F.size(l)
        if nk == 0 or digits[l].shape[0] == 0:
            continue
        weights = x ** np.arange(k - 1, -1, -1, dtype=np.int64) if k else np.zeros(0, np.int64)
        fe_codes = digits[l][:, list(e.values)] @ weights
        codes = np.arange(digits[l].shape[0], dtype=np.int64)
        sig = np.arange(nk, dtype=np.int64)
        src = offsets[k] + fe_codes[:, None] * nk + sig[None, :]
        dst = offsets[l] + codes[:, None] * nl + F.action_array(e)[None, :]
        srcs.append(src.ravel())
        dsts.append(dst.ravel())
    if srcs:
        src = np.concatenate(srcs)
        dst = np.concatenate(dsts)
    else:
        src = dst = np.zeros(0, dtype=np.int64)
    graph = coo_matrix((np.ones(len(src), dtype=np.int8), (src, dst)), shape=(total, total))
    _, labels = connected_components(graph, directed=False)
    return labels, offsets


def _same_partition(a: np.ndarray, b: np.ndarray) -> bool:
    """Whether two labelings of the same ids induce the same partition."""
    if len(a) != len(b):
        return False
    if len(a) == 0:
        return True
    pairs = np.unique(np.stack([a, b]), axis=1).shape[1]
    return pairs == len(np.unique(a)) == len(np.unique(b))


class Tensor:
    """``X (x) F`` with every class, its length and its minimal expressions."""

    def __init__(
        self,
        carrier: Carrier | int,
        F: TruncatedFunctor,
        bound: int | None = None,
        stability_rounds: int = 0,
    ):
        if isinstance(carrier, int):
            carrier = make_carrier(carrier)
        self.carrier = tuple(carrier)
        self._pos = {c: i for i, c in enumerate(self.carrier)}
        if len(self._pos) != len(self.carrier):
            raise PreconditionError("carrier has duplicate elements")
        if F.start != 0:
            raise PreconditionError("tensor needs a functor defined at [0]; apply iota_star first")
        x = len(self.carrier)
        need = required_bound(x)
        if bound is None:
            bound = need
        if bound < need or F.bound < bound:
            raise BoundTooSmall(
                f"tensor over |X|={x} needs functor bound >= {need}"
                f" (functor {F.name} has bound {F.bound}, requested {bound})"
            )
        self.functor = F
        self.bound = bound
        labels, self._offsets = _partition(x, F, bound)
        self._build(labels)
        self.stability = self._stability(labels, stability_rounds) if stability_rounds else None

    # -- construction ---------------------------------------------------------

    def _build(self, labels: np.ndarray):
        F, N = self.functor, self.bound
        offsets = self._offsets
        total = int(offsets[-1])
        ids = np.arange(total, dtype=np.int64)
        arity = np.searchsorted(offsets, ids, side="right") - 1
        sizes = np.array([F.size(k) for k in range(N + 1)], dtype=np.int64)
        local = ids - offsets[arity]
        nk = sizes[arity]
        code = local // np.maximum(nk, 1)
        sig = local % np.maximum(nk, 1)
        # rank of each element label in string order, for canonical tie-breaks
        ranks = []
        for k in range(N + 1):
            order = sorted(range(F.size(k)), key=lambda i: F.values(k)[i])
            r = np.empty(F.size(k), dtype=np.int64)
            r[order] = np.arange(F.size(k))
            ranks.append(r)
        sig_rank = np.zeros(total, dtype=np.int64)
        for k in range(N + 1):
            sl = slice(offsets[k], offsets[k + 1])
            sig_rank[sl] = ranks[k][sig[sl]]
        sort_key = offsets[arity] + code * nk + sig_rank

        ncomp = int(labels.max()) + 1 if total else 0
        length = np.full(ncomp, N + 1, dtype=np.int64)
        np.minimum.at(length, labels, arity)
        minimal = arity == length[labels]
        # canonical = minimal member with least (map, label) key
        best = np.full(ncomp, np.iinfo(np.int64).max, dtype=np.int64)
        np.minimum.at(best, labels[minimal], sort_key[minimal])
        order = np.argsort(best, kind="stable")
        class_of_comp = np.empty(ncomp, dtype=np.int64)
        class_of_comp[order] = np.arange(ncomp)

        self._arity = arity
        self._code = code
        self._sig = sig
        self._sort_key = sort_key
        self._minimal = minimal
        self._class = class_of_comp[labels]
        self._length = length[order]
        self._sizes = np.bincount(self._class, minlength=ncomp)
        key_to_id = np.empty(total, dtype=np.int64)
        key_to_id[sort_key] = ids
        self._canonical_id = key_to_id[best[order]] if ncomp else np.zeros(0, np.int64)
        self._digits_cache: dict[int, np.ndarray] = {}
        self.classes = [
            TensorElement(i, self._expr(int(self._canonical_id[i])), int(self._length[i]), int(self._sizes[i]))
            for i in range(ncomp)
        ]

    def _stability(self, labels: np.ndarray, rounds: int) -> dict:
        """Recompute at ``N+1, N+2, ...`` and compare restricted partitions."""
        x = len(self.carrier)
        checked = [self.bound]
        previous = labels
        stable_rounds = 0
        info = {"checked_bounds": checked, "rounds_requested": rounds}
        b = self.bound
        while stable_rounds < rounds:
            b += 1
            G = self.functor.with_bound(b)
            if G is None:
                info["skipped"] = "bound: functor cannot be extended past its stored bound"
                break
            current, _ = _partition(x, G, b)
            checked.append(b)
            if _same_partition(current[: len(previous)], previous):
                stable_rounds += 1
            else:
                stable_rounds = 0
            previous = current
            if b > self.bound + 2 * rounds + 4:
                break
        restricted = previous[: len(labels)]
        info["stable"] = stable_rounds >= rounds and _same_partition(restricted, labels)
        info["stable_rounds"] = stable_rounds
        # flag runs whose partition only settled past both N and |X| + 2
        settled = checked[-1 - stable_rounds] if stable_rounds else checked[-1]
        info["settled_bound"] = settled
        info["flag_bound_exceeded"] = settled > max(self.bound, x + 2)
        return info

    # -- id helpers -----------------------------------------------------------

    def _digits(self, k):
        d = self._digits_cache.get(k)
        if d is None:
            d = self._digits_cache[k] = _digits(len(self.carrier), k)
        return d

    def _expr(self, i: int) -> Expression:
        k = int(self._arity[i])
        code = int(self._code[i])
        x = len(self.carrier)
        vals = []
        for _ in range(k):
            vals.append(code % x)
            code //= x
        vals.reverse()
        return Expression(tuple(self.carrier[v] for v in vals), self.functor.values(k)[int(self._sig[i])])

    def expression_id(self, map_indices: Sequence[int], sigma: int) -> int:
        k = len(map_indices)
        if k > self.bound:
            raise BoundTooSmall(f"arity {k} exceeds tensor bound {self.bound}")
        x = len(self.carrier)
        code = 0
        for v in map_indices:
            code = code * x + int(v)
        return int(self._offsets[k] + code * self.functor.size(k) + sigma)

    def _id_of(self, expr) -> int:
        if isinstance(expr, Expression):
            mp, el = expr.map, expr.element
        else:
            mp, el = expr
        try:
            idx = [self._pos[v] for v in mp]
        except KeyError as exc:
            raise KeyError(f"{exc.args[0]!r} is not a carrier element") from None
        return self.expression_id(idx, self.functor.index(len(mp), el))

    def _class_index(self, t) -> int:
        if isinstance(t, TensorElement):
            return t.class_id
        if isinstance(t, (int, np.integer)):
            return int(t)
        return int(self._class[self._id_of(t)])

    # -- public API -----------------------------------------------------------

    def __len__(self):
        return len(self.classes)

    def __iter__(self):
        return iter(self.classes)

    def class_of(self, expr) -> TensorElement:
        """Class of an :class:`Expression` or a ``(map, element)`` pair."""
        return self.classes[self._class_index(expr)]

    def length(self, t) -> int:
        return int(self._length[self._class_index(t)])

    def member_ids(self, t) -> np.ndarray:
        return np.flatnonzero(self._class == self._class_index(t))

    def members(self, t) -> list[Expression]:
        return [self._expr(int(i)) for i in self.member_ids(t)]

    def minimal_ids(self, t) -> np.ndarray:
        c = self._class_index(t)
        ids = np.flatnonzero((self._class == c) & self._minimal)
        return ids[np.argsort(self._sort_key[ids], kind="stable")]

    def minimal_expressions(self, t) -> list[Expression]:
        """All minimal expressions, canonical one first."""
        return [self._expr(int(i)) for i in self.minimal_ids(t)]

    def morphism(self, sigma: str, n: int) -> Callable[[Sequence], TensorElement]:
        """``-(x)sigma: X^n -> X (x) F`` for ``sigma`` in ``F[n]``."""
        if n > self.bound:
            raise BoundTooSmall(f"n={n} exceeds tensor bound {self.bound}")
        s = self.functor.index(n, sigma)

        def apply(xs):
            if len(xs) != n:
                raise ValueError(f"expected {n} arguments, got {len(xs)}")
            return self.classes[int(self._class[self.expression_id([self._pos[v] for v in xs], s)])]

        return apply

    def table(self) -> list[dict]:
        return [c.to_json() for c in self.classes]


def tensor(carrier: Carrier | int, F: TruncatedFunctor, **kw) -> Tensor:
    return Tensor(carrier, F, **kw)


def length(T: Tensor, t) -> int:
    return T.length(t)


def minimal_expressions(T: Tensor, t) -> list[Expression]:
    return T.minimal_expressions(t)


def tensor_morphism(T: Tensor, sigma: str, n: int):
    return T.morphism(sigma, n)


def act(g: Mapping | Callable, TX: Tensor, TY: Tensor, t) -> TensorElement:
    """``(g (x) F)(t)``: push the canonical representative of ``t`` along ``g``."""
    fn = g if callable(g) else g.__getitem__
    e = TX.class_of(t).canonical if not isinstance(t, Expression) else t
    pushed = tuple(fn(v) for v in e.map)
    if len(pushed) > TY.bound:
        # long expressions go through their image first: (g.f) (x) s ~ incl (x) F(q)s
        image = sorted(set(pushed), key=TY._pos.__getitem__)
        rank = {v: i for i, v in enumerate(image)}
        q = FinFunction(tuple(rank[v] for v in pushed), len(image))
        return TY.class_of(Expression(tuple(image), TX.functor.act(q, e.element)))
    return TY.class_of(Expression(pushed, e.element))


def coyoneda_class(T: Tensor, expr) -> str:
    """Independent evaluation ``F(f)(s)`` in ``F[|X|]`` (valid since ``N >= |X|``)."""
    if isinstance(expr, Expression):
        mp, el = expr.map, expr.element
    else:
        mp, el = expr
    f = FinFunction(tuple(T._pos[v] for v in mp), len(T.carrier))
    return T.functor.act(f, el)


# -- presheaves -------------------------------------------------------------


def presheaf_tensor(P: FinitePresheaf, F: TruncatedFunctor) -> FinitePresheaf:
    """Pointwise ``P (x) F``; carriers are tensor classes, arrows act by ``act``.

    The tensors are kept on the result as ``.tensors[object]``.
    """
    tensors = {}
    need = max([required_bound(len(P.carrier(c))) for c in P.objects] or [3])
    G = F if F.bound >= need else F.with_bound(need)
    if G is None:
        raise BoundTooSmall(f"functor {F.name} needs bound >= {need}")
    for c in P.objects:
        tensors[c] = Tensor(P.carrier(c), G, bound=required_bound(len(P.carrier(c))))
    carriers = {c: list(tensors[c].classes) for c in P.objects}
    actions = {}
    for a, (src, dst) in P.arrows.items():
        actions[a] = [act(lambda v, a=a: P.act(a, v), tensors[src], tensors[dst], t).class_id
                      for t in tensors[src].classes]
    Q = FinitePresheaf.from_indices(P.objects, P.arrows, carriers, actions)
    Q.tensors = tensors
    return Q


# -- the lemma checks -------------------------------------------------------


def _mask(T: Tensor, ids: np.ndarray) -> np.ndarray:
    """Bitmask of the image of each expression's map."""
    out = np.zeros(len(ids), dtype=np.int64)
    for k in np.unique(T._arity[ids]):
        sel = T._arity[ids] == k
        if k == 0:
            continue
        digits = T._digits(int(k))[T._code[ids[sel]]]
        out[sel] = np.bitwise_or.reduce(np.left_shift(1, digits), axis=1)
    return out


def _popcount(a: np.ndarray) -> np.ndarray:
    return np.array([bin(int(v)).count("1") for v in a], dtype=np.int64)


def _related_by_bijection(T: Tensor, e1: Expression, e2: Expression) -> bool:
    """Is there ``phi`` with ``e1.map = e2.map . phi`` and ``phi . s1 = s2``?"""
    if e1.arity != e2.arity:
        return False
    m = e1.arity
    pos2 = {v: j for j, v in enumerate(e2.map)}
    if len(pos2) != m or set(e1.map) != set(e2.map):
        return False
    phi = FinFunction(tuple(pos2[v] for v in e1.map), m)
    return T.functor.act(phi, e1.element) == e2.element


def verify_section2(
    carrier: Carrier | int,
    F: TruncatedFunctor,
    cap: int = 3,
    stability_rounds: int = 2,
    T: Tensor | None = None,
) -> tuple[list[CheckResult], Tensor]:
    """Exhaustive checks of the length / minimal-expression lemmas on ``X (x) F``.

    Required checks report PASS/FAIL. Checks whose hypotheses fail are
    SKIPPED, and violations found at low length under a functor outside the
    essential image are reported as EXPECTED with their witness.
    """
    if isinstance(carrier, int):
        carrier = make_carrier(carrier)
    x = len(carrier)
    if x > cap:
        raise PreconditionError(f"|X| = {x} exceeds the configured cap {cap}")
    if T is None:
        need = required_bound(x)
        G = F if F.bound >= need else F.with_bound(need)
        if G is None:
            raise BoundTooSmall(f"functor {F.name} has bound {F.bound}, need {need}")
        T = Tensor(carrier, G, bound=need, stability_rounds=stability_rounds)
    F = T.functor
    ess = bool(is_in_essential_image(F))
    results: list[CheckResult] = []
    ncls = len(T.classes)
    total = int(T._offsets[-1])
    all_ids = np.arange(total, dtype=np.int64)
    masks = _mask(T, all_ids)
    arity = T._arity
    minimal = T._minimal

    # (a) minimal => injective
    mins = np.flatnonzero(minimal)
    bad = mins[_popcount(masks[mins]) != arity[mins]]
    results.append(check(
        "minimal expressions have injective maps", len(bad) == 0,
        witness=T._expr(int(bad[0])).to_json() if len(bad) else None,
        detail=f"{len(mins)} minimal expressions",
    ))

    # co-Yoneda: F[|X|] -> X (x) F, s |-> id (x) s is a bijection
    ident = list(range(x))
    coy = [int(T._class[T.expression_id(ident, s)]) for s in range(F.size(x))]
    results.append(check(
        "co-Yoneda: id(x)- is a bijection F[|X|] -> X(x)F",
        len(set(coy)) == len(coy) == ncls,
        witness=None if len(set(coy)) == len(coy) == ncls else {"classes": ncls, "images": len(set(coy))},
    ))

    # (b) cancellation for injective f with non-empty domain
    cancel_bad = None
    checked = 0
    for k in range(1, min(x, T.bound) + 1):
        nk = F.size(k)
        if nk < 2:
            continue
        for f in permutations(range(x), k):
            base = T.expression_id(f, 0)
            cls = T._class[base : base + nk]
            checked += 1
            if len(np.unique(cls)) != nk:
                u, first = np.unique(cls, return_index=True)
                dup = [i for i in range(nk) if i not in set(first.tolist())][0]
                other = int(np.flatnonzero(cls == cls[dup])[0])
                cancel_bad = {
                    "map": [str(carrier[v]) for v in f],
                    "sigma": F.values(k)[other],
                    "tau": F.values(k)[dup],
                }
                break
        if cancel_bad:
            break
    results.append(check(
        "cancellation along injective maps", cancel_bad is None, witness=cancel_bad,
        detail=f"{checked} injective maps",
    ))

    # (c) comparison: Im(minimal) subset of Im(every expression)
    inter = np.full(ncls, -1, dtype=np.int64)
    np.bitwise_and.at(inter, T._class, masks)
    union_min = np.zeros(ncls, dtype=np.int64)
    np.bitwise_or.at(union_min, T._class[mins], masks[mins])
    violating = np.flatnonzero((union_min & ~inter) != 0)
    long_viol = [c for c in violating if T._length[c] > 1]
    short_viol = [c for c in violating if T._length[c] <= 1]

    def comparison_witness(c):
        m_ids = T.minimal_ids(c)
        for mi in m_ids:
            for oi in T.member_ids(c):
                if masks[mi] & ~masks[oi]:
                    return {
                        "class": T.classes[c].to_json(),
                        "minimal": T._expr(int(mi)).to_json(),
                        "other": T._expr(int(oi)).to_json(),
                    }

    results.append(check(
        "comparison Im(f) <= Im(g), Le > 1", not long_viol,
        witness=comparison_witness(long_viol[0]) if long_viol else None,
        detail=f"{int((T._length > 1).sum())} classes with Le > 1",
    ))
    if ess:
        results.append(check(
            "comparison Im(f) <= Im(g), all lengths", not short_viol,
            witness=comparison_witness(short_viol[0]) if short_viol else None,
        ))
    else:
        results.append(skipped(
            "comparison Im(f) <= Im(g), all lengths",
            "precondition: functor not in the essential image of iota_*",
        ))
        if short_viol:
            results.append(CheckResult(
                "comparison exception at Le <= 1", EXPECTED,
                detail="functor outside the essential image",
                witness=comparison_witness(short_viol[0]),
            ))

    # (d) uniqueness of minimal expressions up to a bijection
    def uniqueness_violation(classes):
        for c in classes:
            exprs = T.minimal_expressions(int(c))
            for i in range(len(exprs)):
                for j in range(len(exprs)):
                    if i != j and not _related_by_bijection(T, exprs[i], exprs[j]):
                        return {
                            "class": T.classes[int(c)].to_json(),
                            "minimal_expressions": [e.to_json() for e in exprs],
                        }
        return None

    long_classes = np.flatnonzero(T._length > 1)
    short_classes = np.flatnonzero(T._length <= 1)
    w = uniqueness_violation(long_classes)
    results.append(check("minimal expression unique up to bijection, Le > 1", w is None, witness=w))
    w_short = uniqueness_violation(short_classes)
    if ess and x > 0:
        results.append(check(
            "minimal expression unique up to bijection, all lengths", w_short is None, witness=w_short,
        ))
    else:
        why = "functor not in the essential image of iota_*" if not ess else "X is empty"
        results.append(skipped(
            "minimal expression unique up to bijection, all lengths", f"precondition: {why}",
        ))
        if w_short is not None:
            results.append(CheckResult(
                "uniqueness exception at Le <= 1", EXPECTED, detail=why, witness=w_short,
            ))

    if T.stability is not None:
        st = T.stability
        if "skipped" in st and st.get("stable_rounds", 0) == 0:
            results.append(skipped("partition stable under larger bounds", st["skipped"]))
        else:
            results.append(check(
                "partition stable under larger bounds", st["stable"] and not st["flag_bound_exceeded"],
                witness=None if st["stable"] else st, detail=f"bounds {st['checked_bounds']}",
            ))
    return results, T
