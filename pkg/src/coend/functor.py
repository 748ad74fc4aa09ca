"""Functors ``FinSet -> Set`` truncated to sizes ``[0..N]``.

A :class:`TruncatedFunctor` stores a finite set of labels for every size
``k <= bound`` and an action table for every function ``[k] -> [l]`` inside
the bound. Tables are produced lazily: built-ins compute them from a
Python-level model, loaded functors derive missing tables by factoring
through the elementary generators of FinSet.

The inhabited variant (functors on non-empty finite sets) is the same
object with ``start == 1``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Callable, Hashable, Sequence

import numpy as np

from . import finset
from .errors import BoundTooSmall, FunctorError, LoadError
from .finset import FinFunction, compose

# The two maps [1] => [2] used for the equalizer; a parallel pair suffices.
D0 = FinFunction((0,), 2)
D1 = FinFunction((1,), 2)


class TruncatedFunctor:
    """A functor on the full subcategory ``{[start], ..., [bound]}`` of FinSet."""

    start = 0

    def __init__(
        self,
        bound: int,
        values: Sequence[Sequence[str] | None],
        action: Callable[[FinFunction], Sequence[int]],
        name: str = "custom",
        builder: Callable[[int], "TruncatedFunctor"] | None = None,
    ):
        if bound < 2:
            raise BoundTooSmall(f"functor bound must be >= 2, got {bound}")
        if len(values) != bound + 1:
            raise FunctorError(f"expected {bound + 1} value sets, got {len(values)}")
        self.bound = bound
        self.name = name
        self._builder = builder
        self._values: list[tuple[str, ...] | None] = []
        self._index: list[dict[str, int] | None] = []
        for k, vals in enumerate(values):
            if k < self.start:
                self._values.append(None)
                self._index.append(None)
                continue
            if vals is None:
                raise FunctorError(f"F[{k}] is missing")
            vals = tuple(str(v) for v in vals)
            index = {v: i for i, v in enumerate(vals)}
            if len(index) != len(vals):
                raise FunctorError(f"F[{k}] has duplicate labels")
            self._values.append(vals)
            self._index.append(index)
        self._action = action
        self._tables: dict[FinFunction, tuple[int, ...]] = {}
        self._arrays: dict[FinFunction, np.ndarray] = {}

    # -- values -------------------------------------------------------------

    def values(self, k: int) -> tuple[str, ...]:
        self._check_size(k)
        return self._values[k]

    def size(self, k: int) -> int:
        return len(self.values(k))

    def index(self, k: int, label: str) -> int:
        self._check_size(k)
        try:
            return self._index[k][str(label)]
        except KeyError:
            raise KeyError(f"{label!r} is not an element of {self.name}[{k}]") from None

    def sizes(self) -> list[int | None]:
        return [None if v is None else len(v) for v in self._values]

    def _check_size(self, k: int):
        if not self.start <= k <= self.bound:
            raise BoundTooSmall(
                f"size {k} outside [{self.start}, {self.bound}] for functor {self.name}"
            )

    # -- actions ------------------------------------------------------------

    def action(self, g: FinFunction) -> tuple[int, ...]:
        """Index map ``F[dom g] -> F[cod g]``."""
        table = self._tables.get(g)
        if table is None:
            self._check_size(g.dom_size)
            self._check_size(g.cod_size)
            table = tuple(int(i) for i in self._action(g))
            if len(table) != self.size(g.dom_size):
                raise FunctorError(f"action of {g!r} has wrong length")
            n = self.size(g.cod_size)
            if any(not 0 <= i < n for i in table):
                raise FunctorError(f"action of {g!r} leaves {self.name}[{g.cod_size}]")
            self._tables[g] = table
        return table

    def action_array(self, g: FinFunction) -> np.ndarray:
        arr = self._arrays.get(g)
        if arr is None:
            arr = np.asarray(self.action(g), dtype=np.int64)
            self._arrays[g] = arr
        return arr

    def act(self, g: FinFunction, label: str) -> str:
        """Push the element ``label`` of ``F[dom g]`` along ``g``."""
        i = self.index(g.dom_size, label)
        j = self.action(g)[i]
        return self._values[g.cod_size][j]

    # -- structure ----------------------------------------------------------

    def with_bound(self, bound: int) -> "TruncatedFunctor | None":
        """Same functor at another bound, or None when it cannot be extended."""
        if bound == self.bound:
            return self
        if self._builder is None:
            return None
        return self._builder(bound)

    def functoriality_violations(self, exhaustive: bool = False, limit: int = 10):
        """Witnesses of broken functoriality inside the bound.

        The default check tests identities and every pair ``(e, f)`` with
        ``e`` an elementary generator; since every function factors into
        generators inside the bound this is equivalent to testing all
        composable pairs, which ``exhaustive=True`` does literally.
        """
        out = []
        lo, hi = self.start, self.bound
        for k in range(lo, hi + 1):
            if self.action(FinFunction.identity(k)) != tuple(range(self.size(k))):
                out.append({"kind": "identity", "size": k})
        if exhaustive:
            lefts = list(finset.all_functions_within(hi, lo))
        else:
            lefts = list(finset.elementary_maps(hi, lo))
        by_dom: dict[int, list[FinFunction]] = {}
        for g in lefts:
            by_dom.setdefault(g.dom_size, []).append(g)
        for k in range(lo, hi + 1):
            for l in range(lo, hi + 1):
                for fv in finset.iter_functions(k, l):
                    f = FinFunction(fv, l)
                    af = self.action_array(f)
                    for g in by_dom.get(l, ()):
                        gf = compose(g, f)
                        if not np.array_equal(self.action_array(gf), self.action_array(g)[af]):
                            out.append({"kind": "composition", "g": g.key(), "f": f.key()})
                            if len(out) >= limit:
                                return out
        return out

    def validate(self, exhaustive: bool = False) -> "TruncatedFunctor":
        bad = self.functoriality_violations(exhaustive=exhaustive, limit=1)
        if bad:
            raise FunctorError(f"functor {self.name} is not functorial: {bad[0]}")
        return self

    def to_json(self) -> dict:
        """Serialise with action tables for the elementary generators."""
        actions = {
            e.key(): list(self.action(e))
            for e in finset.elementary_maps(self.bound, self.start)
        }
        data = {
            "bound": self.bound,
            "values": [None if v is None else list(v) for v in self._values],
            "actions": actions,
        }
        if self.start:
            data["start"] = self.start
        return data

    def __repr__(self):
        return f"{type(self).__name__}({self.name}, bound={self.bound}, sizes={self.sizes()})"


class InhabitedTruncatedFunctor(TruncatedFunctor):
    """A functor on non-empty finite sets ``[1..bound]``; ``values[0]`` is None."""

    start = 1


def _model_functor(
    bound: int,
    elements: Callable[[int], list[Hashable]],
    push: Callable[[FinFunction, Hashable], Hashable],
    label: Callable[[Hashable], str],
    name: str,
    builder: Callable[[int], TruncatedFunctor],
    cls=TruncatedFunctor,
    start: int = 0,
) -> TruncatedFunctor:
    elems = [None if k < start else elements(k) for k in range(bound + 1)]
    lookup = [None if e is None else {x: i for i, x in enumerate(e)} for e in elems]

    def action(g):
        target = lookup[g.cod_size]
        return [target[push(g, x)] for x in elems[g.dom_size]]

    values = [None if e is None else [label(x) for x in e] for e in elems]
    return cls(bound, values, action, name=name, builder=builder)


def representable(s: int, bound: int) -> TruncatedFunctor:
    """``y[s] = FinSet([s], -)``; elements of ``F[k]`` are maps ``[s] -> [k]``."""
    if s < 0:
        raise ValueError("s must be non-negative")
    return _model_functor(
        bound,
        lambda k: list(finset.iter_functions(s, k)),
        lambda g, x: tuple(g.values[i] for i in x),
        lambda x: "<" + ",".join(map(str, x)) + ">",
        f"rep:{s}",
        lambda b: representable(s, b),
    )


def power_set_functor(bound: int) -> TruncatedFunctor:
    """Covariant power set; the action is direct image."""

    def subsets(k):
        return [frozenset(c) for r in range(k + 1) for c in combinations(range(k), r)]

    return _model_functor(
        bound,
        subsets,
        lambda g, x: frozenset(g.values[i] for i in x),
        lambda x: "{" + ",".join(map(str, sorted(x))) + "}",
        "pow",
        power_set_functor,
    )


def ine_functor(bound: int) -> TruncatedFunctor:
    """Empty at ``[0]``, a point everywhere else."""
    return _model_functor(
        bound,
        lambda k: [] if k == 0 else ["*"],
        lambda g, x: "*",
        str,
        "ine",
        ine_functor,
    )


def ine2_functor(bound: int) -> TruncatedFunctor:
    """Two points ``a, b`` at ``[0]`` that both collapse to the point of ``F[1]``."""
    return _model_functor(
        bound,
        lambda k: ["a", "b"] if k == 0 else ["*"],
        lambda g, x: x if g.cod_size == 0 else "*",
        str,
        "ine2",
        ine2_functor,
    )


BUILTIN_NAMES = ("rep:<s>", "pow", "ine", "ine2")


def builtin(spec: str, bound: int) -> TruncatedFunctor:
    """Resolve ``rep:S``, ``pow``, ``ine``, ``ine2`` at the given bound."""
    if spec.startswith("rep:"):
        try:
            s = int(spec[4:])
        except ValueError:
            raise FunctorError(f"bad representable spec {spec!r}") from None
        return representable(s, bound)
    table = {"pow": power_set_functor, "ine": ine_functor, "ine2": ine2_functor}
    if spec not in table:
        raise FunctorError(f"unknown functor {spec!r}; choose from {', '.join(BUILTIN_NAMES)} or file:PATH")
    return table[spec](bound)


def resolve(spec: str, bound: int) -> TruncatedFunctor:
    """Built-in name or ``file:PATH``. Loaded functors keep their own bound."""
    if spec.startswith("file:"):
        return load_functor(spec[5:])
    return builtin(spec, bound)


# -- the embedding of functors on non-empty sets ----------------------------


def restrict(F: TruncatedFunctor) -> InhabitedTruncatedFunctor:
    """Restriction to non-empty finite sets."""
    values = [None] + [F.values(k) for k in range(1, F.bound + 1)]
    builder = None
    if F._builder is not None:
        builder = lambda b: restrict(F.with_bound(b))  # noqa: E731
    return InhabitedTruncatedFunctor(
        F.bound, values, F.action, name=f"restrict({F.name})", builder=builder
    )


def equalizer(F: TruncatedFunctor) -> list[int]:
    """Indices of ``F[1]`` on which the two maps ``[1] => [2]`` agree."""
    a, b = F.action(D0), F.action(D1)
    return [i for i in range(F.size(1)) if a[i] == b[i]]


def iota_star(F: InhabitedTruncatedFunctor) -> TruncatedFunctor:
    """Extend ``F`` to ``[0]`` by the equalizer of ``F[1] => F[2]``."""
    eq = equalizer(F)
    values = [[F.values(1)[i] for i in eq]] + [F.values(k) for k in range(1, F.bound + 1)]

    def action(g):
        if g.dom_size != 0:
            return F.action(g)
        if g.cod_size == 0:
            return list(range(len(eq)))
        const = FinFunction.constant(1, 0, g.cod_size)
        table = F.action(const)
        return [table[i] for i in eq]

    builder = None
    if F._builder is not None:
        builder = lambda b: iota_star(F.with_bound(b))  # noqa: E731
    return TruncatedFunctor(F.bound, values, action, name=f"iota_star({F.name})", builder=builder)


@dataclass
class EssentialImageResult:
    holds: bool
    comparison: dict[str, str]
    equalizer: list[str]
    reason: str = ""

    def __bool__(self):
        return self.holds

    def to_json(self) -> dict:
        return {
            "holds": self.holds,
            "comparison": self.comparison,
            "equalizer": self.equalizer,
            "reason": self.reason,
        }


def is_in_essential_image(F: TruncatedFunctor) -> EssentialImageResult:
    """Whether ``F[0] -> eq(F[1] => F[2])`` is a bijection."""
    if F.start != 0:
        raise FunctorError("essential-image test needs a functor defined at [0]")
    eq = equalizer(F)
    to_one = F.action(FinFunction.empty(1))
    labels1 = F.values(1)
    comparison = {F.values(0)[i]: labels1[j] for i, j in enumerate(to_one)}
    image = list(to_one)
    reason = ""
    if len(set(image)) != len(image):
        reason = "comparison map is not injective"
    elif not set(image) <= set(eq):
        reason = "comparison map does not land in the equalizer"
    elif set(image) != set(eq):
        missing = sorted(set(eq) - set(image))
        reason = f"equalizer elements {[labels1[i] for i in missing]} have no preimage"
    return EssentialImageResult(
        holds=not reason,
        comparison=comparison,
        equalizer=[labels1[i] for i in eq],
        reason=reason,
    )


# -- JSON ---------------------------------------------------------------------


def functor_from_json(data: dict, name: str = "file", path=None) -> TruncatedFunctor:
    """Build and validate a functor from the JSON schema.

    ``actions`` must contain at least the elementary generators; any other
    listed table is checked against the composite of generators.
    """
    try:
        bound = int(data["bound"])
        values = data["values"]
        raw = data.get("actions", {})
        start = int(data.get("start", 0))
    except (KeyError, TypeError, ValueError) as exc:
        raise LoadError(f"malformed functor: {exc}", path=path) from None
    if start not in (0, 1):
        raise LoadError("start must be 0 or 1", path=path)
    given: dict[FinFunction, tuple[int, ...]] = {}
    for key, table in raw.items():
        try:
            given[FinFunction.from_key(key)] = tuple(int(i) for i in table)
        except (ValueError, TypeError) as exc:
            raise LoadError(f"bad action entry {key!r}: {exc}", path=path) from None

    cls = InhabitedTruncatedFunctor if start == 1 else TruncatedFunctor
    holder: list[TruncatedFunctor] = []

    def action(g):
        if g in given:
            return given[g]
        if g.dom_size == g.cod_size and g.values == tuple(range(g.dom_size)):
            return range(holder[0].size(g.dom_size))
        table = np.arange(holder[0].size(g.dom_size), dtype=np.int64)
        for e in finset.factor_elementary(g):
            if e not in given:
                raise FunctorError(f"no action given for generator {e.key()}")
            table = np.asarray(given[e], dtype=np.int64)[table]
        return table.tolist()

    if start == 1 and values and values[0] is not None:
        values = [None] + list(values[1:])
    try:
        F = cls(bound, values, action, name=name)
    except FunctorError as exc:
        raise LoadError(str(exc), path=path) from None
    holder.append(F)
    try:
        F.validate()
    except FunctorError as exc:
        raise LoadError(str(exc), path=path) from None
    return F


def load_functor(path: str | Path) -> TruncatedFunctor:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise LoadError(f"cannot read functor file: {exc.strerror}", path=path) from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise LoadError(exc.msg, path=path, line=exc.lineno, column=exc.colno) from None
    return functor_from_json(data, name=f"file:{path.name}", path=path)


def dump_functor(F: TruncatedFunctor, path: str | Path):
    Path(path).write_text(json.dumps(F.to_json(), indent=1) + "\n", encoding="utf-8")
