from itertools import product

import hypothesis.strategies as strat
import pytest
from hypothesis import given, settings

from coend.errors import BoundTooSmall, PreconditionError
from coend.finset import FinFunction
from coend.functor import builtin, restrict
from coend.presheaf import FinitePresheaf
from coend.report import EXPECTED, FAIL, PASS, SKIPPED
from coend.tensor import (
    Expression,
    Tensor,
    act,
    coyoneda_class,
    make_carrier,
    presheaf_tensor,
    verify_section2,
)

BUILTINS = ["rep:0", "rep:1", "rep:2", "rep:3", "pow", "ine", "ine2"]


class UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, a):
        self.parent.setdefault(a, a)
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def oracle_partition(x, F, bound):
    """Close ``(f.g, s) ~ (f, g.s)`` over every function g, not just generators."""
    uf = UnionFind()
    for k in range(bound + 1):
        for f in product(range(x), repeat=k):
            for s in F.values(k):
                uf.find((f, s))
    for k in range(bound + 1):
        for l in range(bound + 1):
            for gv in product(range(l), repeat=k):
                g = FinFunction(gv, l)
                for f in product(range(x), repeat=l):
                    fg = tuple(f[i] for i in gv)
                    for s in F.values(k):
                        uf.union((fg, s), (f, F.act(g, s)))
    classes = {}
    for e in list(uf.parent):
        classes.setdefault(uf.find(e), []).append(e)
    return list(classes.values())


def as_expr(carrier, e):
    return Expression(tuple(carrier[i] for i in e[0]), e[1])


SMALL = [(x, spec) for spec in BUILTINS for x in range(3)] + [(3, "rep:1"), (3, "ine2")]


@pytest.mark.parametrize("x,spec", SMALL)
def test_partition_matches_union_find_oracle(x, spec):
    bound = max(x, 2) + 1
    F = builtin(spec, bound)
    T = Tensor(x, F)
    carrier = T.carrier
    classes = oracle_partition(x, F, bound)
    assert len(T) == len(classes)
    seen = set()
    for cls in classes:
        ids = {T.class_of(as_expr(carrier, e)).class_id for e in cls}
        assert len(ids) == 1
        (cid,) = ids
        seen.add(cid)
        t = T.classes[cid]
        assert t.size == len(cls)
        le = min(len(e[0]) for e in cls)
        assert t.length == le
        # canonical: least map, then least label string, among minimal expressions
        best = min((e for e in cls if len(e[0]) == le), key=lambda e: (e[0], e[1]))
        assert t.canonical == as_expr(carrier, best)
        minimal = {as_expr(carrier, e) for e in cls if len(e[0]) == le}
        found = T.minimal_expressions(cid)
        assert found[0] == t.canonical
        assert len(found) == len(minimal) and set(found) == minimal
    assert seen == set(range(len(T)))


@pytest.mark.parametrize("spec", ["rep:0", "rep:1", "rep:2", "pow", "ine2"])
@pytest.mark.parametrize("x", [1, 2, 3])
def test_coyoneda_route_agrees(spec, x):
    # for a finite carrier [x] the class of (f, s) is determined by F(f)(s) in F[x]
    T = Tensor(x, builtin(spec, 4))
    assert len(T) == T.functor.size(x)
    by_value = {}
    for k in range(T.bound + 1):
        for f in product(T.carrier, repeat=k):
            for s in T.functor.values(k):
                v = coyoneda_class(T, (f, s))
                cid = T.class_of((f, s)).class_id
                assert by_value.setdefault(v, cid) == cid


@pytest.mark.parametrize("spec", ["rep:0", "rep:1", "rep:2", "pow"])
def test_coyoneda_cancellation(spec):
    F = builtin(spec, 4)
    for k in range(1, 4):
        T = Tensor(k, F)
        ident = T.carrier
        for s, t in product(F.values(k), repeat=2):
            if T.class_of((ident, s)) == T.class_of((ident, t)):
                assert s == t


def test_model_case_representable():
    assert len(Tensor(1, builtin("rep:1", 3))) == 1
    assert Tensor(1, builtin("rep:1", 3)).classes[0].length == 1
    for x in (1, 2, 3):
        X = make_carrier(x)
        for s in range(3):
            T = Tensor(x, builtin(f"rep:{s}", 4))
            assert len(T) == x**s
            ident = "<" + ",".join(map(str, range(s))) + ">"
            for g in product(X, repeat=s):
                assert T.length((g, ident)) == len(set(g))


def test_model_case_power_set():
    for x in (1, 2, 3):
        T = Tensor(x, builtin("pow", 4))
        assert len(T) == 2**x
        for r in range(x + 1):
            for S in product(range(x), repeat=r):
                if len(set(S)) != r or list(S) != sorted(S):
                    continue
                label = "{" + ",".join(map(str, S)) + "}"
                assert T.length((T.carrier, label)) == r
    T = Tensor(["x", "y"], builtin("pow", 3))
    assert T.length((("x", "y"), "{0,1}")) == 2


def test_exceptional_ine():
    T = Tensor(["x", "y"], builtin("ine", 3))
    assert len(T) == 1
    assert T.length(0) == 1
    assert T.minimal_expressions(0) == [Expression(("x",), "*"), Expression(("y",), "*")]


def test_exceptional_ine2():
    T = Tensor(["x"], builtin("ine2", 3))
    (t,) = [c for c in T if c.length == 0]
    assert T.class_of((("x",), "*")) == t
    assert T.minimal_expressions(t) == [Expression((), "a"), Expression((), "b")]


def test_empty_carrier_has_one_class_per_zero_element():
    for spec in BUILTINS:
        F = builtin(spec, 3)
        T = Tensor(0, F)
        assert len(T) == F.size(0)
        assert all(c.length == 0 for c in T)


def test_length_zero_for_empty_map():
    T = Tensor(2, builtin("rep:0", 3))
    assert T.length(((), "<>")) == 0


def test_bound_and_functor_preconditions():
    with pytest.raises(BoundTooSmall):
        Tensor(3, builtin("rep:1", 3))
    with pytest.raises(BoundTooSmall):
        Tensor(2, builtin("rep:1", 4), bound=2)
    with pytest.raises(PreconditionError):
        Tensor(2, restrict(builtin("rep:1", 3)))
    with pytest.raises(PreconditionError):
        Tensor(["a", "a"], builtin("rep:1", 3))


def test_morphism_examples():
    F = builtin("rep:2", 4)
    T = Tensor(3, F)
    X = T.carrier
    one = Tensor(3, builtin("rep:1", 4))
    to_class = one.morphism("<0>", 1)
    assert len({to_class((v,)).class_id for v in X}) == 3 == len(one)
    # naturality on the diagonal: (x, x) (x) s equals x (x) delta.s
    delta = FinFunction((0, 0), 1)
    for s in F.values(2):
        for v in X:
            assert T.morphism(s, 2)((v, v)) == T.morphism(F.act(delta, s), 1)((v,))


@pytest.mark.parametrize("spec", ["rep:1", "rep:2", "pow"])
def test_morphism_cancellation_on_distinct_inputs(spec):
    F = builtin(spec, 4)
    T = Tensor(3, F)
    for n in (1, 2, 3):
        for xs in product(T.carrier, repeat=n):
            if len(set(xs)) != n:
                continue
            images = [T.morphism(s, n)(xs) for s in F.values(n)]
            assert len({c.class_id for c in images}) == len(images)


@pytest.mark.parametrize("spec", ["rep:1", "rep:2", "pow", "ine", "ine2"])
def test_act_well_defined_and_length_decreasing(spec):
    F = builtin(spec, 4)
    for x in range(1, 4):
        TX = Tensor(x, F)
        for y in range(1, 4):
            TY = Tensor(y, F)
            for gv in product(TY.carrier, repeat=x):
                g = dict(zip(TX.carrier, gv))
                for t in TX:
                    pushed = {act(g, TX, TY, e).class_id for e in TX.members(t)}
                    assert len(pushed) == 1
                    assert TY.length(pushed.pop()) <= t.length


def test_act_examples():
    T = Tensor(["x", "y"], builtin("rep:2", 3))
    ident = {"x": "x", "y": "y"}
    for t in T:
        assert act(ident, T, T, t) == t
    t = T.class_of((("x", "y"), "<0,1>"))
    assert t.length == 2
    collapsed = act(lambda v: "y", T, T, t)
    assert collapsed.length == 1


def test_presheaf_tensor_examples():
    point = FinitePresheaf.discrete({"c": ["*"]})
    Q = presheaf_tensor(point, builtin("rep:1", 3))
    assert Q.sizes() == {"c": 1}

    X = FinitePresheaf.discrete({"c": ["x", "y"]})
    Q = presheaf_tensor(X, builtin("pow", 3))
    assert Q.sizes() == {"c": len(Tensor(["x", "y"], builtin("pow", 3)))}

    inclusion = FinitePresheaf(
        ["a", "b"], {"i": ("a", "b")}, {"a": ["x"], "b": ["x", "y"]}, {"i": {"x": "x"}}
    )
    Q = presheaf_tensor(inclusion, builtin("pow", 3))
    Ta, Tb = Q.tensors["a"], Q.tensors["b"]
    assert Q.sizes() == {"a": 2, "b": 4}
    for t in Ta:
        image = Tb.classes[Q.action("i")[t.class_id]]
        # direct image of a subset of {x} inside {x, y}
        assert set(image.canonical.map) == set(t.canonical.map)


@pytest.mark.parametrize("spec", BUILTINS)
@pytest.mark.parametrize("x", [0, 1, 2, 3])
def test_verify_section2_has_no_failures(spec, x):
    results, T = verify_section2(x, builtin(spec, 4))
    assert not [r for r in results if r.status == FAIL]
    assert T.stability["stable"] and not T.stability["flag_bound_exceeded"]


def test_verify_section2_examples():
    results, _ = verify_section2(["x", "y"], builtin("rep:2", 3))
    assert all(r.status == PASS for r in results)

    results, _ = verify_section2(["x", "y"], builtin("ine", 3))
    by_name = {r.name: r for r in results}
    assert by_name["comparison Im(f) <= Im(g), all lengths"].status == SKIPPED
    assert by_name["uniqueness exception at Le <= 1"].status == EXPECTED
    assert by_name["uniqueness exception at Le <= 1"].witness

    results, _ = verify_section2([], builtin("rep:1", 3))
    skipped = [r for r in results if r.status == SKIPPED]
    assert [r.name for r in skipped] == ["minimal expression unique up to bijection, all lengths"]
    assert skipped[0].reason.startswith("precondition")


def test_verify_section2_respects_cap():
    with pytest.raises(PreconditionError):
        verify_section2(4, builtin("rep:1", 5), cap=3)


@settings(max_examples=60, deadline=None)
@given(strat.sampled_from(["rep:1", "rep:2", "pow", "ine2"]), strat.integers(1, 3), strat.data())
def test_canonical_expression_is_minimal_and_injective(spec, x, data):
    T = Tensor(x, builtin(spec, 4))
    k = data.draw(strat.integers(0, T.bound))
    f = tuple(data.draw(strat.sampled_from(T.carrier)) for _ in range(k))
    s = data.draw(strat.sampled_from(T.functor.values(k))) if T.functor.size(k) else None
    if s is None:
        return
    t = T.class_of((f, s))
    assert t.length <= k
    assert t.canonical.arity == t.length
    assert len(set(t.canonical.map)) == t.length
    assert T.class_of(t.canonical) == t
