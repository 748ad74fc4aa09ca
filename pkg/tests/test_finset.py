from itertools import product

import hypothesis.strategies as strat
import pytest
from hypothesis import given

from coend.errors import DomainMismatch, InvalidFunction
from coend.finset import (
    FinFunction,
    compose,
    compose_all,
    degeneracy,
    elementary_maps,
    enumerate_functions,
    face,
    factor_elementary,
    image,
    is_injective,
    is_surjective,
    transposition,
)


def fn(values, cod):
    return FinFunction(tuple(values), cod)


def all_small(max_size=3):
    for m in range(max_size + 1):
        for n in range(max_size + 1):
            yield from enumerate_functions(m, n)


@strat.composite
def functions(draw, max_dom=5, max_cod=5, dom=None):
    m = draw(strat.integers(0, max_dom)) if dom is None else dom
    n = draw(strat.integers(1 if m else 0, max_cod))
    values = draw(strat.lists(strat.integers(0, max(n - 1, 0)), min_size=m, max_size=m))
    return fn(values, n)


def test_compose_examples():
    ident = FinFunction.identity(3)
    assert compose(ident, ident) == ident
    assert compose(fn([0, 0], 1), fn([1, 1, 0], 2)) == fn([0, 0, 0], 1)
    # g = [2,0], f = [1,0]: g(f(0)) = g(1) = 0, g(f(1)) = g(0) = 2
    assert compose(fn([2, 0], 3), fn([1, 0], 2)) == fn([0, 2], 3)


def test_compose_size_mismatch():
    with pytest.raises(DomainMismatch):
        compose(fn([0, 0], 1), fn([0, 1, 2], 3))


def test_image_examples():
    assert image(fn([], 2)) == []
    assert image(fn([1, 1, 1], 2)) == [1]
    assert image(fn([2, 0, 2], 3)) == [0, 2]


def test_enumerate_examples():
    assert enumerate_functions(0, 5) == [FinFunction.empty(5)]
    assert enumerate_functions(0, 0) == [FinFunction.empty(0)]
    assert [f.values for f in enumerate_functions(2, 2)] == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert len(enumerate_functions(3, 2)) == 8
    assert enumerate_functions(2, 0) == []


def test_injective_surjective_examples():
    ident = FinFunction.identity(4)
    assert is_injective(ident) and is_surjective(ident)
    collapse = fn([0, 0], 1)
    assert not is_injective(collapse) and is_surjective(collapse)
    empty = FinFunction.empty(0)
    assert is_injective(empty) and is_surjective(empty)


def test_invalid_construction():
    with pytest.raises(InvalidFunction):
        fn([0], 0)
    with pytest.raises(InvalidFunction):
        fn([3], 3)


def test_key_round_trip():
    for f in all_small(2):
        assert FinFunction.from_key(f.key()) == f
    with pytest.raises(InvalidFunction):
        FinFunction.from_key("2->2:0")


def test_associativity_exhaustive():
    by_dom = {}
    for f in all_small():
        by_dom.setdefault(f.dom_size, []).append(f)
    for f in all_small():
        for g in by_dom[f.cod_size]:
            for h in by_dom[g.cod_size]:
                assert compose(h, compose(g, f)) == compose(compose(h, g), f)


def test_identity_is_unit_and_image_shrinks():
    by_dom = {}
    for f in all_small():
        by_dom.setdefault(f.dom_size, []).append(f)
    for f in all_small():
        assert compose(FinFunction.identity(f.cod_size), f) == f
        assert compose(f, FinFunction.identity(f.dom_size)) == f
        for g in by_dom[f.cod_size]:
            assert set(image(compose(g, f))) <= set(image(g))


@given(strat.integers(0, 4), strat.integers(0, 4))
def test_enumeration_counts(m, n):
    fs = enumerate_functions(m, n)
    assert len(fs) == n**m
    assert len(set(fs)) == len(fs)
    assert fs == sorted(fs, key=lambda f: f.values)


def test_generators_shapes():
    assert face(2, 1) == fn([0, 2], 3)
    assert degeneracy(2, 0) == fn([0, 0, 1], 2)
    assert transposition(3, 1) == fn([0, 2, 1], 3)
    for e in elementary_maps(3):
        assert max(e.dom_size, e.cod_size) <= 3


@given(functions())
def test_factor_elementary_recomposes(g):
    steps = factor_elementary(g)
    generators = set(elementary_maps(max(g.dom_size, g.cod_size) + 1))
    assert all(e in generators for e in steps)
    assert compose_all(steps, g.dom_size) == g


def test_factor_elementary_stays_within_sizes():
    # intermediate sizes never exceed max(dom, cod), so bounded closures are sound
    for k, l in product(range(4), repeat=2):
        for g in enumerate_functions(k, l):
            for e in factor_elementary(g):
                assert max(e.dom_size, e.cod_size) <= max(k, l)
