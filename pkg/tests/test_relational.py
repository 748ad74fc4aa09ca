from itertools import product

import hypothesis.strategies as strat
import pytest
from hypothesis import given, settings

from coend.bundled import STRUCTURES, SUITE_N_MAX, one_in_three, two_point
from coend.errors import LanguageMismatch, LoadError, NullarySymbolError, SearchTooLarge
from coend.formula import eval_formula, parse_formula
from coend.relational import (
    RelLanguage,
    RelStructure,
    dump_structure,
    fill_empty_relations,
    hat_expand,
    hom_enum,
    hom_enum_bruteforce,
    is_inhabited_lex_rigid,
    is_lex_rigid,
    is_morphism,
    is_rigid,
    load_structure,
    power,
    product_structure,
    projection_indices,
    restrict_language,
)

BINARY = RelLanguage((("r", 2),))


def binary(carrier, pairs):
    return RelStructure(BINARY, carrier, {"r": pairs})


@strat.composite
def binary_structures(draw, max_size=3):
    n = draw(strat.integers(1, max_size))
    pairs = draw(strat.sets(strat.tuples(strat.integers(0, n - 1), strat.integers(0, n - 1))))
    return binary(range(n), pairs)


@strat.composite
def mixed_structures(draw, max_size=3):
    n = draw(strat.integers(1, max_size))
    unary = draw(strat.sets(strat.tuples(strat.integers(0, n - 1))))
    pairs = draw(strat.sets(strat.tuples(strat.integers(0, n - 1), strat.integers(0, n - 1))))
    lang = RelLanguage((("u", 1), ("r", 2)))
    return RelStructure(lang, range(n), {"u": unary, "r": pairs})


def test_power_examples():
    A = binary([0, 1], [(0, 1)])
    P1 = power(A, 1)
    assert len(P1) == 2 and len(P1.relations["r"]) == 1
    P2 = power(A, 2)
    assert len(P2) == 4
    assert P2.relations["r"] == frozenset({((0, 0), (1, 1))})
    assert power(binary([0, 1], []), 3).relations["r"] == frozenset()


def test_power_zero_is_terminal():
    P0 = power(one_in_three(), 0)
    assert P0.carrier == ((),)
    assert P0.relations["R"] == frozenset({((), (), ())})


def test_power_oracle():
    # brute-force oracle: a pair of pairs is related iff every coordinate slice is
    A = binary([0, 1, 2], [(0, 1), (1, 2), (2, 2)])
    P = power(A, 2)
    expected = {
        (a, b)
        for a in product(A.carrier, repeat=2)
        for b in product(A.carrier, repeat=2)
        if all((a[i], b[i]) in A.relations["r"] for i in range(2))
    }
    assert P.relations["r"] == expected


def test_product_language_mismatch():
    with pytest.raises(LanguageMismatch):
        product_structure(one_in_three(), two_point())


def test_hom_enum_examples():
    point = RelStructure(RelLanguage(()), ["*"], {})
    assert hom_enum(point, point) == [(0,)]
    assert len(hom_enum(two_point(), two_point())) == 4
    assert hom_enum(one_in_three(), one_in_three()) == [(0, 1)]


def test_hom_enum_cap():
    with pytest.raises(SearchTooLarge):
        hom_enum(power(two_point(), 3), two_point(), cap=100)


@settings(max_examples=80, deadline=None)
@given(mixed_structures(), mixed_structures())
def test_hom_enum_matches_bruteforce(A, B):
    assert hom_enum(A, B) == hom_enum_bruteforce(A, B)


@settings(max_examples=40, deadline=None)
@given(binary_structures(), binary_structures(), binary_structures())
def test_composition_closure(A, B, C):
    ab, bc = hom_enum(A, B), hom_enum(B, C)
    ac = set(hom_enum(A, C))
    for f in ab:
        for g in bc:
            assert tuple(g[i] for i in f) in ac


@settings(max_examples=40, deadline=None)
@given(mixed_structures(), strat.integers(1, 2))
def test_projections_are_morphisms(A, n):
    An = power(A, n)
    for i in range(n):
        proj = {t: t[i] for t in An.carrier}
        assert is_morphism(An, A, proj)


def test_rigidity_examples():
    point = RelStructure(RelLanguage(()), ["*"], {})
    assert is_rigid(point).holds
    assert not is_lex_rigid(point, 2).holds
    assert is_lex_rigid(point, 2).witness["n"] == 0

    assert is_inhabited_lex_rigid(one_in_three(), 3).holds
    assert is_inhabited_lex_rigid(one_in_three(), 3).checked == [1, 2, 3]

    res = is_rigid(two_point())
    assert not res.holds
    assert res.witness["map"] == [[0, 0], [1, 0]]


def test_singleton_uniqueness_at_higher_arity():
    # with one point, A^2 -> A equals both projections, so uniqueness fails at n = 2
    point = RelStructure(RelLanguage(()), ["*"], {})
    assert is_inhabited_lex_rigid(point, 1).holds
    res = is_inhabited_lex_rigid(point, 2)
    assert not res.holds
    assert res.witness["projections"] == [0, 1]


def test_projection_indices():
    A = two_point()
    first = [p[0] for p in product(range(2), repeat=2)]
    assert projection_indices(A, 2, first) == [0]
    assert projection_indices(A, 2, [0, 0, 0, 0]) == []


def test_one_in_three_rigidity_oracle():
    # independent check: every ternary-relation-preserving map {0,1}^n -> {0,1} is a projection
    A = one_in_three()
    R = A.relations["R"]
    for n in range(1, 4):
        points = list(product((0, 1), repeat=n))
        survivors = []
        for values in product((0, 1), repeat=len(points)):
            f = dict(zip(points, values))
            ok = all(
                (f[a], f[b], f[c]) in R
                for a, b, c in product(points, repeat=3)
                if all((a[i], b[i], c[i]) in R for i in range(n))
            )
            if ok:
                survivors.append(values)
        projections = [tuple(p[i] for p in points) for i in range(n)]
        assert sorted(survivors) == sorted(projections)


@pytest.mark.parametrize("name", sorted(STRUCTURES))
def test_bundled_expectations(name):
    b = STRUCTURES[name]
    A = b.load()
    assert is_rigid(A).holds == b.expected["rigid"]
    assert is_lex_rigid(A, SUITE_N_MAX).holds == b.expected["lex"]
    assert is_inhabited_lex_rigid(A, SUITE_N_MAX).holds == b.expected["inhabited-lex"]


def test_fill_empty_examples():
    A = RelStructure(RelLanguage((("q", 2), ("z", 0))), [0, 1], {"q": [], "z": [()]})
    filled = fill_empty_relations(A)
    assert filled.language.names == ("q",)
    assert len(filled.relations["q"]) == 4
    B = binary([0, 1], [(0, 1)])
    assert fill_empty_relations(B) == B


@settings(max_examples=60, deadline=None)
@given(mixed_structures(), strat.integers(1, 2))
def test_fill_empty_never_removes_morphisms(A, n):
    # maps A^n -> A; an empty relation on A is empty on A^n too, so both sides fill alike
    filled = fill_empty_relations(A)
    before = set(hom_enum(power(A, n), A))
    after = set(hom_enum(power(filled, n), filled))
    assert before <= after


def test_hat_expand_examples():
    A = binary([0, 1, 2], [(0, 1), (1, 2)])
    assert hat_expand(A, ["r(x,y)"], names=["r"]) == A
    empty = hat_expand(A, [])
    assert empty.language.names == ()
    assert len(hom_enum(empty, empty)) == 27
    with pytest.raises(NullarySymbolError):
        hat_expand(A, ["exists x. r(x,x)"], nullary_free=True)
    closed = hat_expand(A, ["exists x. r(x,x)"])
    assert closed.relations[str(parse_formula("exists x. r(x,x)"))] == frozenset()


SMALL_FORMULAS = [
    "r(x,y)",
    "exists y. r(x,y)",
    "forall y. (r(y,x) -> x = y)",
    "r(x,x)",
    "exists z. (r(x,z) & r(z,y))",
]


@settings(max_examples=40, deadline=None)
@given(binary_structures(), strat.lists(strat.sampled_from(SMALL_FORMULAS), min_size=1, max_size=3, unique=True))
def test_hat_expand_with_negations_preserves_biconditionally(A, texts):
    phis = [parse_formula(t) for t in texts]
    listed = phis + [phi.negate() for phi in phis]
    H = hat_expand(A, listed, names=[f"s{i}" for i in range(len(listed))])
    for f in hom_enum(H, H):
        for phi in phis:
            for t in product(A.carrier, repeat=phi.arity):
                image = tuple(A.carrier[f[A.index(v)]] for v in t)
                before = eval_formula(A, phi, dict(zip(phi.free_vars, t)))
                after = eval_formula(A, phi, dict(zip(phi.free_vars, image)))
                assert before == after


def test_restrict_language():
    A = RelStructure(RelLanguage((("u", 1), ("r", 2))), [0, 1], {"u": [(0,)], "r": [(0, 1)]})
    assert restrict_language(A, ["r"]) == binary([0, 1], [(0, 1)])


def test_structure_json_round_trip(tmp_path):
    A = power(one_in_three(), 2)
    path = tmp_path / "a.json"
    dump_structure(A, path)
    assert load_structure(path) == A


def test_corrupted_structure_file(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"carrier": [0, 1],\n "relations": {"r": [[0, 1]}\n}')
    with pytest.raises(LoadError) as err:
        load_structure(path)
    assert err.value.line == 2
