import json

import pytest

from coend.errors import BoundTooSmall, FunctorError, LoadError
from coend.finset import FinFunction, enumerate_functions
from coend.functor import (
    TruncatedFunctor,
    builtin,
    dump_functor,
    functor_from_json,
    ine2_functor,
    ine_functor,
    iota_star,
    is_in_essential_image,
    load_functor,
    power_set_functor,
    representable,
    restrict,
)

BUILTINS = ["rep:0", "rep:1", "rep:2", "rep:3", "pow", "ine", "ine2"]


def test_representable_sizes():
    assert representable(0, 2).sizes() == [1, 1, 1]
    assert representable(1, 2).sizes() == [0, 1, 2]
    assert representable(2, 3).size(2) == 4
    assert representable(2, 3).sizes() == [0, 1, 4, 9]


def test_power_set_values_and_direct_image():
    P = power_set_functor(2)
    assert P.values(0) == ("{}",)
    assert P.size(2) == 4
    assert P.act(FinFunction((0, 0), 1), "{0,1}") == "{0}"
    assert power_set_functor(3).act(FinFunction((2, 0), 3), "{0,1}") == "{0,2}"
    with pytest.raises(BoundTooSmall):
        P.act(FinFunction((2, 0), 3), "{0,1}")


def test_exceptional_values():
    assert ine_functor(3).values(0) == ()
    assert ine2_functor(3).values(0) == ("a", "b")
    for F in (ine_functor(3), ine2_functor(3)):
        assert F.size(1) == 1
    G = ine2_functor(3)
    assert G.act(FinFunction.empty(1), "a") == G.act(FinFunction.empty(1), "b") == "*"


def test_bound_must_be_at_least_two():
    with pytest.raises(BoundTooSmall):
        representable(1, 1)
    with pytest.raises(BoundTooSmall):
        representable(1, 3).values(4)


@pytest.mark.parametrize("spec", BUILTINS)
def test_builtins_functorial_against_exhaustive_oracle(spec):
    F = builtin(spec, 3)
    # independent oracle: every composable pair of functions, every element
    for k in range(4):
        for l in range(4):
            for f in enumerate_functions(k, l):
                for m in range(4):
                    for g in enumerate_functions(l, m):
                        gf = FinFunction(tuple(g.values[i] for i in f.values), m)
                        for s in F.values(k):
                            assert F.act(gf, s) == F.act(g, F.act(f, s))
        for s in F.values(k):
            assert F.act(FinFunction.identity(k), s) == s
    assert F.functoriality_violations() == []
    assert F.functoriality_violations(exhaustive=True) == []


def test_generator_check_catches_broken_functor():
    good = representable(1, 3)

    def action(g):
        table = list(good.action(g))
        if g == FinFunction((1, 0), 2):
            return list(range(2))  # pretend the swap acts trivially
        return table

    bad = TruncatedFunctor(3, [good.values(k) for k in range(4)], action, name="bad")
    assert bad.functoriality_violations()
    with pytest.raises(FunctorError):
        bad.validate()


def test_iota_star_examples():
    assert iota_star(restrict(representable(1, 3))).size(0) == 0
    assert iota_star(restrict(representable(0, 3))).size(0) == 1
    assert iota_star(restrict(ine_functor(3))).size(0) == 1


@pytest.mark.parametrize("spec", BUILTINS)
def test_restriction_of_iota_star_is_identity(spec):
    F = restrict(builtin(spec, 3))
    G = restrict(iota_star(F))
    for k in range(1, 4):
        assert G.values(k) == F.values(k)
        for l in range(1, 4):
            for g in enumerate_functions(k, l):
                assert G.action(g) == F.action(g)


def test_essential_image():
    for N in range(2, 5):
        for s in range(N + 1):
            assert is_in_essential_image(representable(s, N)).holds
    assert is_in_essential_image(power_set_functor(3)).holds
    ine = is_in_essential_image(ine_functor(3))
    assert not ine.holds and ine.equalizer == ["*"] and ine.comparison == {}
    ine2 = is_in_essential_image(ine2_functor(3))
    assert not ine2.holds and ine2.comparison == {"a": "*", "b": "*"}


@pytest.mark.parametrize("spec", ["rep:0", "rep:1", "rep:2", "pow"])
def test_essential_image_zero_to_one_injective(spec):
    F = builtin(spec, 3)
    table = F.action(FinFunction.empty(1))
    assert len(set(table)) == len(table)


@pytest.mark.parametrize("spec", BUILTINS)
def test_json_round_trip(spec, tmp_path):
    F = builtin(spec, 3)
    path = tmp_path / "f.json"
    dump_functor(F, path)
    G = load_functor(path)
    assert G.sizes() == F.sizes()
    for k in range(4):
        for l in range(4):
            for g in enumerate_functions(k, l):
                assert G.action(g) == F.action(g)


def test_inhabited_json_round_trip(tmp_path):
    F = restrict(representable(2, 3))
    path = tmp_path / "f.json"
    dump_functor(F, path)
    G = load_functor(path)
    assert G.start == 1 and G.sizes() == F.sizes()


def test_load_rejects_non_functorial_tables():
    data = representable(1, 2).to_json()
    data["actions"]["2->2:1,0"] = [0, 1]
    with pytest.raises(LoadError):
        functor_from_json(data)


def test_load_requires_generators():
    data = representable(1, 2).to_json()
    del data["actions"]["1->2:1"]
    with pytest.raises(LoadError):
        functor_from_json(data)


def test_corrupted_file_reports_position(tmp_path):
    path = tmp_path / "broken.json"
    text = json.dumps(representable(1, 2).to_json(), indent=1)
    path.write_text(text[:40] + "\n,,\n" + text[40:])
    with pytest.raises(LoadError) as err:
        load_functor(path)
    assert err.value.line is not None and err.value.column is not None
    assert str(err.value).startswith(f"{path}:{err.value.line}:{err.value.column}:")


def test_unknown_builtin():
    with pytest.raises(FunctorError):
        builtin("nope", 3)
