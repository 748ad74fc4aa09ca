import random

import hypothesis.strategies as strat
import pytest
from hypothesis import given

from coend.errors import PreconditionError
from coend.pairing import (
    FinitePairingSystem,
    augment_with_pairing,
    cantor_pair,
    cantor_pairing_system,
    cantor_unpair,
    check_pairing_system,
    pair_n,
    projection_certificate,
    unpair_n,
)
from coend.report import PASS


def diagonal_walk(limit):
    """Number pairs by walking the anti-diagonals a + b = 0, 1, 2, ... with b increasing."""
    table, z, s = {}, 0, 0
    while z < limit:
        for b in range(s + 1):
            table[(s - b, b)] = z
            z += 1
        s += 1
    return table


def test_cantor_agrees_with_diagonal_walk():
    for (a, b), z in diagonal_walk(2000).items():
        assert cantor_pair(a, b) == z
        assert cantor_unpair(z) == (a, b)


def test_small_values():
    assert cantor_pair(0, 0) == 0
    assert pair_n([0, 0]) == 0
    assert pair_n([7]) == 7 and unpair_n(1, 7) == (7,)
    assert pair_n([1, 2, 3]) == cantor_pair(1, cantor_pair(2, 3))


@given(strat.lists(strat.integers(0, 10**12), min_size=1, max_size=5))
def test_round_trip(xs):
    assert unpair_n(len(xs), pair_n(xs)) == tuple(xs)


@given(strat.integers(1, 5), strat.integers(0, 10**15))
def test_unpair_then_pair(n, z):
    assert pair_n(list(unpair_n(n, z))) == z


def test_sampled_round_trip_two():
    rng = random.Random(0)
    for _ in range(1000):
        a, b = rng.randrange(10**6), rng.randrange(10**6)
        assert cantor_unpair(cantor_pair(a, b)) == (a, b)


def test_pairing_system_projections():
    ps = cantor_pairing_system([1, 2, 3])
    x = ps.pair((4, 5, 6))
    assert [ps.p(3, i, x) for i in range(3)] == [4, 5, 6]
    assert ps.p(1, 0, 11) == 11
    with pytest.raises(ValueError):
        ps.p(4, 0, x)


def test_check_pairing_system_passes():
    results = check_pairing_system(cantor_pairing_system([1, 2, 3, 4]), samples=2000)
    assert results and all(r.status == PASS for r in results)


def test_finite_pairing_system():
    # on a singleton every assembled map is a bijection
    ps = FinitePairingSystem(["*"], {1: [["*"]], 2: [["*"], ["*"]]})
    assert ps.unpair(2, "*") == ("*", "*")
    assert all(r.status == PASS for r in check_pairing_system(ps))
    with pytest.raises(PreconditionError):
        FinitePairingSystem([0, 1], {2: [[0, 1], [0, 1]]})


def test_augmented_relations():
    ps = cantor_pairing_system([1, 2, 3])
    aug = augment_with_pairing(None, ps)
    assert aug.constants == [0, 1, 2]
    c0 = aug.constants[0]
    for x in (0, 5, 99):
        assert aug.in_S(1, x, c0, x)
        assert not aug.in_S(1, x, c0, x + 1)
    assert aug.in_T(2, 1) and not aug.in_T(2, 2)
    x = cantor_pair(8, 13)
    assert aug.in_S(2, x, 0, 8) and aug.in_S(2, x, 1, 13)
    assert not aug.in_S(2, x, 2, 13)
    assert (x, 1, 13) in aug.relations["S_2"]
    assert (1,) in aug.relations["T_2"]


def test_duplicate_constants():
    with pytest.raises(PreconditionError):
        augment_with_pairing(None, cantor_pairing_system([2]), constants=[5, 5])
    with pytest.raises(PreconditionError):
        augment_with_pairing(None, cantor_pairing_system([3]), constants=[5, 6])


def test_certificate_for_projection():
    aug = augment_with_pairing(None, cantor_pairing_system([1, 2, 3]))
    cert = projection_certificate(lambda x, y, z: y, aug, 3, samples=500)
    assert cert.consistent and cert.index == 1
    assert str(cert) == "CONSISTENT(1)"
    assert cert.checks == ["diagonal", "T_3", "S_3", "projection"]


def test_certificate_refutes_constant():
    aug = augment_with_pairing(None, cantor_pairing_system([2]))
    cert = projection_certificate(lambda x, y: aug.constants[0], aug, 2, samples=200)
    assert str(cert) == "REFUTED"
    assert cert.witness["law"] == "diagonal" and cert.witness["x"] != aug.constants[0]


def test_certificate_s2_witness():
    aug = augment_with_pairing(None, cantor_pairing_system([2]))

    def f(x, y):
        # a projection on the constants, the other projection elsewhere
        return x if {x, y} <= {0, 1} else y

    cert = projection_certificate(f, aug, 2, samples=300, seed=3)
    assert str(cert) == "REFUTED"
    assert cert.witness["law"] == "S_2"
    fx, c, z = cert.witness["image"]
    assert not aug.in_S(2, fx, c, z)


def test_certificate_explicit_samples_and_seed_determinism():
    aug = augment_with_pairing(None, cantor_pairing_system([2]))
    a = projection_certificate(lambda x, y: x, aug, 2, samples=[(3, 4), (10, 2)])
    assert a.consistent and a.index == 0
    b1 = projection_certificate(lambda x, y: max(x, y), aug, 2, samples=100, seed=9)
    b2 = projection_certificate(lambda x, y: max(x, y), aug, 2, samples=100, seed=9)
    assert b1.to_json() == b2.to_json() and not b1.consistent
