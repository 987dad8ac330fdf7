from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from nilradon.group import (DimensionError, Step2Group, UniversalGroup, commutator, dilate,
                            element, from_json, generator, homogeneous_norm, identity,
                            in_ball, index_set, inverse, multiply, power, to_json)
from nilradon.polyseq import a0_sequence

ints = st.integers(-1000, 1000)
rats = st.fractions(min_value=-50, max_value=50, max_denominator=20)


def elements(d, scalars=ints):
    return st.lists(scalars, min_size=len(index_set(d)), max_size=len(index_set(d))).map(
        lambda c: element(d, c))


def test_index_order():
    assert index_set(2).pairs == ((1, 0), (2, 0), (2, 1))
    assert len(index_set(3)) == 6


def test_multiply_examples():
    assert multiply(element(2, (0, 1, 0)), element(2, (1, 0, 0))).coords == (1, 1, 1)
    assert multiply(element(2, (1, 0, 0)), identity(2)).coords == (1, 0, 0)
    assert multiply(element(2, (1, 0, 0)), element(2, (0, 1, 0))).coords == (1, 1, 0)


def test_inverse_examples():
    assert inverse(a0_sequence(2).at(2)).coords == (-2, -4, 8)
    assert inverse(identity(2)) == identity(2)
    assert inverse(element(2, (0, 0, 5))).coords == (0, 0, -5)


def test_commutator_examples():
    assert commutator(generator(2, 2), generator(2, 1)).coords == (0, 0, 1)
    x = element(2, (3, -1, 7))
    assert commutator(x, x).is_identity()
    assert commutator(x, element(2, (0, 0, 9))).is_identity()


def test_dilation_norm_ball_examples():
    assert dilate(2, element(2, (1, 1, 1))).coords == (2, 4, 8)
    assert dilate(1, element(2, (4, 5, 6))).coords == (4, 5, 6)
    assert homogeneous_norm(element(2, (1, -2, 3))) == 6
    assert in_ball(identity(3), Fraction(1, 100))
    assert not in_ball(element(1, (3,)), 2)


def test_dimension_mismatch_raises():
    with pytest.raises(DimensionError):
        multiply(identity(1), identity(2))
    with pytest.raises(DimensionError):
        element(2, (1, 2))


def test_power_and_json_roundtrip():
    x = element(2, (1, 2, Fraction(1, 3)))
    assert power(x, 3) == x * x * x
    assert power(x, -2) == inverse(x) * inverse(x)
    assert from_json(to_json(x)) == x


@pytest.mark.parametrize("d", [1, 2, 3])
@given(data=st.data())
def test_group_axioms(d, data):
    x, y, z = (data.draw(elements(d, rats)) for _ in range(3))
    e = identity(d)
    assert (x * y) * z == x * (y * z)
    assert x * e == x == e * x
    assert x * inverse(x) == e == inverse(x) * x
    c = commutator(x, y)
    assert c.is_central()
    assert c * z == z * c


@given(x=elements(2), y=elements(2), lam=st.integers(1, 9))
def test_dilation_is_automorphism(x, y, lam):
    assert dilate(lam, x * y) == dilate(lam, x) * dilate(lam, y)


def test_universal_group_matches_elements():
    G = UniversalGroup(2)
    a, b = (1, 2, 3), (-4, 5, 6)
    assert G.multiply(a, b) == (element(2, a) * element(2, b)).coords
    assert G.inverse(a) == inverse(element(2, a)).coords


def test_step2_examples(rng):
    H = Step2Group.heisenberg()
    assert H.multiply((1, 0, 0), (0, 1, 0)) == (1, 1, 1)
    A = Step2Group.abelian(2, 1)
    assert A.multiply((1, 2, 3), (4, 5, 6)) == (5, 7, 9)
    G = Step2Group.random(rng, 3, 2)
    for _ in range(200):
        x, y, z = ([Fraction(int(v), int(w)) for v, w in
                    zip(rng.integers(-9, 10, 5), rng.integers(1, 5, 5))] for _ in range(3))
        assert G.multiply(G.multiply(x, y), z) == G.multiply(x, G.multiply(y, z))
        assert G.multiply(x, G.inverse(x)) == G.identity()
        assert G.power(x, 3) == G.multiply(x, G.multiply(x, x))
