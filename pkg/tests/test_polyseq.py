from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from nilradon.group import Step2Group, dilate, element
from nilradon.polyseq import (GroupPolySequence, MorphismSpec, Poly, a0_sequence,
                              build_morphism, difference, nilpotency_degree, random_target,
                              seq_from_json, seq_to_json, symbolic_image, verify_homomorphism)


def test_a0_values():
    A = a0_sequence(2)
    assert A(3) == (3, 9, 0)
    assert A.at(0).is_identity()


@given(n=st.integers(-30, 30), lam=st.integers(1, 6))
def test_a0_homogeneity(n, lam):
    A = a0_sequence(3)
    assert A.at(lam * n) == dilate(lam, A.at(n))


def test_difference_examples():
    D1 = difference(a0_sequence(1))
    assert D1.coords == (Poly([1]),)
    assert difference(D1).is_identity()
    D2 = difference(a0_sequence(2))
    for n in range(-5, 6):
        assert D2(n) == (1, 2 * n + 1, -n * n)
    zero = GroupPolySequence(a0_sequence(2).group, (Poly(), Poly(), Poly()))
    assert difference(zero).is_identity()


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_nilpotency_degree(d):
    k0 = nilpotency_degree(a0_sequence(d), 4 * d + 4)
    assert k0 is not None and k0 <= 2 * d + 1
    if d == 1:
        assert k0 == 2
    zero = GroupPolySequence(a0_sequence(d).group, (Poly(),) * len(a0_sequence(d).coords))
    assert nilpotency_degree(zero, 1) == 0


def test_poly_arithmetic():
    p = Poly([1, 2, 3])
    assert p(2) == 17
    assert p.shift(1)(0) == p(1)
    assert (p * p)(Fraction(1, 2)) == p(Fraction(1, 2)) ** 2
    assert (p - p).is_zero()


def test_morphism_abelian_target():
    G = Step2Group.abelian(1, 1)
    n = Poly.var()
    A = GroupPolySequence(G, (n ** 2, Poly()))
    T = build_morphism(G, A)
    assert T.images[1][0] == 1 and T.images[0][0] == 0
    A0 = a0_sequence(T.d)
    assert all(T(A0(k))[0] == k * k for k in range(-10, 11))


def test_morphism_identity_target():
    G = Step2Group.heisenberg()
    T = build_morphism(G, GroupPolySequence(G, (Poly(), Poly(), Poly())))
    assert all(h == G.identity() for h in T.images)


def test_morphism_heisenberg():
    G = Step2Group.heisenberg()
    n = Poly.var()
    A = GroupPolySequence(G, (n, n ** 2, n ** 3))
    T = build_morphism(G, A)
    A0 = a0_sequence(T.d)
    assert all(T(A0(k)) == A(k) for k in range(-20, 21))
    assert symbolic_image(T) == A.coords


def _pairs(rng, d, count):
    dim = len(a0_sequence(d).coords)

    def draw():
        return element(d, [Fraction(int(a), int(b)) for a, b in
                           zip(rng.integers(-30, 31, dim), rng.integers(1, 4, dim))])
    return [(draw(), draw()) for _ in range(count)]


def test_random_morphisms_intertwine(rng):
    for _ in range(5):
        G, A = random_target(rng, degree=int(rng.integers(1, 4)))
        T = build_morphism(G, A)
        A0 = a0_sequence(T.d)
        assert all(T(A0(k)) == A(k) for k in range(-20, 21))
        assert verify_homomorphism(T, _pairs(rng, T.d, 100)).ok


def test_trivial_morphism_is_homomorphism(rng):
    G = Step2Group.heisenberg()
    T = MorphismSpec(G, 0, 2, (G.identity(), G.identity()))
    assert verify_homomorphism(T, _pairs(rng, 2, 50)).ok


def test_corrupted_image_is_caught(rng):
    G = Step2Group.heisenberg()
    n = Poly.var()
    T = build_morphism(G, GroupPolySequence(G, (n, n ** 2, n ** 3)))
    images = list(T.images)
    images[0] = G.multiply(images[0], (1, 0, 0))  # changes [h1, h2]
    stale = MorphismSpec(G, T.d3, T.d, tuple(images), central_images=T.central_images)
    rep = verify_homomorphism(stale, _pairs(rng, T.d, 200))
    assert not rep.ok and rep.witness is not None
    assert verify_homomorphism(stale.rebuilt(), _pairs(rng, T.d, 200)).ok


def test_sequence_json_roundtrip():
    A = a0_sequence(3)
    assert seq_from_json(seq_to_json(A)) == A
