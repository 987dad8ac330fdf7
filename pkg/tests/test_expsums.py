import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nilradon.expsums import (BudgetError, D_group, D_poly, Dtilde_poly, MultiFraction,
                              PhasePoint, S_aq, S_aq_is_zero, box_cutoffs, count_zeros_bound,
                              cyclotomic, default_window, fractions, is_zero_in_cyclotomic_field,
                              minor_arc_fraction, osc_integral, phase_histogram,
                              plateau_cutoffs, random_poly, saq_decay_table, unit_cutoffs,
                              weyl_sum, weyl_sum_bruteforce, write_decay_table)
from nilradon.kernels import integrate


def test_D_examples():
    assert D_poly([2], [3], 2) == [1, 5, -4]
    assert D_group([2], [3], 2) == [1, 5, -4]
    assert D_poly([1, 0], [0, 1], 2) == [0, 0, 0]


@given(d=st.integers(1, 3), r=st.integers(1, 3), data=st.data())
def test_closed_forms_match_group_products(d, r, data):
    vec = st.lists(st.integers(-5, 5), min_size=r, max_size=r)
    x, y = data.draw(vec), data.draw(vec)
    assert D_poly(x, y, d) == D_group(x, y, d)
    assert Dtilde_poly(x, y, d) == D_group(x, y, d, tilde=True)
    assert all(c == 0 for c in D_poly(x, x, d))


def test_fraction_validation():
    with pytest.raises(ValueError):
        MultiFraction(4, (2, 2, 4))
    with pytest.raises(ValueError):
        MultiFraction(3, (0, 1, 1))
    assert MultiFraction(3, (3, 3, 1)).in_S(3)
    assert len(list(fractions(1, 6))) == 2


def test_trivial_and_linear_sums():
    assert S_aq(MultiFraction(1, (1, 1, 1)), 2) == 1
    assert S_aq_is_zero(MultiFraction(5, (2,)), 1)
    assert abs(S_aq(MultiFraction(5, (2,)), 1)) < 1e-15


@pytest.mark.parametrize("r", [1, 2])
def test_d1_sums_vanish(r):
    for q in range(2, 16):
        for f in fractions(1, q):
            assert S_aq_is_zero(f, r)


def test_cyclotomic_zero_test():
    assert cyclotomic(6) == (1, -1, 1)
    assert is_zero_in_cyclotomic_field([1, 1, 1])
    assert not is_zero_in_cyclotomic_field([1, 0, 0])


@pytest.mark.parametrize("q", [3, 4, 5, 6, 7])
def test_conjugation_symmetry(q):
    for f in fractions(2, q):
        E, Eneg = phase_histogram(f, 2), phase_histogram(f.negated(), 2)
        assert np.array_equal(Eneg, np.roll(E[::-1], 1))


def test_representative_choice_is_irrelevant():
    f = MultiFraction(6, (1, 5, 2))
    assert np.array_equal(phase_histogram(f, 2, offset=1), phase_histogram(f, 2, offset=0))


def test_bounded_by_one():
    for q in range(1, 9):
        for f in fractions(2, q):
            assert abs(S_aq(f, 1)) <= 1 + 1e-12
            assert abs(S_aq(f, 1, "Dtilde")) <= 1 + 1e-12


def test_q2_witness_is_not_small():
    # v^2 = v mod 2 makes the two linear coordinates cancel
    f = MultiFraction(2, (1, 1, 2))
    for r in (1, 2, 3):
        assert S_aq(f, r) == 1


@pytest.mark.parametrize("q", [3, 5, 7])
def test_odd_primes_strictly_below_one(q):
    row = saq_decay_table(2, 1, q, qs=[q])[0]
    assert row.max_abs_S < 1


def test_decay_table_rows(tmp_path):
    rows = saq_decay_table(1, 1, 6)
    assert (rows[0].q, rows[0].max_abs_S, rows[0].max_abs_Stilde) == (1, 1.0, 1.0)
    assert all(r.max_abs_S < 1e-15 and r.max_abs_Stilde < 1e-15 for r in rows[1:])
    path = tmp_path / "t.csv"
    write_decay_table(rows, path)
    assert path.read_text().splitlines()[0] == "q,max_abs_S,max_abs_Stilde,argmax_a"
    with pytest.raises(BudgetError):
        saq_decay_table(2, 3, 10, budget=1000)


# --- Weyl sums ------------------------------------------------------------------

def test_cutoffs_admissibility():
    sup, tv = plateau_cutoffs(16, 1).check()
    assert sup <= 1e-12 and tv <= 1 + 1e-9
    assert plateau_cutoffs(16, 1).admissible
    assert not unit_cutoffs(16, 1).admissible and not box_cutoffs(16, 1).admissible


def test_weyl_zero_phase_and_P0():
    c = unit_cutoffs(5, 2)
    n, phi, psi = c.values(0)
    s = weyl_sum(PhasePoint.zero(2), 5, 2, 2, c)
    assert s.imag == 0 and math.isclose(s.real, (phi.sum() * psi.sum()) ** 2, rel_tol=1e-13)
    assert weyl_sum(PhasePoint.zero(2), 0, 2, 2, box_cutoffs(0, 2)) == 1


def test_weyl_d1_factorises():
    P, th = 9, Fraction(2, 7)
    c = plateau_cutoffs(P, 1)
    n, phi, psi = c.values(0)
    a = np.sum(phi * np.exp(2j * np.pi * n * float(th)))
    b = np.sum(psi * np.exp(-2j * np.pi * n * float(th)))
    s = weyl_sum(PhasePoint((th,)), P, 1, 1, c)
    assert abs(abs(s) - abs(a) * abs(b)) < 1e-12


@given(seed=st.integers(0, 2 ** 31), d=st.integers(1, 2), variant=st.sampled_from(["D", "Dtilde"]))
def test_weyl_transfer_matches_bruteforce(seed, d, variant):
    rng = np.random.default_rng(seed)
    k = d * (d + 1) // 2
    theta = PhasePoint(tuple(Fraction(int(a), int(q)) for a, q in
                             zip(rng.integers(0, 50, k), rng.integers(1, 50, k))))
    P, r = 3, 2
    fast = weyl_sum(theta, P, r, d, variant=variant)
    slow = weyl_sum_bruteforce(theta, P, r, d, variant=variant)
    assert abs(fast - slow) < 1e-13


def test_weyl_ratio_bounds():
    P, r = 6, 1
    unit = unit_cutoffs(P, r)
    s0 = weyl_sum(PhasePoint.zero(2), P, r, 2, unit)
    assert s0.real / (2 * P + 1) ** (2 * r) > 0.1
    s = weyl_sum(PhasePoint((0.1, 0.37, 0.2)), P, r, 2, plateau_cutoffs(P, r))
    assert abs(s) / (2 * P + 1) ** (2 * r) <= 1


def test_minor_arc_fraction_is_reduced():
    a, q = minor_arc_fraction((2, 1), 32, 0.25)
    assert math.gcd(a, q) == 1 and 0 < a < q


# --- oscillatory integrals -----------------------------------------------------

def test_osc_zero_frequency_is_window_mass():
    m = integrate(default_window, [-1, -0.5, 0.5, 1])
    res = osc_integral([0.0, 0.0, 0.0], 1, 2)
    assert abs(res.value.imag) < 1e-15 and abs(res.value.real - m ** 2) < 1e-12


def test_osc_zero_window():
    assert osc_integral([1.0], 1, 1, window=lambda t: 0 * t).value == 0


def test_osc_d1_factorises():
    beta = 3.7

    def one_dim(sign):
        re = integrate(lambda t: default_window(t) * np.cos(2 * np.pi * sign * beta * t),
                       [-1, -0.5, 0.5, 1])
        im = integrate(lambda t: default_window(t) * np.sin(2 * np.pi * sign * beta * t),
                       [-1, -0.5, 0.5, 1])
        return complex(re, -im)
    want = one_dim(-1) * one_dim(1)
    assert abs(osc_integral([beta], 1, 1).value - want) < 1e-8


def test_osc_r2_fast_path_matches_generic():
    from nilradon.expsums import _nodes, _osc_r2
    beta = np.array([1.5, -2.0, 3.0])
    x, w = _nodes(16)
    w1 = w * default_window(x)
    keep = w1 != 0
    fast = _osc_r2(beta, 2, x[keep], w1[keep], "D")
    X = np.meshgrid(*([x[keep]] * 4), indexing="ij")
    W = np.einsum("i,j,k,l->ijkl", *([w1[keep]] * 4))
    D = D_poly([X[0], X[1]], [X[2], X[3]], 2)
    slow = np.sum(W * np.exp(-2j * np.pi * sum(b * c for b, c in zip(beta, D))))
    assert abs(fast - slow) < 1e-10


# --- zero counting ----------------------------------------------------------------

def test_zero_count_examples():
    assert count_zeros_bound({(1, 1): 1, (0, 0): -1}, [-1, 0, 1], 2) == (2, 6, True)
    assert count_zeros_bound({(1,): 1}, [1, 2], 1) == (0, 1, True)
    assert count_zeros_bound({(1, 0): 1, (0, 1): -1}, [0, 1, 2], 2) == (3, 3, True)
    with pytest.raises(ValueError):
        count_zeros_bound({(1, 0): 0}, [0, 1], 2)


@given(seed=st.integers(0, 2 ** 31))
def test_zero_count_bound_holds(seed):
    rng = np.random.default_rng(seed)
    s = int(rng.integers(1, 4))
    poly = random_poly(rng, s, int(rng.integers(1, 5)))
    A = sorted(set(int(v) for v in rng.integers(-6, 7, 5)))
    assert count_zeros_bound(poly, A, s)[2]
