import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nilradon.kernels import (ETA0_INTEGRAL, CZKernel, DyadicKernel, cj_coefficient,
                              dyadic_piece, eta0, eta_j, eta_leq, integrate, kernel, verify_cz)


def test_eta0_plateau_and_support():
    assert eta0(0.5) == 1.0
    assert eta0(3.0) == 0.0
    assert eta0(-1.0) == 1.0 and eta0(2.0) == 0.0


@given(t=st.floats(-1e4, 1e4), J=st.integers(0, 12))
def test_eta_telescopes(t, J):
    total = sum(float(eta_j(j, t)) for j in range(J + 1))
    assert math.isclose(total, float(eta0(2.0 ** -J * t)), abs_tol=1e-12)


def test_eta1_support():
    t = np.linspace(-6, 6, 24001)
    v = eta_j(1, t)
    assert np.all(v[np.abs(t) < 1] == 0) and np.all(v[np.abs(t) > 4] == 0)
    assert np.all(v >= 0)


def test_eta_leq_product():
    assert eta_leq(1.0, [0.5, 0.5, 0.5], [1, 2, 3]) == 1.0
    assert eta_leq(1.0, [5.0, 0, 0], [1, 2, 3]) == 0.0
    with pytest.raises(ValueError):
        eta_leq(0.5, [0.0], [1])


def test_eta0_integral_constant():
    assert math.isclose(integrate(eta0, [-2, -1, 1, 2]), ETA0_INTEGRAL, rel_tol=1e-13)


def test_odd_kernel_has_zero_coefficients():
    dk = DyadicKernel(kernel("hilbert"))
    assert all(dk.c(j) == 0 for j in range(1, 12))
    assert cj_coefficient(kernel("zero"), 1) == 0


def test_coefficients_converge_for_integrable_kernel():
    gauss = CZKernel("gauss", 1.0, lambda t: np.exp(-t * t), lambda t: -2 * t * np.exp(-t * t))
    dk = DyadicKernel(gauss)
    assert math.isclose(dk.c(12), 2 * math.sqrt(math.pi) / ETA0_INTEGRAL, rel_tol=1e-12)


@pytest.mark.parametrize("name", ["hilbert", "oscillating"])
@pytest.mark.parametrize("j", [1, 2, 5, 9, 14, 20])
def test_pieces_are_mean_zero_and_localised(name, j):
    piece = dyadic_piece(kernel(name), j)
    assert abs(piece.integral()) < 1e-10
    lo, hi = piece.support
    assert hi <= 2.0 ** (j + 3)
    t = np.concatenate([np.linspace(hi, 4 * hi, 50), -np.linspace(hi, 4 * hi, 50)])
    assert np.all(piece(t) == 0)


def test_zero_kernel_pieces_vanish():
    piece = dyadic_piece(kernel("zero"), 3)
    assert np.all(piece(np.linspace(-40, 40, 101)) == 0)


@pytest.mark.parametrize("name", ["hilbert", "oscillating"])
def test_partial_sums_telescope(name, rng):
    dk = DyadicKernel(kernel(name))
    for j in (1, 4, 10):
        t = rng.uniform(-2.0 ** (j + 3), 2.0 ** (j + 3), 2000)
        assert np.max(np.abs(dk.partial_sum(j, t) - dk.telescoped(j, t))) < 1e-12


def test_scaled_sups_flat_in_j():
    dk = DyadicKernel(kernel("hilbert"))
    sups = [dk.piece(j).scaled_sup(4001)[0] for j in range(4, 12)]
    assert max(sups) <= 1.1 * min(sups)


def test_cz_verification():
    assert verify_cz(kernel("hilbert")).passed
    assert verify_cz(kernel("oscillating")).passed
    zero = verify_cz(kernel("zero"))
    assert zero.size_max == 0 and zero.cancel_max == 0
    bad = verify_cz(kernel("harmonic"))
    assert not bad.passed and bad.cancel_max > 1


def test_c_table_csv(tmp_path):
    path = tmp_path / "c.csv"
    DyadicKernel(kernel("oscillating")).write_c_table(path, 5)
    lines = path.read_text().splitlines()
    assert lines[0] == "j,c_j" and len(lines) == 6
