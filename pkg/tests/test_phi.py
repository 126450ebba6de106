from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qkz.jacobi import JacobiFourierSeries, fourier_to_taylor
from qkz.modular import QuasiModularPoly
from qkz.phi import (
    anomaly_dA_phi,
    anomaly_polynomial_phi,
    automorphism_factor,
    derived_ode_anomaly_residual,
    derived_ode_pair_residual,
    g_ode_check,
    interpolate_in_index,
    inversion_check,
    phi_ode,
    phi_pair_closed,
    phi_pair_ode,
    phi_pair_polynomial,
    phi_partition,
    phi_polynomial_u,
    phi_residue,
    polynomial_extension_check,
    recursion_check,
    signed_splits,
)
from qkz.series.laurent import LaurentPolynomial
from qkz.series.truncated import TruncatedSeries
from qkz.theta import F_series, theta_fourier

G2, G4, G6 = QuasiModularPoly.G2(), QuasiModularPoly.G4(), QuasiModularPoly.G6()
SM = lambda m: LaurentPolynomial({m: 1, -m: -1})  # noqa: E731


@pytest.mark.parametrize("m", range(1, 7))
def test_three_methods_agree(m):
    a = phi_ode(m, 10)
    assert a == phi_residue(m, 10)
    assert a == phi_partition(m, 10)


@pytest.mark.parametrize("m", [1, 2, 3, 5, 8])
def test_first_fourier_coefficients(m):
    f = phi_ode(m, 4)
    assert f.coefficient(0) == SM(m)
    assert f.coefficient(1) == SM(1) ** 2 * SM(m) * (-m * m)
    assert (f.weight, f.index) == (-1, Fraction(m, 2))


def test_phi1_is_theta_and_ode_holds():
    q = 12
    assert phi_ode(1, q) == theta_fourier(q)
    F = F_series(q)
    for m in range(1, 6):
        f = phi_ode(m, q)
        assert f.dtau().dtau() == F * f * (m * m)


@pytest.mark.parametrize("m", range(1, 7))
def test_odd_in_index(m):
    assert phi_ode(-m, 10) == -phi_ode(m, 10)
    assert phi_ode(m, 10).parity() == -1


def test_phi_zero():
    assert phi_ode(0, 6).is_zero()


def test_automorphism_factor_signed():
    assert automorphism_factor((1, -1)) == -1
    assert automorphism_factor((2, 2, 1)) == 2 * 2 * 2 * 1
    assert automorphism_factor((-2,)) == -2


def test_signed_splits():
    assert sorted(signed_splits(3)) == [(1, 2), (2, 1)]
    assert sorted(signed_splits(-2)) == [(-1, -1)]


# -- pairs ---------------------------------------------------------------------------

@pytest.mark.parametrize("m,n", [(1, 1), (2, 1), (3, -1), (-2, 3), (2, -2)])
def test_pair_first_coefficient(m, n):
    f = phi_pair_ode(m, n, 4)
    assert f.coefficient(1) == SM(m) * SM(n) * SM(1) ** 2 * (-m * n)


@given(st.integers(-4, 4), st.integers(-4, 4))
def test_pair_symmetries(m, n):
    q = 6
    f = phi_pair_ode(m, n, q)
    assert f == phi_pair_ode(n, m, q)
    assert f == phi_pair_ode(-m, -n, q)
    if n == 0:
        assert f.is_zero()


@pytest.mark.parametrize("m,n", [(1, 1), (2, 3), (3, -1), (-1, 2)])
def test_pair_closed_form(m, n):
    assert phi_pair_ode(m, n, 8) == phi_pair_closed(m, n, 8)


def test_pair_closed_form_undefined_on_antidiagonal():
    with pytest.raises(ValueError):
        phi_pair_closed(2, -2, 8)


# -- Taylor displays -------------------------------------------------------------------

def test_phi_u_display():
    fam = phi_polynomial_u(z_order=7)
    assert fam.coefficient(1) == {(1,): QuasiModularPoly.constant(1)}
    assert fam.coefficient(3) == {(3,): -G2}
    assert fam.coefficient(5) == {
        (5,): G2 ** 2 / 3 - G4 / 72,
        (3,): G2 ** 2 / 6 - G4 * Fraction(5, 72),
    }
    assert all(fam.coefficient(k) == {} for k in (0, 2, 4, 6))


def test_phi_uv_display():
    fam = phi_pair_polynomial(z_order=7)
    assert fam.coefficient(4) == {(2, 2): G2 ** 2 * 2 - G4 * Fraction(5, 6)}
    side = G2 ** 3 * Fraction(-4, 3) + G2 * G4 * Fraction(2, 3) - G6 * Fraction(7, 720)
    assert fam.coefficient(6) == {
        (4, 2): side,
        (2, 4): side,
        (3, 3): G2 ** 3 * Fraction(-2, 3) + G2 * G4 / 6 + G6 * Fraction(7, 720),
        (2, 2): G2 ** 3 * Fraction(-2, 3) + G2 * G4 * Fraction(5, 6) - G6 * Fraction(7, 144),
    }
    assert all(fam.coefficient(k) == {} for k in (0, 1, 2, 3, 5))


@pytest.mark.parametrize("m,n", [(2, -1), (-3, 1), (-2, -2), (3, -3), (1, -1)])
def test_pair_polynomial_extends_to_negative_indices(m, n):
    fam = phi_pair_polynomial(z_order=7)
    t = fourier_to_taylor(phi_pair_ode(m, n, 12), 7)
    for k in range(7):
        want = TruncatedSeries([t.coefficient(k, j) for j in range(12)], 0, 12)
        assert fam.evaluate(k, (m, n)).evaluate(12) == want


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_polynomial_extension_negative_index(m):
    assert polynomial_extension_check(m, 6, 8)


def test_interpolate_in_index():
    assert interpolate_in_index({1: 1, 2: 4, 3: 9}, -2) == 4


# -- identities ----------------------------------------------------------------------

@pytest.mark.parametrize("m,n", [(1, 1), (1, 3), (2, 2), (3, 1)])
def test_recursion(m, n):
    assert recursion_check(m, n, 8)


@pytest.mark.parametrize("m", range(1, 5))
def test_derived_ode_anomaly(m):
    assert derived_ode_anomaly_residual(m, 8).is_zero()


@pytest.mark.parametrize("m,n", [(1, 1), (2, -2), (-1, 3), (3, 2)])
def test_derived_ode_pair(m, n):
    assert derived_ode_pair_residual(m, n, 8).is_zero()


def test_anomaly_is_odd_and_polynomial_form():
    q = 6
    for m in range(1, 5):
        assert anomaly_dA_phi(-m, q) == -anomaly_dA_phi(m, q)
    # Taylor form at -m: -(d/dA phi_m) - m z phi_m
    for m in range(1, 4):
        a = anomaly_polynomial_phi(-m, q, 8)
        b = fourier_to_taylor(anomaly_dA_phi(m, q), 8)
        zphi = fourier_to_taylor(phi_ode(m, q), 7).times_z()
        assert a.truncate(z_order=7) == (-b - zphi * m).truncate(z_order=7)


def test_inversion_small():
    assert inversion_check(5, 5, 8)
    assert inversion_check(5, 5, 8, method="lagrange")
    assert g_ode_check(5, 5, 8)


def test_constant_is_not_a_solution():
    f = JacobiFourierSeries.constant(1, 6)
    assert not (f.dtau().dtau() == F_series(6) * f)
