from fractions import Fraction

import pytest

from qkz.kz import (
    KZSolution,
    Obstructed,
    bracket,
    kz2_residual,
    kz_residual,
    ladder_step,
    level2_E,
    level2_fl,
    level2_H64,
    make_kz,
    obstruction_identity_check,
    preset,
    solve,
    specialize_torsion_point,
    theta_g,
)
from qkz.modular import FractionalQSeries, QuasiModularPoly, eisenstein, eisenstein_E
from qkz.phi import phi_ode
from qkz.jacobi import JacobiFourierSeries
from qkz.theta import F_series, theta_fourier


@pytest.fixture(scope="module")
def eta2():
    return preset("eta2", 24)


@pytest.fixture(scope="module")
def level2():
    return preset("eta1eta2", 24)


def _q(f):
    return FractionalQSeries.from_q(f)


def test_eta2_H(eta2):
    assert eta2.H.truncate(20) == _q(eisenstein_E(4, 20) * Fraction(1, 144))
    assert eta2.E.truncate(20) == _q(eisenstein_E(2, 20) * Fraction(-1, 12))
    assert eta2.alpha == Fraction(-1, 12)


def test_eta2_solvability(eta2):
    got = {k: bool(solve(eta2, k + 1, 20)) for k in range(31)}
    assert got == {k: k % 6 in (0, 4) for k in range(31)}


def test_eta2_solution_forms(eta2):
    sol = solve(eta2, 5, 20)
    assert isinstance(sol, KZSolution) and sol.k == 4
    assert sol.modular_form == QuasiModularPoly.G4() * 240
    assert kz_residual(eta2, sol).truncate(18).is_zero()


def test_eta2_obstruction_kinds(eta2):
    r = solve(eta2, 6, 20)  # k = 5: resonance
    assert isinstance(r, Obstructed) and r.reason == "resonance"
    assert r.kappa == 1 and r.residual == 60
    r = solve(eta2, 2, 20)  # k = 1: solvable recursion, quotient not modular
    assert isinstance(r, Obstructed) and r.reason == "not modular"


def test_level2_H(level2):
    assert level2.H.truncate(20) == level2_H64(20) * Fraction(1, 64)


def test_level2_E_negative_sign(level2):
    assert level2.E.truncate(20) == level2_E(20, sign=-1)


@pytest.mark.xfail(strict=True, reason="the displayed positive sign does not hold; E carries an overall minus")
def test_level2_E_displayed_sign(level2):
    assert level2.E.truncate(20) == level2_E(20, sign=1)


def test_obstruction_identity(eta2, level2):
    assert [obstruction_identity_check(eta2, l, 15) for l in range(9)] == [l == 4 for l in range(9)]
    assert [obstruction_identity_check(level2, l, 15) for l in range(9)] == [l == 2 for l in range(9)]
    th = preset("theta", 12)
    assert not any(obstruction_identity_check(th, l, 8) for l in range(7))


def test_ladder_eta2(eta2):
    f4 = solve(eta2, 5, 24).quotient
    f10 = solve(eta2, 11, 24).quotient
    down, up = ladder_step(eta2, f10, 10, f4, 4, 12)
    assert kz2_residual(eta2, down, 4).truncate(12).is_zero()
    assert kz2_residual(eta2, up, 16).truncate(12).is_zero()
    assert down.truncate(12) == _q(eisenstein_E(4, 12)) * -3456


def test_ladder_level2(level2):
    fl = level2_fl(24)
    assert bracket(fl, level2.H, 2, 4).truncate(14).is_zero()
    down, up = ladder_step(level2, fl, 2, fl, 2, 12)
    assert kz2_residual(level2, up, 6).truncate(12).is_zero()
    assert down.truncate(12).is_zero()  # [f, f] = 0


def test_ladder_rejects_bad_generator(eta2):
    f6 = _q(eisenstein_E(6, 24))
    with pytest.raises(ValueError):
        ladder_step(eta2, f6, 6, f6, 6, 12)


def test_theta_preset_reproduces_phi():
    th = preset("theta", 10)
    assert th.H == F_series(10)
    for m in range(1, 5):
        sol = solve(th, m, 10)
        sm = JacobiFourierSeries.from_rows({0: {m: 1, -m: -1}}, 10)
        assert sol.series * sm == phi_ode(m, 10)


def test_theta_g_is_serre_for_eta2(eta2):
    e4 = _q(eisenstein_E(4, 20))
    e6 = _q(eisenstein_E(6, 20))
    assert theta_g(eta2, e4, 4).truncate(18) == e6 * Fraction(-1, 3)


def test_make_kz_requires_unit_lead():
    with pytest.raises(ValueError):
        make_kz(_q(eisenstein(2, 10)))


# -- torsion points ------------------------------------------------------------------

def test_torsion_half_period():
    # phi_2 = 2 Theta^2 A and A vanishes at the half period
    phase, f = specialize_torsion_point(phi_ode(2, 10), 0, Fraction(1, 2), return_phase=True)
    assert phase == 0 and f.is_zero()
    # s - 1/s -> 2i
    phase, f = specialize_torsion_point(theta_fourier(10), 0, Fraction(1, 2), return_phase=True)
    assert phase == 1 and f.coefficient(0) == 2
    phase, f = specialize_torsion_point(phi_ode(3, 10), 0, Fraction(1, 2), return_phase=True)
    assert phase == 1 and f.coefficient(0) == -2


def test_torsion_ode_at_real_point():
    q = 10
    F = F_series(q)
    for m in (1, 2, 3):
        f = specialize_torsion_point(phi_ode(m, q), 0, Fraction(1, 2))
        Fs = specialize_torsion_point(F, 0, Fraction(1, 2))
        assert f.dtau().dtau() == Fs * f * (m * m)


def test_torsion_quarter_shift_precision():
    f = specialize_torsion_point(theta_fourier(10), Fraction(1, 2), 0)
    assert f.order < 10
    with pytest.raises(ValueError):
        specialize_torsion_point(theta_fourier(10), 1, 0)
    with pytest.raises(ValueError):
        specialize_torsion_point(theta_fourier(10) + phi_ode(2, 10), 0, Fraction(1, 2))
