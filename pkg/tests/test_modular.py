from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qkz.modular import (
    FractionalQSeries,
    QuasiModularPoly,
    bernoulli,
    delta,
    eisenstein,
    eisenstein_E,
    eta,
    euler_product,
    express_G_high,
    monomials,
    ramanujan_dtau,
    ramanujan_images,
    recognize_quasimodular,
    serre_derivative,
    sigma,
)
from qkz.series.linalg import InconsistentSystem
from qkz.series.truncated import TruncatedSeries
from strategies import rationals

ORDER = 20


@st.composite
def qm_poly(draw, max_weight=16, quasi=True):
    w = draw(st.sampled_from(range(0, max_weight + 1, 2)))
    basis = monomials(w, quasi)
    coeffs = draw(st.lists(rationals, min_size=len(basis), max_size=len(basis)))
    return w, QuasiModularPoly(dict(zip(basis, coeffs)))


def _sigma_oracle(k, n):
    return sum(d ** k for d in range(1, n + 1) if n % d == 0)


def test_bernoulli_values():
    assert [bernoulli(n) for n in (0, 1, 2, 4, 6, 12)] == [1, Fraction(-1, 2), Fraction(1, 6), Fraction(-1, 30),
                                                          Fraction(1, 42), Fraction(-691, 2730)]


def test_sigma_against_oracle():
    assert all(sigma(k, n) == _sigma_oracle(k, n) for k in range(6) for n in range(1, 40))


def test_eisenstein_expansions():
    g2 = eisenstein(2, 5)
    assert g2.to_dict() == {0: Fraction(-1, 24), 1: 1, 2: 3, 3: 4, 4: 7}
    # G_k = -B_k/(2k) + sum sigma_{k-1}(n) q^n gives +1/240
    assert eisenstein(4, 2).coefficient(0) == Fraction(1, 240)
    e2 = eisenstein_E(2, ORDER)
    assert all(e2.coefficient(n) == -24 * _sigma_oracle(1, n) for n in range(1, ORDER))
    with pytest.raises(ValueError):
        eisenstein(3, 5)
    with pytest.raises(ValueError):
        eisenstein(0, 5)


def test_delta_and_eta():
    d = delta(ORDER)
    prod = TruncatedSeries([1], 0, ORDER)
    for n in range(1, ORDER):
        prod = prod * TruncatedSeries([1] + [0] * (n - 1) + [-1], 0, ORDER)
    assert d == (prod ** 24).shift(1).truncate(ORDER)
    assert [d.coefficient(n) for n in range(1, 4)] == [1, -24, 252]
    e = eta(ORDER)
    assert e.c == 24 and e.valuation == Fraction(1, 24)
    assert (e ** 24).to_qseries().truncate(ORDER) == d
    assert euler_product(ORDER) == prod
    assert eta(ORDER).rescale_q(2).valuation == Fraction(1, 12)


def test_fractional_series_dtau():
    e = eta(12)
    # D_tau log eta = E2 / 24
    ratio = e.dtau() * e.invert()
    assert ratio == FractionalQSeries.from_q(eisenstein_E(2, 11) * Fraction(1, 24))


def test_ramanujan_images_match_q_expansion():
    for k, img in zip((2, 4, 6), ramanujan_images()):
        assert img.weight == k + 2
        assert img.evaluate(ORDER) == eisenstein(k, ORDER).euler_derive()


@given(qm_poly())
def test_dtau_commutes_with_evaluation(wf):
    w, f = wf
    d = ramanujan_dtau(f)
    assert d.is_zero() or d.weight == w + 2
    assert d.evaluate(ORDER) == f.evaluate(ORDER).euler_derive()


@given(qm_poly(8), qm_poly(8))
def test_dtau_leibniz(a, b):
    f, g = a[1], b[1]
    assert ramanujan_dtau(f * g) == ramanujan_dtau(f) * g + f * ramanujan_dtau(g)


@given(qm_poly())
def test_sl2_relation(wf):
    w, f = wf
    lhs = ramanujan_dtau(f).d_dG2() - ramanujan_dtau(f.d_dG2())
    assert lhs == f * (-2 * w)


@given(qm_poly())
def test_recognition_round_trip(wf):
    w, f = wf
    n = len(monomials(w)) + 8
    assert recognize_quasimodular(f.evaluate(n), w) == f


@given(qm_poly(quasi=False))
def test_recognition_round_trip_modular(wf):
    w, f = wf
    n = len(monomials(w, False)) + 8
    assert recognize_quasimodular(f.evaluate(n), w, quasi=False) == f


def test_recognition_examples():
    assert recognize_quasimodular(eisenstein(2, 10), 2) == QuasiModularPoly.G2()
    e2 = eisenstein_E(2, 12)
    p = recognize_quasimodular(e2 * e2 * Fraction(1, 576), 4)
    assert p == QuasiModularPoly({(2, 0, 0): 1})
    with pytest.raises(InconsistentSystem):
        recognize_quasimodular(delta(20), 11)
    with pytest.raises(InconsistentSystem):
        recognize_quasimodular(delta(20), 10)
    with pytest.raises(ValueError):
        recognize_quasimodular(eisenstein(2, 3), 2)


def test_express_G_high():
    g8 = express_G_high(8)
    assert set(g8.terms) == {(0, 2, 0)}
    g10 = express_G_high(10)
    assert set(g10.terms) == {(0, 1, 1)}
    for k in (8, 10, 12, 14, 16):
        assert express_G_high(k).evaluate(ORDER) == eisenstein(k, ORDER)


def test_serre_derivative():
    e4, e6 = eisenstein_E(4, ORDER), eisenstein_E(6, ORDER)
    assert serre_derivative(e4, 4) == e6 * Fraction(-1, 3)
    assert serre_derivative(TruncatedSeries([1], 0, ORDER), 0).is_zero()
    assert serre_derivative(delta(ORDER), 12).is_zero()
