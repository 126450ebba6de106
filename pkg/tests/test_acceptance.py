"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line that is printed in the terminal summary
(and immediately, when run with ``-s``).
"""

import random
import time
from fractions import Fraction

import pytest

from conftest import ACCEPTANCE
from qkz.dr import InsertionList, Lattice, MukaiVector, dr_rhs_series, extract_gw, kkv, kkv_kernel
from qkz.jacobi import JacobiFourierSeries
from qkz.kz import (
    kz2_residual,
    ladder_step,
    level2_E,
    level2_fl,
    level2_H64,
    obstruction_identity_check,
    preset,
    solve,
)
from qkz.modular import FractionalQSeries, QuasiModularPoly, eisenstein_E, monomials, ramanujan_dtau
from qkz.phi import (
    anomaly_dA_phi,
    anomaly_dA_phi_pair,
    anomaly_dG2_phi_pair,
    derived_ode_anomaly_residual,
    derived_ode_pair_residual,
    inversion_check,
    phi_ode,
    phi_pair_ode,
    phi_pair_polynomial,
    phi_partition,
    phi_polynomial_u,
    phi_residue,
    polynomial_extension_check,
    recursion_check,
)
from qkz.qjacobi import GENERATORS, QJacExpr, build_derivation_table, commutation_relations, derive
from qkz.qjacobi import eval_to_fourier, express_phi, recognize_in_R
from qkz.series.laurent import LaurentPolynomial
from qkz.series.truncated import TruncatedSeries

G2, G4, G6 = QuasiModularPoly.G2(), QuasiModularPoly.G4(), QuasiModularPoly.G6()


def record(n, ok, detail=""):
    ACCEPTANCE[n] = (bool(ok), detail)
    print(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def _sm(m):
    return LaurentPolynomial({m: 1, -m: -1})


def test_criterion_01_three_oracles():
    t = time.perf_counter()
    bad = [m for m in range(1, 9)
           if not (phi_ode(m, 12) == phi_residue(m, 12) == phi_partition(m, 12))]
    dt = time.perf_counter() - t
    record(1, not bad and dt < 60, f"ode = residue = partition for m <= 8 at q^12 in {dt:.1f} s"
           + (f"; mismatch at m = {bad}" if bad else ""))


def test_criterion_02_fixtures():
    issues = []
    for m in range(1, 9):
        if phi_ode(m, 3).coefficient(1) != _sm(1) ** 2 * _sm(m) * (-m * m):
            issues.append(f"phi_{m} q^1")
    for m, n in [(1, 1), (2, 1), (3, 2), (2, -1), (-3, 1), (4, -4)]:
        if phi_pair_ode(m, n, 3).coefficient(1) != _sm(m) * _sm(n) * _sm(1) ** 2 * (-m * n):
            issues.append(f"phi_{m},{n} q^1")
    u = phi_polynomial_u(z_order=7)
    want_u = {1: {(1,): QuasiModularPoly.constant(1)}, 3: {(3,): -G2},
              5: {(5,): G2 ** 2 / 3 - G4 / 72, (3,): G2 ** 2 / 6 - G4 * Fraction(5, 72)}}
    if any(u.coefficient(k) != v for k, v in want_u.items()) or any(u.coefficient(k) for k in (2, 4, 6)):
        issues.append("phi_u Taylor display")
    uv = phi_pair_polynomial(z_order=7)
    side = G2 ** 3 * Fraction(-4, 3) + G2 * G4 * Fraction(2, 3) - G6 * Fraction(7, 720)
    want_uv = {
        4: {(2, 2): G2 ** 2 * 2 - G4 * Fraction(5, 6)},
        6: {(4, 2): side, (2, 4): side,
            (3, 3): G2 ** 3 * Fraction(-2, 3) + G2 * G4 / 6 + G6 * Fraction(7, 720),
            (2, 2): G2 ** 3 * Fraction(-2, 3) + G2 * G4 * Fraction(5, 6) - G6 * Fraction(7, 144)},
    }
    if any(uv.coefficient(k) != v for k, v in want_uv.items()):
        issues.append("phi_uv z^4/z^6 display")
    record(2, not issues, "Fourier q^1 coefficients and Taylor displays match exactly"
           if not issues else "mismatch: " + ", ".join(issues))


def test_criterion_03_inversion():
    t = time.perf_counter()
    a = inversion_check(9, 10, 20)
    b = inversion_check(9, 10, 20, method="lagrange")
    dt = time.perf_counter() - t
    record(3, a and b, f"f(g(y)) = 1/y mod (y^9, q^10, z^20); compose={a}, lagrange={b}, {dt:.1f} s")


def test_criterion_04_anomaly_first_kind():
    ode = [m for m in range(1, 7) if not derived_ode_anomaly_residual(m, 10).is_zero()]
    t = build_derivation_table()
    sym = [m for m in range(1, 6)
           if eval_to_fourier(derive(express_phi(m), "d/dA", t), 10) != anomaly_dA_phi(m, 10)]
    record(4, not ode and not sym, "derived ODE m <= 6 at q^10; d/dA express_phi(m) = closed sum for m <= 5"
           + (f"; ODE fails {ode}, symbolic fails {sym}" if ode or sym else ""))


def test_criterion_05_dG2_closure():
    t = build_derivation_table()
    bad = [m for m in range(1, 6) if not derive(express_phi(m), "d/dG2", t).is_zero()]
    record(5, not bad, "d/dG2 express_phi(m) = 0 for m <= 5" + (f"; fails {bad}" if bad else ""))


def test_criterion_06_recursion():
    bad = [(m, n) for m in range(1, 5) for n in range(1, 5) if not recursion_check(m, n, 10)]
    record(6, not bad, "recursion identity for 1 <= m, n <= 4 at q^10" + (f"; fails {bad}" if bad else ""))


def test_criterion_07_pair_anomalies():
    issues = []
    q = 8
    t = build_derivation_table()
    surplus = []
    for n in range(1, 4):
        target = phi_pair_ode(n, -n, q) - JacobiFourierSeries.constant(n, q)
        rec = recognize_in_R(target, 0, n, details=True)
        surplus.append(rec.surplus)
        if rec.surplus < 5:
            issues.append(f"n={n} surplus {rec.surplus}")
        if eval_to_fourier(derive(rec.expr, "d/dA", t), q) != anomaly_dA_phi_pair(n, -n, q):
            issues.append(f"n={n} d/dA")
        if eval_to_fourier(derive(rec.expr, "d/dG2", t), q) != anomaly_dG2_phi_pair(n, -n, q):
            issues.append(f"n={n} d/dG2")
    hae = [(m, n) for m in range(-4, 5) for n in range(-4, 5)
           if m and n and not derived_ode_pair_residual(m, n, 10).is_zero()]
    if hae:
        issues.append(f"derived ODE fails {hae}")
    record(7, not issues, f"phi_(n,-n) - n in R for n <= 3 (surplus {surplus}); "
           "d/dA, d/dG2 match; derived ODE for |m|,|n| <= 4" + ("; " + ", ".join(issues) if issues else ""))


def test_criterion_08_symmetries():
    issues = []
    q = 10
    for m in range(1, 9):
        if phi_ode(-m, q) != -phi_ode(m, q):
            issues.append(f"phi_-{m}")
    for m in range(-4, 5):
        for n in range(-4, 5):
            f = phi_pair_ode(m, n, 8)
            if f != phi_pair_ode(n, m, 8) or f != phi_pair_ode(-m, -n, 8):
                issues.append(f"phi_{m},{n}")
            if n == 0 and not f.is_zero():
                issues.append(f"phi_{m},0")
    ext = [m for m in range(1, 7) if not polynomial_extension_check(m, q, 10)]
    if ext:
        issues.append(f"extension fails at -m for m in {ext}")
    record(8, not issues, "phi_-m = -phi_m, pair symmetries, phi_(m,0) = 0, index interpolation reaches -m"
           + ("; " + ", ".join(issues) if issues else ""))


def _q(f):
    return FractionalQSeries.from_q(f)


def _criterion_9_parts():
    eta2 = preset("eta2", 24)
    level2 = preset("eta1eta2", 24)
    parts = {}
    parts["H = E4/144 to q^20"] = eta2.H.truncate(20) == _q(eisenstein_E(4, 20) * Fraction(1, 144))
    parts["solvable k <= 30 iff k = 0, 4 mod 6"] = all(
        bool(solve(eta2, k + 1, 20)) == (k % 6 in (0, 4)) for k in range(31))
    parts["level-2 2^6 H display"] = level2.H.truncate(20) * 64 == level2_H64(20)
    parts["level-2 E display (as printed)"] = level2.E.truncate(20) == level2_E(20, sign=+1)
    parts["level-2 E with overall minus"] = level2.E.truncate(20) == level2_E(20, sign=-1)
    parts["obstruction identity"] = (
        [obstruction_identity_check(eta2, l, 15) for l in range(9)] == [l == 4 for l in range(9)]
        and [obstruction_identity_check(level2, l, 15) for l in range(9)] == [l == 2 for l in range(9)])
    f4 = solve(eta2, 5, 24).quotient
    f10 = solve(eta2, 11, 24).quotient
    ok = True
    try:
        down, up = ladder_step(eta2, f10, 10, f4, 4, 12)
        ok &= kz2_residual(eta2, down, 4).truncate(12).is_zero()
        ok &= kz2_residual(eta2, up, 16).truncate(12).is_zero()
        fl = level2_fl(24)
        _, up2 = ladder_step(level2, fl, 2, fl, 2, 12)
        ok &= kz2_residual(level2, up2, 6).truncate(12).is_zero()
    except (ValueError, ArithmeticError):
        ok = False
    parts["ladder outputs satisfy the equation to q^12"] = ok
    return parts


@pytest.fixture(scope="module")
def c9():
    return _criterion_9_parts()


def test_criterion_09_kz(c9):
    failed = [k for k, v in c9.items() if not v]
    detail = "; ".join(f"{k}: {'ok' if v else 'FAILS'}" for k, v in c9.items())
    ACCEPTANCE[9] = (not failed, detail)
    print(f"criterion  9: {'PASS' if not failed else 'FAIL'}  {detail}")
    # everything except the printed sign of the level-2 E must hold
    assert set(failed) <= {"level-2 E display (as printed)"}, detail


@pytest.mark.xfail(strict=True, reason="the level-2 E holds only with an overall minus sign")
def test_criterion_09_level2_E_as_printed(c9):
    assert c9["level-2 E display (as printed)"]


def test_criterion_10_dr_kkv():
    issues = []
    U = Lattice([[0, 1], [1, 0]])
    s = dr_rhs_series(InsertionList([], (1, 0), U), 12, 6)
    k = kkv_kernel(12, 6)
    if s != k or s.z_valuation != -2 or s.coefficient(-2, -1) != 1:
        issues.append("zero-insertion assembly")
    t = time.perf_counter()
    table = kkv(5, 20)
    dt = time.perf_counter() - t
    if dt >= 120 or len(table) != 6 or any(len(row) != 10 for row in table.values()):
        issues.append(f"KKV table ({dt:.1f} s)")
    rng = random.Random(2024)
    trials = 0
    for _ in range(40):
        n = rng.randrange(1, 5)
        entries = []
        for _ in range(n):
            deg = rng.randrange(3)
            if deg == 0:
                g = MukaiVector(rng.randrange(1, 3), (0, 0), 0, U)
            elif deg == 1:
                g = MukaiVector(0, (rng.choice([1, -1, 2]), rng.randrange(-2, 3)), 0, U)
            else:
                g = MukaiVector(0, (0, 0), rng.randrange(1, 3), U)
            entries.append((rng.choice([-2, -1, 1, 2, 3]), g))
        total = sum(a for a, _ in entries)
        entries.append((-total, MukaiVector(1, (0, 0), 0, U)))
        beta = (1, rng.randrange(0, 3))
        ins = InsertionList(entries, beta, U)
        perm = entries[:]
        rng.shuffle(perm)
        base = dr_rhs_series(ins, 8, ins.h + 1)
        if dr_rhs_series(InsertionList(perm, beta, U), 8, ins.h + 1) != base:
            issues.append("permutation invariance")
            break
        sign = (-1) ** (sum(g.degree for _, g in entries) + len(entries))
        a = extract_gw(base, ins.h, len(entries))
        b = extract_gw(dr_rhs_series(ins.negated(), 8, ins.h + 1), ins.h, len(entries))
        if b != {g: v * sign for g, v in a.items()}:
            issues.append("sign law")
            break
        trials += 1
    record(10, not issues, f"(Theta^2 Delta)^-1 = z^-2 q^-1 + ...; KKV h <= 5 to z^20 in {dt:.2f} s; "
           f"permutation and sign law on {trials} random profiles" + ("; " + ", ".join(issues) if issues else ""))


def test_criterion_11_property_suite():
    rng = random.Random(11)
    n_inst = 50
    issues = []

    def rat():
        return Fraction(rng.randrange(-30, 31), rng.randrange(1, 9))

    def series(order=8):
        return TruncatedSeries([rat() for _ in range(order)], 0, order)

    for _ in range(n_inst):
        a, b, c = series(), series(), series()
        if not ((a * b) * c == a * (b * c) and a * (b + c) == a * b + a * c and a * b == b * a):
            issues.append("ring axioms")
            break
        if (a * b).euler_derive() != a.euler_derive() * b + a * b.euler_derive():
            issues.append("Leibniz")
            break
        u = TruncatedSeries([rat() or 1] + a.coeffs[1:], 0, 8) if a.coeffs else series()
        if u.coefficient(0) and u.invert().invert() != u:
            issues.append("inverse round trip")
            break
    for _ in range(n_inst):
        w = rng.randrange(0, 17, 2)
        basis = monomials(w)
        f = QuasiModularPoly({e: rat() for e in basis})
        if ramanujan_dtau(f).d_dG2() - ramanujan_dtau(f.d_dG2()) != f * (-2 * w):
            issues.append("sl2 relation")
            break
        from qkz.modular import recognize_quasimodular

        if recognize_quasimodular(f.evaluate(len(basis) + 8), w) != f:
            issues.append("recognition round trip")
            break
    table = build_derivation_table()
    for _ in range(n_inst):
        terms = {tuple(rng.randrange(3) for _ in GENERATORS): rat() for _ in range(rng.randrange(1, 5))}
        if not all(commutation_relations(QJacExpr(terms), table).values()):
            issues.append("commutation relations")
            break
    record(11, not issues, f"series, modular and ring properties on {n_inst} random instances each"
           + ("; fails " + ", ".join(issues) if issues else ""))
