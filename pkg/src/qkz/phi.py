"""The solution families phi_m and phi_{m,n}.

phi_m solves D_tau^2 phi = m^2 F phi with constant term s^m - s^-m;
phi_{m,n} solves D_tau phi_{m,n} = mn phi_m phi_n F + D_tau phi_m D_tau phi_n
with vanishing constant term.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import factorial

from qkz.jacobi import JacobiFourierSeries, ZTaylorSeries, fourier_to_taylor
from qkz.modular import QuasiModularPoly, recognize_quasimodular, monomials, RECOGNITION_MARGIN
from qkz.series.dense import DenseSeries
from qkz.series.ring import is_zero
from qkz.series.truncated import TruncatedSeries, compose, lagrange_invert
from qkz.theta import F_series, theta_fourier, theta_ratio_residue, theta_taylor, x_over_theta


def signed_splits(total: int):
    """Pairs (i, j) with i + j = total, both positive if total > 0, both negative if total < 0."""
    if total > 0:
        return [(i, total - i) for i in range(1, total)]
    if total < 0:
        return [(i, total - i) for i in range(-1, total, -1)]
    return []


def _meta(series, weight, index):
    return series.with_meta(weight, index)


def _row_series(terms: dict, q_order: int) -> JacobiFourierSeries:
    return JacobiFourierSeries(DenseSeries.from_dict(terms, (q_order, None)))


# -- phi_m -------------------------------------------------------------------

@lru_cache(maxsize=256)
def phi_ode(m: int, q_order: int) -> JacobiFourierSeries:
    """phi_m from n^2 c_n = m^2 sum_{k=1}^{n} F_k c_{n-k}, c_0 = s^m - s^-m."""
    if q_order < 1:
        raise ValueError("q_order must be >= 1")
    if m < 0:
        return -phi_ode(-m, q_order)
    if m == 0:
        return JacobiFourierSeries.zero(q_order).with_meta(-1, 0)
    F = F_series(q_order)
    f_rows = [F.body.slice_at(0, k) for k in range(q_order)]
    c = [DenseSeries.from_dict({(m,): 1, (-m,): -1}, (None,))]
    m2 = m * m
    for n in range(1, q_order):
        acc = DenseSeries.zero((None,))
        for k in range(1, n + 1):
            if not f_rows[k].is_zero():
                acc = acc + f_rows[k] * c[n - k]
        c.append(acc.scalar_mul(Fraction(m2, n * n)))
    terms = {}
    for n, row in enumerate(c):
        for (j,), v in row.to_dict().items():
            terms[(n, j)] = v
    return _meta(_row_series(terms, q_order), -1, Fraction(m, 2))


def phi(m: int, q_order: int) -> JacobiFourierSeries:
    """phi_m (alias of the ODE solution)."""
    return phi_ode(m, q_order)


def phi_residue(m: int, q_order: int) -> JacobiFourierSeries:
    """Res_{x=0} (Theta(x+z)/Theta(x))^m."""
    if m < 1:
        raise ValueError("phi_residue needs m >= 1")
    return _meta(theta_ratio_residue(m, q_order), -1, Fraction(m, 2))


def _partitions(n, max_part=None):
    if max_part is None:
        max_part = n
    if n == 0:
        yield ()
        return
    for k in range(min(n, max_part), 0, -1):
        for rest in _partitions(n - k, k):
            yield (k,) + rest


def automorphism_factor(parts) -> int:
    """z(a) = prod_i i^{a_i} a_i! over signed parts i with multiplicity a_i."""
    mult = {}
    for p in parts:
        mult[p] = mult.get(p, 0) + 1
    out = 1
    for i, a in mult.items():
        out *= i ** a * factorial(a)
    return out


def phi_partition(m: int, q_order: int) -> JacobiFourierSeries:
    """phi_m = (s^m - s^-m) sum_{|a|=0} prod (1 - p^{a_i})/(1 - q^{a_i}) m^{l(a)} / z(a).

    A generalized partition splits into positive parts lambda and negative
    parts -mu with |lambda| = |mu| = T; the q-valuation of a term is T, so
    only T < q_order contributes.
    """
    if m < 1:
        raise ValueError("phi_partition needs m >= 1")
    N = q_order
    geo = {}

    def inv_one_minus_qk(k):
        if k not in geo:
            geo[k] = {(n, 0): 1 for n in range(0, N, k)}
        return geo[k]

    pos_factor = {}
    neg_factor = {}
    for k in range(1, N):
        g = _row_series(inv_one_minus_qk(k), N)
        pos_factor[k] = g * _row_series({(0, 0): 1, (0, 2 * k): -1}, N)
        # 1/(1 - q^-k) = -q^k/(1 - q^k)
        neg_factor[k] = g * _row_series({(k, 0): -1, (k, -2 * k): 1}, N)

    total = JacobiFourierSeries.constant(1, N)
    for T in range(1, N):
        pos_sum = JacobiFourierSeries.zero(N)
        neg_sum = JacobiFourierSeries.zero(N)
        for lam in _partitions(T):
            term = JacobiFourierSeries.constant(Fraction(m ** len(lam), automorphism_factor(lam)), N)
            for k in lam:
                term = term * pos_factor[k]
            pos_sum = pos_sum + term
            neg = tuple(-k for k in lam)
            nterm = JacobiFourierSeries.constant(Fraction(m ** len(lam), automorphism_factor(neg)), N)
            for k in lam:
                nterm = nterm * neg_factor[k]
            neg_sum = neg_sum + nterm
        total = total + pos_sum * neg_sum
    lead = _row_series({(0, m): 1, (0, -m): -1}, N)
    return _meta(lead * total, -1, Fraction(m, 2))


# -- phi_{m,n} ---------------------------------------------------------------

def _integrate_q(series: JacobiFourierSeries) -> JacobiFourierSeries:
    """Inverse of D_tau on series with vanishing q^0 row."""
    if not series.is_zero() and series.valuation == 0:
        if not series.body.slice_at(0, 0).is_zero():
            raise ValueError("q^0 term must vanish")
    return series.map_q(lambda n: Fraction(1, n) if n else 0)


def pair_rhs(m: int, n: int, q_order: int) -> JacobiFourierSeries:
    """mn phi_m phi_n F + D_tau phi_m D_tau phi_n."""
    pm, pn = phi_ode(m, q_order), phi_ode(n, q_order)
    F = F_series(q_order)
    return pm * pn * F * (m * n) + pm.dtau() * pn.dtau()


@lru_cache(maxsize=512)
def phi_pair_ode(m: int, n: int, q_order: int) -> JacobiFourierSeries:
    """phi_{m,n}: c_N = [mn phi_m phi_n F + D_tau phi_m D_tau phi_n]_N / N, c_0 = 0."""
    if m == 0 or n == 0:
        return JacobiFourierSeries.zero(q_order).with_meta(0, Fraction(abs(m) + abs(n), 2))
    if (m, n) != _canonical_pair(m, n):
        return phi_pair_ode(*_canonical_pair(m, n), q_order)
    out = _integrate_q(pair_rhs(m, n, q_order))
    return _meta(out, 0, Fraction(abs(m) + abs(n), 2))


def _canonical_pair(m, n):
    """Representative under (m,n) ~ (n,m) ~ (-m,-n)."""
    cands = [(m, n), (n, m), (-m, -n), (-n, -m)]
    return max(cands)


def phi_pair_closed(m: int, n: int, q_order: int) -> JacobiFourierSeries:
    """(m/(m+n)) phi_m D_tau phi_n + (n/(m+n)) D_tau phi_m phi_n for m != -n."""
    if m + n == 0:
        raise ValueError("closed form needs m + n != 0")
    pm, pn = phi_ode(m, q_order), phi_ode(n, q_order)
    out = pm * pn.dtau() * Fraction(m, m + n) + pm.dtau() * pn * Fraction(n, m + n)
    return _meta(out, 0, Fraction(abs(m) + abs(n), 2))


# -- anomaly operators ---------------------------------------------------------

def anomaly_dA_phi(m: int, q_order: int) -> JacobiFourierSeries:
    """d/dA phi_m = (1/2) sum_{i+j=m} m^2/(ij) phi_i phi_j for m >= 1; odd in m."""
    if m < 0:
        return -anomaly_dA_phi(-m, q_order)
    out = JacobiFourierSeries.zero(q_order)
    for i, j in signed_splits(m):
        out = out + phi_ode(i, q_order) * phi_ode(j, q_order) * Fraction(m * m, 2 * i * j)
    return _meta(out, -2, Fraction(m, 2))


def anomaly_polynomial_phi(m: int, q_order: int, z_order: int) -> ZTaylorSeries:
    """phi^A_m = d/dA phi_m - m z phi_m [m < 0], the polynomial-in-m extension (Taylor)."""
    base = fourier_to_taylor(anomaly_dA_phi(abs(m), q_order), z_order)
    if m >= 0:
        return base
    # phi^A_{m} = -d/dA phi_{|m|} - m z phi_m  for m < 0
    zphi = fourier_to_taylor(phi_ode(m, q_order), z_order).times_z()
    return (-base) - zphi.truncate(z_order=z_order) * m


def anomaly_dA_phi_pair(m: int, n: int, q_order: int) -> JacobiFourierSeries:
    """d/dA phi_{m,n} with the signed summation convention."""
    out = JacobiFourierSeries.zero(q_order)
    if m + n != 0:
        out = out + phi_ode(m + n, q_order) * Fraction(m * n, m + n)
    for i, j in signed_splits(m):
        out = out + phi_pair_ode(i, n, q_order) * phi_ode(j, q_order) * Fraction(abs(m), j)
    for i, j in signed_splits(n):
        out = out + phi_pair_ode(m, i, q_order) * phi_ode(j, q_order) * Fraction(abs(n), j)
    return _meta(out, -1, Fraction(abs(m) + abs(n), 2))


def anomaly_dG2_phi_pair(m: int, n: int, q_order: int) -> JacobiFourierSeries:
    """d/dG2 phi_{m,n} = 2 phi_m phi_n."""
    return _meta(phi_ode(m, q_order) * phi_ode(n, q_order) * 2, -2, Fraction(abs(m) + abs(n), 2))


@lru_cache(maxsize=32)
def dA_of_F(q_order: int) -> JacobiFourierSeries:
    """d/dA F = 2 D_z D_tau Theta / Theta."""
    th = theta_fourier(q_order)
    return th.dtau().dz() * th.invert() * 2


def derived_ode_anomaly_residual(m: int, q_order: int) -> JacobiFourierSeries:
    """D_tau^2 psi + 2 D_z D_tau phi - m^2 F psi - m^2 (dF/dA) phi, psi = d/dA phi_m."""
    psi = anomaly_dA_phi(m, q_order)
    ph = phi_ode(m, q_order)
    F = F_series(q_order)
    lhs = psi.dtau().dtau() + ph.dtau().dz() * 2
    rhs = F * psi * (m * m) + dA_of_F(q_order) * ph * (m * m)
    return lhs - rhs


def derived_ode_pair_residual(m: int, n: int, q_order: int) -> JacobiFourierSeries:
    """D_z phi_{m,n} + D_tau psi_{m,n} - d/dA(mn phi_m phi_n F + D_tau phi_m D_tau phi_n)."""
    psi = anomaly_dA_phi_pair(m, n, q_order)
    pmn = phi_pair_ode(m, n, q_order)
    pm, pn = phi_ode(m, q_order), phi_ode(n, q_order)
    am, an = anomaly_dA_phi(m, q_order), anomaly_dA_phi(n, q_order)
    F = F_series(q_order)
    dF = dA_of_F(q_order)
    d_rhs = (am * pn * F + pm * an * F + pm * pn * dF) * (m * n) \
        + (pm.dz() + am.dtau()) * pn.dtau() + pm.dtau() * (pn.dz() + an.dtau())
    return pmn.dz() + psi.dtau() - d_rhs


# -- identities ----------------------------------------------------------------

def recursion_rhs(m: int, n: int, q_order: int) -> JacobiFourierSeries:
    pm, pn = phi_ode(m, q_order), phi_ode(n, q_order)
    out = pm.dz() * pn * Fraction(1, m) + pm * pn.dz() * Fraction(1, n)
    for i, j in signed_splits(m):
        out = out + phi_pair_ode(i, n, q_order) * phi_ode(j, q_order) * Fraction(1, i)
    for i, j in signed_splits(n):
        out = out + phi_pair_ode(i, m, q_order) * phi_ode(j, q_order) * Fraction(1, i)
    return out


def recursion_check(m: int, n: int, q_order: int) -> bool:
    """phi_{m+n} = (1/m) D_z phi_m phi_n + (1/n) phi_m D_z phi_n + two phi_{i,*} phi_j sums."""
    if m < 1 or n < 1:
        raise ValueError("recursion needs m, n >= 1")
    return recursion_rhs(m, n, q_order) == phi_ode(m + n, q_order)


def generating_series_g(y_order: int, q_order: int, z_order: int) -> TruncatedSeries:
    """g(y) = sum_{m>=1} phi_m y^m / m with Taylor-representation coefficients."""
    coeffs = [ZTaylorSeries.constant(0, z_order, q_order)]
    for m in range(1, y_order):
        coeffs.append(fourier_to_taylor(phi_ode(m, q_order), z_order) * Fraction(1, m))
    return TruncatedSeries(coeffs, 0, y_order, "y")


def theta_ratio_x_taylor(x_order: int, q_order: int, z_order: int) -> TruncatedSeries:
    """f(x) = Theta(x+z)/Theta(x) as an x-series (valuation -1) of Taylor series."""
    th = theta_taylor(z_order, q_order)
    unit = x_over_theta(x_order, q_order)
    derivs = [th]
    for _ in range(1, x_order):
        derivs.append(derivs[-1].dz())
    coeffs = []
    for nexp in range(x_order):
        acc = None
        for k in range(nexp + 1):
            c = unit.coefficient(nexp - k)
            if is_zero(c):
                continue
            if not isinstance(c, TruncatedSeries):
                c = TruncatedSeries([c], 0, q_order)
            term = derivs[k] * ZTaylorSeries.from_qseries(c, z_order) * Fraction(1, factorial(k))
            acc = term if acc is None else acc + term
        coeffs.append(acc if acc is not None else ZTaylorSeries.constant(0, z_order, q_order))
    return TruncatedSeries(coeffs, 0, x_order, "x").shift(-1)


def inversion_check(y_order: int = 9, q_order: int = 10, z_order: int = 20,
                    method: str = "compose") -> bool:
    """f(g(y)) = 1/y modulo y^y_order (compose), or lagrange_invert(1/f) = g."""
    margin = 4
    zin = z_order + margin
    if method == "compose":
        g = generating_series_g(y_order + 2, q_order, zin)
        f = theta_ratio_x_taylor(y_order + 2, q_order, zin)
        fg = compose(f, g)
        if fg.order < y_order:
            raise ValueError("insufficient y precision")
        target = TruncatedSeries([ZTaylorSeries.constant(1, zin, q_order)], -1, fg.order, "y")
        diff = fg - target
        return all(_taylor_zero_below(c, z_order) for c in diff.coeffs[: y_order - diff.valuation])
    if method == "lagrange":
        f = theta_ratio_x_taylor(y_order + 1, q_order, zin)
        inv_f = f.invert()
        b = lagrange_invert(inv_f)
        g = generating_series_g(y_order, q_order, zin)
        b = TruncatedSeries(b.coeffs, b.valuation, b.order, "y")
        diff = b.truncate(y_order) - g
        return all(_taylor_zero_below(c, z_order) for c in diff.coeffs)
    raise ValueError(f"unknown method {method!r}")


def _taylor_zero_below(t, z_order):
    if not isinstance(t, ZTaylorSeries):
        return is_zero(t)
    if t.z_order < z_order:
        raise ValueError(f"z precision {t.z_order} below requested {z_order}")
    return t.truncate(z_order=z_order).is_zero()


def g_ode_check(y_order: int, q_order: int, z_order: int) -> bool:
    """D_tau^2 g = F D_y^2 g."""
    g = generating_series_g(y_order, q_order, z_order)
    Ft = fourier_to_taylor(F_series(q_order), z_order)
    lhs = g.map_coefficients(lambda c: c.dtau().dtau())
    rhs = g.euler_derive().euler_derive().map_coefficients(lambda c: Ft * c)
    return all((a - b).is_zero() for a, b in zip(lhs.coeffs, rhs.coeffs))


# -- polynomial structure in the index ----------------------------------------------

@dataclass
class IndexPolynomialFamily:
    """z^k coefficient -> {exponent tuple in (u[, v]): QuasiModularPoly}."""

    variables: tuple
    coefficients: dict = field(default_factory=dict)

    def coefficient(self, k):
        return self.coefficients.get(k, {})

    def evaluate(self, k, values):
        out = QuasiModularPoly()
        for exps, poly in self.coefficient(k).items():
            w = 1
            for x, e in zip(values, exps):
                w *= Fraction(x) ** e
            out = out + poly * w
        return out

    def min_degree(self, k, var=0):
        exps = [e[var] for e in self.coefficient(k)]
        return min(exps) if exps else None

    def max_total_degree(self, k):
        exps = [sum(e) for e in self.coefficient(k)]
        return max(exps) if exps else None


def _bracket_series(q_order: int, depth: int):
    """B_d(s, q) with phi_u = (s^u - s^-u) sum_d u^{2d} B_d (composition-sum formula)."""
    F = F_series(q_order)
    f_rows = [F.body.slice_at(0, k) for k in range(q_order)]
    # b[d][n]: coefficient of q^n u^{2d}
    b = [[DenseSeries.constant(1, (None,))] + [DenseSeries.zero((None,))] * (q_order - 1)]
    for d in range(1, depth + 1):
        row = [DenseSeries.zero((None,))]
        for n in range(1, q_order):
            acc = DenseSeries.zero((None,))
            for k in range(1, n + 1):
                if not f_rows[k].is_zero() and not b[d - 1][n - k].is_zero():
                    acc = acc + f_rows[k] * b[d - 1][n - k]
            row.append(acc.scalar_mul(Fraction(1, n * n)))
        b.append(row)
    out = []
    for d in range(depth + 1):
        terms = {}
        for n, r in enumerate(b[d]):
            for (j,), v in r.to_dict().items():
                terms[(n, j)] = v
        out.append(_row_series(terms, q_order))
    return out


def _recognition_order(z_order: int) -> int:
    top = max(z_order - 2, 0)
    return max(len(monomials(w)) for w in range(0, top + 1, 2)) + RECOGNITION_MARGIN + 1


def phi_polynomial_u(q_order: int | None = None, z_order: int = 7) -> IndexPolynomialFamily:
    """phi_u in Q[u][[z]] with quasi-modular coefficients (weight k-1 at z^k)."""
    if q_order is None:
        q_order = _recognition_order(z_order)
    depth = (z_order - 1) // 2
    bracket = [fourier_to_taylor(b, z_order) for b in _bracket_series(q_order, depth)]
    # s^u - s^-u = sum_{t odd} 2 (u/2)^t z^t / t!
    family = {}
    for k in range(1, z_order):
        by_power = {}
        for t in range(1, k + 1, 2):
            lead = 2 * Fraction(1, 2) ** t / factorial(t)
            for d in range(depth + 1):
                if k - t < 2 * d:
                    continue
                c = bracket[d].coefficient(k - t) * lead
                e = t + 2 * d
                by_power[e] = by_power[e] + c if e in by_power else c
        polys = {}
        for e, series in by_power.items():
            if series.is_zero():
                continue
            p = recognize_quasimodular(series, k - 1)
            if not p.is_zero():
                polys[(e,)] = p
        if polys:
            family[k] = polys
    return IndexPolynomialFamily(("u",), family)


def phi_pair_polynomial(q_order: int | None = None, z_order: int = 7) -> IndexPolynomialFamily:
    """phi_{u,v} by interpolation over a positive (m, n) grid plus quasi-modular recognition."""
    if q_order is None:
        q_order = _recognition_order(z_order + 2)
    top = z_order - 1
    grid = list(range(1, top + 3))
    samples = {}
    for m, n in product(grid, grid):
        samples[(m, n)] = fourier_to_taylor(phi_pair_ode(m, n, q_order), z_order)
    from qkz.series.linalg import solve_many

    family = {}
    for r in range(1, z_order):
        basis = [(a, b) for a in range(r + 1) for b in range(r + 1 - a)]
        matrix = [[Fraction(m) ** a * Fraction(n) ** b for a, b in basis] for m, n in samples]
        rhs = [[samples[mn].coefficient(r, qn) for qn in range(q_order)] for mn in samples]
        sol = solve_many(matrix, rhs, len(basis))
        polys = {}
        for (a, b), row in zip(basis, sol):
            series = TruncatedSeries(row, 0, q_order)
            if series.is_zero():
                continue
            polys[(a, b)] = recognize_quasimodular(series, r)
        if polys:
            family[r] = polys
    return IndexPolynomialFamily(("u", "v"), family)


def interpolate_in_index(values: dict, at):
    """Lagrange-interpolate {m: rational} and evaluate at ``at``."""
    xs = list(values)
    total = Fraction(0)
    for i, xi in enumerate(xs):
        w = Fraction(values[xi])
        for j, xj in enumerate(xs):
            if i != j:
                w *= Fraction(at - xj, xi - xj)
        total += w
    return total


def polynomial_extension_check(m: int, q_order: int, z_order: int, samples: int | None = None) -> bool:
    """Interpolate the Taylor coefficients of phi_1..phi_K in the index and compare at -m."""
    K = samples if samples is not None else max(z_order + 2, m + 1)
    tay = {j: fourier_to_taylor(phi_ode(j, q_order), z_order) for j in range(1, K + 1)}
    target = fourier_to_taylor(phi_ode(-m, q_order), z_order)
    for k in range(z_order):
        for n in range(q_order):
            vals = {j: tay[j].coefficient(k, n) for j in tay}
            if interpolate_in_index(vals, -m) != target.coefficient(k, n):
                return False
    return True
