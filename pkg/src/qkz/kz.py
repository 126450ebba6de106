"""Kaneko-Zagier type equations D_tau^2 g_m = m^2 H g_m built from a weight -1 seed g."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from qkz.jacobi import JacobiFourierSeries
from qkz.modular import (
    FractionalQSeries,
    QuasiModularPoly,
    eisenstein_E,
    eta,
    recognize_quasimodular,
)
from qkz.series.dense import DenseSeries
from qkz.series.linalg import InconsistentSystem, UnderdeterminedSystem
from qkz.series.truncated import TruncatedSeries
from qkz.theta import theta_fourier


@dataclass(frozen=True)
class KZSystem:
    g: object  # FractionalQSeries or JacobiFourierSeries
    E: object
    H: object
    alpha: Fraction
    level: int | None = None
    name: str = "custom"

    @property
    def is_jacobi(self):
        return isinstance(self.g, JacobiFourierSeries)


@dataclass(frozen=True)
class KZSolution:
    m: int
    series: object
    quotient: object = None  # f_k = g_m / g^m
    modular_form: QuasiModularPoly | None = None

    @property
    def k(self):
        return self.m - 1


@dataclass(frozen=True)
class Obstructed:
    m: int
    kappa: Fraction
    residual: Fraction | None
    reason: str = "resonance"

    def __bool__(self):
        return False


def _alpha(g):
    if isinstance(g, JacobiFourierSeries):
        return Fraction(g.valuation)
    return g.valuation


def make_kz(g, level: int | None = None, name: str = "custom") -> KZSystem:
    """E = D_tau g / g and H = D_tau^2 g / g."""
    if isinstance(g, FractionalQSeries):
        lead = g.body.coeffs[0] if g.body.coeffs else 0
        if lead != 1:
            raise ValueError("seed must have unit leading coefficient")
    inv = g.invert()
    dg = g.dtau()
    return KZSystem(g, dg * inv, dg.dtau() * inv, _alpha(g), level, name)


def preset(name: str, q_order: int = 24) -> KZSystem:
    """'theta' (g = Theta), 'eta2' (g = eta^-2), 'eta1eta2' (g = 1/(eta(tau) eta(2 tau)))."""
    if name == "theta":
        return make_kz(theta_fourier(q_order), None, name)
    if name == "eta2":
        return make_kz(eta(q_order).invert() ** 2, 1, name)
    if name == "eta1eta2":
        e = eta(q_order)
        return make_kz((e * e.rescale_q(2)).truncate(q_order).invert(), 2, name)
    raise KeyError(f"unknown preset {name!r}")


PRESETS = ("theta", "eta2", "eta1eta2")


# -- solving -------------------------------------------------------------------------

def _solve_fractional(sys, m, q_order):
    g = sys.g
    c = g.c
    H = sys.H
    if H.order < q_order:
        raise ValueError(f"H known only to q^{H.order}")
    n = c * q_order
    h = [H.coefficient(Fraction(i, c)) for i in range(n)]
    base = m * g.body.valuation  # t-exponent of the leading term
    ma = Fraction(base, c)
    coeffs = [Fraction(1)]
    m2 = m * m
    for i in range(1, n):
        kappa = Fraction(i, c)
        rhs = m2 * sum(h[j] * coeffs[i - j] for j in range(1, i + 1) if h[j])
        left = kappa * (kappa + 2 * ma)
        if left == 0:
            if rhs:
                return Obstructed(m, kappa, rhs)
            coeffs.append(Fraction(0))
            continue
        coeffs.append(rhs / left)
    return FractionalQSeries(TruncatedSeries(coeffs, base, base + n, "t"), c)


def _solve_jacobi(sys, m, q_order):
    # alpha = 0: n^2 c_n = m^2 sum_{k>=1} H_k c_{n-k}, c_0 = 1
    H = sys.H
    if H.pole:
        raise ValueError("H must be pole-free")
    rows = [H.body.slice_at(0, k) for k in range(q_order)]
    c = [DenseSeries.constant(1, (None,))]
    for n in range(1, q_order):
        acc = DenseSeries.zero((None,))
        for k in range(1, n + 1):
            if not rows[k].is_zero():
                acc = acc + rows[k] * c[n - k]
        c.append(acc.scalar_mul(Fraction(m * m, n * n)))
    terms = {}
    for n, row in enumerate(c):
        for (j,), v in row.to_dict().items():
            terms[(n, j)] = v
    return JacobiFourierSeries(DenseSeries.from_dict(terms, (q_order, None)))


def solve(sys: KZSystem, m: int, q_order: int = 20, check_modular: bool = True):
    """Solve D_tau^2 g_m = m^2 H g_m with leading coefficient 1.

    Returns an Obstructed value when the resonance at kappa* = -2 m alpha has a
    nonzero right side. For a level-1 seed with ``check_modular`` set, the
    quotient f_k = g_m / g^m must also be recognized in Mod_k; otherwise the
    result is Obstructed with reason "not modular".
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if sys.is_jacobi:
        return KZSolution(m, _solve_jacobi(sys, m, q_order))
    gm = _solve_fractional(sys, m, q_order)
    if isinstance(gm, Obstructed):
        return gm
    f = (gm * sys.g.invert() ** m).truncate(q_order)
    form = None
    if check_modular and sys.level == 1:
        kstar = -2 * m * sys.alpha
        if f.c != 1:
            return Obstructed(m, kstar, None, "not modular")
        try:
            form = recognize_quasimodular(f.to_qseries(), m - 1, quasi=False)
        except (InconsistentSystem, UnderdeterminedSystem):
            return Obstructed(m, kstar, None, "not modular")
    return KZSolution(m, gm, f, form)


def kz_residual(sys: KZSystem, sol: KZSolution):
    """D_tau^2 g_m - m^2 H g_m."""
    gm = sol.series
    return gm.dtau().dtau() - sys.H * gm * (sol.m ** 2)


# -- the modified Serre derivative and brackets --------------------------------------------

def theta_g(sys: KZSystem, f, k):
    """D_tau f + k E f."""
    return f.dtau() + sys.E * f * k


def bracket(f, h, k, l):
    """First Rankin-Cohen bracket of f (weight k) and h (weight l).

    The weight of each factor multiplies the derivative of the other:
    l D_tau(f) h - k f D_tau(h) = l theta_g(f) h - k f theta_g(h).
    """
    return f.dtau() * h * l - f * h.dtau() * k


def kz2_residual(sys: KZSystem, f, w):
    """theta_g^2 f - H w (w + 2) f."""
    return theta_g(sys, theta_g(sys, f, w), w + 2) - sys.H * f * (w * (w + 2))


def _is_zero_to(x, order):
    return x.truncate(order).is_zero()


def ladder_step(sys: KZSystem, f_k, k, f_l, l, check_order: int = 12):
    """([f_k, f_l] g^(2l+4), [f_k g^(2k+2), f_l] g^(-2k-2)) of weights k-l-2 and k+l+2."""
    if not _is_zero_to(bracket(f_l, sys.H, l, 4), check_order):
        raise ValueError("[f_l, H] does not vanish")
    g = sys.g
    down = bracket(f_k, f_l, k, l) * g ** (2 * l + 4)
    lifted = f_k * g ** (2 * k + 2)
    up = bracket(lifted, f_l, -k - 2, l) * g.invert() ** (2 * k + 2)
    for f, w in ((down, k - l - 2), (up, k + l + 2)):
        if not _is_zero_to(kz2_residual(sys, f, w), check_order):
            raise ArithmeticError(f"ladder output of weight {w} fails the equation")
    return down, up


def obstruction_identity_check(sys: KZSystem, l: int, order: int | None = None) -> bool:
    """Compare both sides of the identity forced by theta_g f_l proportional to f_l.

    16(l+2) D^2g/g = 4 D^4g/D^2g + 12 D^2g/g + (l-4)(D^3g/D^2g)^2
                     + 2(3l+4) (D^3g/D^2g)(Dg/g) + 3(3l+4)(Dg/g)^2
    """
    g = sys.g
    d1 = g.dtau()
    d2 = d1.dtau()
    d3 = d2.dtau()
    d4 = d3.dtau()
    ginv = g.invert()
    d2inv = d2.invert()
    e1 = d1 * ginv
    e2 = d2 * ginv
    r3 = d3 * d2inv
    r4 = d4 * d2inv
    lhs = e2 * (16 * (l + 2))
    rhs = r4 * 4 + e2 * 12 + r3 * r3 * (l - 4) + r3 * e1 * (2 * (3 * l + 4)) + e1 * e1 * (3 * (3 * l + 4))
    diff = lhs - rhs
    if order is not None:
        diff = diff.truncate(order)
    return diff.is_zero()


# -- reference forms for the presets ---------------------------------------------------

def level2_E(q_order: int, sign: int = -1) -> FractionalQSeries:
    """sign * (E2(tau) + 2 E2(2 tau)) / 24."""
    e2 = eisenstein_E(2, q_order)
    return FractionalQSeries((e2 + e2.rescale(2).truncate(q_order) * 2) * Fraction(sign, 24), 1)


def level2_H64(q_order: int) -> FractionalQSeries:
    """(E4(tau) + 4 E4(2 tau)) / 5, the displayed value of 2^6 H."""
    e4 = eisenstein_E(4, q_order)
    return FractionalQSeries((e4 + e4.rescale(2).truncate(q_order) * 4) * Fraction(1, 5), 1)


def level2_fl(q_order: int) -> FractionalQSeries:
    """2 E2(2 tau) - E2(tau)."""
    e2 = eisenstein_E(2, q_order)
    return FractionalQSeries(e2.rescale(2).truncate(q_order) * 2 - e2, 1)


# -- torsion points ----------------------------------------------------------------------

def specialize_torsion_point(phi: JacobiFourierSeries, a, b, return_phase: bool = False):
    """Substitute z/(2 pi i) = a tau + b, i.e. s^j -> e^(pi i b j) q^(a j / 2).

    For b = 1/2 the phase is i^j. All s-exponents must share one parity j0;
    the common factor i^j0 is removed and the remaining real series is
    returned (with ``return_phase`` the exponent j0 mod 4 is returned too).
    s-supports are assumed to widen by at most s^(+-2) per power of q, which
    bounds the precision of the output for |a| < 1.
    """
    a, b = Fraction(a), Fraction(b)
    if b not in (0, Fraction(1, 2)):
        raise ValueError("only b in {0, 1/2} is supported")
    if abs(a) >= 1:
        raise ValueError("need |a| < 1")
    if phi.pole:
        raise ValueError("series has a pole at the lattice points")
    N = phi.q_order
    d = phi.body.to_dict()
    parities = {j % 2 for (_, j) in d}
    if b and len(parities) > 1:
        raise ValueError("mixed s-parity: no real normalization under s -> i")
    j0 = parities.pop() if parities else 0
    envelope = 0
    for (n, j) in d:
        envelope = max(envelope, abs(j) - 2 * n)
    # rows n >= N contribute at exponents >= n - |a| (envelope + 2n) / 2
    order = N - abs(a) * (envelope + 2 * N) / 2
    den = 2 * a.denominator
    terms = {}
    for (n, j), v in d.items():
        e = n + a * j / 2
        if e >= order:
            continue
        if b:
            # i^j = i^j0 * (-1)^((j - j0)/2)
            v = v * (-1) ** (((j - j0) // 2) % 2)
        key = int(e * den)
        terms[key] = terms.get(key, 0) + v
    body = TruncatedSeries.from_dict(terms, int(order * den) if (order * den).denominator == 1 else int(order * den) + 1, "t")
    out = FractionalQSeries(body, den)
    phase = j0 % 4 if b else 0
    return (phase, out) if return_phase else out
