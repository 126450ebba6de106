"""Eisenstein series, eta and Delta, and the ring Q[G2, G4, G6].

Quasi-modular recognition is an exact linear solve on q-coefficients with a
fixed number of surplus equations.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb, gcd

from qkz.series.linalg import InconsistentSystem, solve_linear
from qkz.series.truncated import TruncatedSeries

RECOGNITION_MARGIN = 5


# -- numbers -------------------------------------------------------------

@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    """Bernoulli number B_n with B_1 = -1/2."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return Fraction(1)
    if n > 1 and n % 2:
        return Fraction(0)
    # sum_{k=0}^{n} C(n+1, k) B_k = 0
    total = sum(comb(n + 1, k) * bernoulli(k) for k in range(n))
    return -total / (n + 1)


def sigma(k: int, n: int) -> int:
    return sum(d ** k for d in range(1, n + 1) if n % d == 0)


@lru_cache(maxsize=None)
def _sigma_table(k: int, order: int):
    out = [0] * order
    for d in range(1, order):
        p = d ** k
        for n in range(d, order, d):
            out[n] += p
    return tuple(out)


# -- Eisenstein series ---------------------------------------------------

def _check_weight(k):
    if k < 2 or k % 2:
        raise ValueError(f"Eisenstein weight must be even and >= 2, got {k}")


@lru_cache(maxsize=256)
def eisenstein(k: int, order: int) -> TruncatedSeries:
    """G_k = -B_k/(2k) + sum_{n>=1} sigma_{k-1}(n) q^n, modulo q^order."""
    _check_weight(k)
    sig = _sigma_table(k - 1, order)
    coeffs = [-bernoulli(k) / (2 * k)] + [Fraction(c) for c in sig[1:]]
    return TruncatedSeries(coeffs, 0, order, "q")


def eisenstein_E(k: int, order: int) -> TruncatedSeries:
    """E_k = 1 - (2k/B_k) sum sigma_{k-1}(n) q^n."""
    _check_weight(k)
    return eisenstein(k, order) * (-2 * k / bernoulli(k))


# -- fractional q-series -------------------------------------------------

class FractionalQSeries:
    """A series in q^(1/c): ``body`` is a TruncatedSeries in t with t^c = q."""

    __slots__ = ("c", "body")

    def __init__(self, body: TruncatedSeries, c: int = 1):
        if c < 1:
            raise ValueError("denominator must be positive")
        body = TruncatedSeries(body.coeffs, body.valuation, body.order, "t")
        # reduce the denominator when only multiples of d occur
        g = c
        for i, x in enumerate(body.coeffs):
            if x:
                g = gcd(g, body.valuation + i)
                if g == 1:
                    break
        if g > 1 and body.coeffs:
            exps = body.to_dict()
            body = TruncatedSeries.from_dict({e // g: v for e, v in exps.items()},
                                             -(-body.order // g), "t")
            c //= g
        self.c = c
        self.body = body

    @classmethod
    def from_q(cls, f: TruncatedSeries):
        return cls(f, 1)

    @property
    def valuation(self) -> Fraction:
        return Fraction(self.body.valuation, self.c)

    @property
    def order(self) -> Fraction:
        return Fraction(self.body.order, self.c)

    def coefficient(self, exponent) -> Fraction:
        e = Fraction(exponent) * self.c
        if e.denominator != 1:
            if e >= self.body.order:
                raise ValueError(f"coefficient of q^{exponent} unknown")
            return Fraction(0)
        return self.body.coefficient(int(e))

    def to_dict(self):
        return {Fraction(e, self.c): v for e, v in self.body.to_dict().items()}

    def is_zero(self):
        return self.body.is_zero()

    def _lift(self, c):
        if c == self.c:
            return self.body
        return self.body.rescale(c // self.c)

    def _common(self, other):
        if not isinstance(other, FractionalQSeries):
            if isinstance(other, TruncatedSeries):
                other = FractionalQSeries(other, 1)
            else:
                return self.body, TruncatedSeries([other], 0, max(self.body.order, 1), "t"), self.c
        c = self.c * other.c // gcd(self.c, other.c)
        return self._lift(c), other._lift(c), c

    def __add__(self, other):
        a, b, c = self._common(other)
        return FractionalQSeries(a + b, c)

    __radd__ = __add__

    def __neg__(self):
        return FractionalQSeries(-self.body, self.c)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return FractionalQSeries(self.body * other, self.c)
        a, b, c = self._common(other)
        return FractionalQSeries(a * b, c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return FractionalQSeries(self.body / other, self.c)
        if isinstance(other, TruncatedSeries):
            other = FractionalQSeries(other, 1)
        return self * other.invert()

    def invert(self):
        return FractionalQSeries(self.body.invert(), self.c)

    def __pow__(self, n):
        return FractionalQSeries(self.body ** n, self.c)

    def dtau(self):
        """D_tau = q d/dq: the t^j coefficient is multiplied by j/c."""
        c = self.c
        return FractionalQSeries(self.body.euler_derive(lambda j: Fraction(j, c)), c)

    def rescale_q(self, m: int):
        """Substitute q -> q^m."""
        return FractionalQSeries(self.body.rescale(m), self.c)

    def truncate(self, order):
        return FractionalQSeries(self.body.truncate(int(Fraction(order) * self.c)), self.c)

    def to_qseries(self) -> TruncatedSeries:
        if self.c != 1:
            raise ValueError("series has fractional exponents")
        return TruncatedSeries(self.body.coeffs, self.body.valuation, self.body.order, "q")

    def __eq__(self, other):
        if isinstance(other, (FractionalQSeries, TruncatedSeries)) or isinstance(other, (int, Fraction)):
            return (self - other).is_zero()
        return NotImplemented

    __hash__ = None

    def __repr__(self):
        return f"FractionalQSeries(c={self.c}, {self.body!r})"


@lru_cache(maxsize=64)
def euler_product(order: int) -> TruncatedSeries:
    """prod_{n>=1} (1 - q^n) modulo q^order, by the pentagonal number theorem."""
    coeffs = [0] * max(order, 1)
    k = 0
    while True:
        hit = False
        for kk in ((k,) if k == 0 else (k, -k)):
            e = kk * (3 * kk - 1) // 2
            if e < order:
                coeffs[e] += -1 if kk % 2 else 1
                hit = True
        if not hit and k > 0:
            break
        k += 1
    return TruncatedSeries(coeffs, 0, order, "q")


def eta(order: int) -> FractionalQSeries:
    """eta = q^(1/24) prod (1 - q^n), with the product known modulo q^order."""
    if order < 1:
        raise ValueError("order must be >= 1")
    body = euler_product(order).rescale(24).shift(1)
    return FractionalQSeries(body, 24)


@lru_cache(maxsize=64)
def delta(order: int) -> TruncatedSeries:
    """Delta = q prod (1 - q^n)^24 modulo q^order."""
    if order < 1:
        raise ValueError("order must be >= 1")
    return (euler_product(order - 1 if order > 1 else 1) ** 24).shift(1).truncate(order)


# -- quasi-modular polynomials -------------------------------------------

def _mono_weight(e):
    return 2 * e[0] + 4 * e[1] + 6 * e[2]


@lru_cache(maxsize=None)
def monomials(weight: int, quasi: bool = True):
    """Exponent triples (a, b, c) with 2a + 4b + 6c = weight (a = 0 unless quasi)."""
    if weight < 0 or weight % 2:
        return ()
    out = []
    for a in range(weight // 2 + 1 if quasi else 1):
        for b in range((weight - 2 * a) // 4 + 1):
            rest = weight - 2 * a - 4 * b
            if rest % 6 == 0:
                out.append((a, b, rest // 6))
    return tuple(out)


class QuasiModularPoly:
    """Polynomial in G2, G4, G6 with rational coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        for e, c in (terms or {}).items():
            c = Fraction(c)
            if c:
                clean[tuple(e)] = c
        self.terms = clean

    @classmethod
    def G2(cls):
        return cls({(1, 0, 0): 1})

    @classmethod
    def G4(cls):
        return cls({(0, 1, 0): 1})

    @classmethod
    def G6(cls):
        return cls({(0, 0, 1): 1})

    @classmethod
    def constant(cls, c):
        return cls({(0, 0, 0): c})

    def weights(self):
        return sorted({_mono_weight(e) for e in self.terms})

    @property
    def weight(self):
        ws = self.weights()
        if len(ws) > 1:
            raise ValueError("polynomial is not weight-homogeneous")
        return ws[0] if ws else None

    def is_homogeneous(self):
        return len(self.weights()) <= 1

    def is_zero(self):
        return not self.terms

    def coefficient(self, a, b, c):
        return self.terms.get((a, b, c), Fraction(0))

    def __add__(self, other):
        other = _as_qmp(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return QuasiModularPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return QuasiModularPoly({e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-_as_qmp(other))

    def __rsub__(self, other):
        return _as_qmp(other) - self

    def __mul__(self, other):
        other = _as_qmp(other)
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = (e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2])
                out[e] = out.get(e, 0) + c1 * c2
        return QuasiModularPoly(out)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return QuasiModularPoly({e: v / Fraction(c) for e, v in self.terms.items()})

    def __pow__(self, n):
        out = QuasiModularPoly.constant(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        try:
            return (self - _as_qmp(other)).is_zero()
        except TypeError:
            return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def d_dG2(self):
        """Formal partial derivative in G2."""
        return QuasiModularPoly({(a - 1, b, c): a * v for (a, b, c), v in self.terms.items() if a})

    def dtau(self):
        return ramanujan_dtau(self)

    def evaluate(self, order: int) -> TruncatedSeries:
        """q-expansion modulo q^order."""
        total = TruncatedSeries.zero(order)
        for (a, b, c), v in self.terms.items():
            total = total + _gpow(2, a, order) * _gpow(4, b, order) * _gpow(6, c, order) * v
        return total

    def __repr__(self):
        if not self.terms:
            return "0"
        names = ("G2", "G4", "G6")
        parts = []
        for e in sorted(self.terms, reverse=True):
            mono = "*".join(f"{n}^{k}" if k > 1 else n for n, k in zip(names, e) if k)
            parts.append(f"({self.terms[e]})" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)


def _as_qmp(x):
    if isinstance(x, QuasiModularPoly):
        return x
    if isinstance(x, (int, Fraction)):
        return QuasiModularPoly.constant(x)
    raise TypeError(f"cannot coerce {type(x).__name__} to QuasiModularPoly")


@lru_cache(maxsize=512)
def _gpow(k, n, order):
    if n == 0:
        return TruncatedSeries([1], 0, order)
    return _gpow(k, n - 1, order) * eisenstein(k, order)


# -- recognition ---------------------------------------------------------

def recognize_quasimodular(f: TruncatedSeries, weight: int, quasi: bool = True,
                           margin: int = RECOGNITION_MARGIN) -> QuasiModularPoly:
    """Write the q-series ``f`` as a weight-``weight`` polynomial in G2, G4, G6.

    With ``quasi=False`` only G4, G6 are used.  Raises InconsistentSystem when
    no combination matches all supplied coefficients.
    """
    basis = monomials(weight, quasi)
    if not basis:
        if f.is_zero():
            return QuasiModularPoly()
        raise InconsistentSystem(f"no quasi-modular forms of weight {weight}")
    if f.valuation < 0 and f.coeffs:
        raise InconsistentSystem("series has a pole at q = 0")
    need = len(basis) + margin
    if f.order < need:
        raise ValueError(f"need at least {need} q-coefficients, have {f.order}")
    order = f.order
    cols = [QuasiModularPoly({e: 1}).evaluate(order) for e in basis]
    eqs = (([col.coefficient(n) for col in cols], f.coefficient(n)) for n in range(order))
    res = solve_linear(eqs, len(basis))
    return QuasiModularPoly({e: c for e, c in zip(basis, res.solution)})


@lru_cache(maxsize=None)
def express_G_high(k: int) -> QuasiModularPoly:
    """G_k (k >= 8 even) as a polynomial in G4, G6."""
    if k < 8 or k % 2:
        raise ValueError("k must be even and >= 8")
    order = len(monomials(k, False)) + RECOGNITION_MARGIN + 5
    return recognize_quasimodular(eisenstein(k, order), k, quasi=False)


def G_poly(k: int) -> QuasiModularPoly:
    """G_k as an element of Q[G2, G4, G6]."""
    if k == 2:
        return QuasiModularPoly.G2()
    if k == 4:
        return QuasiModularPoly.G4()
    if k == 6:
        return QuasiModularPoly.G6()
    return express_G_high(k)


@lru_cache(maxsize=None)
def ramanujan_images():
    """D_tau of G2, G4, G6, each found by recognizing the q-expansion of the derivative."""
    out = []
    for k in (2, 4, 6):
        order = len(monomials(k + 2)) + RECOGNITION_MARGIN + 10
        out.append(recognize_quasimodular(eisenstein(k, order).euler_derive(), k + 2))
    return tuple(out)


def ramanujan_dtau(f: QuasiModularPoly) -> QuasiModularPoly:
    """Apply D_tau as a derivation of Q[G2, G4, G6]."""
    d2, d4, d6 = ramanujan_images()
    out = QuasiModularPoly()
    for (a, b, c), v in f.terms.items():
        for idx, (img, e) in enumerate(((d2, a), (d4, b), (d6, c))):
            if e:
                exps = [a, b, c]
                exps[idx] -= 1
                out = out + QuasiModularPoly({tuple(exps): v * e}) * img
    return out


def serre_derivative(f: TruncatedSeries, k: int) -> TruncatedSeries:
    """D_tau f - (k/12) E2 f."""
    if f.is_zero():
        return f.euler_derive()
    order = f.order
    return f.euler_derive() - eisenstein_E(2, max(order - f.valuation, 1)) * f * Fraction(k, 12)
