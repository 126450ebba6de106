"""Truncated Laurent series in one variable over a generic coefficient ring.

A series is known modulo ``var**order``.  Binary operations keep the smallest
window that is still exact, so precision is never silently inflated.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm

from qkz.kernels import int_convolve
from qkz.series.laurent import LaurentPolynomial
from qkz.series.ring import NonUnitError, is_rational, is_zero, one_like, unit_inverse


class TruncationError(ValueError):
    """Requested coefficient lies outside the known window."""


def _all_rational(seq):
    return all(isinstance(c, (int, Fraction)) for c in seq)


def rational_convolve(a, b):
    """Exact convolution of two lists of ints/Fractions."""
    da = lcm(*(c.denominator for c in a)) if a else 1
    db = lcm(*(c.denominator for c in b)) if b else 1
    na = [c.numerator * (da // c.denominator) for c in a]
    nb = [c.numerator * (db // c.denominator) for c in b]
    d = da * db
    out = int_convolve(na, nb)
    if d == 1:
        return [Fraction(v) for v in out]
    return [Fraction(v, d) for v in out]


def _convolve(a, b):
    if _all_rational(a) and _all_rational(b):
        return rational_convolve(a, b)
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if is_zero(x):
            continue
        for j, y in enumerate(b):
            out[i + j] = out[i + j] + x * y
    return out


class TruncatedSeries:
    """``sum_{n >= valuation} c_n var**n + O(var**order)``.

    ``coeffs[i]`` is the coefficient of ``var**(valuation + i)``; the list
    always fills the window up to ``order``.
    """

    __slots__ = ("var", "valuation", "coeffs", "order")

    def __init__(self, coeffs, valuation=0, order=None, var="q"):
        coeffs = [Fraction(c) if is_rational(c) else c for c in coeffs]
        if order is None:
            order = valuation + len(coeffs)
        width = order - valuation
        if width <= 0:
            coeffs = []
        elif len(coeffs) > width:
            coeffs = coeffs[:width]
        start = 0
        while start < len(coeffs) and is_zero(coeffs[start]):
            start += 1
        coeffs = coeffs[start:]
        valuation += start
        if not coeffs:
            valuation = order
        else:
            coeffs.extend([Fraction(0)] * (order - valuation - len(coeffs)))
        self.var = var
        self.valuation = valuation
        self.coeffs = coeffs
        self.order = order

    # -- constructors ---------------------------------------------------
    @classmethod
    def from_dict(cls, terms, order, var="q"):
        terms = {e: c for e, c in terms.items() if e < order}
        if not terms:
            return cls([], order, order, var)
        v = min(terms)
        coeffs = [terms.get(v + i, 0) for i in range(order - v)]
        return cls(coeffs, v, order, var)

    @classmethod
    def zero(cls, order, var="q"):
        return cls([], order, order, var)

    @classmethod
    def one_series(cls, order, var="q", one=Fraction(1)):
        return cls([one], 0, order, var)

    @classmethod
    def variable(cls, order, var="q"):
        return cls([1], 1, order, var)

    # -- queries --------------------------------------------------------
    def coefficient(self, n):
        if n >= self.order:
            raise TruncationError(f"coefficient of {self.var}^{n} unknown (order {self.order})")
        i = n - self.valuation
        if i < 0:
            return Fraction(0)
        return self.coeffs[i]

    def __getitem__(self, n):
        return self.coefficient(n)

    def is_zero(self):
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def leading_coefficient(self):
        if not self.coeffs:
            raise ValueError("truncated zero has no leading coefficient")
        return self.coeffs[0]

    def to_dict(self):
        return {self.valuation + i: c for i, c in enumerate(self.coeffs) if not is_zero(c)}

    def truncate(self, order):
        if order >= self.order:
            return self
        return TruncatedSeries(self.coeffs, self.valuation, order, self.var)

    def one(self):
        return TruncatedSeries([self._one()], 0, self.order - self.valuation, self.var)

    def _one(self):
        return one_like(self.coeffs[0]) if self.coeffs else Fraction(1)

    # -- arithmetic -----------------------------------------------------
    def _check(self, other):
        if other.var != self.var:
            raise ValueError(f"variable mismatch: {self.var} vs {other.var}")

    def _as_series(self, c):
        return TruncatedSeries([c], 0, max(self.order, 1), self.var)

    def __add__(self, other):
        if not isinstance(other, TruncatedSeries):
            if self.order <= 0:
                return self
            other = self._as_series(other)
        self._check(other)
        order = min(self.order, other.order)
        v = min(self.valuation, other.valuation)
        out = [0] * max(order - v, 0)
        for i, c in enumerate(self.coeffs):
            k = self.valuation - v + i
            if k >= len(out):
                break
            out[k] = c
        for i, c in enumerate(other.coeffs):
            k = other.valuation - v + i
            if k >= len(out):
                break
            out[k] = out[k] + c
        return TruncatedSeries(out, v, order, self.var)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries([-c for c in self.coeffs], self.valuation, self.order, self.var)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scalar_mul(self, c):
        return TruncatedSeries([x * c for x in self.coeffs], self.valuation, self.order, self.var)

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            return self.scalar_mul(other)
        self._check(other)
        v = self.valuation + other.valuation
        order = min(self.order + other.valuation, other.order + self.valuation)
        if not self.coeffs or not other.coeffs:
            return TruncatedSeries.zero(order, self.var)
        width = order - v
        a = self.coeffs[:width]
        b = other.coeffs[:width]
        out = _convolve(a, b)[:width]
        return TruncatedSeries(out, v, order, self.var)

    def __rmul__(self, other):
        return TruncatedSeries([other * x for x in self.coeffs], self.valuation, self.order, self.var)

    def __truediv__(self, other):
        if isinstance(other, TruncatedSeries):
            return self * other.invert()
        if is_rational(other):
            return self.scalar_mul(1 / Fraction(other))
        return TruncatedSeries([x / other for x in self.coeffs], self.valuation, self.order, self.var)

    def __pow__(self, n):
        if n < 0:
            return self.invert() ** (-n)
        result = self.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, TruncatedSeries):
            return self.var == other.var and (self - other).is_zero()
        if is_rational(other):
            return (self - other).is_zero()
        return NotImplemented

    __hash__ = None

    # -- structural operations ------------------------------------------
    def shift(self, k):
        """Multiply by ``var**k``."""
        return TruncatedSeries(self.coeffs, self.valuation + k, self.order + k, self.var)

    def rescale(self, m):
        """Substitute ``var -> var**m`` for a positive integer ``m``."""
        if m < 1:
            raise ValueError("rescale factor must be positive")
        if not self.coeffs:
            return TruncatedSeries.zero(self.order * m, self.var)
        zero = 0 * self.coeffs[0]
        out = []
        for c in self.coeffs:
            out.append(c)
            out.extend([zero] * (m - 1))
        return TruncatedSeries(out, self.valuation * m, self.order * m, self.var)

    def map_coefficients(self, fn):
        return TruncatedSeries([fn(c) for c in self.coeffs], self.valuation, self.order, self.var)

    def euler_derive(self, weight_fn=None):
        """Multiply the coefficient at exponent ``n`` by ``weight_fn(n)`` (default ``n``)."""
        if weight_fn is None:
            weight_fn = int
        v = self.valuation
        return TruncatedSeries([weight_fn(v + i) * c for i, c in enumerate(self.coeffs)], v, self.order, self.var)

    def derivative(self):
        """Ordinary d/dvar."""
        return self.euler_derive().shift(-1)

    def unit_inverse(self):
        return self.invert()

    def invert(self):
        """Multiplicative inverse; the leading coefficient must be a unit."""
        if not self.coeffs:
            raise NonUnitError("cannot invert a truncated zero")
        a0inv = unit_inverse(self.coeffs[0])
        n = len(self.coeffs)
        a = self.coeffs
        if _all_rational(a):
            return TruncatedSeries(_rational_inverse(a, a0inv), -self.valuation, n - self.valuation, self.var)
        b = [a0inv]
        for k in range(1, n):
            acc = a[1] * b[k - 1]
            for j in range(2, k + 1):
                acc = acc + a[j] * b[k - j]
            b.append(-(a0inv * acc))
        return TruncatedSeries(b, -self.valuation, n - self.valuation, self.var)

    def __repr__(self):
        terms = [f"({c})*{self.var}^{self.valuation + i}" for i, c in enumerate(self.coeffs) if not is_zero(c)]
        body = " + ".join(terms) if terms else "0"
        return f"{body} + O({self.var}^{self.order})"


def _rational_inverse(a, a0inv):
    """Inverse of a rational power series with unit constant term by Newton doubling."""
    n = len(a)
    b = [a0inv]
    prec = 1
    while prec < n:
        prec = min(2 * prec, n)
        ab = rational_convolve(a[:prec], b)[:prec]
        corr = [-x for x in ab]
        corr[0] += 2
        b = rational_convolve(b, corr)[:prec]
    return b


# -- free functions ----------------------------------------------------

def invert(a):
    return a.invert()


def exp_series(a):
    """exp of a series with zero constant term."""
    if a.coeffs and a.valuation < 1:
        raise ValueError("exp_series needs zero constant term")
    n = a.order
    if n <= 0:
        return TruncatedSeries.zero(n, a.var)
    one = a._one()
    # n f_n = sum_k k a_k f_{n-k}
    support = [(a.valuation + i, (a.valuation + i) * c) for i, c in enumerate(a.coeffs) if not is_zero(c)]
    zero = 0 * one
    f = [one]
    for k in range(1, n):
        acc = zero
        for j, jc in support:
            if j > k:
                break
            acc = acc + jc * f[k - j]
        f.append(Fraction(acc) / k if is_rational(acc) else acc / k)
    return TruncatedSeries(f, 0, n, a.var)


def log_series(a):
    """log of a series with constant term 1."""
    if a.valuation != 0 or a.coeffs[0] != a._one():
        raise ValueError("log_series needs constant term 1")
    n = a.order
    c = a.coeffs
    f = [0] * n
    for k in range(1, n):
        acc = k * c[k]
        for j in range(1, k):
            acc = acc - (j * f[j]) * c[k - j]
        f[k] = acc / k if not is_rational(acc) else Fraction(acc) / k
    f[0] = 0 * c[0]
    return TruncatedSeries(f, 0, n, a.var)


def compose(outer, inner):
    """Substitute ``inner`` for the variable of ``outer``.

    ``outer`` may be a TruncatedSeries (then ``inner`` needs positive
    valuation) or an exact LaurentPolynomial.  Negative powers use
    ``inner.invert()``.
    """
    if isinstance(outer, LaurentPolynomial):
        exps = outer.support()
        if not exps:
            return TruncatedSeries.zero(inner.order, inner.var)
        total = None
        inv = inner.invert() if exps[0] < 0 else None
        for e in exps:
            p = inner ** e if e >= 0 else inv ** (-e)
            term = p * outer.coefficient(e)
            total = term if total is None else total + term
        return total
    if inner.valuation < 1:
        raise ValueError("compose needs inner series of positive valuation")
    bound = outer.order * inner.valuation
    if not outer.coeffs:
        return TruncatedSeries.zero(bound, inner.var)
    v0 = outer.valuation
    if v0 == 0:
        power = TruncatedSeries([inner._one()], 0, bound, inner.var)
    else:
        power = inner ** v0 if v0 > 0 else inner.invert() ** (-v0)
    total = None
    for i, c in enumerate(outer.coeffs):
        if power.valuation >= bound:
            break
        term = power * c
        total = term if total is None else total + term
        power = power * inner
    if total is None:
        return TruncatedSeries.zero(bound, inner.var)
    return total.truncate(bound) if total.order > bound else total


def lagrange_invert(a):
    """Compositional inverse of a series ``a = a_1 t + a_2 t^2 + ...``.

    Uses ``[t^n] b = (1/n) [x^(n-1)] (x / a(x))^n``.
    """
    if a.valuation != 1:
        raise ValueError("lagrange_invert needs valuation exactly 1")
    n_max = a.order
    phi = a.shift(-1).invert()
    coeffs = [0]
    power = phi.one()
    for n in range(1, n_max):
        power = power * phi
        c = power.coefficient(n - 1)
        coeffs.append(c / n if not is_rational(c) else Fraction(c) / n)
    return TruncatedSeries(coeffs, 0, n_max, a.var)


def euler_derive(a, weight_fn=None):
    return a.euler_derive(weight_fn)


def coefficient_identity_check(f, k, m):
    """Check (1/m)[f^m]_{x^(m-k)} = (1/k) sum prod (1/n_i)[f^(n_i)]_{x^(n_i-1)}."""
    if m < 1 or k < 1:
        raise ValueError("need m >= 1 and k >= 1")
    if f.order < m:
        raise TruncationError("series too short for this instance")
    power = f.one()
    c = [Fraction(0)]
    lhs = None
    for n in range(1, m + 1):
        power = power * f
        c.append(power.coefficient(n - 1) / n)
        if n == m:
            lhs = power.coefficient(m - k) / m if m - k >= 0 else 0 * c[1]
    gen = TruncatedSeries(c, 0, m + 1, "y")
    rhs = (gen ** k).coefficient(m) / k
    return lhs == rhs
