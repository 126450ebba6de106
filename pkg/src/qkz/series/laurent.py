"""Sparse Laurent polynomials in one variable."""

from __future__ import annotations

from fractions import Fraction

from qkz.series.ring import NonUnitError, is_rational, is_zero, unit_inverse


class LaurentPolynomial:
    """Finite sum ``sum c_e * var**e`` with integer (possibly negative) exponents.

    Coefficients are rationals or elements of another ring from this package.
    Zero coefficients are never stored.
    """

    __slots__ = ("var", "terms")

    def __init__(self, terms=None, var="s"):
        self.var = var
        clean = {}
        if terms:
            for e, c in dict(terms).items():
                if is_rational(c):
                    c = Fraction(c)
                if not is_zero(c):
                    clean[int(e)] = c
        self.terms = clean

    @classmethod
    def monomial(cls, exponent, coeff=1, var="s"):
        return cls({exponent: coeff}, var)

    @classmethod
    def constant(cls, c, var="s"):
        return cls({0: c}, var)

    # -- queries --------------------------------------------------------
    def coefficient(self, e):
        return self.terms.get(e, Fraction(0))

    def __getitem__(self, e):
        return self.coefficient(e)

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def support(self):
        return sorted(self.terms)

    def min_exponent(self):
        return min(self.terms) if self.terms else None

    def max_exponent(self):
        return max(self.terms) if self.terms else None

    def one(self):
        return LaurentPolynomial({0: 1}, self.var)

    # -- arithmetic -----------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, LaurentPolynomial):
            if other.var != self.var:
                raise ValueError(f"variable mismatch: {self.var} vs {other.var}")
            return other
        return LaurentPolynomial({0: other}, self.var)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out[e] + c if e in out else c
        return LaurentPolynomial(out, self.var)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPolynomial({e: -c for e, c in self.terms.items()}, self.var)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, LaurentPolynomial):
            return LaurentPolynomial({e: c * other for e, c in self.terms.items()}, self.var)
        other = self._coerce(other)
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = e1 + e2
                out[e] = out[e] + c1 * c2 if e in out else c1 * c2
        return LaurentPolynomial(out, self.var)

    def __rmul__(self, other):
        return LaurentPolynomial({e: other * c for e, c in self.terms.items()}, self.var)

    def __truediv__(self, other):
        if isinstance(other, LaurentPolynomial):
            return self * other.unit_inverse()
        inv = unit_inverse(other)
        return self * inv

    def __pow__(self, n):
        if n < 0:
            return self.unit_inverse() ** (-n)
        result = self.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def unit_inverse(self):
        """Inverse of a unit, i.e. a single monomial with invertible coefficient."""
        if len(self.terms) != 1:
            raise NonUnitError(f"{self!r} is not a unit in the Laurent ring")
        (e, c), = self.terms.items()
        return LaurentPolynomial({-e: unit_inverse(c)}, self.var)

    def __eq__(self, other):
        if isinstance(other, LaurentPolynomial):
            return self.var == other.var and self.terms == other.terms
        if is_rational(other):
            return self.terms == ({0: Fraction(other)} if other != 0 else {})
        return NotImplemented

    def __hash__(self):
        return hash((self.var, frozenset(self.terms.items())))

    # -- transformations ------------------------------------------------
    def shift(self, k):
        return LaurentPolynomial({e + k: c for e, c in self.terms.items()}, self.var)

    def reflect(self):
        """Substitute var -> 1/var."""
        return LaurentPolynomial({-e: c for e, c in self.terms.items()}, self.var)

    def euler_derive(self, weight_fn):
        return LaurentPolynomial({e: weight_fn(e) * c for e, c in self.terms.items()}, self.var)

    def map_coefficients(self, fn):
        return LaurentPolynomial({e: fn(c) for e, c in self.terms.items()}, self.var)

    def evaluate(self, value):
        total = 0
        for e, c in self.terms.items():
            total = total + c * value ** e
        return total

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms):
            c = self.terms[e]
            if e == 0:
                parts.append(f"{c}")
            else:
                parts.append(f"({c})*{self.var}^{e}")
        return " + ".join(parts)
