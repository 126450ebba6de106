"""Fourier and Taylor representations of Jacobi-type series.

Fourier: a q-series whose coefficients are Laurent polynomials in s = e^(z/2),
divided by a global power (1 - s^2)^pole.  The denominator makes the meromorphic
objects 1/Theta, A, wp exact.

Taylor: a series in z with q-series coefficients, both truncated.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import factorial, lcm

import numpy as np

from qkz.series.dense import DenseSeries
from qkz.series.laurent import LaurentPolynomial
from qkz.series.linalg import solve_many
from qkz.series.ring import NonUnitError, as_fraction, is_rational
from qkz.series.truncated import TruncatedSeries


class PoleError(ValueError):
    """A Fourier coefficient is a rational function, not a Laurent polynomial."""


def _meta_mul(a, b):
    return None if a is None or b is None else a + b


def _meta_same(a, b):
    return a if a == b else None


# -- helpers on (q, s) integer boxes --------------------------------------

def _times_one_minus_s2(body: DenseSeries, e: int = 1) -> DenseSeries:
    for _ in range(e):
        if body.is_zero():
            return body
        arr = body.arr
        rows, w = arr.shape
        out = np.zeros((rows, w + 2), dtype=object)
        out[:, :w] += arr
        out[:, 2:] -= arr
        body = DenseSeries(out, body.offsets, body.orders, body.den)
    return body


def _div_one_minus_s2(body: DenseSeries):
    """Exact quotient by (1 - s^2) on every row, or None if some row is not divisible."""
    if body.is_zero():
        return body
    arr = body.arr
    rows, w = arr.shape
    if w < 3:
        return None
    qarr = np.zeros((rows, w), dtype=object)
    # N_j = Q_j - Q_{j-2}
    for j in range(w):
        qarr[:, j] = arr[:, j] + (qarr[:, j - 2] if j >= 2 else 0)
    if (qarr[:, w - 2:] != 0).any():
        return None
    return DenseSeries(qarr[:, : w - 2], body.offsets, body.orders, body.den)


def _qs_body(f: TruncatedSeries) -> DenseSeries:
    """A q-series as a (q, s) box concentrated at s^0."""
    return DenseSeries.from_dict({(n, 0): c for n, c in f.to_dict().items()}, (f.order, None))


class JacobiFourierSeries:
    """sum_n q^n P_n(s) / (1 - s^2)^pole + O(q^order)."""

    __slots__ = ("body", "pole", "weight", "index")

    def __init__(self, body: DenseSeries, pole: int = 0, weight=None, index=None):
        if body.ndim != 2 or body.orders[0] is None or body.orders[1] is not None:
            raise ValueError("body must be a (q truncated, s exact) series")
        while pole > 0:
            red = _div_one_minus_s2(body)
            if red is None:
                break
            body, pole = red, pole - 1
        if body.is_zero():
            pole = 0
        self.body = body
        self.pole = pole
        self.weight = weight
        self.index = Fraction(index) if index is not None else None

    # -- constructors ---------------------------------------------------
    @classmethod
    def from_rows(cls, rows, q_order, pole=0, weight=None, index=None):
        """``rows`` maps q-exponent to {s-exponent: coefficient}."""
        terms = {}
        for n, row in rows.items():
            items = row.terms.items() if isinstance(row, LaurentPolynomial) else row.items()
            for j, c in items:
                terms[(n, j)] = c
        return cls(DenseSeries.from_dict(terms, (q_order, None)), pole, weight, index)

    @classmethod
    def from_qseries(cls, f: TruncatedSeries, weight=None):
        return cls(_qs_body(f), 0, weight, 0)

    @classmethod
    def constant(cls, c, q_order):
        return cls(DenseSeries.constant(c, (q_order, None)), 0, 0, 0)

    @classmethod
    def zero(cls, q_order):
        return cls(DenseSeries.zero((q_order, None)))

    def with_meta(self, weight=None, index=None):
        return JacobiFourierSeries(self.body, self.pole, weight, index)

    # -- queries --------------------------------------------------------
    @property
    def q_order(self):
        return self.body.orders[0]

    @property
    def valuation(self):
        return self.body.offsets[0] if not self.body.is_zero() else self.q_order

    def is_zero(self):
        return self.body.is_zero()

    def __bool__(self):
        return not self.body.is_zero()

    def one(self):
        return JacobiFourierSeries.constant(1, self.q_order - self.valuation)

    def numerator_row(self, n) -> LaurentPolynomial:
        row = self.body.slice_at(0, n)
        return LaurentPolynomial({e[0]: c for e, c in row.to_dict().items()}, "s")

    def coefficient(self, n) -> LaurentPolynomial:
        """The q^n coefficient as a Laurent polynomial in s (raises PoleError if it has a pole)."""
        row = self.body.slice_at(0, n)
        if self.pole:
            sub = DenseSeries(row.arr.reshape(1, -1), (0, row.offsets[0]), (1, None), row.den) \
                if not row.is_zero() else None
            for _ in range(self.pole):
                if sub is None:
                    break
                sub = _div_one_minus_s2(sub)
                if sub is None:
                    raise PoleError(f"q^{n} coefficient has a pole at s^2 = 1")
            if sub is None:
                return LaurentPolynomial({}, "s")
            return LaurentPolynomial({e[1]: c for e, c in sub.to_dict().items()}, "s")
        return LaurentPolynomial({e[0]: c for e, c in row.to_dict().items()}, "s")

    def __getitem__(self, n):
        return self.coefficient(n)

    def to_dict(self):
        """{(q exponent, s exponent): coefficient}; requires pole 0."""
        if self.pole:
            raise PoleError("series has a global pole at s^2 = 1")
        return self.body.to_dict()

    def s_range(self):
        return self.body.exponent_range(1)

    def truncate(self, q_order):
        return JacobiFourierSeries(self.body.truncate((q_order, None)), self.pole, self.weight, self.index)

    # -- arithmetic -----------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, JacobiFourierSeries):
            return other
        if isinstance(other, TruncatedSeries):
            return JacobiFourierSeries.from_qseries(other)
        if is_rational(other):
            return JacobiFourierSeries(DenseSeries.constant(other, (self.q_order, None)), 0, 0, 0)
        return NotImplemented

    def _bodies_at_common_pole(self, other):
        k = max(self.pole, other.pole)
        return _times_one_minus_s2(self.body, k - self.pole), _times_one_minus_s2(other.body, k - other.pole), k

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b, k = self._bodies_at_common_pole(other)
        w = self.weight if other.is_zero() else (other.weight if self.is_zero() else _meta_same(self.weight, other.weight))
        i = self.index if other.is_zero() else (other.index if self.is_zero() else _meta_same(self.index, other.index))
        return JacobiFourierSeries(a + b, k, w, i)

    __radd__ = __add__

    def __neg__(self):
        return JacobiFourierSeries(-self.body, self.pole, self.weight, self.index)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if is_rational(other):
            return JacobiFourierSeries(self.body.scalar_mul(other), self.pole, self.weight, self.index)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return JacobiFourierSeries(self.body * other.body, self.pole + other.pole,
                                   _meta_mul(self.weight, other.weight), _meta_mul(self.index, other.index))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if is_rational(other):
            return self * (1 / as_fraction(other))
        other = self._coerce(other)
        return self * other.invert()

    def __pow__(self, n):
        if n < 0:
            return self.invert() ** (-n)
        result = None
        base = self
        while n:
            if n & 1:
                result = base if result is None else result * base
            n >>= 1
            if n:
                base = base * base
        if result is None:
            return self.one()
        return result

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return (self - other).is_zero()

    __hash__ = None

    # -- derivations and transformations --------------------------------
    def dtau(self):
        """D_tau = q d/dq."""
        w = None if self.weight is None else self.weight + 2
        return JacobiFourierSeries(self.body.euler(0), self.pole, w, self.index)

    def dz(self):
        """D_z = d/dz = (s/2) d/ds, including the denominator."""
        w = None if self.weight is None else self.weight + 1
        half = self.body.euler(1, lambda j: Fraction(j, 2))
        if not self.pole:
            return JacobiFourierSeries(half, 0, w, self.index)
        k = self.pole
        part1 = _times_one_minus_s2(half, 1)
        part2 = self.body.shift((0, 2)).scalar_mul(k)
        return JacobiFourierSeries(part1 + part2, k + 1, w, self.index)

    def shift(self, q=0, s=0):
        """Multiply by q^q s^s."""
        return JacobiFourierSeries(self.body.shift((q, s)), self.pole, self.weight, self.index)

    def reflect(self):
        """Substitute s -> 1/s."""
        body = self.body.reflect(1)
        if self.pole:
            body = body.shift((0, 2 * self.pole))
            if self.pole % 2:
                body = -body
        return JacobiFourierSeries(body, self.pole, self.weight, self.index)

    def parity(self):
        """+1 if even under s -> 1/s, -1 if odd, 0 otherwise."""
        r = self.reflect()
        if r == self:
            return 1
        if r == -self:
            return -1
        return 0

    def map_q(self, fn):
        """Multiply the q^n row by the rational ``fn(n)``."""
        return JacobiFourierSeries(self.body.euler(0, fn), self.pole, self.weight, self.index)

    def times_qseries(self, f: TruncatedSeries):
        if not isinstance(f, TruncatedSeries):
            return self * f
        return self * JacobiFourierSeries.from_qseries(f)

    # -- inversion ------------------------------------------------------
    def _leading_unit(self):
        """Write the lowest row as c s^j (1 - s^2)^e."""
        v = self.valuation
        row = self.body.slice_at(0, v)
        sub = DenseSeries(row.arr.reshape(1, -1), (0, row.offsets[0]), (1, None), row.den)
        e = 0
        while True:
            red = _div_one_minus_s2(sub)
            if red is None:
                break
            sub, e = red, e + 1
        d = sub.to_dict()
        if len(d) != 1:
            raise NonUnitError("leading Fourier coefficient is not c*s^j*(1-s^2)^e")
        ((_, j), c), = d.items()
        return v, j, c, e

    def invert(self):
        if self.is_zero():
            raise NonUnitError("cannot invert a truncated zero")
        v, j, c, e = self._leading_unit()
        u = JacobiFourierSeries(self.body.shift((-v, -j)).scalar_mul(1 / c), e)
        rel = self.q_order - v
        u = u.truncate(rel)
        b = JacobiFourierSeries.constant(1, rel)
        prec = 1
        while prec < rel:
            b = b * (2 - u * b)
            prec *= 2
        # 1/self = q^-v s^-j c^-1 (1 - s^2)^(e - pole) / u
        body = b.body.shift((-v, -j)).scalar_mul(1 / c)
        pole = b.pole
        shift_pole = self.pole - e
        if shift_pole >= 0:
            body = _times_one_minus_s2(body, shift_pole)
        else:
            pole -= shift_pole
        w = None if self.weight is None else -self.weight
        i = None if self.index is None else -self.index
        return JacobiFourierSeries(body, pole, w, i)

    def unit_inverse(self):
        return self.invert()

    # -- windowed expansion ---------------------------------------------
    def expand_window(self, s_window: int):
        """Rows as Laurent polynomials, expanding 1/(1-s^2) geometrically (|s| < 1).

        Exponents above ``s_window`` are dropped; raises ValueError when a
        polynomial row would lose terms below ``-s_window``.
        """
        out = {}
        n0 = self.body.offsets[0]
        for n in range(n0, self.q_order):
            row = self.numerator_row(n)
            if not row:
                continue
            lo = row.min_exponent()
            if lo < -s_window:
                raise ValueError(f"s_window {s_window} too small for q^{n} (needs {-lo})")
            terms = dict(row.terms)
            for _ in range(self.pole):
                acc = {}
                run = dict(terms)
                for e in sorted(run):
                    k = e
                    while k <= s_window:
                        acc[k] = acc.get(k, 0) + run[e]
                        k += 2
                terms = acc
            out[n] = LaurentPolynomial({e: c for e, c in terms.items() if e <= s_window}, "s")
        return out

    def __repr__(self):
        return (f"JacobiFourierSeries(q_order={self.q_order}, pole={self.pole}, "
                f"s_range={self.s_range()}, weight={self.weight}, index={self.index})")


# -- Taylor representation -------------------------------------------------

class ZTaylorSeries:
    """sum_{k,n} c_{k,n} z^k q^n, truncated in both z and q."""

    __slots__ = ("body", "weight", "index")

    def __init__(self, body: DenseSeries, weight=None, index=None):
        if body.ndim != 2 or body.orders[0] is None or body.orders[1] is None:
            raise ValueError("body must be a (z truncated, q truncated) series")
        self.body = body
        self.weight = weight
        self.index = Fraction(index) if index is not None else None

    @classmethod
    def from_dict(cls, terms, z_order, q_order, weight=None, index=None):
        return cls(DenseSeries.from_dict(terms, (z_order, q_order)), weight, index)

    @classmethod
    def from_z_series(cls, f: TruncatedSeries, q_order):
        """From a TruncatedSeries in z with q-series (or rational) coefficients."""
        terms = {}
        for k, c in f.to_dict().items():
            if isinstance(c, TruncatedSeries):
                q_order = min(q_order, c.order)
                for n, v in c.to_dict().items():
                    terms[(k, n)] = v
            else:
                terms[(k, 0)] = c
        return cls.from_dict(terms, f.order, q_order)

    @classmethod
    def from_qseries(cls, f: TruncatedSeries, z_order):
        return cls.from_dict({(0, n): c for n, c in f.to_dict().items()}, z_order, f.order, None, 0)

    @classmethod
    def constant(cls, c, z_order, q_order):
        return cls.from_dict({(0, 0): c}, z_order, q_order, 0, 0)

    @property
    def z_order(self):
        return self.body.orders[0]

    @property
    def q_order(self):
        return self.body.orders[1]

    @property
    def z_valuation(self):
        return self.body.offsets[0] if not self.body.is_zero() else self.z_order

    def is_zero(self):
        return self.body.is_zero()

    def one(self):
        return ZTaylorSeries(self.body.one(), 0, 0)

    def coefficient(self, k, n=None):
        """z^k coefficient as a q-series, or the (z^k, q^n) rational if n is given."""
        if n is not None:
            return self.body.coefficient((k, n))
        row = self.body.slice_at(0, k)
        return TruncatedSeries.from_dict({e[0]: c for e, c in row.to_dict().items()}, self.q_order)

    def __getitem__(self, k):
        return self.coefficient(k)

    def to_dict(self):
        return self.body.to_dict()

    def to_z_series(self) -> TruncatedSeries:
        """As a TruncatedSeries in z whose coefficients are q-series."""
        if self.is_zero():
            return TruncatedSeries.zero(self.z_order, "z")
        v = self.z_valuation
        return TruncatedSeries([self.coefficient(k) for k in range(v, self.z_order)], v, self.z_order, "z")

    def truncate(self, z_order=None, q_order=None):
        return ZTaylorSeries(self.body.truncate((z_order, q_order)), self.weight, self.index)

    def _coerce(self, other):
        if isinstance(other, ZTaylorSeries):
            return other
        if is_rational(other):
            return ZTaylorSeries.constant(other, self.z_order, self.q_order)
        if isinstance(other, TruncatedSeries):
            return ZTaylorSeries.from_qseries(other, self.z_order)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return ZTaylorSeries(self.body + other.body, _meta_same(self.weight, other.weight),
                             _meta_same(self.index, other.index))

    __radd__ = __add__

    def __neg__(self):
        return ZTaylorSeries(-self.body, self.weight, self.index)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if is_rational(other):
            return ZTaylorSeries(self.body.scalar_mul(other), self.weight, self.index)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return ZTaylorSeries(self.body * other.body, _meta_mul(self.weight, other.weight),
                             _meta_mul(self.index, other.index))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if is_rational(other):
            return self * (1 / as_fraction(other))
        return self * self._coerce(other).invert()

    def invert(self):
        w = None if self.weight is None else -self.weight
        i = None if self.index is None else -self.index
        return ZTaylorSeries(self.body.invert(), w, i)

    def unit_inverse(self):
        return self.invert()

    def __pow__(self, n):
        if n < 0:
            return self.invert() ** (-n)
        result = None
        base = self
        while n:
            if n & 1:
                result = base if result is None else result * base
            n >>= 1
            if n:
                base = base * base
        return result if result is not None else self.one()

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return (self - other).is_zero()

    __hash__ = None

    def dz(self):
        """d/dz."""
        w = None if self.weight is None else self.weight + 1
        body = self.body.euler(0).shift((-1, 0))
        return ZTaylorSeries(body, w, self.index)

    def dtau(self):
        w = None if self.weight is None else self.weight + 2
        return ZTaylorSeries(self.body.euler(1), w, self.index)

    def times_z(self, k=1):
        return ZTaylorSeries(self.body.shift((k, 0)), None if self.weight is None else self.weight - k,
                             self.index)

    def shift_q(self, n):
        return ZTaylorSeries(self.body.shift((0, n)), self.weight, self.index)

    def __repr__(self):
        return (f"ZTaylorSeries(z_order={self.z_order}, q_order={self.q_order}, "
                f"z_valuation={self.z_valuation}, terms={len(self.to_dict())})")


# -- conversions ------------------------------------------------------------

@lru_cache(maxsize=64)
def _one_minus_exp_inverse_power(k, z_order):
    """(1 - e^z)^(-k) as a z-Laurent series with valuation -k, known below z^z_order."""
    width = z_order + k
    coeffs = [-Fraction(1, factorial(t + 1)) for t in range(width)]  # (1 - e^z)/z
    base = TruncatedSeries(coeffs, 0, width, "z")
    inv = base.invert() ** k
    return {t - k: c for t, c in inv.to_dict().items()}, z_order


def fourier_to_taylor(a: JacobiFourierSeries, z_order: int) -> ZTaylorSeries:
    """Substitute s^j -> exp(j z / 2) and expand in z modulo z^z_order."""
    k = a.pole
    work = z_order + k
    q_order = a.q_order
    if a.is_zero():
        return ZTaylorSeries(DenseSeries.zero((z_order, q_order)), a.weight, a.index)
    arr = a.body.arr
    s_lo = a.body.offsets[1]
    js = np.array([s_lo + i for i in range(arr.shape[1])], dtype=object)
    # powers[j, t] = j^t
    powers = np.empty((arr.shape[1], work), dtype=object)
    col = np.ones(arr.shape[1], dtype=object)
    for t in range(work):
        powers[:, t] = col
        col = col * js
    L = (2 ** (work - 1)) * factorial(work - 1) if work > 0 else 1
    scale = np.array([L // (2 ** t * factorial(t)) for t in range(work)], dtype=object)
    mat = arr.dot(powers) * scale  # rows q, cols t
    body = DenseSeries(mat.T, (0, a.body.offsets[0]), (work, q_order), a.body.den * L)
    out = ZTaylorSeries(body, a.weight, a.index)
    if k:
        terms, _ = _one_minus_exp_inverse_power(k, z_order)
        pole_series = ZTaylorSeries.from_dict({(t, 0): c for t, c in terms.items()}, z_order, q_order)
        out = ZTaylorSeries(out.body * pole_series.body, a.weight, a.index)
        out = out.truncate(z_order=z_order)
    return out


def taylor_to_fourier(t: ZTaylorSeries, s_exponents) -> JacobiFourierSeries:
    """Recover Fourier rows supported on ``s_exponents`` from Taylor data.

    Every available z-coefficient is used; the surplus equations must agree.
    """
    nodes = tuple(sorted(set(s_exponents)))
    n_eq = t.z_order
    if n_eq < len(nodes):
        raise ValueError(f"need z_order >= {len(nodes)} to recover {len(nodes)} exponents")
    if t.z_valuation < 0:
        raise ValueError("Taylor series has a pole at z = 0")
    mat = [[Fraction(j, 2) ** k / factorial(k) for j in nodes] for k in range(n_eq)]
    qs = list(range(t.body.offsets[1], t.q_order)) if not t.is_zero() else []
    rhs = [[t.body.coefficient((k, n)) for n in qs] for k in range(n_eq)]
    sols = solve_many(mat, rhs, len(nodes))
    rows = {}
    for ni, n in enumerate(qs):
        rows[n] = {j: sols[ji][ni] for ji, j in enumerate(nodes) if sols[ji][ni]}
    return JacobiFourierSeries.from_rows(rows, t.q_order, 0, t.weight, t.index)
