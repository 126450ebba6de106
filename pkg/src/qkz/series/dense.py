"""Dense exact multivariate series with integer numerators.

A :class:`DenseSeries` stores coefficients on an axis-aligned box as Python
integers over a single positive common denominator.  Each axis is either
*truncated* (coefficients known for exponents below ``orders[k]``) or *exact*
(``orders[k] is None``, a Laurent-polynomial direction).  Multiplication packs
the box into one dimension and calls the integer convolution kernel.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd, lcm

import numpy as np

from qkz.kernels import int_convolve
from qkz.series.ring import NonUnitError, as_fraction, is_rational


def _empty(ndim):
    return np.zeros((0,) * ndim, dtype=object)


def _nonzero_extent(mask, axis):
    other = tuple(i for i in range(mask.ndim) if i != axis)
    hit = mask.any(axis=other) if other else mask
    idx = np.flatnonzero(hit)
    return int(idx[0]), int(idx[-1])


class DenseSeries:
    """Exact series on a dense box; see module docstring."""

    __slots__ = ("arr", "offsets", "orders", "den")

    def __init__(self, arr, offsets, orders, den=1, _normalized=False):
        arr = np.asarray(arr, dtype=object)
        if arr.ndim != len(offsets) or arr.ndim != len(orders):
            raise ValueError("dimension mismatch between array, offsets and orders")
        self.orders = tuple(orders)
        if _normalized:
            self.arr, self.offsets, self.den = arr, tuple(offsets), den
        else:
            self.arr, self.offsets, self.den = self._normalize(arr, list(offsets), den)

    # -- normalization --------------------------------------------------
    def _normalize(self, arr, offsets, den):
        if den < 0:
            arr, den = -arr, -den
        ndim = arr.ndim
        sl = []
        for k, order in enumerate(self.orders):
            if order is not None:
                sl.append(slice(0, max(order - offsets[k], 0)))
            else:
                sl.append(slice(None))
        arr = arr[tuple(sl)]
        mask = arr != 0 if arr.size else np.zeros(arr.shape, dtype=bool)
        if not mask.any():
            offs = tuple(o if o is not None else 0 for o in self.orders)
            return _empty(ndim), offs, 1
        sl = []
        pads = []
        new_off = []
        for k, order in enumerate(self.orders):
            lo, hi = _nonzero_extent(mask, k)
            new_off.append(offsets[k] + lo)
            if order is None:
                sl.append(slice(lo, hi + 1))
                pads.append((0, 0))
            else:
                sl.append(slice(lo, None))
                need = order - offsets[k] - arr.shape[k]
                pads.append((0, max(need, 0)))
        arr = arr[tuple(sl)]
        if any(p[1] for p in pads):
            full = np.zeros(tuple(arr.shape[k] + pads[k][1] for k in range(ndim)), dtype=object)
            full[tuple(slice(0, s) for s in arr.shape)] = arr
            arr = full
        g = reduce(gcd, arr.ravel().tolist(), den)
        if g > 1:
            arr = arr // g
            den //= g
        return arr, tuple(new_off), den

    # -- constructors ---------------------------------------------------
    @classmethod
    def from_dict(cls, terms, orders):
        """Build from ``{exponent tuple: rational}``."""
        ndim = len(orders)
        terms = {tuple(e): as_fraction(c) for e, c in terms.items() if c != 0}
        terms = {e: c for e, c in terms.items()
                 if all(o is None or e[k] < o for k, o in enumerate(orders))}
        if not terms:
            return cls.zero(orders)
        lo = [min(e[k] for e in terms) for k in range(ndim)]
        hi = [max(e[k] for e in terms) for k in range(ndim)]
        den = lcm(*(c.denominator for c in terms.values()))
        arr = np.zeros(tuple(h - l + 1 for l, h in zip(lo, hi)), dtype=object)
        for e, c in terms.items():
            arr[tuple(e[k] - lo[k] for k in range(ndim))] = c.numerator * (den // c.denominator)
        return cls(arr, lo, orders, den)

    @classmethod
    def zero(cls, orders):
        orders = tuple(orders)
        return cls(_empty(len(orders)), tuple(o if o is not None else 0 for o in orders), orders, 1,
                   _normalized=True)

    @classmethod
    def monomial(cls, exps, orders, coeff=1):
        return cls.from_dict({tuple(exps): coeff}, orders)

    @classmethod
    def constant(cls, c, orders):
        return cls.monomial((0,) * len(orders), orders, c)

    def _like(self, arr, offsets, den, orders=None):
        return DenseSeries(arr, offsets, self.orders if orders is None else orders, den)

    # -- queries --------------------------------------------------------
    @property
    def ndim(self):
        return self.arr.ndim

    def is_zero(self):
        return self.arr.size == 0

    def __bool__(self):
        return self.arr.size != 0

    def one(self):
        return DenseSeries.constant(1, self.orders)

    def coefficient(self, exps):
        exps = tuple(exps)
        for k, o in enumerate(self.orders):
            if o is not None and exps[k] >= o:
                raise ValueError(f"coefficient {exps} outside known window {self.orders}")
        idx = tuple(e - o for e, o in zip(exps, self.offsets))
        if any(i < 0 or i >= s for i, s in zip(idx, self.arr.shape)):
            return Fraction(0)
        return Fraction(self.arr[idx], self.den)

    def __getitem__(self, exps):
        return self.coefficient(exps if isinstance(exps, tuple) else (exps,))

    def to_dict(self):
        out = {}
        for idx in zip(*np.nonzero(self.arr != 0)):
            e = tuple(int(i) + o for i, o in zip(idx, self.offsets))
            out[e] = Fraction(self.arr[idx], self.den)
        return out

    def exponent_range(self, axis):
        """(lowest, highest) exponent with a nonzero coefficient along ``axis``."""
        if self.is_zero():
            return None
        lo, hi = _nonzero_extent(self.arr != 0, axis)
        return self.offsets[axis] + lo, self.offsets[axis] + hi

    def slice_at(self, axis, exponent):
        """Coefficient of ``var_axis**exponent`` as a series in the remaining axes."""
        orders = self.orders[:axis] + self.orders[axis + 1:]
        o = self.orders[axis]
        if o is not None and exponent >= o:
            raise ValueError("slice outside known window")
        i = exponent - self.offsets[axis]
        if self.is_zero() or i < 0 or i >= self.arr.shape[axis]:
            return DenseSeries.zero(orders)
        sub = np.take(self.arr, i, axis=axis)
        offs = self.offsets[:axis] + self.offsets[axis + 1:]
        return DenseSeries(sub, offs, orders, self.den)

    def truncate(self, orders):
        new = tuple(min(o, n) if (o is not None and n is not None) else (o if n is None else n)
                    for o, n in zip(self.orders, orders))
        return DenseSeries(self.arr, self.offsets, new, self.den)

    # -- arithmetic -----------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, DenseSeries):
            if tuple(o is None for o in other.orders) != tuple(o is None for o in self.orders):
                raise ValueError("axis kinds differ")
            return other
        if is_rational(other):
            return DenseSeries.constant(other, self.orders)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        orders = tuple(None if a is None else min(a, b) for a, b in zip(self.orders, other.orders))
        if other.is_zero():
            return DenseSeries(self.arr, self.offsets, orders, self.den)
        if self.is_zero():
            return DenseSeries(other.arr, other.offsets, orders, other.den)
        lo = []
        shape = []
        for k, o in enumerate(orders):
            l = min(self.offsets[k], other.offsets[k])
            if o is None:
                h = max(self.offsets[k] + self.arr.shape[k], other.offsets[k] + other.arr.shape[k])
            else:
                h = o
            lo.append(l)
            shape.append(max(h - l, 0))
        if any(s == 0 for s in shape):
            return DenseSeries.zero(orders)
        den = lcm(self.den, other.den)
        out = np.zeros(tuple(shape), dtype=object)
        for src in (self, other):
            scale = den // src.den
            sl_dst, sl_src = [], []
            for k in range(len(shape)):
                start = src.offsets[k] - lo[k]
                n = min(src.arr.shape[k], shape[k] - start)
                if n <= 0:
                    break
                sl_dst.append(slice(start, start + n))
                sl_src.append(slice(0, n))
            else:
                out[tuple(sl_dst)] += src.arr[tuple(sl_src)] * scale
        return DenseSeries(out, lo, orders, den)

    __radd__ = __add__

    def __neg__(self):
        return DenseSeries(-self.arr, self.offsets, self.orders, self.den, _normalized=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scalar_mul(self, c):
        c = as_fraction(c)
        if c == 0 or self.is_zero():
            return DenseSeries.zero(self.orders)
        return DenseSeries(self.arr * c.numerator, self.offsets, self.orders, self.den * c.denominator)

    def __mul__(self, other):
        if is_rational(other):
            return self.scalar_mul(other)
        if not isinstance(other, DenseSeries):
            return NotImplemented
        self._coerce(other)
        ndim = self.ndim
        offs = [a + b for a, b in zip(self.offsets, other.offsets)]
        orders = []
        for k in range(ndim):
            oa, ob = self.orders[k], other.orders[k]
            orders.append(None if oa is None else min(oa + other.offsets[k], ob + self.offsets[k]))
        orders = tuple(orders)
        if self.is_zero() or other.is_zero():
            return DenseSeries.zero(orders)
        a, b = self.arr, other.arr
        lengths = []
        for k in range(ndim):
            if orders[k] is not None:
                width = orders[k] - offs[k]
                if width <= 0:
                    return DenseSeries.zero(orders)
                a = a[(slice(None),) * k + (slice(0, width),)]
                b = b[(slice(None),) * k + (slice(0, width),)]
                lengths.append(width)
            else:
                lengths.append(None)
        ext = [a.shape[k] + b.shape[k] - 1 for k in range(ndim)]
        prod = _box_convolve(a, b, ext)
        sl = tuple(slice(0, lengths[k]) if lengths[k] is not None else slice(None) for k in range(ndim))
        return DenseSeries(prod[sl], offs, orders, self.den * other.den)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        if is_rational(other):
            return self.scalar_mul(1 / as_fraction(other))
        return self * other.invert()

    def __pow__(self, n):
        if n < 0:
            return self.invert() ** (-n)
        result = self.one()
        base = self
        first = True
        while n:
            if n & 1:
                result = base if first else result * base
                first = False
            n >>= 1
            if n:
                base = base * base
        if first:
            return self.one().truncate(tuple(None if o is None else o - off
                                             for o, off in zip(self.orders, self.offsets)))
        return result

    def __eq__(self, other):
        if isinstance(other, DenseSeries) or is_rational(other):
            return (self - other).is_zero()
        return NotImplemented

    __hash__ = None

    # -- unary operations -----------------------------------------------
    def shift(self, exps):
        """Multiply by the monomial with exponent tuple ``exps``."""
        offs = tuple(o + e for o, e in zip(self.offsets, exps))
        orders = tuple(None if o is None else o + e for o, e in zip(self.orders, exps))
        if self.is_zero():
            return DenseSeries.zero(orders)
        return DenseSeries(self.arr, offs, orders, self.den, _normalized=True)

    def euler(self, axis, weight_fn=None):
        """Multiply each coefficient by ``weight_fn(exponent along axis)`` (default: exponent)."""
        if self.is_zero():
            return self
        base = self.offsets[axis]
        n = self.arr.shape[axis]
        ws = [as_fraction(weight_fn(base + i) if weight_fn else base + i) for i in range(n)]
        L = lcm(*(w.denominator for w in ws))
        vec = np.array([w.numerator * (L // w.denominator) for w in ws], dtype=object)
        shape = [1] * self.ndim
        shape[axis] = n
        return self._like(self.arr * vec.reshape(shape), self.offsets, self.den * L)

    def map_axis(self, axis, fn_index):
        """Multiply entries along ``axis`` by arbitrary integer weights ``fn_index(exponent)``."""
        return self.euler(axis, fn_index)

    def rescale(self, axis, m):
        """Substitute ``var_axis -> var_axis**m``."""
        if m < 1:
            raise ValueError("rescale factor must be positive")
        orders = list(self.orders)
        if orders[axis] is not None:
            orders[axis] *= m
        offs = list(self.offsets)
        offs[axis] *= m
        if self.is_zero():
            return DenseSeries.zero(orders)
        shape = list(self.arr.shape)
        shape[axis] = (shape[axis] - 1) * m + 1
        out = np.zeros(tuple(shape), dtype=object)
        sl = [slice(None)] * self.ndim
        sl[axis] = slice(0, None, m)
        out[tuple(sl)] = self.arr
        return DenseSeries(out, offs, orders, self.den)

    def reflect(self, axis):
        """Substitute ``var_axis -> 1/var_axis`` (exact axes only)."""
        if self.orders[axis] is not None:
            raise ValueError("cannot reflect a truncated axis")
        if self.is_zero():
            return self
        offs = list(self.offsets)
        offs[axis] = -(self.offsets[axis] + self.arr.shape[axis] - 1)
        return DenseSeries(np.flip(self.arr, axis=axis), offs, self.orders, self.den, _normalized=True)

    def corner(self):
        """Leading monomial: exponents and coefficient, requires a single term on the lowest truncated face."""
        trunc = [k for k, o in enumerate(self.orders) if o is not None]
        if self.is_zero():
            raise NonUnitError("cannot invert a truncated zero")
        sl = tuple(0 if k in trunc else slice(None) for k in range(self.ndim))
        face = self.arr[sl]
        face = np.asarray(face, dtype=object)
        nz = list(zip(*np.nonzero(face != 0))) if face.ndim else ([()] if face != 0 else [])
        if len(nz) != 1:
            raise NonUnitError("leading coefficient is not a unit")
        idx = nz[0]
        exact = [k for k in range(self.ndim) if k not in trunc]
        exps = list(self.offsets)
        for pos, k in enumerate(exact):
            exps[k] += int(idx[pos])
        value = face[idx] if face.ndim else face.item()
        return tuple(exps), Fraction(value, self.den)

    def invert(self):
        """Multiplicative inverse by Newton iteration."""
        exps, c = self.corner()
        u = self.shift(tuple(-e for e in exps)).scalar_mul(1 / c)
        depth = sum(o - off - 1 for o, off in zip(u.orders, u.offsets) if o is not None)
        rel = tuple(None if o is None else o for o in u.orders)
        b = DenseSeries.constant(1, rel)
        prec = 1
        while prec <= depth:
            b = b * (2 - u * b)
            prec *= 2
        b = b.truncate(rel)
        return b.scalar_mul(1 / c).shift(tuple(-e for e in exps))

    def unit_inverse(self):
        return self.invert()

    def __repr__(self):
        return f"DenseSeries(terms={len(self.to_dict())}, offsets={self.offsets}, orders={self.orders})"


def _box_convolve(a, b, ext):
    """Full N-D convolution of integer boxes via packing along row-major strides."""
    ndim = a.ndim
    if ndim == 1:
        return np.array(int_convolve(a.tolist(), b.tolist()), dtype=object)
    inner = tuple(ext[1:])
    pa = np.zeros((a.shape[0],) + inner, dtype=object)
    pa[tuple(slice(0, s) for s in a.shape)] = a
    pb = np.zeros((b.shape[0],) + inner, dtype=object)
    pb[tuple(slice(0, s) for s in b.shape)] = b
    flat_a = pa.ravel().tolist()
    flat_b = pb.ravel().tolist()
    out = int_convolve(flat_a, flat_b)
    total = int(np.prod(ext))
    if len(out) < total:
        out.extend([0] * (total - len(out)))
    return np.array(out[:total], dtype=object).reshape(tuple(ext))
